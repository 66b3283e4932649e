"""Command-line front end: ``algequiv <verb> ...``.

Exit status is 0 on success or an "equivalent" verdict, 1 on a "not
equivalent" verdict and 2 on any error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import corpus
from .dsl import compile_source, emit_source
from .equiv import enumerate_shift_class, oracle_equivalent, shift_equivalent
from .errors import AlgequivError, FreeParameter
from .lft import embed_common, lft_equivalent, prox_family_transform, prox_table
from .realize import minreal
from .sim import OracleImpl, random_oracles, simulate
from .statespace import StateSpace, TransferMatrix, transfer_function

EXIT_OK, EXIT_DIFFERENT, EXIT_ERROR = 0, 1, 2


class UsageError(AlgequivError):
    pass


# -- inputs -----------------------------------------------------------------

def parse_param(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"--param expects name=value, got {text!r}")
    try:
        return name.strip(), Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--param {name.strip()}: {value!r} is not an exact rational") from None


def _bindings(args) -> dict[str, Fraction]:
    return dict(parse_param(p) for p in args.param or [])


def load(spec: str) -> StateSpace | TransferMatrix:
    """Read a ``.alg`` file, a ``.json`` file or a built-in corpus name."""
    path = Path(spec)
    if path.is_file():
        text = path.read_text()
        if path.suffix == ".json":
            data = json.loads(text)
            if "D" in data:
                return StateSpace.from_json(data)
            return TransferMatrix.from_json(data)
        return compile_source(text, path.stem)
    name = path.stem if path.suffix == ".alg" else spec
    return corpus.realization(name)


def load_tf(spec: str, values: dict) -> TransferMatrix:
    obj = load(spec)
    tf = obj if isinstance(obj, TransferMatrix) else transfer_function(obj)
    return tf.subs(_relevant(values, tf.matrix.params)) if values else tf


def load_ss(spec: str, values: dict) -> StateSpace:
    obj = load(spec)
    if isinstance(obj, TransferMatrix):
        raise UsageError(f"{spec} holds a transfer matrix; this verb needs a realization")
    return obj.subs(_relevant(values, obj.free_params())) if values else obj


def _relevant(values: dict, params) -> dict:
    return {k: v for k, v in values.items() if k in set(params)}


def _require_numeric(ss: StateSpace, verb: str) -> None:
    if ss.free_params():
        flags = " ".join(f"--param {p}=..." for p in ss.free_params())
        raise FreeParameter(f"{verb} needs numeric parameters; add {flags}")


# -- rendering ----------------------------------------------------------------

def _frac(v) -> str:
    return str(Fraction(v)) if isinstance(v, (int, Fraction)) else repr(v)


def _tf_text(tf: TransferMatrix) -> str:
    if tf.shape == (1, 1):
        return str(tf[0, 0])
    return str(tf)


def _emit(obj, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        out.write(str(obj).rstrip("\n") + "\n")


def _table_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_frac(v) for v in r])
    return buf.getvalue()


# -- verbs ----------------------------------------------------------------------

def cmd_tf(args, out) -> int:
    tf = load_tf(args.input, _bindings(args))
    _emit(tf.to_json() if args.format == "json" else _tf_text(tf), args.format, out)
    return EXIT_OK


def cmd_check_oracle(args, out) -> int:
    values = _bindings(args)
    h1, h2 = load_tf(args.first, values), load_tf(args.second, values)
    same = oracle_equivalent(h1, h2)
    if args.format == "json":
        _emit({"equivalent": same, "first": h1.to_json(), "second": h2.to_json()}, "json", out)
    elif same:
        _emit(f"equal: {_tf_text(h1)}", "text", out)
    else:
        diff = [(i, j) for (i, j, a), (_, _, b) in zip(h1.matrix.entries(), h2.matrix.entries()) if a != b]
        i, j = diff[0]
        _emit(f"not equal: entry ({i + 1},{j + 1}) is {h1[i, j]} vs {h2[i, j]}", "text", out)
    return EXIT_OK if same else EXIT_DIFFERENT


def cmd_check_shift(args, out) -> int:
    values = _bindings(args)
    h1, h2 = load_tf(args.first, values), load_tf(args.second, values)
    cert = shift_equivalent(h1, h2)
    if args.format == "json":
        _emit(cert.to_json() if cert else {"equivalent": False}, "json", out)
    elif cert:
        _emit(f"shift-equivalent: m = {cert.m}", "text", out)
    else:
        _emit("not shift-equivalent", "text", out)
    return EXIT_OK if cert else EXIT_DIFFERENT


def cmd_enumerate_shifts(args, out) -> int:
    tf = load_tf(args.input, _bindings(args))
    members = enumerate_shift_class(tf, args.cap)
    if args.format == "json":
        _emit([{"m": list(m.m), "tf": h.to_json()} for m, h in members], "json", out)
    else:
        blocks = [f"m = {m}\n{h.matrix}" for m, h in members]
        _emit("\n\n".join(blocks) if blocks else "(none)", "text", out)
    return EXIT_OK


def _relation(args, n: int) -> tuple[str, str | None, int]:
    if not args.relation:
        raise UsageError("--relation kind1:kind2 is required")
    first, _, second = args.relation.partition(":")
    if not 1 <= args.channel <= n:
        raise UsageError(f"--channel must be between 1 and {n}")
    return first, second or None, args.channel - 1


def cmd_check_lft(args, out) -> int:
    values = _bindings(args)
    h1, h2 = load_tf(args.first, values), load_tf(args.second, values)
    k1, k2, ch = _relation(args, h1.p)
    if k2 is None:
        raise UsageError("check-lft needs --relation kind_of_first:kind_of_second")
    M = embed_common(prox_table(k1, k2), ch, h1.p)
    if values:
        M = M.subs(_relevant(values, M.full().params))
    holds = lft_equivalent(h1, h2, M)
    if args.format == "json":
        _emit({"equivalent": holds, "channel": args.channel, "relation": args.relation,
               "M": M.to_json()}, "json", out)
    else:
        _emit(("LFT-equivalent" if holds else "not LFT-equivalent") + f" via {M.note}", "text", out)
    return EXIT_OK if holds else EXIT_DIFFERENT


def cmd_transform_lft(args, out) -> int:
    values = _bindings(args)
    tf = load_tf(args.input, values)
    first, second, ch = _relation(args, tf.p)
    source, target = (first, second) if second else (None, first)
    res = prox_family_transform(tf, ch, target, source)
    if values:
        res = res.subs(_relevant(values, res.matrix.params))
    _emit(res.to_json() if args.format == "json" else str(res), args.format, out)
    return EXIT_OK


def cmd_minreal(args, out) -> int:
    ss = load_ss(args.input, _bindings(args))
    _require_numeric(ss, "minreal")
    res = minreal(ss)
    _emit(res.to_json() if args.format == "json" else str(res), args.format, out)
    return EXIT_OK


def cmd_emit(args, out) -> int:
    ss = load_ss(args.input, _bindings(args))
    if args.minimal:
        _require_numeric(ss, "emit --minimal")
        ss = minreal(ss)
    out.write(emit_source(ss, args.name, header=not args.no_header))
    return EXIT_OK


def parse_oracle(text: str) -> OracleImpl:
    """``linear:L``, ``affine:L,c``, ``soft:lam`` or ``quad:Q,q``."""
    kind, _, rest = text.partition(":")
    vals = [v.strip() for v in rest.split(",") if v.strip()]
    try:
        if kind == "linear" and len(vals) == 1:
            return OracleImpl.linear(Fraction(vals[0]))
        if kind == "affine" and len(vals) == 2:
            return OracleImpl.affine(Fraction(vals[0]), Fraction(vals[1]))
        if kind == "soft" and len(vals) == 1:
            return OracleImpl("soft_threshold", lam=float(vals[0]))
        if kind == "quad" and len(vals) == 2:
            return OracleImpl("scaled_grad_quadratic", Q=float(vals[0]), q=float(vals[1]))
    except (ValueError, ZeroDivisionError):
        pass
    raise UsageError(f"bad --oracle {text!r}; use linear:L, affine:L,c, soft:lam or quad:Q,q")


def cmd_simulate(args, out) -> int:
    ss = load_ss(args.input, _bindings(args))
    _require_numeric(ss, "simulate")
    if args.oracle:
        oracles = [parse_oracle(o) for o in args.oracle]
    else:
        oracles = random_oracles(ss.p, args.seed)
    x0 = [Fraction(v) for v in args.x0.split(",")] if args.x0 else [Fraction(0)] * ss.n
    traj = simulate(ss, oracles, x0, args.steps)
    header = (["k"] + [f"y{i + 1}" for i in range(ss.p)] + [f"u{i + 1}" for i in range(ss.p)]
              + [f"x{i + 1}" for i in range(ss.n)])
    if args.format == "json":
        data = {"y": traj.y, "u": traj.u, "x": traj.x, "x_final": traj.x_final}
        data = {k: [[_frac(v) for v in r] for r in rows] if k != "x_final" else [_frac(v) for v in rows]
                for k, rows in data.items()}
        data["oracles"] = list(ss.oracles)
        _emit(data, "json", out)
    elif args.format == "csv":
        out.write(_table_csv(header, traj.rows()))
    else:
        lines = ["\t".join(header)] + ["\t".join(_frac(v) for v in r) for r in traj.rows()]
        _emit("\n".join(lines), "text", out)
    return EXIT_OK


def cmd_corpus(args, out) -> int:
    if args.verify:
        from .verify import run_all

        results = run_all()
        if args.format == "json":
            _emit([{"criterion": r.number, "title": r.title, "ok": r.ok, "checks": r.checked,
                    "failures": r.failures} for r in results], "json", out)
        else:
            _emit("\n".join(r.line() for r in results), "text", out)
        return EXIT_OK if all(r.ok for r in results) else EXIT_DIFFERENT
    infos = list(corpus.REGISTRY.values())
    if args.format == "json":
        _emit([{"name": i.name, "title": i.title, "number": i.number} for i in infos], "json", out)
    else:
        width = max(len(i.name) for i in infos)
        _emit("\n".join(f"{i.name:<{width}}  {i.title}" for i in infos), "text", out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--param", action="append", metavar="NAME=P/Q",
                        help="bind a parameter to an exact rational (repeatable)")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")

    parser = argparse.ArgumentParser(prog="algequiv",
                                     description="Decide equivalences between first-order optimization algorithms.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_, inputs=("input",)):
        p = sub.add_parser(name, parents=[common], help=help_)
        for arg in inputs:
            p.add_argument(arg, help=".alg file, .json file or built-in name")
        p.set_defaults(func=fn)
        return p

    verb("tf", cmd_tf, "print the transfer function")
    verb("check-oracle", cmd_check_oracle, "test oracle equivalence", ("first", "second"))
    verb("check-shift", cmd_check_shift, "test shift equivalence", ("first", "second"))
    verb("enumerate-shifts", cmd_enumerate_shifts, "list proper multi-shift conjugates").add_argument(
        "--cap", type=int, default=5, help="largest shift per channel")
    for p in (verb("check-lft", cmd_check_lft, "test LFT equivalence on one channel", ("first", "second")),
              verb("transform-lft", cmd_transform_lft, "swap the oracle kind on one channel")):
        p.add_argument("--relation", metavar="KIND1:KIND2",
                       help="e.g. prox:prox_conj or prox(t):subdiff")
        p.add_argument("--channel", type=int, default=1, help="1-based oracle channel")
    verb("minreal", cmd_minreal, "minimal realization (needs numeric parameters)")
    p = verb("emit", cmd_emit, "write algorithm source for a realization")
    p.add_argument("--name", help="algorithm name in the header")
    p.add_argument("--no-header", action="store_true", help="print only the update equations")
    p.add_argument("--minimal", action="store_true", help="emit a minimal realization")
    p = verb("simulate", cmd_simulate, "run the algorithm with concrete oracles")
    p.add_argument("--oracle", action="append", help="linear:L, affine:L,c, soft:lam or quad:Q,q; one per channel")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="seed for random oracles when --oracle is absent")
    p.add_argument("--x0", help="comma-separated initial state (default zero)")
    p = verb("corpus", cmd_corpus, "list the built-in algorithms", inputs=())
    p.add_argument("--verify", action="store_true", help="replay the published checks")
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args, out)
    except (AlgequivError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"algequiv {args.verb}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
