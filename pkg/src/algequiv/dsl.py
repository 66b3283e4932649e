"""A small language for linear first-order algorithms, and its lowering to state space.

Source looks like the update equations of an optimization method::

    algorithm heavy_ball(grad_f: subdiff(f); alpha, beta) {
        x[k+1] = x[k] - alpha*grad_f(x[k]) + beta*(x[k] - x[k-1]);
    }

Variables assigned at ``[k+1]`` are states.  Variables assigned at ``[k]`` are
intra-iteration temporaries and are substituted away.  A reference ``v[k-d]``
to an older value adds ``d`` memory states named ``v__1 .. v__d``.  A call
whose argument is a time-shifted copy of another call of the same oracle
(``F(x[k-1])`` next to ``F(x[k])``) reuses the remembered output instead of
querying the oracle twice.  The header is optional; without it the oracles are
the called names in order of first appearance and the parameters are the bare
names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .algebra import RatFunc, RatMatrix
from .errors import (
    CyclicDefinition,
    DslSyntaxError,
    NonlinearExpression,
    OracleUseError,
    UndeclaredSymbol,
)
from .kinds import OracleKind
from .statespace import StateSpace, is_explicit

__all__ = [
    "OracleDecl",
    "OracleCall",
    "Statement",
    "AlgorithmAST",
    "parse",
    "lower",
    "compile_source",
    "emit_source",
    "builtin",
]


# ---------------------------------------------------------------------------
# tokens

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\]{},;:=])
""", re.VERBOSE)

_KEYWORDS = {"algorithm", "implicit"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos, depth = 1, 0, 0, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1, src)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("newline", text, line, col))
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        else:
            if text in "([":
                depth += 1
            elif text in ")]":
                depth = max(depth - 1, 0)
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# syntax tree

@dataclass(frozen=True)
class Node:
    line: int
    col: int


@dataclass(frozen=True)
class Num(Node):
    value: Fraction


@dataclass(frozen=True)
class Name(Node):
    name: str


@dataclass(frozen=True)
class Ref(Node):
    name: str
    offset: int


@dataclass(frozen=True)
class Call(Node):
    oracle: str
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class OracleDecl:
    name: str
    kind: OracleKind | None = None


@dataclass(frozen=True)
class OracleCall:
    """One syntactic oracle call: ``oracle(arg)`` at a source position."""

    oracle: str
    arg: Node
    line: int
    col: int


@dataclass(frozen=True)
class Statement:
    target: str
    offset: int
    expr: Node
    line: int
    col: int
    implicit: bool = False


@dataclass(frozen=True)
class AlgorithmAST:
    """Parsed algorithm.

    Attributes
    ----------
    name : str
    oracles : tuple of OracleDecl
        Channel order of the realization.
    params : tuple of str
    statements : tuple of Statement
    source : str
        Original text, kept for diagnostics.
    """

    name: str
    oracles: tuple[OracleDecl, ...]
    params: tuple[str, ...]
    statements: tuple[Statement, ...]
    source: str = field(default="", repr=False, compare=False)

    @property
    def oracle_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.oracles)

    @property
    def states(self) -> tuple[str, ...]:
        return tuple(s.target for s in self.statements if s.offset == 1)

    @property
    def temporaries(self) -> tuple[str, ...]:
        return tuple(s.target for s in self.statements if s.offset == 0)

    @property
    def calls(self) -> tuple[OracleCall, ...]:
        """Oracle calls in textual order."""
        out: list[OracleCall] = []
        for st in self.statements:
            out.extend(_calls_in(st.expr))
        return tuple(out)


def _calls_in(node: Node) -> Iterator[OracleCall]:
    if isinstance(node, Call):
        yield OracleCall(node.oracle, node.arg, node.line, node.col)
        yield from _calls_in(node.arg)
    elif isinstance(node, BinOp):
        yield from _calls_in(node.left)
        yield from _calls_in(node.right)
    elif isinstance(node, (Neg, Pow)):
        yield from _calls_in(node.operand if isinstance(node, Neg) else node.base)


def _names_in(node: Node) -> Iterator[Name]:
    if isinstance(node, Name):
        yield node
    elif isinstance(node, Call):
        yield from _names_in(node.arg)
    elif isinstance(node, BinOp):
        yield from _names_in(node.left)
        yield from _names_in(node.right)
    elif isinstance(node, Neg):
        yield from _names_in(node.operand)
    elif isinstance(node, Pow):
        yield from _names_in(node.base)


def _refs_in(node: Node) -> Iterator[Ref]:
    if isinstance(node, Ref):
        yield node
    elif isinstance(node, Call):
        yield from _refs_in(node.arg)
    elif isinstance(node, BinOp):
        yield from _refs_in(node.left)
        yield from _refs_in(node.right)
    elif isinstance(node, Neg):
        yield from _refs_in(node.operand)
    elif isinstance(node, Pow):
        yield from _refs_in(node.base)


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    # helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> DslSyntaxError:
        tok = tok or self.tok
        return DslSyntaxError(msg, tok.line, tok.col, self.src)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def expect_name(self, what: str = "a name") -> Token:
        if self.tok.kind != "name" or self.tok.text in _KEYWORDS:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance()

    def skip_newlines(self):
        while self.tok.kind == "newline":
            self.advance()

    # grammar
    def program(self):
        self.skip_newlines()
        header = None
        if self.tok.kind == "name" and self.tok.text == "algorithm":
            header = self.header()
            self.skip_newlines()
            self.expect("{")
        stmts = self.statements(closing="}" if header else None)
        if header:
            self.expect("}")
        self.skip_newlines()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after the algorithm body")
        return header, stmts

    def header(self):
        self.advance()
        name = self.expect_name("an algorithm name").text
        self.expect("(")
        oracles: list[tuple[OracleDecl, Token]] = []
        while not (self.tok.text in (";", ")") and self.tok.kind == "op"):
            tok = self.expect_name("an oracle name")
            kind = None
            if self.accept(":"):
                kind = self.kind()
            oracles.append((OracleDecl(tok.text, kind), tok))
            if not self.accept(","):
                break
        params: list[tuple[str, Token]] = []
        if self.accept(";"):
            while self.tok.kind == "name":
                tok = self.expect_name("a parameter name")
                params.append((tok.text, tok))
                if not self.accept(","):
                    break
        self.expect(")")
        return name, oracles, params

    def kind(self) -> OracleKind:
        tag_tok = self.expect_name("an oracle kind")
        args: list[str] = []
        if self.accept("("):
            while self.tok.kind in ("name", "number"):
                args.append(self.advance().text)
                if not self.accept(","):
                    break
            self.expect(")")
        try:
            if len(args) == 0:
                return OracleKind(tag_tok.text)
            if len(args) == 1:
                if tag_tok.text in ("prox", "prox_conj"):
                    return OracleKind(tag_tok.text, stepsize=args[0])
                return OracleKind(tag_tok.text, function=args[0])
            return OracleKind(tag_tok.text, function=args[0], stepsize=args[1])
        except ValueError as exc:
            raise self.error(str(exc), tag_tok) from None

    def statements(self, closing: str | None) -> list[Statement]:
        stmts: list[Statement] = []
        while True:
            while self.tok.kind == "newline" or (self.tok.kind == "op" and self.tok.text == ";"):
                self.advance()
            if self.tok.kind == "eof" or (closing and self.tok.text == closing):
                break
            stmts.append(self.statement())
            if self.tok.kind == "op" and self.tok.text == ";":
                self.advance()
            elif self.tok.kind in ("newline", "eof") or (closing and self.tok.text == closing):
                pass
            else:
                raise self.error(f"expected ';' or end of line, found {self.tok.text!r}")
        if not stmts:
            raise self.error("an algorithm needs at least one update statement")
        return stmts

    def statement(self) -> Statement:
        implicit = False
        if self.tok.kind == "name" and self.tok.text == "implicit":
            self.advance()
            implicit = True
        target = self.expect_name("an assignment target")
        if self.tok.text != "[":
            raise self.error("assignment target needs a time index such as [k+1] or [k]")
        offset = self.time_index()
        if offset not in (0, 1):
            raise self.error("only [k+1] (next state) or [k] (temporary) may be assigned", target)
        self.expect("=")
        expr = self.expr()
        return Statement(target.text, offset, expr, target.line, target.col, implicit)

    def time_index(self) -> int:
        self.expect("[")
        k = self.tok
        if k.kind != "name" or k.text != "k":
            raise self.error("time index must be written in terms of k")
        self.advance()
        offset = 0
        if self.tok.text in ("+", "-"):
            sign = 1 if self.advance().text == "+" else -1
            if self.tok.kind != "number" or "." in self.tok.text:
                raise self.error("expected an integer time offset")
            offset = sign * int(self.advance().text)
        self.expect("]")
        return offset

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            node = BinOp(op.line, op.col, op.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            node = BinOp(op.line, op.col, op.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            inner = self.unary()
            return inner if op.text == "+" else Neg(op.line, op.col, inner)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            sign = 1
            if self.tok.text in ("+", "-"):
                sign = -1 if self.advance().text == "-" else 1
            if self.tok.kind != "number" or "." in self.tok.text:
                raise self.error("exponent must be an integer")
            return Pow(op.line, op.col, base, sign * int(self.advance().text))
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Num(t.line, t.col, Fraction(t.text))
        if t.kind == "name" and t.text not in _KEYWORDS:
            self.advance()
            if self.tok.text == "[" and self.tok.kind == "op":
                return Ref(t.line, t.col, t.text, self.time_index())
            if self.tok.text == "(" and self.tok.kind == "op":
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(t.line, t.col, t.text, arg)
            return Name(t.line, t.col, t.text)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = t.text or "end of input"
        raise self.error(f"expected an expression, found {found!r}")


def parse(text: str, name: str | None = None) -> AlgorithmAST:
    """Parse algorithm source into an :class:`AlgorithmAST`.

    The result is fully validated: names resolve, every expression is linear
    in variables and oracle outputs, and each oracle is queried once per
    iteration.

    Raises
    ------
    DslSyntaxError, NonlinearExpression, UndeclaredSymbol, OracleUseError
    """
    p = _Parser(text)
    header, stmts = p.program()
    src = text
    assigned: dict[str, Statement] = {}
    for st in stmts:
        prev = assigned.get(st.target)
        if prev is not None:
            raise DslSyntaxError(f"{st.target!r} is assigned more than once", st.line, st.col, src)
        assigned[st.target] = st

    if header is not None:
        algo_name, odecls, pdecls = header
        seen: set[str] = set()
        for decl, tok in odecls:
            if decl.name in seen:
                raise DslSyntaxError(f"oracle {decl.name!r} declared twice", tok.line, tok.col, src)
            seen.add(decl.name)
        for pname, tok in pdecls:
            if pname in seen:
                raise DslSyntaxError(f"{pname!r} declared twice", tok.line, tok.col, src)
            if pname in ("z", "k"):
                raise DslSyntaxError(f"{pname!r} is reserved", tok.line, tok.col, src)
            seen.add(pname)
        oracles = tuple(d for d, _ in odecls)
        params = tuple(n for n, _ in pdecls)
        for st in stmts:
            for c in _calls_in(st.expr):
                if c.oracle not in {o.name for o in oracles}:
                    raise UndeclaredSymbol(f"oracle {c.oracle!r} is not declared", c.line, c.col, src)
            for nm in _names_in(st.expr):
                if nm.name in assigned:
                    raise DslSyntaxError(f"variable {nm.name!r} needs a time index", nm.line, nm.col, src)
                if nm.name not in params:
                    raise UndeclaredSymbol(f"{nm.name!r} is not a declared parameter", nm.line, nm.col, src)
    else:
        algo_name = name or "algorithm"
        order: list[str] = []
        pnames: list[str] = []
        for st in stmts:
            for c in _calls_in(st.expr):
                if c.oracle not in order:
                    order.append(c.oracle)
            for nm in _names_in(st.expr):
                if nm.name in assigned:
                    raise DslSyntaxError(f"variable {nm.name!r} needs a time index", nm.line, nm.col, src)
                if nm.name in ("z", "k"):
                    raise DslSyntaxError(f"{nm.name!r} is reserved", nm.line, nm.col, src)
                if nm.name not in pnames:
                    pnames.append(nm.name)
        oracles = tuple(OracleDecl(o) for o in order)
        params = tuple(sorted(pnames))
    for st in stmts:
        if st.target in params or st.target in {o.name for o in oracles}:
            raise DslSyntaxError(f"{st.target!r} is already a parameter or oracle", st.line, st.col, src)
        for ref in _refs_in(st.expr):
            if ref.name not in assigned:
                raise UndeclaredSymbol(f"variable {ref.name!r} is never assigned", ref.line, ref.col, src)

    ast = AlgorithmAST(name or algo_name, oracles, params, tuple(stmts), src)
    _Linearizer(ast).check()
    return ast


# ---------------------------------------------------------------------------
# linear forms

@dataclass(frozen=True)
class VarAtom:
    name: str
    offset: int

    def shift(self, d: int) -> "VarAtom":
        return VarAtom(self.name, self.offset + d)

    def sort_key(self):
        return (0, self.name, self.offset)


@dataclass(frozen=True)
class CallAtom:
    oracle: str
    arg: tuple  # frozen linear form: tuple of (atom, RatFunc)

    def shift(self, d: int) -> "CallAtom":
        return CallAtom(self.oracle, _shift_frozen(self.arg, d))

    def sort_key(self):
        return (1, self.oracle, tuple((a.sort_key(), c.key()) for a, c in self.arg))

    def max_offset(self) -> int | None:
        return _max_offset(self.arg)


def _freeze(terms: dict) -> tuple:
    items = [(a, c) for a, c in terms.items() if not c.is_zero()]
    return tuple(sorted(items, key=lambda ac: (ac[0].sort_key(), ac[1].key())))


def _shift_frozen(frozen: tuple, d: int) -> tuple:
    return tuple((a.shift(d), c) for a, c in frozen)


def _max_offset(frozen: tuple) -> int | None:
    best = None
    for a, _ in frozen:
        m = a.offset if isinstance(a, VarAtom) else a.max_offset()
        if m is not None and (best is None or m > best):
            best = m
    return best


@dataclass
class _Lin:
    """Scalar part plus linear combination of atoms."""

    const: RatFunc
    terms: dict

    @property
    def is_scalar(self) -> bool:
        return not self.terms

    def scale(self, c: RatFunc) -> "_Lin":
        return _Lin(self.const * c, {a: v * c for a, v in self.terms.items()})

    def add(self, other: "_Lin", sign: int = 1) -> "_Lin":
        terms = dict(self.terms)
        for a, v in other.terms.items():
            terms[a] = terms.get(a, RatFunc.zero()) + (v if sign > 0 else -v)
        terms = {a: v for a, v in terms.items() if not v.is_zero()}
        const = self.const + other.const if sign > 0 else self.const - other.const
        return _Lin(const, terms)


class _Linearizer:
    """Turns expression trees into linear forms, reporting nonlinearity."""

    def __init__(self, ast: AlgorithmAST):
        self.ast = ast
        self.params = set(ast.params)

    def err(self, cls, msg: str, node: Node):
        return cls(msg, node.line, node.col, self.ast.source)

    def lin(self, node: Node) -> _Lin:
        if isinstance(node, Num):
            return _Lin(RatFunc.const(node.value), {})
        if isinstance(node, Name):
            return _Lin(RatFunc.param(node.name), {})
        if isinstance(node, Ref):
            return _Lin(RatFunc.zero(), {VarAtom(node.name, node.offset): RatFunc.one()})
        if isinstance(node, Call):
            arg = self.lin(node.arg)
            if not arg.const.is_zero():
                raise self.err(NonlinearExpression,
                               "oracle argument has a constant offset; shift the oracle instead", node)
            return _Lin(RatFunc.zero(), {CallAtom(node.oracle, _freeze(arg.terms)): RatFunc.one()})
        if isinstance(node, Neg):
            return self.lin(node.operand).scale(RatFunc.const(-1))
        if isinstance(node, Pow):
            base = self.lin(node.base)
            if not base.is_scalar:
                raise self.err(NonlinearExpression, "powers of variables are not linear", node)
            if base.const.is_zero() and node.exponent < 0:
                raise self.err(NonlinearExpression, "division by zero", node)
            return _Lin(base.const ** node.exponent, {})
        if isinstance(node, BinOp):
            left, right = self.lin(node.left), self.lin(node.right)
            if node.op == "+":
                return left.add(right)
            if node.op == "-":
                return left.add(right, -1)
            if node.op == "*":
                if left.is_scalar:
                    return right.scale(left.const)
                if right.is_scalar:
                    return left.scale(right.const)
                raise self.err(NonlinearExpression, "product of two variable expressions", node)
            if node.op == "/":
                if not right.is_scalar:
                    raise self.err(NonlinearExpression,
                                   "division by a variable expression is not linear", node)
                if right.const.is_zero():
                    raise self.err(NonlinearExpression, "division by zero", node)
                return left.scale(right.const.inverse())
        raise TypeError(f"unknown node {node!r}")

    def statement_forms(self) -> list[tuple[Statement, dict]]:
        out = []
        for st in self.ast.statements:
            form = self.lin(st.expr)
            if not form.const.is_zero():
                raise self.err(NonlinearExpression,
                               "right-hand side has a constant term (affine, not linear)", st.expr)
            out.append((st, form.terms))
        return out

    def check(self):
        forms = self.statement_forms()
        _group_calls(self.ast, forms)


def _collect_calls(terms: dict, out: list):
    for a in terms if isinstance(terms, dict) else [x for x, _ in terms]:
        if isinstance(a, CallAtom):
            out.append(a)
            _collect_calls(dict(a.arg), out)


def _group_calls(ast: AlgorithmAST, forms) -> dict[str, tuple[CallAtom, dict[CallAtom, int]]]:
    """For each oracle, its base call and the delay of every other call."""
    calls: list[CallAtom] = []
    for _, terms in forms:
        _collect_calls(terms, calls)
    positions = {c.oracle: c for c in ast.calls}
    result: dict[str, tuple[CallAtom, dict[CallAtom, int]]] = {}
    for decl in ast.oracles:
        mine = [c for c in calls if c.oracle == decl.name]
        if not mine:
            raise OracleUseError(f"oracle {decl.name!r} is declared but never called")
        normal: dict[tuple, list[tuple[CallAtom, int]]] = {}
        for c in mine:
            top = c.max_offset() or 0
            normal.setdefault(c.shift(-top).arg, []).append((c, top))
        if len(normal) > 1:
            pos = positions.get(decl.name)
            raise OracleUseError(
                f"oracle {decl.name!r} is queried at two different points in one iteration",
                pos.line if pos else None, pos.col if pos else None, ast.source)
        (entries,) = normal.values()
        top = max(t for _, t in entries)
        base = next(c for c, t in entries if t == top)
        result[decl.name] = (base, {c: top - t for c, t in entries})
    return result


# ---------------------------------------------------------------------------
# lowering

def lower(ast: AlgorithmAST) -> StateSpace:
    """Build the realization ``(A, B, C, D)`` of a parsed algorithm.

    States come in declaration order, each followed by its memory states;
    memory of temporaries and of oracle outputs follows.

    Raises
    ------
    CyclicDefinition
        If intra-iteration definitions cannot be ordered.
    """
    lz = _Linearizer(ast)
    forms = lz.statement_forms()
    groups = _group_calls(ast, forms)
    rhs = {st.target: terms for st, terms in forms}
    stmt_of = {st.target: st for st, _ in forms}
    states = [st.target for st, _ in forms if st.offset == 1]
    temps = [st.target for st, _ in forms if st.offset == 0]
    oracle_index = {d.name: i for i, d in enumerate(ast.oracles)}
    delay_of: dict[CallAtom, tuple[str, int]] = {}
    for name, (_, delays) in groups.items():
        for c, d in delays.items():
            delay_of[c] = (name, d)

    # basis keys: ("x", var, d) = var delayed by d (d = 0 only for states); ("u", oracle)
    memory_need: dict[tuple[str, str], int] = {}
    cache: dict[tuple, dict] = {}
    active: list[tuple] = []

    def need(kind: str, name: str, d: int):
        key = (kind, name)
        if memory_need.get(key, 0) < d:
            memory_need[key] = d

    def value_of_atom(atom, node_hint: Statement | None) -> dict:
        if isinstance(atom, CallAtom):
            name, d = delay_of[atom]
            if d == 0:
                return {("u", name): RatFunc.one()}
            need("u", name, d)
            return {("mu", name, d): RatFunc.one()}
        v, off = atom.name, atom.offset
        if v in stmt_of and stmt_of[v].offset == 1:
            if off == 0:
                return {("x", v, 0): RatFunc.one()}
            if off < 0:
                need("x", v, -off)
                return {("x", v, -off): RatFunc.one()}
            if off == 1:
                return evaluate(("next", v))
        else:
            if off == 0:
                return evaluate(("temp", v))
            if off < 0:
                need("t", v, -off)
                return {("t", v, -off): RatFunc.one()}
        st = node_hint or stmt_of[v]
        raise CyclicDefinition(f"{v}[k{off:+d}] refers to a future value", st.line, st.col, ast.source)

    def evaluate(key) -> dict:
        if key in cache:
            return cache[key]
        if key in active:
            chain = " -> ".join(f"{k[1]}" for k in active[active.index(key):] + [key])
            st = stmt_of[key[1]]
            raise CyclicDefinition(f"definitions form a loop: {chain}", st.line, st.col, ast.source)
        active.append(key)
        total: dict = {}
        for atom, coef in rhs[key[1]].items():
            for b, c in value_of_atom(atom, stmt_of[key[1]]).items():
                total[b] = total.get(b, RatFunc.zero()) + coef * c
        active.pop()
        total = {b: c for b, c in total.items() if not c.is_zero()}
        cache[key] = total
        return total

    def eval_form(terms, hint) -> dict:
        total: dict = {}
        for atom, coef in terms:
            for b, c in value_of_atom(atom, hint).items():
                total[b] = total.get(b, RatFunc.zero()) + coef * c
        return {b: c for b, c in total.items() if not c.is_zero()}

    next_vals = {s: evaluate(("next", s)) for s in states}
    for t in temps:
        evaluate(("temp", t))
    queries = {}
    for name, (base, _) in groups.items():
        queries[name] = eval_form(base.arg, None)

    # memory of temporaries may itself require more memory; iterate to a fixed point
    temp_mem_vals: dict[str, dict] = {}
    while True:
        pending = [name for (kind, name) in memory_need if kind == "t" and name not in temp_mem_vals]
        if not pending:
            break
        for name in pending:
            temp_mem_vals[name] = evaluate(("temp", name))

    # state vector layout
    layout: list[tuple] = []
    names: list[str] = []
    for s in states:
        layout.append(("x", s, 0))
        names.append(s)
        for d in range(1, memory_need.get(("x", s), 0) + 1):
            layout.append(("x", s, d))
            names.append(f"{s}__{d}")
    for t in temps:
        for d in range(1, memory_need.get(("t", t), 0) + 1):
            layout.append(("t", t, d))
            names.append(f"{t}__{d}")
    for o in ast.oracles:
        for d in range(1, memory_need.get(("u", o.name), 0) + 1):
            layout.append(("mu", o.name, d))
            names.append(f"{o.name}__out{d}")
    index = {k: i for i, k in enumerate(layout)}
    n, p = len(layout), len(ast.oracles)

    def row(values: dict) -> tuple[list, list]:
        xr = [RatFunc.zero()] * n
        ur = [RatFunc.zero()] * p
        for b, c in values.items():
            if b[0] == "u":
                ur[oracle_index[b[1]]] = ur[oracle_index[b[1]]] + c
            else:
                xr[index[b]] = xr[index[b]] + c
        return xr, ur

    A_rows, B_rows = [], []
    for key in layout:
        kind, name, d = key
        if kind == "x" and d == 0:
            vals = next_vals[name]
        elif kind == "x":
            vals = {("x", name, d - 1): RatFunc.one()}
        elif kind == "t":
            vals = temp_mem_vals[name] if d == 1 else {("t", name, d - 1): RatFunc.one()}
        else:
            vals = {("u", name): RatFunc.one()} if d == 1 else {("mu", name, d - 1): RatFunc.one()}
        xr, ur = row(vals)
        A_rows.append(xr)
        B_rows.append(ur)
    C_rows, D_rows = [], []
    for o in ast.oracles:
        xr, ur = row(queries[o.name])
        C_rows.append(xr)
        D_rows.append(ur)
    return StateSpace(
        RatMatrix(A_rows, shape=(n, n)),
        RatMatrix(B_rows, shape=(n, p)),
        RatMatrix(C_rows, shape=(p, n)),
        RatMatrix(D_rows, shape=(p, p)),
        oracles=ast.oracle_names,
        params=ast.params,
        state_names=tuple(names),
        kinds=tuple(o.kind for o in ast.oracles),
        name=ast.name,
    )


def compile_source(text: str, name: str | None = None) -> StateSpace:
    """``lower(parse(text))``."""
    return lower(parse(text, name))


# ---------------------------------------------------------------------------
# emission

def _ident(label: str) -> str:
    s = re.sub(r"\W", "_", label.replace("*", "_conj"))
    s = re.sub(r"_+", "_", s).strip("_") or "phi"
    return s if not s[0].isdigit() else "phi_" + s


def _coef_prefix(c: RatFunc) -> str:
    if c.is_numeric():
        f = c.to_fraction()
        if f == 1:
            return ""
        if f == -1:
            return "-"
        if f.denominator == 1:
            return f"{f.numerator}*"
        sign = "-" if f < 0 else ""
        return f"{sign}({abs(f)})*"
    s = str(c)
    if re.fullmatch(r"-?[A-Za-z_]\w*(\^\d+)?", s):
        return s + "*"
    return f"({s})*"


def _combo(terms: list[tuple[str, RatFunc]]) -> str:
    out = ""
    for atom, c in terms:
        if c.is_zero():
            continue
        piece = _coef_prefix(c) + atom
        if not out:
            out = piece
        elif piece.startswith("-"):
            out += " - " + piece[1:]
        else:
            out += " + " + piece
    return out or "0"


def emit_source(ss: StateSpace, name: str | None = None, header: bool = True) -> str:
    """Write update equations realizing ``ss``.

    Each oracle ``i`` gets a query temporary ``y_i`` and an answer temporary
    ``u_i``; states are named ``x1 .. xn``.  Oracle calls follow the explicit
    evaluation order when one exists; otherwise the queries that close an
    algebraic loop are marked ``implicit``.
    """
    p, n = ss.p, ss.n
    labels = [_ident(o) for o in ss.oracles]
    ys = ["y"] if p == 1 else [f"y{i + 1}" for i in range(p)]
    us = ["u"] if p == 1 else [f"u{i + 1}" for i in range(p)]
    xs = [f"x{i + 1}" for i in range(n)]
    order = is_explicit(ss)
    lines: list[str] = []

    def query(i: int) -> str:
        terms = [(f"{xs[j]}[k]", ss.C[i, j]) for j in range(n)]
        terms += [(f"{us[j]}[k]", ss.D[i, j]) for j in range(p)]
        return f"{ys[i]}[k] = {_combo(terms)}"

    if order is not None:
        for i in order:
            lines.append(query(i))
            lines.append(f"{us[i]}[k] = {labels[i]}({ys[i]}[k])")
    else:
        for i in range(p):
            loop = any(not ss.D[i, j].is_zero() for j in range(p))
            lines.append(("implicit " if loop else "") + query(i))
        for i in range(p):
            lines.append(f"{us[i]}[k] = {labels[i]}({ys[i]}[k])")
    for r in range(n):
        terms = [(f"{xs[j]}[k]", ss.A[r, j]) for j in range(n)]
        terms += [(f"{us[j]}[k]", ss.B[r, j]) for j in range(p)]
        lines.append(f"{xs[r]}[k+1] = {_combo(terms)}")
    body = ";\n".join(lines) + ";"
    if not header:
        return body
    decls = []
    for lab, kind in zip(labels, ss.kinds):
        decls.append(f"{lab}: {kind}" if kind is not None else lab)
    params = ", ".join(ss.free_params())
    title = _ident(name or ss.name or "realization")
    indented = "\n".join("    " + ln for ln in body.splitlines())
    return f"algorithm {title}({', '.join(decls)}; {params}) {{\n{indented}\n}}\n"


def builtin(name: str) -> AlgorithmAST:
    """AST of a named algorithm from the built-in corpus.

    Raises
    ------
    UnknownAlgorithm
        If ``name`` is not registered.
    """
    from .corpus import builtin as _builtin

    return _builtin(name)
