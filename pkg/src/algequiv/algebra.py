"""Exact rational functions of ``z`` and matrices of them.

Coefficients are multivariate polynomials over the rationals in named scalar
parameters.  Polynomials are stored as sparse sympy ring elements whose first
generator is always ``z``; the remaining generators are the parameter names in
sorted order.  Operands living in different rings are lifted to the ring over
the union of their parameter names before any arithmetic.

Equality of rational functions is always decided by cross-multiplication.
The stored form is reduced (common factors cancelled) and normalized so that
numerator and denominator have coprime integer coefficients and the
denominator's leading coefficient, in lexicographic order with ``z`` first,
is positive.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Mapping, Sequence, Union

import sympy
from sympy import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, ring as _make_ring
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from .errors import FreeParameter, ImproperEntry, Singular, ZeroInput, DimensionMismatch

__all__ = [
    "Z",
    "RatFunc",
    "RatMatrix",
    "Scalar",
    "ratfunc_eq",
    "relative_degree",
    "limit_at_infinity",
    "ratio_pure_shift",
    "mat_inverse",
    "frac_rref",
    "frac_rank",
    "frac_solve",
    "as_fraction",
]

Z = "z"
INF = math.inf

Scalar = Union["RatFunc", int, Fraction, str]


@lru_cache(maxsize=None)
def _ring(params: tuple[str, ...]):
    R = _make_ring((Z,) + params, QQ, lex)[0]
    return R


def _lift(p: PolyElement, R) -> PolyElement:
    if p.ring is R:
        return p
    return p.set_ring(R)


def _union_ring(polys: Iterable[PolyElement]):
    names: set[str] = set()
    for p in polys:
        names.update(str(s) for s in p.ring.symbols[1:])
    return _ring(tuple(sorted(names)))


def _qq(value) -> object:
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    return QQ(value)


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def as_fraction(value) -> Fraction:
    """Convert an int, Fraction, decimal/ratio string or constant RatFunc to a Fraction."""
    if isinstance(value, RatFunc):
        return value.to_fraction()
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def _zdeg(p: PolyElement) -> int:
    if not p:
        return -1
    return p.degree(0)


def _zcoeff(p: PolyElement, k: int) -> PolyElement:
    """Coefficient of z**k as an element of the same ring."""
    R = p.ring
    terms = {}
    for monom, c in p.terms():
        if monom[0] == k:
            terms[(0,) + monom[1:]] = c
    return R.from_dict(terms) if terms else R.zero


def _free_names(p: PolyElement) -> set[str]:
    used = set()
    syms = p.ring.symbols
    for monom in p.monoms():
        for idx, e in enumerate(monom[1:], start=1):
            if e:
                used.add(str(syms[idx]))
    return used


def _poly_expr(p: PolyElement):
    return p.as_expr()


def _expr_str(expr) -> str:
    return sympy.sstr(expr).replace("**", "^")


class RatFunc:
    """Rational function ``num/den`` in ``z`` with parameter-polynomial coefficients.

    Instances are immutable.  Use the constructors :meth:`const`, :meth:`z`,
    :meth:`param` and :meth:`parse`, then ordinary arithmetic operators.

    Examples
    --------
    >>> z = RatFunc.z()
    >>> h = (-2 * z + 1) / (10 * (z - 1) ** 2)
    >>> str(h)
    '-(2*z - 1)/(10*(z - 1)^2)'
    """

    __slots__ = ("num", "den", "_key")

    def __init__(self, num: PolyElement, den: PolyElement | None = None, *, reduce: bool = True):
        if den is None:
            den = num.ring.one
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        R = num.ring if num.ring is den.ring else _union_ring((num, den))
        num, den = _lift(num, R), _lift(den, R)
        if reduce:
            num, den = _normalize(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, value) -> "RatFunc":
        R = _ring(())
        return cls(R.ground_new(_qq(as_fraction(value))), R.one, reduce=False)

    @classmethod
    def zero(cls) -> "RatFunc":
        return cls.const(0)

    @classmethod
    def one(cls) -> "RatFunc":
        return cls.const(1)

    @classmethod
    def z(cls, power: int = 1) -> "RatFunc":
        R = _ring(())
        zz = R.gens[0]
        if power >= 0:
            return cls(zz ** power, R.one, reduce=False)
        return cls(R.one, zz ** (-power), reduce=False)

    @classmethod
    def param(cls, name: str) -> "RatFunc":
        if name == Z:
            raise ValueError("'z' is reserved for the transform variable")
        R = _ring((name,))
        return cls(R.gens[1], R.one, reduce=False)

    @classmethod
    def coerce(cls, value) -> "RatFunc":
        if isinstance(value, RatFunc):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls.const(value)

    @classmethod
    def from_sympy(cls, expr) -> "RatFunc":
        """Build from a sympy expression that is rational in its symbols."""
        expr = sympy.together(sympy.sympify(expr))
        if expr.has(sympy.Float):
            raise ValueError("floating-point coefficients are not allowed")
        num, den = sympy.fraction(expr)
        names = sorted(str(s) for s in expr.free_symbols if str(s) != Z)
        R = _ring(tuple(names))
        return cls(R.from_expr(num) if num != 0 else R.zero, R.from_expr(den))

    @classmethod
    def parse(cls, text: str) -> "RatFunc":
        """Parse text such as ``"(-2*z + 1)/(10*(z - 1)^2)"`` or ``"-1/t"``."""
        transformations = standard_transformations + (convert_xor,)
        local: dict[str, object] = {}
        for tok in _identifiers(text):
            local[tok] = sympy.Symbol(tok)
        try:
            expr = parse_expr(text, local_dict=local, transformations=transformations,
                              evaluate=True)
        except Exception as exc:  # sympy raises a zoo of types here
            raise ValueError(f"cannot parse rational function {text!r}: {exc}") from None
        return cls.from_sympy(sympy.nsimplify(expr, rational=True) if expr.has(sympy.Float) else expr)

    # -- structure ----------------------------------------------------
    @property
    def params(self) -> tuple[str, ...]:
        """Sorted names of the parameters that actually occur."""
        return tuple(sorted(_free_names(self.num) | _free_names(self.den)))

    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        """True when free of ``z`` (parameters allowed)."""
        return _zdeg(self.num) <= 0 and _zdeg(self.den) == 0

    def is_numeric(self) -> bool:
        """True when free of both ``z`` and parameters."""
        return self.num.is_ground and self.den.is_ground

    def to_fraction(self) -> Fraction:
        if not self.is_numeric():
            raise FreeParameter(f"{self} is not a plain rational number")
        n = _to_fraction(self.num.LC) if self.num else Fraction(0)
        return n / _to_fraction(self.den.LC)

    @property
    def degree_num(self) -> int:
        return _zdeg(self.num)

    @property
    def degree_den(self) -> int:
        return _zdeg(self.den)

    def relative_degree(self) -> float | int:
        """``deg den - deg num`` in ``z``; ``inf`` for the zero function."""
        if self.is_zero():
            return INF
        return self.degree_den - self.degree_num

    def is_proper(self) -> bool:
        return self.relative_degree() >= 0

    def limit_at_infinity(self) -> "RatFunc":
        """Value as ``z`` tends to infinity (leading-coefficient ratio)."""
        rd = self.relative_degree()
        if rd < 0:
            raise ImproperEntry(0, 0, f"{self} is improper")
        if rd > 0:
            return RatFunc.zero()
        d = self.degree_den
        return RatFunc(_zcoeff(self.num, d), _zcoeff(self.den, d))

    def to_sympy(self):
        """The function as a sympy expression in ``z`` and the parameter symbols."""
        return self.num.as_expr() / self.den.as_expr()

    # -- arithmetic ---------------------------------------------------
    def _pair(self, other):
        other = RatFunc.coerce(other) if not isinstance(other, RatFunc) else other
        if self.num.ring is other.num.ring:
            return self.num, self.den, other.num, other.den
        R = _union_ring((self.num, other.num))
        return (_lift(self.num, R), _lift(self.den, R), _lift(other.num, R), _lift(other.den, R))

    def __add__(self, other):
        if not isinstance(other, (RatFunc, int, Fraction)):
            return NotImplemented
        a, b, c, d = self._pair(other)
        if b == d:
            return RatFunc(a + c, b)
        return RatFunc(a * d + c * b, b * d)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        if not isinstance(other, (RatFunc, int, Fraction)):
            return NotImplemented
        return self + (-RatFunc.coerce(other))

    def __rsub__(self, other):
        return RatFunc.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, RatMatrix):
            return other.scale(self)
        if not isinstance(other, (RatFunc, int, Fraction)):
            return NotImplemented
        a, b, c, d = self._pair(other)
        return RatFunc(a * c, b * d)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, (RatFunc, int, Fraction)):
            return NotImplemented
        return self * RatFunc.coerce(other).inverse()

    def __rtruediv__(self, other):
        return RatFunc.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k >= 0:
            return RatFunc(self.num ** k, self.den ** k, reduce=False)
        return self.inverse() ** (-k)

    # -- comparison ---------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, str)):
            other = RatFunc.coerce(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return ratfunc_eq(self, other)

    def __ne__(self, other) -> bool:
        res = self.__eq__(other)
        return res if res is NotImplemented else not res

    def key(self) -> tuple:
        """Hashable canonical key (meaningful because stored forms are reduced)."""
        if self._key is None:
            names = self.params
            R = _ring(names)
            n = _lift_down(self.num, R)
            d = _lift_down(self.den, R)
            k = (names, tuple(sorted(n.terms())), tuple(sorted(d.terms())))
            object.__setattr__(self, "_key", k)
        return self._key

    def __hash__(self) -> int:
        return hash(self.key())

    # -- substitution and evaluation ----------------------------------
    def subs(self, values: Mapping[str, Scalar]) -> "RatFunc":
        """Substitute parameters (and optionally ``z``) by rationals or RatFuncs."""
        if not values:
            return self
        vals = {k: RatFunc.coerce(v) for k, v in values.items()}
        present = set(self.params) | {Z}
        vals = {k: v for k, v in vals.items() if k in present}
        if not vals:
            return self
        if all(v.is_numeric() for v in vals.values()):
            R = self.num.ring
            gens = {str(s): g for s, g in zip(R.symbols, R.gens)}
            pairs = [(gens[k], _qq(v.to_fraction())) for k, v in vals.items()]
            num, den = self.num.subs(pairs), self.den.subs(pairs)
            if not den:
                raise ZeroDivisionError(f"substitution makes the denominator of {self} vanish")
            return RatFunc(num, den)
        num = _compose(self.num, vals)
        den = _compose(self.den, vals)
        if den.is_zero():
            raise ZeroDivisionError(f"substitution makes the denominator of {self} vanish")
        return num / den

    def __call__(self, zvalue) -> "RatFunc":
        return self.subs({Z: zvalue})

    def evaluate(self, zvalue, params: Mapping[str, Scalar] | None = None) -> Fraction:
        vals = dict(params or {})
        vals[Z] = zvalue
        return self.subs(vals).to_fraction()

    # -- rendering ----------------------------------------------------
    def __str__(self) -> str:
        num = _render_factored_num(self.num)
        if self.den == self.den.ring.one:
            return num
        den = _render_den(self.den)
        if _is_sum(num):
            num = f"({num})"
        if not (_is_atom(den) or _is_group(den)):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RatFunc({str(self)!r})"

    def to_json(self) -> dict:
        return {"num": _poly_json(self.num), "den": _poly_json(self.den)}

    @classmethod
    def from_json(cls, data) -> "RatFunc":
        if isinstance(data, str):
            return cls.parse(data)
        if isinstance(data, (int, float)):
            return cls.const(Fraction(str(data)))
        return _poly_from_json(data["num"]) / _poly_from_json(data["den"])


def _identifiers(text: str) -> list[str]:
    import re

    return sorted(set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text)))


def _is_sum(text: str) -> bool:
    """True when ``text`` has a ``+`` or ``-`` outside parentheses (after the sign)."""
    depth = 0
    for i, ch in enumerate(text):
        depth += (ch == "(") - (ch == ")")
        if depth == 0 and i > 0 and ch in "+-" and text[i - 1] == " ":
            return True
    return False


def _is_atom(text: str) -> bool:
    body = text[1:] if text.startswith("-") else text
    return not any(ch in body for ch in "+-*/ ")


def _is_group(text: str) -> bool:
    """True if ``text`` is one parenthesized group, e.g. ``(z - 1)``."""
    if not text.startswith("("):
        return False
    depth = 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0:
            return i == len(text) - 1
    return False


def _lift_down(p: PolyElement, R) -> PolyElement:
    """Move ``p`` into a ring whose generators are a subset of its own."""
    if p.ring is R:
        return p
    src = [str(s) for s in p.ring.symbols]
    keep = [src.index(str(s)) for s in R.symbols]
    terms = {tuple(m[i] for i in keep): c for m, c in p.terms()}
    return R.from_dict(terms) if terms else R.zero


def _normalize(num: PolyElement, den: PolyElement) -> tuple[PolyElement, PolyElement]:
    R = num.ring
    if not num:
        return R.zero, R.one
    if den.is_ground:
        pass
    else:
        g = num.gcd(den)
        if g != R.one and not g.is_ground:
            num = num.exquo(g)
            den = den.exquo(g)
    cn, num = num.clear_denoms()
    cd, den = den.clear_denoms()
    num = num * R.ground_new(cd)
    den = den * R.ground_new(cn)
    ints = [int(c.numerator) for c in num.coeffs()] + [int(c.numerator) for c in den.coeffs()]
    content = reduce(math.gcd, ints)
    if content != 1:
        num = num.quo_ground(QQ(content))
        den = den.quo_ground(QQ(content))
    if den.LC < 0:
        num, den = -num, -den
    return num, den


def _compose(p: PolyElement, vals: Mapping[str, RatFunc]) -> RatFunc:
    syms = [str(s) for s in p.ring.symbols]
    gens = [vals.get(s) for s in syms]
    base = [RatFunc.z() if s == Z else RatFunc.param(s) for s in syms]
    atoms = [g if g is not None else b for g, b in zip(gens, base)]
    total = RatFunc.zero()
    for monom, c in p.terms():
        term = RatFunc.const(_to_fraction(c))
        for a, e in zip(atoms, monom):
            if e:
                term = term * a ** e
        total = total + term
    return total


def _render_num(p: PolyElement) -> str:
    """Render a polynomial grouped by descending powers of z."""
    if not p:
        return "0"
    d = _zdeg(p)
    pieces: list[str] = []
    for k in range(d, -1, -1):
        c = _zcoeff(p, k)
        if not c:
            continue
        cexpr = sympy.expand(c.as_expr())
        if k == 0:
            body = _expr_str(cexpr)
        else:
            zpart = Z if k == 1 else f"{Z}^{k}"
            if cexpr == 1:
                body = zpart
            elif cexpr == -1:
                body = "-" + zpart
            elif cexpr.is_Add:
                body = f"({_expr_str(cexpr)})*{zpart}"
            else:
                body = f"{_expr_str(cexpr)}*{zpart}"
        pieces.append(body)
    out = pieces[0]
    for body in pieces[1:]:
        if body.startswith("-"):
            out += " - " + body[1:]
        else:
            out += " + " + body
    return out


def _render_factored_num(p: PolyElement) -> str:
    """Like :func:`_render_num`, with the parameter content pulled out.

    ``-eta*(2*z - 1)`` instead of ``-2*eta*z + eta``.
    """
    if _zdeg(p) < 1:
        return _render_num(p)
    coeffs = [c for c in (_zcoeff(p, k) for k in range(_zdeg(p) + 1)) if c]
    content = reduce(lambda a, b: a.gcd(b), coeffs)
    prim = p.exquo(content)
    if _zcoeff(prim, _zdeg(prim)).LC < 0:
        content, prim = -content, -prim
    if content == 1 or len(coeffs) < 2:
        return _render_num(p)
    body = _render_num(prim)
    head = _expr_str(sympy.expand(content.as_expr()))
    if head == "-1":
        return f"-({body})"
    if _is_sum(head):
        head = f"({head})"
    return f"{head}*({body})"


def _render_den(p: PolyElement) -> str:
    """Factored rendering with each factor written z-first."""
    coeff, factors = sympy.factor_list(_poly_expr(p))
    names = tuple(str(s) for s in p.ring.symbols[1:])
    R = _ring(names)
    parts: list[str] = []
    factors = sorted(factors, key=lambda fm: (sympy.Poly(fm[0]).total_degree(), len(str(fm[0])), str(fm[0])))
    for f, mult in factors:
        fp = R.from_expr(f)
        if fp.LC < 0:
            fp = -fp
            coeff = coeff * (-1) ** mult
        body = _render_num(fp)
        if " " in body or (mult > 1 and not _is_atom(body)):
            body = f"({body})"
        parts.append(body if mult == 1 else f"{body}^{mult}")
    if coeff != 1 or not parts:
        parts.insert(0, _expr_str(coeff))
    return "*".join(parts)


def _poly_json(p: PolyElement) -> list[dict]:
    syms = [str(s) for s in p.ring.symbols]
    grouped: dict[int, list[dict]] = {}
    for monom, c in sorted(p.terms(), reverse=True):
        params = {syms[i]: e for i, e in enumerate(monom) if i and e}
        grouped.setdefault(monom[0], []).append(
            {"params": params, "value": str(_to_fraction(c))})
    return [{"z_power": k, "coefficient_terms": v} for k, v in sorted(grouped.items(), reverse=True)]


def _poly_from_json(data: Sequence[Mapping]) -> RatFunc:
    total = RatFunc.zero()
    for block in data:
        zp = int(block["z_power"])
        for term in block["coefficient_terms"]:
            t = RatFunc.const(Fraction(term["value"])) * RatFunc.z(zp)
            for name, e in term.get("params", {}).items():
                t = t * RatFunc.param(name) ** int(e)
            total = total + t
    return total


# -- spec-level scalar operations ---------------------------------------

def ratfunc_eq(a: RatFunc, b: RatFunc) -> bool:
    """True iff ``a.num * b.den == b.num * a.den`` identically."""
    an, ad, bn, bd = a._pair(b)
    return an * bd == bn * ad


def relative_degree(a: RatFunc) -> float | int:
    """Relative degree ``deg den - deg num``, or ``inf`` for zero."""
    return a.relative_degree()


def ratio_pure_shift(a: RatFunc, b: RatFunc) -> int | None:
    """Return ``k`` with ``b == z**k * a``, or ``None`` if no such integer exists.

    Raises
    ------
    ZeroInput
        If either argument is the zero function.
    """
    if a.is_zero() or b.is_zero():
        raise ZeroInput("pure-shift ratio of a zero function")
    k = a.relative_degree() - b.relative_degree()
    an, ad, bn, bd = a._pair(b)
    zz = an.ring.gens[0]
    if k >= 0:
        ok = bn * ad == an * bd * zz ** k
    else:
        ok = bn * ad * zz ** (-k) == an * bd
    return int(k) if ok else None


# -- matrices -----------------------------------------------------------

class RatMatrix:
    """Immutable dense matrix of :class:`RatFunc` entries.

    Parameters
    ----------
    rows : sequence of sequences
        Entries convertible with :meth:`RatFunc.coerce` (ints, Fractions,
        strings such as ``"-1/t"`` or RatFunc objects).
    shape : tuple, optional
        Required when the matrix has zero rows or columns.
    """

    __slots__ = ("_data", "rows", "cols")

    def __init__(self, rows: Sequence[Sequence[Scalar]] = (), shape: tuple[int, int] | None = None):
        data = tuple(tuple(RatFunc.coerce(e) for e in r) for r in rows)
        if shape is None:
            nr = len(data)
            nc = len(data[0]) if nr else 0
        else:
            nr, nc = shape
            if nr and len(data) != nr:
                raise DimensionMismatch("row count does not match shape")
        if any(len(r) != nc for r in data):
            raise DimensionMismatch("ragged matrix rows")
        if nc == 0:
            data = tuple(() for _ in range(nr))
        object.__setattr__(self, "_data", data)
        object.__setattr__(self, "rows", nr)
        object.__setattr__(self, "cols", nc)

    def __setattr__(self, name, value):
        raise AttributeError("RatMatrix is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        zero = RatFunc.zero()
        return cls([[zero] * cols for _ in range(rows)], shape=(rows, cols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        one, zero = RatFunc.one(), RatFunc.zero()
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], shape=(n, n))

    @classmethod
    def diag(cls, values: Sequence[Scalar]) -> "RatMatrix":
        vals = [RatFunc.coerce(v) for v in values]
        n = len(vals)
        zero = RatFunc.zero()
        return cls([[vals[i] if i == j else zero for j in range(n)] for i in range(n)], shape=(n, n))

    @classmethod
    def column(cls, values: Sequence[Scalar]) -> "RatMatrix":
        return cls([[v] for v in values], shape=(len(values), 1))

    @classmethod
    def block(cls, blocks: Sequence[Sequence["RatMatrix"]]) -> "RatMatrix":
        """Assemble from a 2-D grid of conforming blocks."""
        out: list[list[RatFunc]] = []
        for brow in blocks:
            height = brow[0].rows
            if any(b.rows != height for b in brow):
                raise DimensionMismatch("blocks in a row must share the row count")
            for i in range(height):
                out.append([e for b in brow for e in b._data[i]])
        width = sum(b.cols for b in blocks[0]) if blocks else 0
        return cls(out, shape=(len(out), width))

    # -- access -------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx):
        i, j = idx
        if isinstance(i, slice) or isinstance(j, slice):
            ri = range(self.rows)[i] if isinstance(i, slice) else [i]
            cj = range(self.cols)[j] if isinstance(j, slice) else [j]
            return RatMatrix([[self._data[a][b] for b in cj] for a in ri], shape=(len(ri), len(cj)))
        return self._data[i][j]

    def tolist(self) -> list[list[RatFunc]]:
        return [list(r) for r in self._data]

    def entries(self) -> Iterable[tuple[int, int, RatFunc]]:
        for i, r in enumerate(self._data):
            for j, e in enumerate(r):
                yield i, j, e

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix([[self._data[i][j] for j in cols] for i in rows], shape=(len(rows), len(cols)))

    def map(self, fn) -> "RatMatrix":
        return RatMatrix([[fn(e) for e in r] for r in self._data], shape=self.shape)

    def with_entry(self, i: int, j: int, value: Scalar) -> "RatMatrix":
        rows = self.tolist()
        rows[i][j] = RatFunc.coerce(value)
        return RatMatrix(rows, shape=self.shape)

    @property
    def params(self) -> tuple[str, ...]:
        names: set[str] = set()
        for _, _, e in self.entries():
            names.update(e.params)
        return tuple(sorted(names))

    # -- arithmetic ---------------------------------------------------
    def _check_same(self, other: "RatMatrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
                         shape=self.shape)

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
                         shape=self.shape)

    def __neg__(self) -> "RatMatrix":
        return self.map(lambda e: -e)

    def scale(self, c: Scalar) -> "RatMatrix":
        c = RatFunc.coerce(c)
        return self.map(lambda e: c * e)

    def __mul__(self, other):
        if isinstance(other, RatMatrix):
            return self @ other
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        zero = RatFunc.zero()
        out = []
        for r in self._data:
            row = []
            for j in range(other.cols):
                acc = zero
                for k, a in enumerate(r):
                    if a.is_zero():
                        continue
                    b = other._data[k][j]
                    if b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RatMatrix(out, shape=(self.rows, other.cols))

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix([[self._data[i][j] for i in range(self.rows)] for j in range(self.cols)],
                         shape=(self.cols, self.rows))

    def subs(self, values: Mapping[str, Scalar]) -> "RatMatrix":
        return self.map(lambda e: e.subs(values))

    def inverse(self) -> "RatMatrix":
        return mat_inverse(self)

    def solve(self, rhs: "RatMatrix") -> "RatMatrix":
        """Solve ``self @ X == rhs`` exactly."""
        return _ff_solve(self, rhs)

    def det(self) -> RatFunc:
        return _ff_det(self)

    def is_zero(self) -> bool:
        return all(e.is_zero() for _, _, e in self.entries())

    def is_numeric(self) -> bool:
        return all(e.is_numeric() for _, _, e in self.entries())

    def to_fractions(self) -> list[list[Fraction]]:
        return [[e.to_fraction() for e in r] for r in self._data]

    def relative_degrees(self) -> list[list[float | int]]:
        return [[e.relative_degree() for e in r] for r in self._data]

    # -- comparison and rendering -------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            ratfunc_eq(a, b) for r, s in zip(self._data, other._data) for a, b in zip(r, s))

    def __hash__(self) -> int:
        return hash(tuple(e.key() for _, _, e in self.entries()))

    def __str__(self) -> str:
        if self.rows == 0 or self.cols == 0:
            return f"[]  ({self.rows}x{self.cols})"
        return "[" + ",\n ".join("[" + ", ".join(str(e) for e in r) + "]" for r in self._data) + "]"

    def __repr__(self) -> str:
        return f"RatMatrix({[[str(e) for e in r] for r in self._data]!r})"

    def to_json(self) -> list[list[str]]:
        return [[str(e) for e in r] for r in self._data]

    @classmethod
    def from_json(cls, data, shape: tuple[int, int] | None = None) -> "RatMatrix":
        return cls([[RatFunc.from_json(e) for e in r] for r in data], shape=shape)


def limit_at_infinity(a: RatMatrix) -> RatMatrix:
    """Entrywise value at ``z = inf``; the D matrix of any realization of ``a``.

    Raises
    ------
    ImproperEntry
        If some entry has a numerator of higher degree than its denominator.
    """
    out = []
    for i in range(a.rows):
        row = []
        for j in range(a.cols):
            e = a[i, j]
            if e.relative_degree() < 0:
                raise ImproperEntry(i, j)
            row.append(e.limit_at_infinity())
        out.append(row)
    return RatMatrix(out, shape=a.shape)


# -- fraction-free elimination ------------------------------------------

def _poly_rows(a: RatMatrix, b: RatMatrix | None):
    """Scale each row of ``[a | b]`` by the lcm of its denominators."""
    cells = [e for _, _, e in a.entries()]
    if b is not None:
        cells += [e for _, _, e in b.entries()]
    R = _union_ring([e.num for e in cells] or [_ring(()).one])
    rows, scales = [], []
    for i in range(a.rows):
        row = list(a._data[i]) + (list(b._data[i]) if b is not None else [])
        dens = [_lift(e.den, R) for e in row]
        l = reduce(lambda x, y: x.lcm(y), dens, R.one)
        rows.append([_lift(e.num, R) * l.exquo(d) for e, d in zip(row, dens)])
        scales.append(l)
    return R, rows, scales


def _gauss_jordan(M: list[list[PolyElement]], n: int, R) -> int:
    """In-place fraction-free Gauss-Jordan on the first ``n`` columns.

    Afterwards every leading diagonal entry equals ``sign * det``.  Returns the
    sign of the row permutation.
    """
    sign = 1
    prev = R.one
    width = len(M[0]) if M else 0
    for k in range(n):
        piv = next((r for r in range(k, n) if M[r][k]), None)
        if piv is None:
            raise Singular("matrix is singular over the rational-function field")
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        mkk = M[k][k]
        rk = M[k]
        for i in range(n):
            if i == k:
                continue
            ri = M[i]
            mik = ri[k]
            for j in range(width):
                if j == k:
                    continue
                v = mkk * ri[j]
                if mik and rk[j]:
                    v = v - mik * rk[j]
                ri[j] = v.exquo(prev) if prev != R.one else v
            ri[k] = R.zero
        prev = mkk
    return sign


def _ff_solve(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if a.rows != a.cols:
        raise DimensionMismatch("coefficient matrix must be square")
    if b.rows != a.rows:
        raise DimensionMismatch("right-hand side has the wrong number of rows")
    n = a.rows
    if n == 0:
        return RatMatrix.zeros(0, b.cols)
    R, M, _ = _poly_rows(a, b)
    _gauss_jordan(M, n, R)
    out = [[RatFunc(M[i][n + j], M[i][i]) for j in range(b.cols)] for i in range(n)]
    return RatMatrix(out, shape=(n, b.cols))


def _ff_det(a: RatMatrix) -> RatFunc:
    if a.rows != a.cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    n = a.rows
    if n == 0:
        return RatFunc.one()
    R, M, scales = _poly_rows(a, None)
    try:
        sign = _gauss_jordan(M, n, R)
    except Singular:
        return RatFunc.zero()
    denom = reduce(lambda x, y: x * y, scales, R.one)
    return RatFunc(M[n - 1][n - 1] * sign, denom)


def mat_inverse(a: RatMatrix) -> RatMatrix:
    """Exact inverse by fraction-free Gauss-Jordan elimination.

    Raises
    ------
    Singular
        If the determinant is the zero rational function.
    """
    return _ff_solve(a, RatMatrix.identity(a.rows))


# -- plain rational linear algebra --------------------------------------

def frac_rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form over the rationals and its pivot columns."""
    M = [[Fraction(v) for v in r] for r in rows]
    if not M:
        return M, []
    nr, nc = len(M), len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(nr):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [vi - f * vr for vi, vr in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return M, pivots


def frac_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(frac_rref(rows)[1])


def frac_solve(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Solve the square nonsingular system ``a X = b`` over the rationals."""
    n = len(a)
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    M, piv = frac_rref(aug)
    if piv[:n] != list(range(n)):
        raise Singular("rational matrix is singular")
    return [row[n:] for row in M[:n]]
