"""Oracle equivalence and shift equivalence of transfer matrices.

Two algorithms are oracle-equivalent when their transfer matrices are equal.
They are shift-equivalent when ``H1 = D_m H2 D_m^{-1}`` for a multi-shift
``D_m = diag(z^{-m_1}, ..., z^{-m_p})``, i.e. entry ``(i, j)`` of ``H1`` is
``z^{m_j - m_i}`` times that of ``H2``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy

from .algebra import RatFunc, RatMatrix, ratfunc_eq, ratio_pure_shift
from .errors import AlgequivError, ImproperResult, OracleMismatch
from .statespace import TransferMatrix

__all__ = [
    "MultiShift",
    "ShiftCertificate",
    "oracle_equivalent",
    "multishift_tf",
    "shift_equivalent",
    "conj_by_multishift",
    "enumerate_shift_class",
    "match_parameters",
    "unified_momentum",
]


@dataclass(frozen=True)
class MultiShift:
    """Per-channel delays ``m``; all entries are nonnegative."""

    m: tuple[int, ...]

    def __init__(self, m: Sequence[int]):
        m = tuple(int(v) for v in m)
        if any(v < 0 for v in m):
            raise ValueError(f"multi-shift entries must be nonnegative, got {m}")
        object.__setattr__(self, "m", m)

    @classmethod
    def normalized(cls, m: Sequence[int]) -> "MultiShift":
        """Translate so that the smallest entry is zero."""
        lo = min(m) if len(m) else 0
        return cls([v - lo for v in m])

    @property
    def p(self) -> int:
        return len(self.m)

    @property
    def is_normalized(self) -> bool:
        return not self.m or min(self.m) == 0

    def __iter__(self):
        return iter(self.m)

    def __len__(self) -> int:
        return len(self.m)

    def __getitem__(self, i: int) -> int:
        return self.m[i]

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.m)) + ")"


@dataclass(frozen=True)
class ShiftCertificate:
    """Witness of ``H1 = D_m H2 D_m^{-1}``.

    ``b[(i, j)]`` is the exponent with ``H1[i, j] = z^b * H2[i, j]`` for each
    nonzero off-diagonal entry; it always equals ``m[j] - m[i]``.
    """

    m: MultiShift
    b: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "equivalent": True,
            "m": list(self.m.m),
            "b": {f"{i},{j}": v for (i, j), v in sorted(self.b.items())},
        }


def _check_labels(h1: TransferMatrix, h2: TransferMatrix) -> None:
    if h1.shape != h2.shape:
        raise OracleMismatch(f"transfer matrices have shapes {h1.shape} and {h2.shape}")
    if tuple(h1.oracles) != tuple(h2.oracles):
        raise OracleMismatch(f"oracle labels differ: {list(h1.oracles)} vs {list(h2.oracles)}")


def oracle_equivalent(h1: TransferMatrix, h2: TransferMatrix) -> bool:
    """True when the two transfer matrices are entrywise equal.

    Raises
    ------
    OracleMismatch
        If the shapes or the oracle labels differ.
    """
    _check_labels(h1, h2)
    return all(ratfunc_eq(a, b) for (_, _, a), (_, _, b) in zip(h1.matrix.entries(), h2.matrix.entries()))


def multishift_tf(m: MultiShift | Sequence[int]) -> RatMatrix:
    """The diagonal matrix ``diag(z^{-m_1}, ..., z^{-m_p})``."""
    return RatMatrix.diag([RatFunc.z(-v) for v in m])


def _conjugate(mat: RatMatrix, m: Sequence[int]) -> RatMatrix:
    rows = [[mat[i, j] * RatFunc.z(m[j] - m[i]) if m[j] != m[i] else mat[i, j]
             for j in range(mat.cols)] for i in range(mat.rows)]
    return RatMatrix(rows)


def conj_by_multishift(h: TransferMatrix, m: MultiShift | Sequence[int]) -> TransferMatrix:
    """Return ``D_m H D_m^{-1}``.

    Raises
    ------
    ImproperResult
        At the first entry that would become improper, i.e. when
        ``m_i - m_j < -r_ij`` for the relative degree ``r_ij``.
    """
    m = tuple(m)
    if len(m) != h.p:
        raise ValueError(f"multi-shift has {len(m)} entries for {h.p} oracles")
    r = h.relative_degrees()
    for i in range(h.p):
        for j in range(h.p):
            if m[i] - m[j] < -r[i][j]:
                raise ImproperResult(
                    i, j, f"shift {m} makes entry ({i}, {j}) improper: m_i - m_j = {m[i] - m[j]} < -{r[i][j]}")
    return h.with_matrix(_conjugate(h.matrix, m))


def _potentials(p: int, b: Mapping[tuple[int, int], int]) -> list[int] | None:
    """Integer ``m`` with ``m[j] - m[i] == b[i, j]`` for every key, or None."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(p)]
    for (i, j), w in b.items():
        adj[i].append((j, w))
        adj[j].append((i, -w))
    m: list[int | None] = [None] * p
    for root in range(p):
        if m[root] is not None:
            continue
        m[root] = 0
        comp = [root]
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j, w in adj[i]:
                want = m[i] + w
                if m[j] is None:
                    m[j] = want
                    comp.append(j)
                    queue.append(j)
                elif m[j] != want:
                    return None
        lo = min(m[c] for c in comp)
        for c in comp:
            m[c] -= lo
    return [int(v) for v in m]


def shift_equivalent(h1: TransferMatrix, h2: TransferMatrix) -> ShiftCertificate | None:
    """Find ``m`` with ``H1 = D_m H2 D_m^{-1}``, or return None.

    The test runs in four steps: the diagonals must agree, the sparsity
    patterns must agree, every off-diagonal ratio ``H1_ij / H2_ij`` must be a
    pure power ``z^{b_ij}``, and the difference constraints
    ``m_j - m_i = b_ij`` must have an integer solution.  Each connected
    component of the constraint graph is solved by propagating potentials
    from a root and is then translated so its smallest entry is zero.

    Raises
    ------
    OracleMismatch
        If the shapes or the oracle labels differ.
    """
    _check_labels(h1, h2)
    p = h1.p
    a, c = h1.matrix, h2.matrix
    for i in range(p):
        if not ratfunc_eq(a[i, i], c[i, i]):
            return None
    for i, j in itertools.product(range(p), repeat=2):
        if i != j and a[i, j].is_zero() != c[i, j].is_zero():
            return None
    b: dict[tuple[int, int], int] = {}
    for i, j in itertools.product(range(p), repeat=2):
        if i == j or a[i, j].is_zero():
            continue
        k = ratio_pure_shift(c[i, j], a[i, j])
        if k is None:
            return None
        b[(i, j)] = k
    m = _potentials(p, b)
    if m is None:
        return None
    if _conjugate(c, m) != a:
        raise AlgequivError(f"internal error: shift {m} passed the constraints but does not conjugate")
    return ShiftCertificate(MultiShift(m), b)


def enumerate_shift_class(h: TransferMatrix, cap: int = 5) -> list[tuple[MultiShift, TransferMatrix]]:
    """All proper conjugates ``D_m H D_m^{-1}`` with ``min m = 0`` and ``max m <= cap``.

    A multi-shift keeps every entry proper exactly when
    ``-r_ij <= m_i - m_j <= r_ji`` for all ``i != j``.  Results are in
    lexicographic order of ``m``.
    """
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    p = h.p
    r = h.relative_degrees()
    out = []
    for m in itertools.product(range(cap + 1), repeat=p):
        if p and min(m) != 0:
            continue
        if all(m[i] - m[j] >= -r[i][j] for i in range(p) for j in range(p) if i != j):
            out.append((MultiShift(m), h.with_matrix(_conjugate(h.matrix, m))))
    return out


# -- parameter matching ---------------------------------------------------

def unified_momentum(a, b, c) -> RatFunc:
    """The common form ``a (z - c) / ((z - 1)(z - b))`` of one-gradient momentum methods."""
    z = RatFunc.z()
    a, b, c = (RatFunc.coerce(v) for v in (a, b, c))
    return a * (z - c) / ((z - 1) * (z - b))


def match_parameters(target: RatFunc, family: RatFunc, unknowns: Sequence[str]) -> list[dict[str, RatFunc]]:
    """Solve for parameter values that make ``family`` equal ``target``.

    Both functions are cleared of denominators and the coefficients of each
    power of ``z`` in ``num_f * den_t - num_t * den_f`` are set to zero.
    Returns every solution found, each verified by substitution; solutions
    that make the family's denominator vanish identically are dropped.
    """
    zsym = sympy.Symbol("z")
    syms = [sympy.Symbol(u) for u in unknowns]
    expr = sympy.together(family.to_sympy() - target.to_sympy())
    num = sympy.numer(expr)
    eqs = [e for e in sympy.Poly(sympy.expand(num), zsym).coeffs() if e != 0]
    if not eqs:
        return [{}]
    sols = sympy.solve(eqs, syms, dict=True)
    out = []
    for sol in sols:
        values = {str(k): RatFunc.from_sympy(v) for k, v in sol.items()}
        try:
            if ratfunc_eq(family.subs(values), target):
                out.append(values)
        except ZeroDivisionError:
            continue
    return out
