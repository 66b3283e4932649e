"""State-space realizations ``x+ = A x + B u``, ``y = C x + D u`` and their transfer functions."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import RatFunc, RatMatrix, Scalar, frac_rank, frac_rref, frac_solve
from .errors import (
    DimensionMismatch,
    NotMinimal,
    Singular,
    SingularD,
    SymbolicRank,
)
from .kinds import OracleKind

__all__ = [
    "TransferMatrix",
    "StateSpace",
    "MinimalityReport",
    "transfer_function",
    "initial_response",
    "is_explicit",
    "minimality_report",
    "controllability_matrix",
    "observability_matrix",
    "apply_state_transform",
    "similarity_transform",
    "ss_inverse",
    "match_initial_condition",
]


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """A matrix of rational functions in ``z`` with oracle channel labels.

    Row ``i`` is the query ``y_i`` sent to oracle ``i``; column ``j`` is the
    answer ``u_j`` of oracle ``j``.
    """

    matrix: RatMatrix
    oracles: tuple[str, ...] = ()
    kinds: tuple[OracleKind | None, ...] = ()

    def __post_init__(self):
        if not isinstance(self.matrix, RatMatrix):
            object.__setattr__(self, "matrix", RatMatrix(self.matrix))
        if not self.oracles:
            object.__setattr__(self, "oracles",
                               tuple(f"phi{i + 1}" for i in range(self.matrix.rows)))
        object.__setattr__(self, "oracles", tuple(self.oracles))
        if not self.kinds:
            object.__setattr__(self, "kinds", (None,) * len(self.oracles))
        object.__setattr__(self, "kinds", tuple(self.kinds))

    @classmethod
    def from_rows(cls, rows, oracles: Sequence[str] = (), kinds=()) -> "TransferMatrix":
        return cls(RatMatrix(rows), tuple(oracles), tuple(kinds))

    @property
    def p(self) -> int:
        return self.matrix.rows

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __getitem__(self, idx) -> RatFunc:
        return self.matrix[idx]

    def __eq__(self, other) -> bool:
        if isinstance(other, TransferMatrix):
            return self.oracles == other.oracles and self.matrix == other.matrix
        if isinstance(other, RatMatrix):
            return self.matrix == other
        return NotImplemented

    __hash__ = None

    def with_matrix(self, matrix: RatMatrix) -> "TransferMatrix":
        return replace(self, matrix=matrix)

    def relabel(self, oracles: Sequence[str], kinds=None) -> "TransferMatrix":
        return TransferMatrix(self.matrix, tuple(oracles), tuple(kinds) if kinds else self.kinds)

    def subs(self, values: Mapping[str, Scalar]) -> "TransferMatrix":
        return self.with_matrix(self.matrix.subs(values))

    def relative_degrees(self):
        return self.matrix.relative_degrees()

    def __str__(self) -> str:
        head = "oracles: " + ", ".join(self.oracles)
        return head + "\n" + str(self.matrix)

    def to_json(self) -> dict:
        return {
            "oracles": list(self.oracles),
            "rows": self.matrix.rows,
            "cols": self.matrix.cols,
            "entries": [[e.to_json() for e in r] for r in self.matrix.tolist()],
            "text": self.matrix.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TransferMatrix":
        entries = data.get("entries", data.get("text"))
        shape = (data["rows"], data["cols"]) if "rows" in data else None
        mat = RatMatrix([[RatFunc.from_json(e) for e in r] for r in entries], shape=shape)
        return cls(mat, tuple(data.get("oracles", ())))


@dataclass(frozen=True)
class MinimalityReport:
    controllable: bool
    observable: bool
    minimal: bool
    controllability_rank: int
    observability_rank: int


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Realization ``(A, B, C, D)`` of an algorithm in feedback with ``p`` oracles.

    Attributes
    ----------
    A, B, C, D : RatMatrix
        ``n x n``, ``n x p``, ``p x n`` and ``p x p`` matrices whose entries
        are free of ``z`` (they may contain parameters).
    oracles : tuple of str
        One label per oracle channel.
    params : tuple of str
        Declared parameter names.
    state_names : tuple of str
        Optional names for the state components, used when emitting source.
    kinds : tuple
        Optional :class:`OracleKind` per channel.
    """

    A: RatMatrix
    B: RatMatrix
    C: RatMatrix
    D: RatMatrix
    oracles: tuple[str, ...] = ()
    params: tuple[str, ...] = ()
    state_names: tuple[str, ...] = ()
    kinds: tuple[OracleKind | None, ...] = ()
    name: str = ""

    def __post_init__(self):
        conv = {}
        for key in "ABCD":
            m = getattr(self, key)
            if not isinstance(m, RatMatrix):
                conv[key] = RatMatrix(m)
        for key, m in conv.items():
            object.__setattr__(self, key, m)
        A, B, C, D = self.A, self.B, self.C, self.D
        p = D.rows
        n = A.rows
        if n == 0:
            if B.rows != 0:
                raise DimensionMismatch("B must have zero rows when A is empty")
            object.__setattr__(self, "A", RatMatrix.zeros(0, 0))
            object.__setattr__(self, "B", RatMatrix.zeros(0, p))
            object.__setattr__(self, "C", RatMatrix.zeros(p, 0))
            A, B, C = self.A, self.B, self.C
        if p < 1:
            raise DimensionMismatch("a realization needs at least one oracle")
        if A.cols != n or B.shape != (n, p) or C.shape != (p, n) or D.shape != (p, p):
            raise DimensionMismatch(
                f"inconsistent shapes A{A.shape} B{B.shape} C{C.shape} D{D.shape}")
        for key in "ABCD":
            for i, j, e in getattr(self, key).entries():
                if not e.is_constant():
                    raise ValueError(f"{key}[{i},{j}] = {e} depends on z")
        if not self.oracles:
            object.__setattr__(self, "oracles", tuple(f"phi{i + 1}" for i in range(p)))
        if len(self.oracles) != p:
            raise DimensionMismatch("one oracle label per channel is required")
        object.__setattr__(self, "oracles", tuple(self.oracles))
        declared = set(self.params)
        for key in "ABCD":
            declared.update(getattr(self, key).params)
        object.__setattr__(self, "params", tuple(sorted(declared)))
        if not self.state_names:
            object.__setattr__(self, "state_names", tuple(f"x{i + 1}" for i in range(n)))
        object.__setattr__(self, "state_names", tuple(self.state_names))
        if not self.kinds:
            object.__setattr__(self, "kinds", (None,) * p)
        object.__setattr__(self, "kinds", tuple(self.kinds))

    @property
    def n(self) -> int:
        return self.A.rows

    @property
    def p(self) -> int:
        return self.D.rows

    def matrices(self) -> tuple[RatMatrix, RatMatrix, RatMatrix, RatMatrix]:
        return self.A, self.B, self.C, self.D

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateSpace):
            return NotImplemented
        return all(a.shape == b.shape and a == b for a, b in zip(self.matrices(), other.matrices()))

    __hash__ = None

    def free_params(self) -> tuple[str, ...]:
        names: set[str] = set()
        for m in self.matrices():
            names.update(m.params)
        return tuple(sorted(names))

    def subs(self, values: Mapping[str, Scalar]) -> "StateSpace":
        """Bind parameters to rationals (or expressions)."""
        return replace(self, A=self.A.subs(values), B=self.B.subs(values),
                       C=self.C.subs(values), D=self.D.subs(values),
                       params=tuple(p for p in self.params if p not in values))

    instantiate = subs

    def transfer_function(self) -> TransferMatrix:
        return transfer_function(self)

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "C": self.C.to_json(),
            "D": self.D.to_json(),
            "oracles": list(self.oracles),
            "params": list(self.params),
            "states": list(self.state_names),
        }

    @classmethod
    def from_json(cls, data: Mapping | str) -> "StateSpace":
        if isinstance(data, str):
            data = json.loads(data)
        p = len(data["D"])
        D = RatMatrix.from_json(data["D"])
        A_rows = data.get("A") or []
        n = len(A_rows)
        A = RatMatrix.from_json(A_rows, shape=(n, n))
        B = RatMatrix.from_json(data.get("B") or [], shape=(n, p))
        C = RatMatrix.from_json(data.get("C") or [[] for _ in range(p)], shape=(p, n))
        return cls(A, B, C, D, tuple(data.get("oracles", ())), tuple(data.get("params", ())),
                   tuple(data.get("states", ())))

    def __str__(self) -> str:
        return (f"StateSpace(n={self.n}, oracles={list(self.oracles)})\n"
                f"A = {self.A}\nB = {self.B}\nC = {self.C}\nD = {self.D}")


def _z_minus_a(A: RatMatrix) -> RatMatrix:
    z = RatFunc.z()
    n = A.rows
    return RatMatrix([[(z if i == j else 0) - A[i, j] for j in range(n)] for i in range(n)],
                     shape=(n, n))


def transfer_function(ss: StateSpace) -> TransferMatrix:
    """Return ``D + C (zI - A)^{-1} B``.

    Examples
    --------
    >>> gd = StateSpace([[1]], [["-1/5"]], [[1]], [[0]], ("grad_f",))
    >>> str(transfer_function(gd)[0, 0])
    '-1/(5*(z - 1))'
    """
    if ss.n == 0:
        H = ss.D
    else:
        X = _z_minus_a(ss.A).solve(ss.B)
        H = ss.D + ss.C @ X
    return TransferMatrix(H, ss.oracles, ss.kinds)


def initial_response(ss: StateSpace) -> TransferMatrix:
    """Return ``z C (zI - A)^{-1}``, the map from ``x0`` to the output transform."""
    if ss.n == 0:
        return TransferMatrix(RatMatrix.zeros(ss.p, 0), ss.oracles, ss.kinds)
    # solve (zI - A)^T W = C^T, so that W^T = C (zI - A)^{-1}
    W = _z_minus_a(ss.A).T.solve(ss.C.T)
    return TransferMatrix(W.T.scale(RatFunc.z()), ss.oracles, ss.kinds)


def is_explicit(ss: StateSpace | RatMatrix) -> tuple[int, ...] | None:
    """Oracle evaluation order making ``D`` strictly lower triangular, or None.

    The order is a topological sort of the graph with an edge ``j -> i``
    whenever ``D[i, j] != 0``; ties go to the smallest index.  Indices are
    0-based.  ``None`` means the algorithm is implicit.
    """
    D = ss.D if isinstance(ss, StateSpace) else ss
    p = D.rows
    indeg = [0] * p
    succ: list[list[int]] = [[] for _ in range(p)]
    for i in range(p):
        for j in range(p):
            if not D[i, j].is_zero():
                if i == j:
                    return None
                succ[j].append(i)
                indeg[i] += 1
    heap = [i for i in range(p) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        j = heapq.heappop(heap)
        order.append(j)
        for i in succ[j]:
            indeg[i] -= 1
            if indeg[i] == 0:
                heapq.heappush(heap, i)
    return tuple(order) if len(order) == p else None


def _numeric(m: RatMatrix, what: str) -> list[list[Fraction]]:
    if m.params:
        raise SymbolicRank(f"{what} contains free parameters {list(m.params)}; bind them first")
    return m.to_fractions()


def controllability_matrix(ss: StateSpace) -> RatMatrix:
    """``[B, AB, ..., A^{n-1} B]``."""
    blocks = []
    cur = ss.B
    for _ in range(ss.n):
        blocks.append(cur)
        cur = ss.A @ cur
    if not blocks:
        return RatMatrix.zeros(0, 0)
    return RatMatrix.block([blocks])


def observability_matrix(ss: StateSpace) -> RatMatrix:
    """``[C; CA; ...; C A^{n-1}]``."""
    blocks = []
    cur = ss.C
    for _ in range(ss.n):
        blocks.append([cur])
        cur = cur @ ss.A
    if not blocks:
        return RatMatrix.zeros(0, 0)
    return RatMatrix.block(blocks)


def minimality_report(ss: StateSpace) -> MinimalityReport:
    """Exact controllability and observability ranks.

    Raises
    ------
    SymbolicRank
        If the realization still has free parameters.
    """
    n = ss.n
    if n == 0:
        return MinimalityReport(True, True, True, 0, 0)
    rc = frac_rank(_numeric(controllability_matrix(ss), "controllability matrix"))
    ro = frac_rank(_numeric(observability_matrix(ss), "observability matrix"))
    return MinimalityReport(rc == n, ro == n, rc == n and ro == n, rc, ro)


def apply_state_transform(ss: StateSpace, T) -> StateSpace:
    """Change of state coordinates ``x' = T x``: ``(T A T^-1, T B, C T^-1, D)``."""
    T = T if isinstance(T, RatMatrix) else RatMatrix(T)
    if T.shape != (ss.n, ss.n):
        raise DimensionMismatch(f"T must be {ss.n}x{ss.n}")
    Ti = T.inverse()
    return replace(ss, A=T @ ss.A @ Ti, B=T @ ss.B, C=ss.C @ Ti,
                   state_names=tuple(f"x{i + 1}" for i in range(ss.n)))


def similarity_transform(ss1: StateSpace, ss2: StateSpace) -> RatMatrix | None:
    """Find ``T`` with ``ss2 == apply_state_transform(ss1, T)``.

    Returns None when the transfer functions differ or no such ``T`` exists.

    Raises
    ------
    NotMinimal
        If either realization is not minimal.
    """
    for label, ss in (("first", ss1), ("second", ss2)):
        if not minimality_report(ss).minimal:
            raise NotMinimal(f"the {label} realization is not minimal")
    if ss1.n != ss2.n or ss1.p != ss2.p:
        return None
    if transfer_function(ss1).matrix != transfer_function(ss2).matrix:
        return None
    n = ss1.n
    if n == 0:
        return RatMatrix.zeros(0, 0)
    c1 = controllability_matrix(ss1).to_fractions()
    c2 = controllability_matrix(ss2).to_fractions()
    # n independent columns of C1 determine T through T C1[:, cols] = C2[:, cols]
    cols = frac_rref(c1)[1][:n]
    sub1 = [[c1[i][j] for j in cols] for i in range(n)]
    sub2 = [[c2[i][j] for j in cols] for i in range(n)]
    # T = sub2 sub1^{-1}  <=>  sub1^T T^T = sub2^T
    Tt = frac_solve([list(r) for r in zip(*sub1)], [list(r) for r in zip(*sub2)])
    T = RatMatrix([list(r) for r in zip(*Tt)])
    return T if apply_state_transform(ss1, T) == ss2 else None


def match_initial_condition(ss1: StateSpace, ss2: StateSpace, x2_0: Sequence[Scalar]) -> list[Fraction]:
    """Initial state of ``ss1`` producing the same free response as ``ss2`` from ``x2_0``."""
    T = similarity_transform(ss1, ss2)
    if T is None:
        raise NotMinimal("realizations are not related by a state transform")
    x = RatMatrix.column([RatFunc.coerce(v) for v in x2_0])
    return [e.to_fraction() for e in (T.inverse() @ x).T.tolist()[0]] if ss1.n else []


def ss_inverse(ss: StateSpace) -> StateSpace:
    """Realization of ``H^{-1}``: ``(A - B D^-1 C, B D^-1, -D^-1 C, D^-1)``.

    Raises
    ------
    SingularD
        If ``D`` is not invertible.
    """
    try:
        Di = ss.D.inverse()
    except Singular:
        raise SingularD("feedthrough matrix D is singular") from None
    return replace(ss, A=ss.A - ss.B @ Di @ ss.C, B=ss.B @ Di, C=-(Di @ ss.C), D=Di)
