"""Minimal realizations from transfer matrices (exact Ho-Kalman)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy

from .algebra import RatFunc, RatMatrix, frac_rank, frac_rref, frac_solve
from .errors import AlgequivError, FreeParameter, ImproperEntry
from .statespace import StateSpace, TransferMatrix, minimality_report, transfer_function

__all__ = [
    "MarkovSequence",
    "HankelBlock",
    "markov",
    "hankel",
    "hankel_rank",
    "order_bound",
    "ho_kalman",
    "minreal",
]

_Z = sympy.Symbol("z")

Matrix = list[list[Fraction]]


@dataclass(frozen=True)
class MarkovSequence:
    """Coefficients of ``H(z) = M0 + M1 z^-1 + M2 z^-2 + ...``."""

    M0: Matrix
    tail: tuple[Matrix, ...]

    def __getitem__(self, k: int) -> Matrix:
        return self.M0 if k == 0 else self.tail[k - 1]

    def __len__(self) -> int:
        return 1 + len(self.tail)


@dataclass(frozen=True)
class HankelBlock:
    """Block Hankel matrices of size ``N x N`` blocks.

    Block ``(i, j)`` (1-based) of ``data`` is ``M_{i+j-1}`` and of ``shifted``
    is ``M_{i+j}``.
    """

    N: int
    data: Matrix
    shifted: Matrix


def _frac(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def _zcoeffs(rf: RatFunc) -> tuple[list[Fraction], list[Fraction]]:
    """Numerator and denominator coefficients, lowest power of ``z`` first."""
    num = [_frac(c) for c in reversed(sympy.Poly(rf.num.as_expr(), _Z).all_coeffs())]
    den = [_frac(c) for c in reversed(sympy.Poly(rf.den.as_expr(), _Z).all_coeffs())]
    return num, den


def _series(rf: RatFunc, count: int, i: int = 0, j: int = 0) -> list[Fraction]:
    """First ``count + 1`` coefficients of ``rf`` in powers of ``z^-1``."""
    if rf.is_zero():
        return [Fraction(0)] * (count + 1)
    num, den = _zcoeffs(rf)
    d = len(den) - 1
    if len(num) - 1 > d:
        raise ImproperEntry(i, j, f"entry ({i}, {j}) = {rf} is improper")
    num = num + [Fraction(0)] * (d + 1 - len(num))
    lead = den[d]
    out: list[Fraction] = []
    for k in range(count + 1):
        acc = num[d - k] if d - k >= 0 else Fraction(0)
        for s in range(1, min(k, d) + 1):
            acc -= den[d - s] * out[k - s]
        out.append(acc / lead)
    return out


def _numeric(h) -> RatMatrix:
    mat = h.matrix if isinstance(h, TransferMatrix) else h
    if mat.params:
        raise FreeParameter(f"bind the parameters {', '.join(mat.params)} to rationals first")
    return mat


def markov(h: TransferMatrix | RatMatrix, count: int) -> MarkovSequence:
    """Markov parameters ``M0 .. M_count`` by long division in ``z^-1``.

    Raises
    ------
    ImproperEntry
        If some entry is improper.
    FreeParameter
        If the matrix still contains symbolic parameters.
    """
    mat = _numeric(h)
    series = [[_series(mat[i, j], count, i, j) for j in range(mat.cols)] for i in range(mat.rows)]
    mats = [[[series[i][j][k] for j in range(mat.cols)] for i in range(mat.rows)]
            for k in range(count + 1)]
    return MarkovSequence(mats[0], tuple(mats[1:]))


def _assemble(seq: MarkovSequence, N: int, first: int) -> Matrix:
    p = len(seq.M0)
    m = len(seq.M0[0]) if p else 0
    rows: Matrix = []
    for bi in range(N):
        for r in range(p):
            row: list[Fraction] = []
            for bj in range(N):
                row.extend(seq[bi + bj + first][r][c] for c in range(m))
            rows.append(row)
    return rows


def hankel(h: TransferMatrix | RatMatrix, N: int) -> HankelBlock:
    seq = markov(h, 2 * N)
    return HankelBlock(N, _assemble(seq, N, 1), _assemble(seq, N, 2))


def order_bound(h: TransferMatrix | RatMatrix) -> int:
    """An upper bound on the minimal state dimension.

    The larger of the denominator degree of ``det H`` (when square and
    nonsingular) and the sum over columns of the degree of the least common
    denominator of that column.  The column sum always bounds the order
    because each column has a realization of that size.
    """
    mat = _numeric(h)
    col_bound = 0
    for j in range(mat.cols):
        dens = [mat[i, j].den.as_expr() for i in range(mat.rows) if not mat[i, j].is_zero()]
        if dens:
            col_bound += sympy.degree(sympy.lcm_list(dens), _Z)
    det_bound = 0
    if mat.rows == mat.cols:
        det = mat.det()
        if not det.is_zero():
            det_bound = det.degree_den
    return max(int(col_bound), int(det_bound))


def hankel_rank(h: TransferMatrix | RatMatrix, N: int | None = None) -> int:
    """Exact rank of the ``N x N`` block Hankel matrix; ``N`` defaults to :func:`order_bound`."""
    N = order_bound(h) if N is None else N
    if N == 0:
        return 0
    return frac_rank(hankel(h, N).data)


def ho_kalman(h: TransferMatrix | RatMatrix, N: int | None = None) -> StateSpace:
    """Minimal realization of a proper, parameter-free transfer matrix.

    The Hankel block is factored as ``F G`` with ``F`` its pivot columns and
    ``G`` the nonzero rows of its reduced row-echelon form; ``C`` and ``B`` are
    the first block row of ``F`` and the first block column of ``G``, and
    ``A`` solves ``F A = H+[:, pivots]`` on a set of independent rows of ``F``.
    The result is checked to reproduce ``H`` before it is returned.
    """
    tm = h if isinstance(h, TransferMatrix) else TransferMatrix(h)
    mat = _numeric(tm)
    p, m = mat.shape
    seq = markov(mat, 0)
    D = RatMatrix([[RatFunc.const(v) for v in row] for row in seq.M0])
    N = order_bound(mat) if N is None else N
    if N == 0:
        ss = StateSpace(RatMatrix.zeros(0, 0), RatMatrix.zeros(0, m), RatMatrix.zeros(p, 0), D,
                        tm.oracles, kinds=tm.kinds)
    else:
        hb = hankel(mat, N)
        rref, piv = frac_rref(hb.data)
        r = len(piv)
        F = [[row[c] for c in piv] for row in hb.data]
        G = rref[:r]
        _, rows = frac_rref([list(col) for col in zip(*F)])
        A = frac_solve([F[i] for i in rows], [[hb.shifted[i][c] for c in piv] for i in rows])
        B = [row[:m] for row in G]
        C = F[:p]
        ss = StateSpace(RatMatrix(A, shape=(r, r)), RatMatrix(B, shape=(r, m)),
                        RatMatrix(C, shape=(p, r)), D, tm.oracles, kinds=tm.kinds)
    if transfer_function(ss).matrix != mat:
        raise AlgequivError("internal error: Ho-Kalman realization does not reproduce H")
    return ss


def minreal(ss: StateSpace) -> StateSpace:
    """Minimal realization with the same transfer function as ``ss``.

    Raises
    ------
    FreeParameter
        If ``ss`` has unbound parameters.
    """
    if ss.free_params():
        raise FreeParameter(f"bind the parameters {', '.join(ss.free_params())} to rationals first")
    out = ho_kalman(transfer_function(ss))
    if not minimality_report(out).minimal:
        raise AlgequivError("internal error: Ho-Kalman result is not minimal")
    return StateSpace(out.A, out.B, out.C, out.D, ss.oracles, kinds=ss.kinds, name=ss.name)
