"""LFT equivalence between algorithms whose oracles are linearly related.

Oracles ``phi1`` and ``phi2`` are linearly related by an invertible block
matrix ``M = [[P, Q], [R, S]]`` when the graph of ``phi1`` is ``M`` applied
to the graph of ``phi2``.  Algorithms ``H1`` (using ``phi1``) and ``H2``
(using ``phi2``) are then LFT-equivalent exactly when
``[I, -H1] M [H2; I] = 0``, which solves to
``H1 = (P H2 + Q)(R H2 + S)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import RatFunc, RatMatrix, Scalar
from .errors import (
    AlgequivError,
    ImproperResult,
    SingularBlock,
    SingularDenominator,
    SingularM,
    UnsupportedPair,
)
from .kinds import OracleKind
from .statespace import TransferMatrix

__all__ = [
    "LftMatrix",
    "prox_table",
    "lft_residual",
    "lft_equivalent",
    "lft_transform",
    "embed_common",
    "swap_oracles",
    "commutation_transform",
    "equivariance_transform",
    "prox_family_transform",
]


@dataclass(frozen=True, eq=False)
class LftMatrix:
    """Invertible block matrix ``[[P, Q], [R, S]]`` with ``p x p`` blocks.

    Invertibility is checked with an exact determinant at construction.

    Raises
    ------
    SingularM
        If the assembled ``2p x 2p`` matrix is singular.
    """

    P: RatMatrix
    Q: RatMatrix
    R: RatMatrix
    S: RatMatrix
    note: str = ""

    def __post_init__(self):
        blocks = [b if isinstance(b, RatMatrix) else RatMatrix(b) for b in (self.P, self.Q, self.R, self.S)]
        for name, b in zip("PQRS", blocks):
            object.__setattr__(self, name, b)
        p = blocks[0].rows
        if any(b.shape != (p, p) for b in blocks):
            raise ValueError(f"LFT blocks must all be {p}x{p}, got {[b.shape for b in blocks]}")
        if self.full().det().is_zero():
            raise SingularM(f"LFT matrix is singular{': ' + self.note if self.note else ''}")

    @classmethod
    def from_matrix(cls, full, note: str = "") -> "LftMatrix":
        full = full if isinstance(full, RatMatrix) else RatMatrix(full)
        if full.rows != full.cols or full.rows % 2:
            raise ValueError(f"expected a square matrix of even size, got {full.shape}")
        p = full.rows // 2
        lo, hi = list(range(p)), list(range(p, 2 * p))
        return cls(full.submatrix(lo, lo), full.submatrix(lo, hi),
                   full.submatrix(hi, lo), full.submatrix(hi, hi), note)

    @classmethod
    def identity(cls, p: int) -> "LftMatrix":
        eye, zero = RatMatrix.identity(p), RatMatrix.zeros(p, p)
        return cls(eye, zero, zero, eye, "identity")

    @classmethod
    def diagonal(cls, A: RatMatrix, B: RatMatrix, note: str = "") -> "LftMatrix":
        """``[[A, 0], [0, B]]``, the relation of an equivariant oracle."""
        zero = RatMatrix.zeros(A.rows, A.rows)
        return cls(A, zero, zero, B, note)

    @property
    def p(self) -> int:
        return self.P.rows

    def full(self) -> RatMatrix:
        return RatMatrix.block([[self.P, self.Q], [self.R, self.S]])

    def inverse(self) -> "LftMatrix":
        return LftMatrix.from_matrix(self.full().inverse(), f"inverse of {self.note}" if self.note else "")

    def __matmul__(self, other: "LftMatrix") -> "LftMatrix":
        return LftMatrix.from_matrix(self.full() @ other.full())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LftMatrix):
            return NotImplemented
        return self.full() == other.full()

    __hash__ = None

    def subs(self, values) -> "LftMatrix":
        return LftMatrix.from_matrix(self.full().subs(values), self.note)

    def to_json(self) -> dict:
        return {"P": self.P.to_json(), "Q": self.Q.to_json(), "R": self.R.to_json(),
                "S": self.S.to_json(), "note": self.note}

    def __str__(self) -> str:
        return str(self.full())


# -- the prox / subdifferential table ---------------------------------

_ORDER = ("subdiff", "subdiff_conj", "prox", "prox_conj")


def _table(t: RatFunc) -> list[list[list[list[RatFunc]]]]:
    one, zero = RatFunc.one(), RatFunc.zero()
    it = one / t
    # rows: phi1, columns: phi2; graph(phi1) = M graph(phi2)
    return [
        [[[one, zero], [zero, one]], [[zero, one], [one, zero]],
         [[zero, one], [it, -it]], [[t, -t], [zero, one]]],
        [[[zero, one], [one, zero]], [[one, zero], [zero, one]],
         [[it, -it], [zero, one]], [[zero, one], [t, -t]]],
        [[[one, t], [one, zero]], [[t, one], [zero, one]],
         [[one, zero], [zero, one]], [[t, zero], [t, -t]]],
        [[[it, one], [zero, one]], [[one, it], [one, zero]],
         [[it, zero], [it, -it]], [[one, zero], [zero, one]]],
    ]


def _stepsize(*kinds: OracleKind) -> RatFunc:
    steps = {k.stepsize for k in kinds if k.tag in ("prox", "prox_conj") and k.stepsize}
    if len(steps) > 1:
        raise UnsupportedPair(f"proximal kinds use different step sizes {sorted(steps)}")
    return RatFunc.parse(steps.pop()) if steps else RatFunc.param("t")


def prox_table(phi1: OracleKind | str, phi2: OracleKind | str) -> LftMatrix:
    """Relation matrix ``M`` with ``graph(phi1) = M graph(phi2)``.

    Covers every ordered pair of ``subdiff``, ``subdiff_conj``, ``prox`` and
    ``prox_conj`` applied to one function.  A step size of ``"1"`` is the
    constant one.

    Examples
    --------
    >>> str(prox_table("prox", "subdiff"))
    '[[1, t],\\n [1, 0]]'

    Raises
    ------
    UnsupportedPair
        For ``generic`` kinds, different functions or different step sizes.
    """
    k1 = phi1 if isinstance(phi1, OracleKind) else OracleKind.parse(phi1)
    k2 = phi2 if isinstance(phi2, OracleKind) else OracleKind.parse(phi2)
    if k1.tag not in _ORDER or k2.tag not in _ORDER:
        raise UnsupportedPair(f"no linear relation is known between {k1} and {k2}")
    if k1.function and k2.function and k1.function != k2.function:
        raise UnsupportedPair(f"{k1} and {k2} act on different functions")
    t = _stepsize(k1, k2)
    m = _table(t)[_ORDER.index(k1.tag)][_ORDER.index(k2.tag)]
    return LftMatrix(RatMatrix([[m[0][0]]]), RatMatrix([[m[0][1]]]),
                     RatMatrix([[m[1][0]]]), RatMatrix([[m[1][1]]]),
                     f"{k1.label()} from {k2.label()}")


# -- the algebraic test and transform ----------------------------------

def _as_matrix(h) -> RatMatrix:
    return h.matrix if isinstance(h, TransferMatrix) else h


def lft_residual(h1, h2, M: LftMatrix) -> RatMatrix:
    """``[I, -H1] M [H2; I] = (P H2 + Q) - H1 (R H2 + S)``."""
    a, b = _as_matrix(h1), _as_matrix(h2)
    return (M.P @ b + M.Q) - a @ (M.R @ b + M.S)


def lft_equivalent(h1, h2, M: LftMatrix) -> bool:
    """Decide ``[I, -H1] M [H2; I] = 0`` exactly.

    The dual form ``[I, -H2] M^{-1} [H1; I] = 0`` is evaluated as well and
    must agree.
    """
    a, b = _as_matrix(h1), _as_matrix(h2)
    if a.shape != b.shape or M.p != a.rows:
        raise ValueError(f"shapes {a.shape}, {b.shape} do not fit an LFT matrix with p = {M.p}")
    holds = lft_residual(a, b, M).is_zero()
    dual = lft_residual(b, a, M.inverse()).is_zero()
    if holds != dual:
        raise AlgequivError("the two forms of the LFT condition disagree; a block inverse is singular")
    return holds


def lft_transform(h2: TransferMatrix, M: LftMatrix, oracles: Sequence[str] | None = None,
                  kinds: Sequence[OracleKind | None] | None = None) -> TransferMatrix:
    """``H1 = (P H2 + Q)(R H2 + S)^{-1}``, the algorithm related to ``H2`` by ``M``.

    Raises
    ------
    SingularDenominator
        If ``R H2 + S`` is singular.
    """
    b = _as_matrix(h2)
    den = M.R @ b + M.S
    if den.det().is_zero():
        raise SingularDenominator("R H2 + S is singular; no LFT-equivalent algorithm exists for this M")
    h1 = (M.P @ b + M.Q) @ den.inverse()
    if not lft_equivalent(h1, b, M):
        raise AlgequivError("internal error: LFT transform fails its own check")
    if not isinstance(h2, TransferMatrix):
        return TransferMatrix(h1)
    return TransferMatrix(h1, tuple(oracles) if oracles else h2.oracles,
                          tuple(kinds) if kinds else h2.kinds)


def embed_common(M2: LftMatrix, index: int, p: int) -> LftMatrix:
    """Extend a one-oracle relation to ``p`` channels, identity elsewhere.

    ``index`` is the 0-based channel that carries ``M2``.
    """
    if M2.p != 1:
        raise ValueError("embed_common expects a relation for a single oracle")
    if not 0 <= index < p:
        raise ValueError(f"channel index {index} out of range for p = {p}")

    def put(block: RatMatrix, fill: int) -> RatMatrix:
        d = [RatFunc.const(fill)] * p
        d[index] = block[0, 0]
        return RatMatrix.diag(d)

    return LftMatrix(put(M2.P, 1), put(M2.Q, 0), put(M2.R, 0), put(M2.S, 1),
                     f"{M2.note} on channel {index + 1}" if M2.note else "")


def swap_oracles(h: TransferMatrix, perm: Sequence[int]) -> TransferMatrix:
    """Reorder channels: new channel ``a`` is old channel ``perm[a]``."""
    perm = list(perm)
    if sorted(perm) != list(range(h.p)):
        raise ValueError(f"{perm} is not a permutation of {h.p} channels")
    mat = h.matrix.submatrix(perm, perm)
    return TransferMatrix(mat, tuple(h.oracles[k] for k in perm), tuple(h.kinds[k] for k in perm))


def _check_proper(mat: RatMatrix) -> None:
    for i, j, e in mat.entries():
        if not e.is_proper():
            raise ImproperResult(i, j, f"entry ({i}, {j}) = {e} is improper")


def equivariance_transform(h: TransferMatrix, Ahat: Scalar, Bhat: Scalar, index: int) -> TransferMatrix:
    """``A H B^{-1}`` with ``A``, ``B`` acting on channel ``index`` only.

    Applies when ``phi1(A y) = B phi2(y)`` for the oracle on that channel.
    """
    Ahat, Bhat = RatFunc.coerce(Ahat), RatFunc.coerce(Bhat)
    if Ahat.is_zero() or Bhat.is_zero():
        raise SingularM("equivariance factors must be nonzero")
    binv = Bhat.inverse()
    rows = []
    for i in range(h.p):
        row = []
        for j in range(h.p):
            e = h.matrix[i, j]
            if i == index:
                e = Ahat * e
            if j == index:
                e = e * binv
            row.append(e)
        rows.append(row)
    mat = RatMatrix(rows)
    _check_proper(mat)
    return h.with_matrix(mat)


def commutation_transform(h: TransferMatrix, Chat: Scalar, index: int) -> TransferMatrix:
    """``C H C^{-1}`` with ``C = diag(1, ..., Chat, ..., 1)``.

    Valid when the oracle on channel ``index`` commutes with the LTI system
    ``Chat``.  With ``Chat = z^{-m}`` this is a shift of that channel.
    """
    return equivariance_transform(h, Chat, Chat, index)


# -- closed forms for swapping a prox or subdifferential oracle ---------

def _split(mat: RatMatrix):
    p = mat.rows
    lo, hi = list(range(p - 1)), [p - 1]
    return (mat.submatrix(lo, lo), mat.submatrix(lo, hi),
            mat.submatrix(hi, lo), mat.submatrix(hi, hi))


def _closed_form(mat: RatMatrix, source: str, target: str, t: RatFunc) -> RatMatrix:
    h11, h12, h21, h22 = _split(mat)
    eye = RatMatrix.identity(1)
    it = RatFunc.one() / t
    if source == "prox":
        if target == "subdiff_conj":
            return RatMatrix.block([[h11, h12], [h21.scale(it), (eye - h22).scale(-it)]])
        den = eye - h22
        if den.det().is_zero():
            raise SingularBlock("I - H22 is singular")
        inv = den.inverse()
        top = [h11 + h12 @ inv @ h21, (h12 @ inv).scale(-t)]
        if target == "prox_conj":
            return RatMatrix.block([top, [(inv @ h21).scale(it), -(h22 @ inv)]])
        return RatMatrix.block([top, [inv @ h21, inv.scale(-t)]])
    # source is subdiff
    if target == "prox_conj":
        return RatMatrix.block([[h11, h12], [h21.scale(it), h22.scale(it) + eye]])
    if h22.det().is_zero():
        raise SingularBlock("H22 is singular")
    inv = h22.inverse()
    top = [h11 - h12 @ inv @ h21, h12 @ inv]
    if target == "subdiff_conj":
        return RatMatrix.block([top, [-(inv @ h21), inv]])
    return RatMatrix.block([top, [(inv @ h21).scale(-t), eye + inv.scale(t)]])


def prox_family_transform(h: TransferMatrix, channel: int, target: OracleKind | str,
                          source: OracleKind | str | None = None) -> TransferMatrix:
    """Replace the oracle on ``channel`` by a linearly related one.

    The oracle on ``channel`` must be a proximal map or a subdifferential; the
    remaining channels are kept.  The closed-form block expressions are used
    and checked against the general LFT route before returning.

    Parameters
    ----------
    h : TransferMatrix
    channel : int
        0-based channel whose oracle is swapped.
    target : OracleKind or str
        Kind of the new oracle.
    source : OracleKind or str, optional
        Kind of the current oracle; defaults to ``h.kinds[channel]``.

    Raises
    ------
    SingularBlock
        When the block inverse required by the closed form does not exist.
    UnsupportedPair
        When the current oracle is neither ``prox`` nor ``subdiff``.
    """
    src = source if source is not None else h.kinds[channel]
    if src is None:
        raise UnsupportedPair(f"channel {channel} has no oracle kind; pass source=")
    src = src if isinstance(src, OracleKind) else OracleKind.parse(src)
    tgt = target if isinstance(target, OracleKind) else OracleKind.parse(target)
    if src.tag not in ("prox", "subdiff"):
        raise UnsupportedPair(f"closed forms exist for prox and subdiff oracles, not {src.tag}")
    if tgt.tag not in _ORDER:
        raise UnsupportedPair(f"cannot swap to a {tgt.tag} oracle")
    step = src.stepsize if src.tag == "prox" else tgt.stepsize
    tgt = OracleKind(tgt.tag, step if tgt.tag in ("prox", "prox_conj") else None,
                     src.function or tgt.function)
    p = h.p
    oracles = list(h.oracles)
    kinds = list(h.kinds)
    oracles[channel] = tgt.label()
    kinds[channel] = tgt
    if tgt.tag == src.tag:
        return TransferMatrix(h.matrix, tuple(oracles), tuple(kinds))

    t = _stepsize(src, tgt)
    perm = [k for k in range(p) if k != channel] + [channel]
    back = [perm.index(k) for k in range(p)]
    moved = h.matrix.submatrix(perm, perm)
    closed = _closed_form(moved, src.tag, tgt.tag, t).submatrix(back, back)

    M = embed_common(prox_table(tgt, src), channel, p)
    try:
        generic = lft_transform(h.matrix, M)
    except SingularDenominator as exc:
        raise SingularBlock(str(exc)) from exc
    if closed != _as_matrix(generic):
        raise AlgequivError("internal error: closed form disagrees with the general LFT transform")
    return TransferMatrix(closed, tuple(oracles), tuple(kinds))
