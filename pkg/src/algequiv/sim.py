"""Run realizations forward in time against concrete oracles.

Channels are scalar.  Exact oracles (linear or affine with rational
coefficients) keep every value a :class:`~fractions.Fraction`, so two
trajectories can be compared with ``==``.  Nonlinear oracles run in floating
point.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import frac_solve
from .errors import DimensionMismatch, FixedPointMismatch, FreeParameter, ImplicitNonlinear
from .statespace import StateSpace, initial_response, is_explicit, transfer_function

__all__ = [
    "OracleImpl",
    "Trajectory",
    "simulate",
    "simulate_open_loop",
    "normalize_oracle",
    "random_rational",
    "random_oracles",
    "check_io_equiv_empirical",
    "check_shift_equiv_empirical",
    "predicted_outputs",
]

EXACT_KINDS = ("linear_exact", "affine_exact")
KINDS = EXACT_KINDS + ("soft_threshold", "scaled_grad_quadratic")
FLOAT_RTOL = 1e-9


@dataclass(frozen=True)
class OracleImpl:
    """A scalar oracle ``u = phi(y)``.

    Attributes
    ----------
    kind : str
        ``linear_exact`` (``u = L y``), ``affine_exact`` (``u = L y + offset``),
        ``soft_threshold`` (shrinkage by ``lam``) or ``scaled_grad_quadratic``
        (``u = Q y + q``, in floating point).
    y_shift, u_shift :
        Change of coordinates ``phi~(y) = phi(y + y_shift) - u_shift`` used by
        :func:`normalize_oracle` for the floating-point kinds.
    """

    kind: str
    L: Fraction = Fraction(0)
    offset: Fraction = Fraction(0)
    lam: float = 0.0
    Q: float = 0.0
    q: float = 0.0
    y_shift: float | Fraction = 0
    u_shift: float | Fraction = 0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in EXACT_KINDS:
            object.__setattr__(self, "L", Fraction(self.L))
            object.__setattr__(self, "offset", Fraction(self.offset))
            if self.kind == "linear_exact" and self.offset != 0:
                raise ValueError("a linear oracle has no offset; use affine_exact")

    @classmethod
    def linear(cls, L) -> "OracleImpl":
        return cls("linear_exact", L=Fraction(L))

    @classmethod
    def affine(cls, L, offset) -> "OracleImpl":
        return cls("affine_exact", L=Fraction(L), offset=Fraction(offset))

    @property
    def exact(self) -> bool:
        return self.kind in EXACT_KINDS

    def __call__(self, y):
        if self.exact:
            return self.L * y + self.offset
        v = float(y) + float(self.y_shift)
        if self.kind == "soft_threshold":
            out = math.copysign(max(abs(v) - self.lam, 0.0), v)
        else:
            out = self.Q * v + self.q
        return out - float(self.u_shift)


@dataclass
class Trajectory:
    """Sequences ``y[k]``, ``u[k]`` and ``x[k]`` for ``k = 0 .. K-1``.

    ``x_final`` is the state after the last step.
    """

    y: list[list] = field(default_factory=list)
    u: list[list] = field(default_factory=list)
    x: list[list] = field(default_factory=list)
    x_final: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.y)

    def rows(self):
        """``(k, y..., u..., x...)`` tuples, one per step."""
        for k, (y, u, x) in enumerate(zip(self.y, self.u, self.x)):
            yield (k, *y, *u, *x)


def _numeric(ss: StateSpace):
    if ss.free_params():
        raise FreeParameter(f"bind the parameters {', '.join(ss.free_params())} before simulating")
    return tuple(m.to_fractions() for m in ss.matrices())


def _matvec(M, v):
    return [sum(a * b for a, b in zip(row, v)) for row in M]


def simulate(ss: StateSpace, oracles: Sequence[OracleImpl], x0: Sequence, K: int) -> Trajectory:
    """Iterate ``y = C x + D u``, ``u = phi(y)``, ``x+ = A x + B u`` for ``K`` steps.

    Oracles are queried in an order that makes ``D`` strictly lower triangular.
    When no such order exists the step is an implicit linear equation, which
    is solved exactly; that needs every oracle to be linear or affine.

    Raises
    ------
    ImplicitNonlinear
        If the realization is implicit and some oracle is not exact.
    DimensionMismatch
        If the number of oracles or the length of ``x0`` is wrong.
    """
    A, B, C, D = _numeric(ss)
    p, n = ss.p, ss.n
    if len(oracles) != p:
        raise DimensionMismatch(f"{p} oracles expected, got {len(oracles)}")
    if len(x0) != n:
        raise DimensionMismatch(f"initial state has length {len(x0)}, expected {n}")
    order = is_explicit(ss.D)
    if order is None and not all(o.exact for o in oracles):
        raise ImplicitNonlinear("an implicit realization can only be simulated with linear or affine oracles")
    exact = all(o.exact for o in oracles)
    x = [Fraction(v) for v in x0] if exact else [float(v) for v in x0]
    traj = Trajectory()
    for _ in range(K):
        cx = _matvec(C, x)
        if order is not None:
            u = [0] * p
            y = [0] * p
            for i in order:
                y[i] = cx[i] + sum(D[i][j] * u[j] for j in range(p) if D[i][j] != 0)
                u[i] = oracles[i](y[i])
        else:
            # (I - D L) y = C x + D c
            Lm = [o.L for o in oracles]
            c = [o.offset for o in oracles]
            lhs = [[Fraction(int(i == j)) - D[i][j] * Lm[j] for j in range(p)] for i in range(p)]
            rhs = [[cx[i] + sum(D[i][j] * c[j] for j in range(p))] for i in range(p)]
            y = [r[0] for r in frac_solve(lhs, rhs)]
            u = [oracles[i](y[i]) for i in range(p)]
        traj.x.append(list(x))
        traj.y.append(list(y))
        traj.u.append(list(u))
        ax, bu = _matvec(A, x), _matvec(B, u)
        x = [a + b for a, b in zip(ax, bu)]
    traj.x_final = list(x)
    return traj


def simulate_open_loop(ss: StateSpace, inputs: Sequence[Sequence], x0: Sequence | None = None) -> Trajectory:
    """Drive the realization with a given input sequence ``u[k]`` (no feedback)."""
    A, B, C, D = _numeric(ss)
    x = [Fraction(v) for v in (x0 if x0 is not None else [0] * ss.n)]
    if len(x) != ss.n:
        raise DimensionMismatch(f"initial state has length {len(x)}, expected {ss.n}")
    traj = Trajectory()
    for u in inputs:
        if len(u) != ss.p:
            raise DimensionMismatch(f"input of length {len(u)} for {ss.p} channels")
        u = [Fraction(v) for v in u]
        y = [a + b for a, b in zip(_matvec(C, x), _matvec(D, u))]
        traj.x.append(list(x))
        traj.y.append(y)
        traj.u.append(u)
        x = [a + b for a, b in zip(_matvec(A, x), _matvec(B, u))]
    traj.x_final = x
    return traj


def normalize_oracle(oracle: OracleImpl, y_star, u_star) -> OracleImpl:
    """Oracle ``phi~(y) = phi(y + y*) - u*``, which maps 0 to 0.

    Raises
    ------
    FixedPointMismatch
        If ``u* != phi(y*)``.
    """
    value = oracle(y_star)
    if oracle.exact:
        if value != Fraction(u_star):
            raise FixedPointMismatch(f"phi({y_star}) = {value}, not {u_star}")
        return OracleImpl.linear(oracle.L)
    if not math.isclose(float(value), float(u_star), rel_tol=FLOAT_RTOL, abs_tol=FLOAT_RTOL):
        raise FixedPointMismatch(f"phi({y_star}) = {value}, not {u_star}")
    return OracleImpl(oracle.kind, lam=oracle.lam, Q=oracle.Q, q=oracle.q,
                      y_shift=float(oracle.y_shift) + float(y_star),
                      u_shift=float(oracle.u_shift) + float(u_star), seed=oracle.seed)


# -- empirical equivalence checks -----------------------------------------

def random_rational(rng: random.Random, size: int = 9) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, size))


def random_oracles(p: int, seed: int, affine: bool = True) -> list[OracleImpl]:
    """Reproducible exact oracles, one per channel."""
    rng = random.Random(seed)
    if affine:
        return [OracleImpl.affine(random_rational(rng), random_rational(rng)) for _ in range(p)]
    return [OracleImpl.linear(random_rational(rng)) for _ in range(p)]


def _random_inputs(p: int, K: int, seed: int) -> list[list[Fraction]]:
    rng = random.Random(seed)
    return [[random_rational(rng) for _ in range(p)] for _ in range(K)]


def check_io_equiv_empirical(ss1: StateSpace, ss2: StateSpace, oracles: Sequence[OracleImpl] | None = None,
                             K: int = 25, seed: int = 0) -> bool:
    """Compare output sequences from zero initial states, exactly.

    The check passes when the outputs agree for a random rational open-loop
    input and in closed loop with ``oracles`` (random affine ones by default).
    Realizations with different numbers of oracles never agree.
    """
    if ss1.p != ss2.p:
        return False
    p = ss1.p
    inputs = _random_inputs(p, K, seed)
    if simulate_open_loop(ss1, inputs).y != simulate_open_loop(ss2, inputs).y:
        return False
    oracles = list(oracles) if oracles is not None else random_oracles(p, seed)
    t1 = simulate(ss1, oracles, [0] * ss1.n, K)
    t2 = simulate(ss2, oracles, [0] * ss2.n, K)
    return t1.y == t2.y


def check_shift_equiv_empirical(ss1: StateSpace, ss2: StateSpace, m: Sequence[int],
                                oracles: Sequence[OracleImpl] | None = None,
                                K: int = 25, seed: int = 0) -> bool:
    """Open-loop test of ``H1 D_m = D_m H2`` from zero initial states.

    ``ss2`` is driven by a random input and ``ss1`` by the same input with
    channel ``i`` delayed by ``m[i]``; output channel ``i`` of ``ss1`` must be
    output channel ``i`` of ``ss2`` delayed by ``m[i]``.  ``oracles`` is
    accepted for symmetry with :func:`check_io_equiv_empirical`; delays do not
    commute with affine maps, so the test runs open loop.
    """
    m = list(m)
    if ss1.p != ss2.p or len(m) != ss1.p:
        return False
    p = ss1.p
    inputs = _random_inputs(p, K, seed)
    zero = Fraction(0)
    delayed = [[inputs[k - m[i]][i] if k >= m[i] else zero for i in range(p)] for k in range(K)]
    y1 = simulate_open_loop(ss1, delayed).y
    y2 = simulate_open_loop(ss2, inputs).y
    for k in range(K):
        for i in range(p):
            want = y2[k - m[i]][i] if k >= m[i] else zero
            if y1[k][i] != want:
                return False
    return True


def predicted_outputs(ss: StateSpace, x0: Sequence, inputs: Sequence[Sequence], K: int) -> list[list[Fraction]]:
    """First ``K`` outputs from the series of ``O(z) x0 + H(z) u(z)``.

    Uses the Markov expansions of the transfer function and of the initial
    response ``z C (zI - A)^{-1}``, not the state recursion.
    """
    from .realize import markov

    H = transfer_function(ss)
    seqH = markov(H, K)
    x0 = [Fraction(v) for v in x0]
    p = ss.p
    out = [[Fraction(0)] * p for _ in range(K)]
    if ss.n:
        seqO = markov(initial_response(ss), K)
        for k in range(K):
            out[k] = _matvec(seqO[k], x0)
    for k in range(K):
        for j in range(min(k + 1, len(inputs))):
            Mk = seqH[k - j]
            u = [Fraction(v) for v in inputs[j]]
            contrib = _matvec(Mk, u)
            out[k] = [a + b for a, b in zip(out[k], contrib)]
    return out
