"""Exact equivalence checks for first-order optimization algorithms.

Algorithms written as linear recurrences around oracle calls are lowered to
state-space realizations and compared through their transfer functions in
``z``: oracle equivalence, shift equivalence under per-channel delays, and
equivalence up to a linear change of oracle (proximal map, conjugate,
subdifferential).
"""

from .algebra import RatFunc, RatMatrix, ratfunc_eq
from .corpus import realization
from .dsl import builtin, compile_source, emit_source, lower, parse
from .equiv import (
    MultiShift,
    ShiftCertificate,
    conj_by_multishift,
    enumerate_shift_class,
    match_parameters,
    multishift_tf,
    oracle_equivalent,
    shift_equivalent,
    unified_momentum,
)
from .errors import AlgequivError
from .kinds import OracleKind
from .lft import (
    LftMatrix,
    commutation_transform,
    embed_common,
    equivariance_transform,
    lft_equivalent,
    lft_residual,
    lft_transform,
    prox_family_transform,
    prox_table,
    swap_oracles,
)
from .realize import hankel, hankel_rank, ho_kalman, markov, minreal
from .sim import (
    OracleImpl,
    Trajectory,
    check_io_equiv_empirical,
    check_shift_equiv_empirical,
    simulate,
    simulate_open_loop,
)
from .statespace import (
    StateSpace,
    TransferMatrix,
    apply_state_transform,
    is_explicit,
    minimality_report,
    transfer_function,
)

__version__ = "0.1.0"

__all__ = [
    "MultiShift",
    "ShiftCertificate",
    "conj_by_multishift",
    "enumerate_shift_class",
    "match_parameters",
    "multishift_tf",
    "oracle_equivalent",
    "shift_equivalent",
    "unified_momentum",
    "LftMatrix",
    "commutation_transform",
    "embed_common",
    "equivariance_transform",
    "lft_equivalent",
    "lft_residual",
    "lft_transform",
    "prox_family_transform",
    "prox_table",
    "swap_oracles",
    "OracleImpl",
    "Trajectory",
    "check_io_equiv_empirical",
    "check_shift_equiv_empirical",
    "simulate",
    "simulate_open_loop",
    "StateSpace",
    "TransferMatrix",
    "apply_state_transform",
    "is_explicit",
    "minimality_report",
    "transfer_function",
    "RatFunc",
    "RatMatrix",
    "ratfunc_eq",
    "realization",
    "builtin",
    "compile_source",
    "emit_source",
    "lower",
    "parse",
    "AlgequivError",
    "OracleKind",
    "hankel",
    "hankel_rank",
    "ho_kalman",
    "markov",
    "minreal",
]
