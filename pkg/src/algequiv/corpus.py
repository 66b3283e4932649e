"""Registry of the built-in algorithm sources shipped with the package."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .dsl import AlgorithmAST, lower, parse
from .errors import UnknownAlgorithm
from .statespace import StateSpace

__all__ = ["AlgorithmInfo", "REGISTRY", "ALIASES", "names", "resolve", "source", "builtin", "realization", "bindings"]


@dataclass(frozen=True)
class AlgorithmInfo:
    name: str
    title: str
    number: str  # numbering used in the literature this corpus follows; "" when unnumbered


_ENTRIES = [
    ("arrow_hurwicz", "Modified Arrow-Hurwicz", "1"),
    ("extrapolation_from_past", "Extrapolation from the past", "2"),
    ("optimistic_mirror_descent", "Optimistic mirror descent", "3"),
    ("reflected_gradient", "Reflected gradient", "4"),
    ("douglas_rachford", "Douglas-Rachford splitting", "5"),
    ("admm", "Simplified ADMM", "6"),
    ("two_step_a", "Two-step gradient method, form A", "7"),
    ("two_step_b", "Two-step gradient method, form B", "8"),
    ("two_step_c", "Two-step method with a cancelling pole", "9"),
    ("gradient_descent", "Gradient descent", "10"),
    ("proximal_gradient", "Proximal gradient", "11"),
    ("conjugate_proximal_gradient", "Proximal gradient through the conjugate prox", "12"),
    ("subdifferential_gradient", "Implicit subdifferential form of proximal gradient", ""),
    ("conjugate_subdifferential_gradient", "Implicit conjugate-subdifferential form", ""),
    ("heavy_ball", "Polyak's heavy ball", "14"),
    ("nesterov", "Nesterov's accelerated gradient", "15"),
    ("triple_momentum", "Triple momentum", "16"),
    ("quasi_hyperbolic_momentum", "Quasi-hyperbolic momentum", "17"),
    ("stochastic_unified_momentum", "Stochastic unified momentum", "18"),
    ("unified_stochastic_momentum", "Unified stochastic momentum", "18b"),
    ("nids", "NIDS (scalar mixing)", "NIDS"),
    ("exact_diffusion", "Exact diffusion (scalar mixing)", "ED"),
    ("pd3o", "Primal-dual three-operator splitting", "19"),
    ("pd3o_b", "PD3O, dual-first form", "19b"),
    ("pd3o_c", "PD3O, shift (0,1,1)", "19c"),
    ("pd3o_d", "PD3O, alternate dual-first form", "19d"),
    ("chambolle_pock", "Chambolle-Pock", "21"),
    ("davis_yin", "Davis-Yin splitting", "22"),
    ("dr_quadratic", "Douglas-Rachford for a quadratic f", "24"),
]

REGISTRY: dict[str, AlgorithmInfo] = {n: AlgorithmInfo(n, t, k) for n, t, k in _ENTRIES}

# Short names accepted wherever a corpus name is.
ALIASES = {
    "ah": "arrow_hurwicz",
    "popov": "extrapolation_from_past",
    "efp": "extrapolation_from_past",
    "omd": "optimistic_mirror_descent",
    "rg": "reflected_gradient",
    "dr": "douglas_rachford",
    "gd": "gradient_descent",
    "pg": "proximal_gradient",
    "hb": "heavy_ball",
    "nag": "nesterov",
    "tmm": "triple_momentum",
    "qhm": "quasi_hyperbolic_momentum",
    "sum": "stochastic_unified_momentum",
    "usm": "unified_stochastic_momentum",
    "ed": "exact_diffusion",
    "cp": "chambolle_pock",
    "dy": "davis_yin",
}

# Fixed rationals used whenever a numeric instance of a corpus algorithm is needed.
_DEFAULT_VALUES = {
    "eta": Fraction(1, 4),
    "t": Fraction(1, 2),
    "alpha": Fraction(1, 5),
    "beta": Fraction(2, 7),
    "gamma": Fraction(3, 11),
    "nu": Fraction(1, 4),
    "s": Fraction(3, 5),
    "lam": Fraction(5, 7),
    "mu": Fraction(2, 9),
    "W": Fraction(1, 3),
    "a": Fraction(3, 2),
    "sigma": Fraction(2, 5),
    "tau": Fraction(1, 3),
    "M": Fraction(3, 4),
}


def names() -> list[str]:
    return list(REGISTRY)


def resolve(name: str) -> str:
    """Canonical corpus name for ``name`` or one of its aliases."""
    key = name.lower().replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in REGISTRY:
        raise UnknownAlgorithm(f"no built-in algorithm named {name!r}; known: {', '.join(REGISTRY)}")
    return key


def source(name: str) -> str:
    name = resolve(name)
    if name not in REGISTRY:
        raise UnknownAlgorithm(f"no built-in algorithm named {name!r}; known: {', '.join(REGISTRY)}")
    return resources.files("algequiv.algorithms").joinpath(f"{name}.alg").read_text()


def builtin(name: str) -> AlgorithmAST:
    """AST of a built-in algorithm with symbolic parameters."""
    return parse(source(name), resolve(name))


def realization(name: str) -> StateSpace:
    return lower(builtin(name))


def bindings(name_or_params) -> dict[str, Fraction]:
    """Default rational values for the parameters of an algorithm."""
    params = builtin(name_or_params).params if isinstance(name_or_params, str) else name_or_params
    return {p: _DEFAULT_VALUES.get(p, Fraction(1, 3)) for p in params}
