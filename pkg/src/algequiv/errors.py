"""Exception hierarchy shared by all modules."""

from __future__ import annotations

__all__ = [
    "AlgequivError",
    "ImproperEntry",
    "ZeroInput",
    "Singular",
    "SingularD",
    "SymbolicRank",
    "FreeParameter",
    "NotMinimal",
    "DimensionMismatch",
    "DslError",
    "DslSyntaxError",
    "NonlinearExpression",
    "UndeclaredSymbol",
    "CyclicDefinition",
    "OracleUseError",
    "UnknownAlgorithm",
    "OracleMismatch",
    "ImproperResult",
    "SingularM",
    "SingularDenominator",
    "SingularBlock",
    "UnsupportedPair",
    "ImplicitNonlinear",
    "FixedPointMismatch",
]


class AlgequivError(Exception):
    """Base class for every error raised by the package."""


class ImproperEntry(AlgequivError):
    """A rational function has a numerator of higher degree than its denominator."""

    def __init__(self, i: int, j: int, message: str | None = None):
        self.i, self.j = i, j
        super().__init__(message or f"entry ({i}, {j}) is improper")


class ImproperResult(ImproperEntry):
    """A transformation produced an improper (non-causal) entry."""


class ZeroInput(AlgequivError):
    """An operation received the zero function where a nonzero one is needed."""


class Singular(AlgequivError):
    """A matrix has zero determinant over the rational-function field."""


class SingularD(Singular):
    """The feedthrough matrix D is not invertible."""


class SingularM(Singular):
    """An LFT matrix is not invertible."""


class SingularDenominator(Singular):
    """The factor R H + S of a linear fractional transform is singular."""


class SingularBlock(Singular):
    """A block needed by a closed-form prox/subdifferential transform is singular."""


class SymbolicRank(AlgequivError):
    """A rank was requested on a matrix that still contains free parameters."""


class FreeParameter(AlgequivError):
    """A numeric operation met an uninstantiated parameter."""


class NotMinimal(AlgequivError):
    """A realization is not controllable and observable."""


class DimensionMismatch(AlgequivError):
    """Operands have incompatible sizes."""


class OracleMismatch(AlgequivError):
    """Two transfer matrices use different oracle label lists."""


class UnsupportedPair(AlgequivError):
    """No tabulated relation exists between the requested oracle kinds."""


class ImplicitNonlinear(AlgequivError):
    """An implicit algorithm was simulated with a nonlinear oracle."""


class FixedPointMismatch(AlgequivError):
    """The supplied fixed point is not consistent with the oracle."""


class UnknownAlgorithm(AlgequivError, KeyError):
    """A name is not present in the built-in algorithm registry."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class DslError(AlgequivError):
    """Error raised while reading or lowering algorithm source.

    Parameters
    ----------
    message : str
        Human readable description.
    line, col : int, optional
        1-based position of the offending token.
    source : str, optional
        Full program text, used to print a caret excerpt.
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        if self.line is None:
            return self.message
        text = f"line {self.line}, column {self.col}: {self.message}"
        if self.source is not None:
            lines = self.source.splitlines()
            if 0 < self.line <= len(lines):
                excerpt = lines[self.line - 1]
                text += "\n  " + excerpt + "\n  " + " " * (self.col - 1) + "^"
        return text


class DslSyntaxError(DslError):
    """Malformed algorithm source."""


class NonlinearExpression(DslError):
    """An expression is not linear in states and oracle outputs."""


class UndeclaredSymbol(DslError):
    """A name is used without being declared or assigned."""


class CyclicDefinition(DslError):
    """Intra-iteration definitions depend on each other in a loop."""


class OracleUseError(DslError):
    """An oracle is called zero times or with two distinct arguments."""
