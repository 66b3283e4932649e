"""Oracle kind tags (subdifferential, proximal map, and their conjugates)."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["OracleKind", "KIND_TAGS"]

KIND_TAGS = ("subdiff", "subdiff_conj", "prox", "prox_conj", "generic")

_ALIASES = {
    "grad": "subdiff",
    "gradient": "subdiff",
    "subgrad": "subdiff",
    "conj": "prox_conj",
    "prox*": "prox_conj",
    "subdiff*": "subdiff_conj",
}


@dataclass(frozen=True)
class OracleKind:
    """What an oracle computes, up to the function it acts on.

    Attributes
    ----------
    tag : str
        One of ``subdiff`` (a gradient or subgradient selection of ``f``),
        ``subdiff_conj`` (of the conjugate ``f*``), ``prox`` (``prox_{t f}``),
        ``prox_conj`` (``prox_{(1/t) f*}``) or ``generic``.
    stepsize : str or None
        Name of the step-size parameter ``t``.  Needed by the proximal kinds;
        the literal ``"1"`` stands for a unit step.
    function : str or None
        Symbol of the underlying function, used only for labels.
    """

    tag: str
    stepsize: str | None = None
    function: str | None = None

    def __post_init__(self):
        tag = _ALIASES.get(self.tag, self.tag)
        if tag not in KIND_TAGS:
            raise ValueError(f"unknown oracle kind {self.tag!r}; expected one of {KIND_TAGS}")
        object.__setattr__(self, "tag", tag)
        if tag in ("prox", "prox_conj") and not self.stepsize:
            object.__setattr__(self, "stepsize", "t")

    @classmethod
    def parse(cls, text: str) -> "OracleKind":
        """Read ``tag``, ``tag(t)`` or ``tag(f, t)``."""
        text = text.strip()
        if "(" not in text:
            return cls(text)
        tag, rest = text.split("(", 1)
        args = [a.strip() for a in rest.rstrip(")").split(",") if a.strip()]
        if len(args) == 1:
            return cls(tag.strip(), stepsize=args[0])
        if len(args) == 2:
            return cls(tag.strip(), function=args[0], stepsize=args[1])
        return cls(tag.strip())

    def with_tag(self, tag: str, stepsize: str | None = None) -> "OracleKind":
        return OracleKind(tag, stepsize or self.stepsize, self.function)

    def label(self) -> str:
        """Conventional label such as ``prox_tg`` or ``prox_(1/t)g*``."""
        f = self.function or "f"
        t = self.stepsize or "t"
        if self.tag == "subdiff":
            return f"d{f}"
        if self.tag == "subdiff_conj":
            return f"d{f}*"
        if self.tag == "prox":
            return f"prox_{f}" if t == "1" else f"prox_{t}{f}"
        if self.tag == "prox_conj":
            return f"prox_{f}*" if t == "1" else f"prox_(1/{t}){f}*"
        return f"phi_{f}"

    def __str__(self) -> str:
        parts = [p for p in (self.function, self.stepsize) if p]
        return f"{self.tag}({', '.join(parts)})" if parts else self.tag
