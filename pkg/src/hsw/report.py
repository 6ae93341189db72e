"""Validation reports: ordered lists of axiom violations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any


def _fmt(x: Any) -> Any:
    """Render scalars, vectors and sparse elements as JSON-friendly values."""
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if x is None or isinstance(x, (bool, int, str, float)):
        return x
    return str(x)


@dataclass(frozen=True)
class Finding:
    """One violated identity instance."""

    tag: str
    location: Any
    lhs: Any = None
    rhs: Any = None

    def to_json(self) -> dict:
        return {"tag": self.tag, "location": _fmt(self.location), "lhs": _fmt(self.lhs), "rhs": _fmt(self.rhs)}

    def __str__(self) -> str:
        s = f"[{self.tag}] at {_fmt(self.location)}"
        if self.lhs is not None or self.rhs is not None:
            s += f": lhs={_fmt(self.lhs)} rhs={_fmt(self.rhs)}"
        return s


class ValidationReport(list):
    """List of findings; empty means valid."""

    def add(self, tag: str, location: Any, lhs: Any = None, rhs: Any = None) -> None:
        self.append(Finding(tag, location, lhs, rhs))

    def check(self, tag: str, location: Any, lhs: Any, rhs: Any) -> bool:
        """Record a finding when ``lhs != rhs``; return whether they agree."""
        if lhs != rhs:
            self.add(tag, location, lhs, rhs)
            return False
        return True

    @property
    def ok(self) -> bool:
        return len(self) == 0

    def tags(self) -> set:
        return {f.tag for f in self}

    def extend_prefixed(self, prefix: str, other: "ValidationReport") -> "ValidationReport":
        for f in other:
            self.append(Finding(f"{prefix}:{f.tag}", f.location, f.lhs, f.rhs))
        return self

    def to_json(self) -> list:
        return [f.to_json() for f in self]


class HswError(Exception):
    """Base class for contract errors raised by the library."""


def error_class(name: str, doc: str = "") -> type:
    return type(name, (HswError,), {"__doc__": doc})


ShapeMismatchError = error_class("ShapeMismatchError", "Dimensions of blocks or fibers disagree.")
BaseMismatch = error_class("BaseMismatch", "Exterior elements over different base dimensions.")
InvalidCrossedModule = error_class("InvalidCrossedModule")
SourceTargetMismatch = error_class("SourceTargetMismatch")
NotAChainHomotopyInverse = error_class("NotAChainHomotopyInverse")
DegreeMismatch = error_class("DegreeMismatch")
NotNilpotent = error_class("NotNilpotent")
InvalidMorphism = error_class("InvalidMorphism")
InvalidMC = error_class("InvalidMC")
NotSurjective = error_class("NotSurjective")
DomainViolation = error_class("DomainViolation")
InvalidCover = error_class("InvalidCover")
InvalidVB = error_class("InvalidVB")
NotProjectable = error_class("NotProjectable")
NotAHomotopyEquivalence = error_class("NotAHomotopyEquivalence")
InvalidModule = error_class("InvalidModule")
InvalidDecomposition = error_class("InvalidDecomposition")
DegenerateForm = error_class("DegenerateForm")
InvalidTriple = error_class("InvalidTriple")
FrameMismatch = error_class("FrameMismatch")
PointNotInGroup = error_class("PointNotInGroup")
