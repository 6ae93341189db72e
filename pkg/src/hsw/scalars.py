"""Scalar backends: exact rationals (default) or floats compared with a tolerance."""
from __future__ import annotations

from dataclasses import dataclass

from .linalg import q

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ScalarBackend:
    kind: str = "rational"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.kind not in ("rational", "float"):
            raise ValueError(f"unknown scalar backend {self.kind!r}")
        if self.kind == "float" and not self.tol > 0:
            raise ValueError("float backend needs a positive tolerance")

    @property
    def exact(self) -> bool:
        return self.kind == "rational"

    def convert(self, x):
        return q(x) if self.exact else float(x)

    def is_zero(self, x) -> bool:
        return x == 0 if self.exact else abs(float(x)) <= self.tol

    def eq(self, a, b) -> bool:
        return self.is_zero(a - b)


EXACT = ScalarBackend()
