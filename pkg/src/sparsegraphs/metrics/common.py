"""Small result types shared by the metric routines."""
from __future__ import annotations

from dataclasses import dataclass

KINDS = ("exact", "lower_bound", "upper_bound", "inner", "estimate")


@dataclass(frozen=True)
class Estimate:
    """A metric value together with what it is guaranteed to be.

    ``kind`` is ``exact``, ``lower_bound``, ``upper_bound``, ``inner`` (an
    inner approximation of a set) or ``estimate`` (no guarantee).
    """

    value: float
    kind: str = "exact"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimate kind {self.kind!r}")

    def __float__(self) -> float:
        return float(self.value)

    @property
    def exact(self) -> bool:
        return self.kind == "exact"

    def to_dict(self) -> dict:
        return {"value": float(self.value), "mode": self.kind}
