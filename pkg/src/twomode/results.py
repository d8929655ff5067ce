"""Row/table containers shared by the sweep producers and the CSV writer."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class RatePoint:
    delta: float
    r1: float
    r2_two_path: float
    r2_full: float
    n_paths: int

    def __post_init__(self):
        if self.r1 < 0 or self.r2_two_path < 0 or self.r2_full < 0:
            raise ValueError("rates must be non-negative")


@dataclass
class SweepResult:
    """Ordered table of sweep rows plus run metadata.

    ``rows`` keep the order of the swept input values. ``metadata`` values are
    emitted as ``# key: value`` header lines.
    """

    fingerprint: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]
