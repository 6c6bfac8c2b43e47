"""Result records and the stable CSV row format shared by all outputs.

CSV schema (fixed column order, 17 significant digits):

    scenario,epsilon_index,epsilon_desc,horizon,value,stderr,verdict
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

CSV_HEADER = "scenario,epsilon_index,epsilon_desc,horizon,value,stderr,verdict"


def format_value(x) -> str:
    """Decimal serialization with 17 significant digits (round-trip exact)."""
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return f"{float(x):.17g}"


@dataclass
class AverageResult:
    """A finite-horizon double average with its ensemble dispersion."""

    value: complex | float
    horizon: int
    ensemble: int
    stderr: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = self.value
        finite = math.isfinite(v.real) and math.isfinite(v.imag) if isinstance(v, complex) \
            else math.isfinite(v)
        if not finite:
            raise ValueError("average is non-finite")
        if not (self.stderr >= 0.0 and math.isfinite(self.stderr)):
            raise ValueError("standard error must be finite and >= 0")


@dataclass
class CurveRow:
    eps_index: int
    eps_desc: str
    horizon: int
    value: float
    stderr: float = 0.0
    verdict: str = ""

    def csv_fields(self, scenario: str) -> list[str]:
        return [
            scenario,
            str(self.eps_index),
            self.eps_desc,
            str(self.horizon),
            format_value(self.value),
            format_value(self.stderr),
            self.verdict,
        ]


class ContinuityCurve:
    """Sampled curve of one quantity against a perturbation or horizon axis.

    value_kind names the semantics of the value column (eta, coverage,
    occupancy, visit_fraction, distance, ...).  Epsilon descriptors must be
    unique per curve unless rows differ in horizon.
    """

    def __init__(self, label: str, value_kind: str):
        self.label = label
        self.value_kind = value_kind
        self.rows: list[CurveRow] = []

    def append(self, row: CurveRow) -> None:
        if not math.isfinite(row.value):
            raise ValueError(f"non-finite value in curve {self.label}")
        for r in self.rows:
            if r.eps_desc == row.eps_desc and r.horizon == row.horizon:
                raise ValueError(
                    f"duplicate point ({row.eps_desc}, {row.horizon}) in curve {self.label}"
                )
        self.rows.append(row)

    def values(self) -> list[float]:
        return [r.value for r in self.rows]

    def to_csv(self, scenario: str) -> str:
        lines = [CSV_HEADER]
        lines += [",".join(r.csv_fields(scenario)) for r in self.rows]
        return "\n".join(lines) + "\n"
