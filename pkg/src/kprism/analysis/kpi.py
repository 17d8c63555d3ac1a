"""Target KPI series (e.g. p95 response time) used as degradation reference."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from kprism.errors import AnalysisError

HIGHER_IS_WORSE = "higher_is_worse"
LOWER_IS_WORSE = "lower_is_worse"


@dataclass
class KpiSeries:
    points: list = field(default_factory=list)  # (second, value), strictly increasing
    direction: str = HIGHER_IS_WORSE

    def __post_init__(self):
        if self.direction not in (HIGHER_IS_WORSE, LOWER_IS_WORSE):
            raise AnalysisError(f"unknown KPI direction {self.direction!r}")
        last = None
        for ts, _ in self.points:
            if last is not None and ts <= last:
                raise AnalysisError("KPI timestamps must be strictly increasing")
            last = ts

    def oriented(self) -> dict:
        """Second -> value, negated for lower-is-worse KPIs so a worsening
        KPI always shifts upward."""
        sign = 1.0 if self.direction == HIGHER_IS_WORSE else -1.0
        return {ts: sign * v for ts, v in self.points}


def load_kpi_csv(path, direction: str = HIGHER_IS_WORSE) -> KpiSeries:
    """Load a ``ts,value`` CSV (wall-clock seconds, float)."""
    points = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["ts", "value"]:
            raise AnalysisError(f"{path}: expected CSV header 'ts,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                points.append((int(float(row[0])), float(row[1])))
            except (ValueError, IndexError) as exc:
                raise AnalysisError(f"{path}:{lineno}: bad KPI row: {exc}") from exc
    return KpiSeries(points=points, direction=direction)


def write_kpi_csv(path, points) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ts", "value"])
        for ts, value in points:
            writer.writerow([ts, f"{value:.6f}"])
