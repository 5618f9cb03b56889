"""Experiment artifacts: report metadata (JSON) and deterministic CSV rows.

Every experiment writes a report.json (full resolved config echo, seed,
schema version, wall clock) plus one or more CSV files whose rows are a
pure function of (config, seed): floats are formatted with a fixed
round-trippable format so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1

# column schemas, one per experiment CSV; documented here for the plotting tool
VALIDATOR_COLUMNS = ("statistic_name", "N", "M", "trial", "value")
MSE_COLUMNS = ("N", "M", "user", "tr_F_over_M", "bound")
RATE_COLUMNS = ("N", "M", "q", "user", "rate_mc", "rate_asym", "gap")
TRACE_COLUMNS = ("iteration", "objective_w", "step_norm_sq")
COMPARE_COLUMNS = ("scheme", "target_bps", "sum_power_w")


@dataclass
class ExperimentReport:
    """Everything needed to re-run an experiment and interpret its outputs."""

    experiment: str
    config_echo: dict
    seed: int
    schema_version: int = SCHEMA_VERSION
    wall_clock_s: float = 0.0
    csv_files: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "report.json"
        payload = {
            "experiment": self.experiment,
            "schema_version": self.schema_version,
            "seed": self.seed,
            "config": self.config_echo,
            "wall_clock_s": round(self.wall_clock_s, 3),
            "csv_files": self.csv_files,
            **({"extra": self.extra} if self.extra else {}),
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path


def format_cell(value) -> str:
    """Deterministic, locale-independent cell rendering ('.' decimal separator)."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> Path:
    """Write rows (dicts keyed by column name) as UTF-8 CSV with a header."""
    lines = [",".join(columns)]
    for row in rows:
        missing = [c for c in columns if c not in row]
        if missing:
            raise ValueError(f"row missing columns {missing}")
        lines.append(",".join(format_cell(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class Timer:
    """Context manager capturing wall-clock seconds into .elapsed."""

    def __enter__(self) -> "Timer":
        self._t0 = time.perf_counter()
        self.elapsed = 0.0
        return self

    def __exit__(self, *exc) -> None:
        self.elapsed = time.perf_counter() - self._t0
