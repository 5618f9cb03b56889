"""The six figure kinds and their CSV schemas.

Each renderer takes parsed CSV rows (list of dicts, all values still strings)
and draws onto a matplotlib Figure. Schema problems raise SchemaError naming
the offending column; an input with a header but no data rows raises
SchemaError("no rows"). Rendering is pure: the same CSV produces the same
image content (timestamp metadata is stripped at save time).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# fixed salt: SVG element ids derive from it, not from per-process state
matplotlib.rcParams["svg.hashsalt"] = "irs-mimo-plots"

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """CSV input does not match the figure kind's expected columns/rows."""


VALIDATOR_COLUMNS = ("statistic_name", "N", "M", "trial", "value")
MSE_COLUMNS = ("N", "M", "user", "tr_F_over_M", "bound")
RATE_COLUMNS = ("N", "M", "q", "user", "rate_mc", "rate_asym", "gap")
TRACE_COLUMNS = ("iteration", "objective_w", "step_norm_sq")
COMPARE_COLUMNS = ("scheme", "target_bps", "sum_power_w")


def read_rows(paths: list[Path], required: tuple[str, ...]) -> list[dict]:
    """Read and concatenate CSV files, checking each for the required columns."""
    rows: list[dict] = []
    for path in paths:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            header = reader.fieldnames or []
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path}: missing column '{col}'")
            rows.extend(reader)
    if not rows:
        raise SchemaError("no rows")
    return rows


def _floats(rows: list[dict], col: str) -> np.ndarray:
    try:
        return np.array([float(r[col]) for r in rows])
    except ValueError as exc:
        raise SchemaError(f"non-numeric value in column '{col}': {exc}") from exc


def _by(rows: list[dict], col: str) -> dict[str, list[dict]]:
    out: dict[str, list[dict]] = {}
    for r in rows:
        out.setdefault(r[col], []).append(r)
    return out


def min_singular_sweep(rows: list[dict], ax: plt.Axes) -> None:
    """Per-user minimum singular value of the reflected factor vs N."""
    series = {
        name: rs
        for name, rs in _by(rows, "statistic_name").items()
        if name.startswith("min_singular_")
    }
    if not series:
        raise SchemaError("no min_singular_* rows in column 'statistic_name'")
    for name in sorted(series):
        rs = sorted(series[name], key=lambda r: float(r["N"]))
        ax.plot(_floats(rs, "N"), _floats(rs, "value"), marker="o", label=name)
    ax.set_xlabel("N (reflecting elements)")
    ax.set_ylabel("minimum singular value")
    ax.set_ylim(bottom=0.0)
    ax.legend()
    ax.set_title("Reflected-factor conditioning vs surface size")


def singular_hist(rows: list[dict], ax: plt.Axes) -> None:
    """Histogram of the quadratic-kernel spectral norms across trials."""
    values = [
        float(r["value"])
        for r in rows
        if r["statistic_name"].startswith("max_singular_")
    ]
    if not values:
        raise SchemaError("no max_singular_* rows in column 'statistic_name'")
    ax.hist(values, bins=min(40, max(5, len(values) // 5)), edgecolor="black")
    ax.set_xlabel("spectral norm")
    ax.set_ylabel("count")
    ax.set_title("Quadratic-kernel spectral norms")


def gaussianity_density(rows: list[dict], ax: plt.Axes) -> None:
    """Histogram of one marginal with the fitted normal density overlaid."""
    series = _by(rows, "statistic_name")
    name = sorted(series)[0]
    x = _floats(series[name], "value")
    if x.size < 2:
        raise SchemaError("need at least 2 samples per marginal")
    ax.hist(x, bins=60, density=True, alpha=0.6, label=f"samples ({name})")
    mu, sd = float(np.mean(x)), float(np.std(x))
    grid = np.linspace(x.min(), x.max(), 400)
    ax.plot(
        grid,
        np.exp(-((grid - mu) ** 2) / (2 * sd**2)) / (sd * np.sqrt(2 * np.pi)),
        "r-",
        label=f"normal fit ($\\mu$={mu:.3g}, $\\sigma$={sd:.3g})",
    )
    ax.set_xlabel("normalized effective-channel marginal")
    ax.set_ylabel("density")
    ax.legend()
    ax.set_title("Effective-channel marginal vs fitted normal")


def rate_convergence(rows: list[dict], ax: plt.Axes) -> None:
    """Monte Carlo sum rate vs N, one series per q, with the closed-form
    asymptote drawn as a horizontal line per series."""
    for q, rs in sorted(_by(rows, "q").items(), key=lambda kv: float(kv[0])):
        sums: dict[float, float] = {}
        asym: dict[float, float] = {}
        for N, nrs in _by(rs, "N").items():
            sums[float(N)] = float(np.sum(_floats(nrs, "rate_mc")))
            asym[float(N)] = float(np.sum(_floats(nrs, "rate_asym")))
        ns = sorted(sums)
        (line,) = ax.plot(
            ns, [sums[n] for n in ns], marker="o", label=f"Monte Carlo, q={q}"
        )
        ax.axhline(
            asym[ns[-1]],
            color=line.get_color(),
            linestyle="--",
            linewidth=1.0,
            label=f"closed-form limit, q={q}",
        )
    ax.set_xlabel("N (reflecting elements)")
    ax.set_ylabel("sum rate (bps/Hz)")
    ax.legend()
    ax.set_title("Sum rate convergence to the closed-form limit")


def sca_trace(rows: list[dict], ax: plt.Axes) -> None:
    """Objective and squared step norm of the design loop per iteration."""
    rs = sorted(rows, key=lambda r: float(r["iteration"]))
    it = _floats(rs, "iteration")
    ax.semilogy(it, _floats(rs, "objective_w"), marker="o", label="sum power (W)")
    step = _floats(rs, "step_norm_sq")
    if np.any(step > 0):
        ax.semilogy(
            it[step > 0], step[step > 0], marker="s", label=r"$\|\Delta b\|^2$"
        )
    ax.set_xlabel("iteration")
    ax.legend()
    ax.set_title("Reflection-design convergence trace")


def power_compare(rows: list[dict], ax: plt.Axes) -> None:
    """Grouped bars: sum power per scheme for each rate target."""
    targets = sorted({float(r["target_bps"]) for r in rows})
    schemes = sorted(_by(rows, "scheme"))
    width = 0.8 / len(schemes)
    x = np.arange(len(targets))
    for i, scheme in enumerate(schemes):
        vals = []
        for t in targets:
            match = [
                float(r["sum_power_w"])
                for r in rows
                if r["scheme"] == scheme and float(r["target_bps"]) == t
            ]
            vals.append(10 * np.log10(np.mean(match) / 1e-3) if match else np.nan)
        ax.bar(x + (i - (len(schemes) - 1) / 2) * width, vals, width, label=scheme)
    ax.set_xticks(x, [f"{t:g}" for t in targets])
    ax.set_xlabel("rate target (bps/Hz)")
    ax.set_ylabel("sum power (dBm)")
    ax.legend()
    ax.set_title("Sum transmit power by reflection scheme")


FIGURE_KINDS = {
    "min-singular": (min_singular_sweep, VALIDATOR_COLUMNS),
    "singular-hist": (singular_hist, VALIDATOR_COLUMNS),
    "gaussianity": (gaussianity_density, VALIDATOR_COLUMNS),
    "rate-convergence": (rate_convergence, RATE_COLUMNS),
    "sca-trace": (sca_trace, TRACE_COLUMNS),
    "power-compare": (power_compare, COMPARE_COLUMNS),
}


def render(kind: str, inputs: list[Path], output: Path) -> Path:
    """Render one figure of the given kind from CSV inputs to an image file."""
    if kind not in FIGURE_KINDS:
        raise SchemaError(
            f"unknown figure kind {kind!r}; expected one of {sorted(FIGURE_KINDS)}"
        )
    draw, required = FIGURE_KINDS[kind]
    rows = read_rows([Path(p) for p in inputs], required)
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=120)
    try:
        draw(rows, ax)
        fig.tight_layout()
        # strip creation-time metadata so identical inputs give identical bytes
        metadata = {"Date": None} if output.suffix == ".svg" else {}
        fig.savefig(output, metadata=metadata)
    finally:
        plt.close(fig)
    return output
