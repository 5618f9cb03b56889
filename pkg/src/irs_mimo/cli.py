"""Reproducible experiment runner.

Subcommands tie the sampling, estimation, rate, validation, and optimizer
modules together behind config files and seeds, writing CSV/JSON artifacts
for the plotting tool. Every subcommand is deterministic given
(config, seed): result rows are a pure function of the two.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Output layout: <out>/<experiment>/<label>/{report.json, *.csv}.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from irs_mimo import reports
from irs_mimo.channels import ReflectionPattern
from irs_mimo.config import (
    ConfigError,
    ScenarioConfig,
    load_config_with_experiment,
)
from irs_mimo.covariance import build_covariance_set
from irs_mimo.estimation import mse_trend
from irs_mimo.linalg import NumericalError
from irs_mimo.optimizer import compare_sum_power, sca_optimize
from irs_mimo.rate import rate_convergence_sweep
from irs_mimo.reports import ExperimentReport, Timer, write_csv
from irs_mimo.validation import (
    gaussianity_check,
    min_singular_reflected,
    quadratic_kernel_spectra,
    trace_lemma_check,
)

log = logging.getLogger(__name__)


def _random_phase_pattern(n: int, rng: np.random.Generator) -> ReflectionPattern:
    return ReflectionPattern(np.exp(2j * np.pi * rng.uniform(size=n)))


def _sized(cfg: ScenarioConfig, N: int, q: float) -> ScenarioConfig:
    return dataclasses.replace(cfg, N=N, M=max(1, int(round(N / q))))


def run_validate_assumptions(
    cfg: ScenarioConfig, exp: dict, out_dir: Path
) -> ExperimentReport:
    """Minimum-singular-value sweep of the reflected factor plus singular
    spectra of the quadratic-form kernels, across an N ladder at fixed q."""
    n_ladder = exp.get("n_ladder", [50, 100, 200, 400, 700, 1000])
    if not n_ladder:
        raise ConfigError("n_ladder must be non-empty")
    trials = int(exp.get("trials", 20))
    q = float(exp.get("q", cfg.q))
    rows = []
    rng = np.random.default_rng(cfg.seed)
    for N in n_ladder:
        sized = _sized(cfg, N, q)
        cov = build_covariance_set(sized)
        pattern = _random_phase_pattern(N, rng)
        for k in range(cov.K):
            rows.append(
                {
                    "statistic_name": f"min_singular_L{k}",
                    "N": N,
                    "M": sized.M,
                    "trial": 0,
                    "value": min_singular_reflected(cov, pattern.phi, k),
                }
            )
        spectra = quadratic_kernel_spectra(cov, pattern.phi, 0, 1 % cov.K, trials, rng)
        for t, rep in enumerate(spectra):
            rows.append(
                {
                    "statistic_name": f"max_singular_{rep.matrix_id}",
                    "N": N,
                    "M": sized.M,
                    "trial": t // 2,  # inner/outer reports alternate per trial
                    "value": rep.spectral_norm,
                }
            )
    lemma = trace_lemma_check(
        exp.get("trace_dimensions", [32, 128, 512]), trials, rng
    )
    for M, v in lemma.quad_median.items():
        rows.append(
            {"statistic_name": "trace_quad_median", "N": 0, "M": M, "trial": 0, "value": v}
        )
    for M, v in lemma.bilinear_median.items():
        rows.append(
            {"statistic_name": "trace_bilinear_median", "N": 0, "M": M, "trial": 0, "value": v}
        )
    path = write_csv(out_dir / "assumptions.csv", reports.VALIDATOR_COLUMNS, rows)
    return _report("validate-assumptions", cfg, [path])


def run_validate_gaussianity(
    cfg: ScenarioConfig, exp: dict, out_dir: Path
) -> ExperimentReport:
    """Normality check of the normalized effective channel's marginals."""
    samples = int(exp.get("samples", 2000))
    cov = build_covariance_set(cfg)
    rng = np.random.default_rng(cfg.seed)
    pattern = _random_phase_pattern(cfg.N, rng)
    rep = gaussianity_check(cov, pattern, samples, rng)
    rows = []
    for name, values in rep.marginals.items():
        for t, v in enumerate(values):
            rows.append(
                {
                    "statistic_name": name,
                    "N": cfg.N,
                    "M": cfg.M,
                    "trial": t,
                    "value": float(v),
                }
            )
    path = write_csv(out_dir / "gaussianity.csv", reports.VALIDATOR_COLUMNS, rows)
    extra = {
        "ks_stats": rep.ks_stats,
        "critical_value": rep.critical_value,
        "significance": rep.significance,
        "passed": rep.passed,
        "asymptotics_expected": rep.asymptotics_expected,
        "cross_correlations": rep.cross_correlations,
    }
    return _report("validate-gaussianity", cfg, [path], extra=extra)


def run_validate_estimation(
    cfg: ScenarioConfig, exp: dict, out_dir: Path
) -> ExperimentReport:
    """tr(F_k)/M across an (N, M) ladder at fixed q, with the closed-form bound."""
    n_ladder = exp.get("n_ladder", [32, 64, 128, 256])
    if not n_ladder:
        raise ConfigError("n_ladder must be non-empty")
    q = float(exp.get("q", cfg.q))
    user = int(exp.get("user", 0))
    sizes = [(N, max(1, int(round(N / q)))) for N in n_ladder]
    p_t = float(exp.get("p_t", cfg.pilot_power()))

    def cov_builder(N: int, M: int):
        return build_covariance_set(dataclasses.replace(cfg, N=N, M=M))

    rows = mse_trend(
        cov_builder, ReflectionPattern.all_one, user, sizes, p_t, cfg.sigma2
    )
    for row in rows:
        row.pop("tr_F", None)
    path = write_csv(out_dir / "mse.csv", reports.MSE_COLUMNS, rows)
    return _report("validate-estimation", cfg, [path])


def run_validate_rate(cfg: ScenarioConfig, exp: dict, out_dir: Path) -> ExperimentReport:
    """Monte Carlo vs closed-form rates across (N, q) sizes."""
    blocks = int(exp.get("blocks", 50))
    if blocks < 1:
        raise ConfigError("blocks must be >= 1")
    n_ladder = exp.get("n_ladder", [100, 200, 400])
    q_values = exp.get("q_values", [5.0, 10.0, 20.0])
    rows = []
    for rep in rate_convergence_sweep(cfg, n_ladder, q_values, blocks):
        for k in range(len(rep.rate_mc)):
            rows.append(
                {
                    "N": rep.N,
                    "M": rep.M,
                    "q": rep.q,
                    "user": k,
                    "rate_mc": float(rep.rate_mc[k]),
                    "rate_asym": float(rep.rate_asym[k]),
                    "gap": rep.gap,
                }
            )
    path = write_csv(out_dir / "rate.csv", reports.RATE_COLUMNS, rows)
    return _report("validate-rate", cfg, [path])


def run_optimize(cfg: ScenarioConfig, exp: dict, out_dir: Path) -> ExperimentReport:
    """Reflection design for the sum-power minimization; writes the trace."""
    targets = np.asarray(exp.get("targets", [1.0] * cfg.K), dtype=float)
    delta = float(exp.get("delta", 1e-6))
    max_iter = int(exp.get("max_iter", 100))
    cov = build_covariance_set(cfg)
    rng = np.random.default_rng(cfg.seed)
    solution, trace = sca_optimize(
        cov, targets, cfg.T, cfg.sigma2, rng, delta=delta, max_iter=max_iter
    )
    rows = [
        {k: r[k] for k in reports.TRACE_COLUMNS} for r in trace.rows()
    ]
    path = write_csv(out_dir / "trace.csv", reports.TRACE_COLUMNS, rows)
    extra = {
        "sum_power_w": solution.sum_power,
        "powers_w": solution.powers.tolist(),
        "achieved_rates": solution.achieved_rates.tolist(),
        "targets": targets.tolist(),
    }
    return _report("optimize", cfg, [path], extra=extra)


def run_compare(cfg: ScenarioConfig, exp: dict, out_dir: Path) -> ExperimentReport:
    """Sum power of the optimized design vs the benchmark reflection patterns."""
    target_list = exp.get("target_sweep")
    if target_list is None:
        target_list = [exp.get("targets", [1.0] * cfg.K)]
    cov = build_covariance_set(cfg)
    rows = []
    for targets in target_list:
        targets = np.asarray(
            [targets] * cfg.K if np.isscalar(targets) else targets, dtype=float
        )
        rng = np.random.default_rng(cfg.seed)
        rows.extend(compare_sum_power(cov, targets, cfg.T, cfg.sigma2, rng))
    path = write_csv(out_dir / "compare.csv", reports.COMPARE_COLUMNS, rows)
    return _report("compare", cfg, [path])


def _report(
    name: str, cfg: ScenarioConfig, paths: list[Path], extra: dict | None = None
) -> ExperimentReport:
    return ExperimentReport(
        experiment=name,
        config_echo=cfg.echo(),
        seed=cfg.seed,
        csv_files=[p.name for p in paths],
        extra=extra or {},
    )


RUNNERS = {
    "validate-assumptions": run_validate_assumptions,
    "validate-gaussianity": run_validate_gaussianity,
    "validate-estimation": run_validate_estimation,
    "validate-rate": run_validate_rate,
    "optimize": run_optimize,
    "compare": run_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-mimo",
        description="IRS-assisted massive MIMO experiment runner",
    )
    parser.add_argument(
        "command", choices=sorted(RUNNERS), help="experiment to run"
    )
    parser.add_argument("--config", type=Path, help="TOML/JSON scenario file")
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument(
        "--out", type=Path, default=Path("out"), help="output root directory"
    )
    parser.add_argument(
        "--threads",
        type=int,
        help="cap BLAS threads (sets OMP_NUM_THREADS for spawned math kernels)",
    )
    parser.add_argument(
        "--label", default=None, help="run label (default: seed<seed>)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ["OMP_NUM_THREADS"] = str(args.threads)
    try:
        if args.config is not None:
            cfg, exp = load_config_with_experiment(args.config)
        else:
            cfg, exp = ScenarioConfig(), {}
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        label = args.label if args.label is not None else f"seed{cfg.seed}"
        out_dir = args.out / args.command / label
        out_dir.mkdir(parents=True, exist_ok=True)
        with Timer() as timer:
            report = RUNNERS[args.command](cfg, exp, out_dir)
        report.wall_clock_s = timer.elapsed
        report_path = report.write(out_dir)
        log.info("wrote %s", report_path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
