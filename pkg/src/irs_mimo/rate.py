"""MRC combining, SINR/rate with imperfect CSI, and the closed-form limit rate.

The Monte Carlo pipeline (sample -> train -> LMMSE -> MRC) uses the
estimated channels both as combiners and inside the SINR, with the
estimation-error covariances F_j accounting for residual self-interference.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from irs_mimo.channels import ReflectionPattern, sample_block
from irs_mimo.config import ScenarioConfig
from irs_mimo.covariance import CovarianceSet, build_covariance_set, reflection_quadratic
from irs_mimo.estimation import (
    EstimationResult,
    estimate_block,
    lmmse_filter,
    make_pilots,
    train_and_despread,
)

log = logging.getLogger(__name__)


def mrc_sinr(
    est: EstimationResult, powers: np.ndarray, sigma2: float, N: int
) -> np.ndarray:
    """Per-user SINR under MRC with the estimated channels as combiners.

    gamma_k = p_k |c_hat_k^H c_hat_k|^2 /
              (sum_{j!=k} p_j |c_hat_k^H c_hat_j|^2
               + sum_j p_j c_hat_k^H F_j c_hat_k
               + sigma2 c_hat_k^H c_hat_k / N)
    """
    powers = np.asarray(powers, dtype=float)
    if np.any(powers < 0) or sigma2 <= 0:
        raise ValueError("powers must be >= 0 and sigma2 > 0")
    K = est.K
    gammas = np.zeros(K)
    for k in range(K):
        ck = est.c_hat[k]
        own = float(np.real(ck.conj() @ ck))
        if own == 0.0:
            log.warning("zero channel estimate for user %d; SINR set to 0", k)
            continue
        signal = powers[k] * own**2
        interf = sum(
            powers[j] * abs(ck.conj() @ est.c_hat[j]) ** 2
            for j in range(K)
            if j != k
        )
        err = sum(
            powers[j] * float(np.real(ck.conj() @ (est.F[j] @ ck))) for j in range(K)
        )
        gammas[k] = signal / (interf + err + sigma2 * own / N)
    return gammas


def achievable_rate(gamma: float, T: int, K: int) -> float:
    """(T - K)/T * log2(1 + gamma); the prefactor is the data fraction."""
    if T <= K:
        raise ValueError("need T > K")
    return (T - K) / T * math.log2(1.0 + gamma)


def asymptotic_rate(
    cov: CovarianceSet,
    pattern: ReflectionPattern,
    k: int,
    E_k: float,
    sigma2: float,
    T: int,
    K: int,
) -> float:
    """Closed-form limit rate for user k at scaled energy E_k (p_k = E_k/(MN))."""
    quad = reflection_quadratic(cov, k, pattern.phi)
    gamma = E_k * cov.beta_IU[k] * cov.beta_BI * quad / (cov.N * sigma2)
    return achievable_rate(gamma, T, K)


@dataclass(frozen=True)
class RateReport:
    """Monte Carlo vs closed-form rates at one array size."""

    N: int
    M: int
    q: float
    blocks: int
    rate_mc: np.ndarray  # per-user Monte Carlo rates (bits/s/Hz)
    rate_asym: np.ndarray  # per-user closed-form rates

    @property
    def sum_mc(self) -> float:
        return float(np.sum(self.rate_mc))

    @property
    def sum_asym(self) -> float:
        return float(np.sum(self.rate_asym))

    @property
    def gap(self) -> float:
        return abs(self.sum_mc - self.sum_asym) / self.sum_asym


def monte_carlo_rates(
    cov: CovarianceSet,
    pattern: ReflectionPattern,
    cfg: ScenarioConfig,
    blocks: int,
    rng: np.random.Generator,
) -> RateReport:
    """Average per-user rates over coherence blocks through the full pipeline."""
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    pilots = make_pilots(cov.K)
    p_t = cfg.pilot_power()
    powers = cfg.data_powers()
    filters = [
        lmmse_filter(cov, pattern.phi, k, p_t, cfg.sigma2) for k in range(cov.K)
    ]
    acc = np.zeros(cov.K)
    comp = np.zeros(cov.K)  # Kahan compensation, order-independent-ish averaging
    for _ in range(blocks):
        block = sample_block(cov, pattern, rng)
        y_hats = train_and_despread(block, pilots, p_t, cfg.sigma2, rng)
        est = estimate_block(cov, pattern.phi, y_hats, p_t, cfg.sigma2, filters)
        gammas = mrc_sinr(est, powers, cfg.sigma2, cov.N)
        rates = np.array([achievable_rate(g, cfg.T, cov.K) for g in gammas])
        y = rates - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    rate_mc = acc / blocks
    rate_asym = np.array(
        [
            asymptotic_rate(cov, pattern, k, cfg.e_k[k], cfg.sigma2, cfg.T, cov.K)
            for k in range(cov.K)
        ]
    )
    return RateReport(
        N=cov.N,
        M=cov.M,
        q=cov.N / cov.M,
        blocks=blocks,
        rate_mc=rate_mc,
        rate_asym=rate_asym,
    )


def rate_convergence_sweep(
    cfg: ScenarioConfig,
    n_ladder: list[int],
    q_values: list[float],
    blocks: int,
    pattern_builder=None,
) -> list[RateReport]:
    """Full-pipeline Monte Carlo vs closed-form across (N, q) sizes.

    Each size gets a fresh CovarianceSet at M = N/q but shares the config's
    geometry and seed, mirroring a convergence-to-the-limit experiment.
    """
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if not n_ladder:
        raise ValueError("empty N ladder")
    if pattern_builder is None:
        pattern_builder = ReflectionPattern.all_one
    reports = []
    for q in q_values:
        for N in n_ladder:
            M = max(1, int(round(N / q)))
            sized = _resize_config(cfg, N=N, M=M)
            cov = build_covariance_set(sized)
            pattern = pattern_builder(N)
            rng = np.random.default_rng(sized.seed)
            reports.append(monte_carlo_rates(cov, pattern, sized, blocks, rng))
    return reports


def _resize_config(cfg: ScenarioConfig, N: int, M: int) -> ScenarioConfig:
    from dataclasses import replace

    return replace(cfg, N=N, M=M)
