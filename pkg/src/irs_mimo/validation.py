"""Empirical checks of the asymptotic machinery the rate analysis rests on.

Everything here is evidence, not proof: minimum-singular-value sweeps for
the reflected factor, singular spectra of the quadratic-form kernels,
hardening / favorable-propagation deviations across array sizes, a
Gaussianity test for the normalized effective channel, and the two trace
identities for quadratic forms of i.i.d. vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from irs_mimo.channels import ReflectionPattern, sample_effective, _gaussian_or_zero
from irs_mimo.covariance import CovarianceSet, reflection_quadratic


@dataclass(frozen=True)
class SpectralReport:
    """Singular spectrum of one matrix draw."""

    matrix_id: str
    N: int
    M: int
    singular_values: np.ndarray

    @property
    def min_singular(self) -> float:
        return float(self.singular_values[-1])

    @property
    def spectral_norm(self) -> float:
        return float(self.singular_values[0])


@dataclass
class ConvergenceSeries:
    """One statistic tracked across an increasing ladder of N."""

    name: str
    n_values: list[int] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    trials: list[int] = field(default_factory=list)

    def append(self, n: int, value: float, trials: int = 1) -> None:
        if self.n_values and n <= self.n_values[-1]:
            raise ValueError("n_values must be strictly increasing")
        if trials < 1:
            raise ValueError("trials must be >= 1")
        self.n_values.append(n)
        self.values.append(value)
        self.trials.append(trials)


def reflected_factor(cov: CovarianceSet, phi: np.ndarray, k: int) -> np.ndarray:
    """sqrt(C_I) diag(phi) sqrt(C_I_k), the factor whose minimum singular
    value must stay bounded away from zero for the Gaussian limit."""
    return cov.sqrt_C_I @ (phi[:, None] * cov.sqrt_C_I_k[k])


def min_singular_reflected(cov: CovarianceSet, phi: np.ndarray, k: int) -> float:
    s = np.linalg.svd(reflected_factor(cov, phi, k), compute_uv=False)
    return float(s[-1])


def quadratic_kernel_spectra(
    cov: CovarianceSet,
    phi: np.ndarray,
    k: int,
    j: int,
    trials: int,
    rng: np.random.Generator,
) -> list[SpectralReport]:
    """Singular spectra of the two random kernels behind the cross-Gram terms.

    Per trial draws a fresh i.i.d. inner matrix and forms
      inner:  L_k^H (R~^H C_B R~ / N) L_j          (N x N)
      outer:  sqrt(C_B_k) sqrt(C_B) R~ L_j / N     (M x N)
    whose spectral norms must stay bounded as the arrays grow.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    Lk = reflected_factor(cov, phi, k)
    Lj = Lk if j == k else reflected_factor(cov, phi, j)
    out: list[SpectralReport] = []
    pre_outer = cov.sqrt_C_B_k[k] @ cov.sqrt_C_B
    for _ in range(trials):
        R_tilde = _gaussian_or_zero(cov.M, cov.N, cov.beta_BI, rng)
        G = R_tilde.conj().T @ (cov.C_B @ R_tilde) / cov.N
        inner = Lk.conj().T @ G @ Lj
        outer = pre_outer @ R_tilde @ Lj / cov.N
        out.append(
            SpectralReport(
                matrix_id=f"inner_{k}{j}",
                N=cov.N,
                M=cov.M,
                singular_values=np.linalg.svd(inner, compute_uv=False),
            )
        )
        out.append(
            SpectralReport(
                matrix_id=f"outer_{k}{j}",
                N=cov.N,
                M=cov.M,
                singular_values=np.linalg.svd(outer, compute_uv=False),
            )
        )
    return out


@dataclass(frozen=True)
class HardeningStats:
    """Deviation statistics for channel hardening and favorable propagation."""

    N: int
    M: int
    blocks: int
    hardening_limit: np.ndarray  # per-user limit of c^H c/(MN)
    hardening_median: np.ndarray
    hardening_p90: np.ndarray
    favorable_median: np.ndarray  # per ordered pair (k<j), empty when K == 1
    favorable_p90: np.ndarray


def hardening_favorable_stats(
    cov: CovarianceSet,
    pattern: ReflectionPattern,
    blocks: int,
    rng: np.random.Generator,
) -> HardeningStats:
    """Per-block Gram deviations aggregated over coherence blocks.

    Hardening: |c_k^H c_k/(MN) - beta_IU beta_BI phi^H Cbar phi / N|.
    Favorable propagation: |c_k^H c_j/(MN)| for k < j.
    """
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    K, M, N = cov.K, cov.M, cov.N
    limit = np.array(
        [
            cov.beta_IU[k] * cov.beta_BI * reflection_quadratic(cov, k, pattern.phi) / N
            for k in range(K)
        ]
    )
    pairs = [(k, j) for k in range(K) for j in range(k + 1, K)]
    hard = np.empty((blocks, K))
    fav = np.empty((blocks, len(pairs)))
    for b in range(blocks):
        c = sample_effective(cov, pattern, rng)
        for k in range(K):
            hard[b, k] = abs(float(np.real(c[k].conj() @ c[k])) / (M * N) - limit[k])
        for i, (k, j) in enumerate(pairs):
            fav[b, i] = abs(c[k].conj() @ c[j]) / (M * N)
    return HardeningStats(
        N=N,
        M=M,
        blocks=blocks,
        hardening_limit=limit,
        hardening_median=np.median(hard, axis=0),
        hardening_p90=np.percentile(hard, 90, axis=0),
        favorable_median=np.median(fav, axis=0) if pairs else np.empty(0),
        favorable_p90=np.percentile(fav, 90, axis=0) if pairs else np.empty(0),
    )


@dataclass(frozen=True)
class GaussianityReport:
    """Marginal KS statistics for real parts of normalized channel entries."""

    N: int
    M: int
    samples: int
    ks_stats: dict[str, float]
    critical_value: float
    significance: float
    passed: bool
    asymptotics_expected: bool
    cross_correlations: dict[str, float]
    marginals: dict[str, np.ndarray]


# asymptotic Kolmogorov critical coefficients c(alpha): D_crit = c / sqrt(n)
_KS_COEFF = {0.10: 1.2238, 0.05: 1.3581, 0.01: 1.6276}


def gaussianity_check(
    cov: CovarianceSet,
    pattern: ReflectionPattern,
    samples: int,
    rng: np.random.Generator,
    significance: float = 0.01,
    min_asymptotic_n: int = 50,
) -> GaussianityReport:
    """KS test of normalized-channel marginals against a fitted normal.

    Collects the real parts of the first two entries of c_1/sqrt(N) and the
    first entry of c_2/sqrt(N) (users beyond the first are skipped when
    K == 1), tests each against N(0, sigma_hat^2), and reports pairwise
    sample correlations. Small N is reported but flagged: the Gaussian
    limit is not expected to hold there.
    """
    if samples < 10**3:
        raise ValueError("need at least 1e3 samples")
    if significance not in _KS_COEFF:
        raise ValueError(f"significance must be one of {sorted(_KS_COEFF)}")
    N = cov.N
    root_n = np.sqrt(N)
    take = [("v11", 0, 0), ("v12", 0, 1)]
    if cov.K > 1:
        take.append(("v21", 1, 0))
    data = {name: np.empty(samples) for name, _, _ in take}
    for s in range(samples):
        c = sample_effective(cov, pattern, rng)
        for name, k, m in take:
            data[name][s] = c[k][m].real / root_n
    ks_stats = {}
    for name, x in data.items():
        sigma = float(np.std(x))
        ks_stats[name] = float(stats.kstest(x, "norm", args=(0.0, sigma)).statistic)
    crit = _KS_COEFF[significance] / np.sqrt(samples)
    cross = {}
    names = list(data)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            cross[f"{names[i]}_{names[j]}"] = float(
                np.corrcoef(data[names[i]], data[names[j]])[0, 1]
            )
    return GaussianityReport(
        N=N,
        M=cov.M,
        samples=samples,
        ks_stats=ks_stats,
        critical_value=float(crit),
        significance=significance,
        passed=all(v < crit for v in ks_stats.values()),
        asymptotics_expected=N >= min_asymptotic_n,
        cross_correlations=cross,
        marginals=data,
    )


@dataclass(frozen=True)
class TraceLemmaReport:
    """Median deviations of i.i.d.-vector quadratic forms per dimension."""

    dimensions: list[int]
    quad_median: dict[int, float]  # |x^H A x - tr(A)/M|
    bilinear_median: dict[int, float]  # |x^H A y|


def trace_lemma_check(
    dimensions: list[int],
    trials: int,
    rng: np.random.Generator,
    matrix: str = "correlated",
) -> TraceLemmaReport:
    """Concentration of x^H A x around tr(A)/M and of x^H A y around 0.

    x, y have i.i.d. CN(0, 1/M) entries; A is a fixed bounded-spectral-norm
    matrix per dimension ('identity', 'zero', or a seeded unitary-conjugated
    diagonal for 'correlated').
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    quad_median: dict[int, float] = {}
    bil_median: dict[int, float] = {}
    for M in dimensions:
        if matrix == "identity":
            A = np.eye(M, dtype=complex)
        elif matrix == "zero":
            A = np.zeros((M, M), dtype=complex)
        else:
            g = _gaussian_or_zero(M, M, 1.0, rng)
            qmat, _ = np.linalg.qr(g)
            A = (qmat * rng.uniform(0.5, 1.5, size=M)) @ qmat.conj().T
        tr_over_m = np.trace(A) / M
        quad = np.empty(trials)
        bil = np.empty(trials)
        for t in range(trials):
            x = _gaussian_or_zero(M, 1, 1.0 / M, rng).ravel()
            y = _gaussian_or_zero(M, 1, 1.0 / M, rng).ravel()
            quad[t] = abs(x.conj() @ (A @ x) - tr_over_m)
            bil[t] = abs(x.conj() @ (A @ y))
        quad_median[M] = float(np.median(quad))
        bil_median[M] = float(np.median(bil))
    return TraceLemmaReport(
        dimensions=list(dimensions), quad_median=quad_median, bilinear_median=bil_median
    )
