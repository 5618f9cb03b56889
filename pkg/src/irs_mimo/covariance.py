"""Channel statistics: correlation matrices, path-loss gains, derived covariances.

Everything the slow timescale operates on lives here. A CovarianceSet is
immutable after construction and caches the Hermitian square roots used by
the channel sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from irs_mimo.config import ScenarioConfig, path_loss
from irs_mimo.linalg import NumericalError, hermitian_sqrt


def exponential_corr(n: int, c: complex) -> np.ndarray:
    """Exponential correlation matrix: entry (i, j) = c^(i-j) for i >= j,
    conjugate-symmetric above the diagonal."""
    if abs(c) >= 1.0:
        raise ValueError(f"|c| must be < 1, got {abs(c)}")
    i = np.arange(n)
    lag = i[:, None] - i[None, :]
    lower = np.power(c, np.abs(lag))
    out = np.where(lag >= 0, lower, np.conj(lower))
    np.fill_diagonal(out, 1.0)
    return out


def sinc_corr(
    n: int, grid: tuple[int, int], spacing: float, wavelength: float
) -> np.ndarray:
    """Isotropic-scattering correlation on a uniform rectangular grid.

    Entry (m, l) = sinc(2 |u_m - u_l| / wavelength) with the normalized
    sinc and u_i the planar element positions at the given spacing.
    """
    rows, cols = grid
    if rows * cols != n:
        raise ValueError(f"grid {grid} does not factor n={n}")
    if spacing <= 0 or wavelength <= 0:
        raise ValueError("spacing and wavelength must be positive")
    idx = np.arange(n)
    x = (idx % cols) * spacing
    y = (idx // cols) * spacing
    dist = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    out = np.sinc(2.0 * dist / wavelength)
    np.fill_diagonal(out, 1.0)
    return out.astype(complex)


def default_grid(n: int) -> tuple[int, int]:
    """Most-square integer factorization of n."""
    r = int(np.sqrt(n))
    while n % r != 0:
        r -= 1
    return (r, n // r)


@dataclass(frozen=True)
class CovarianceSet:
    """Correlation matrices and linear path-loss gains for one scenario.

    C_B / C_B_k are M x M (BS side), C_I / C_I_k are N x N (IRS side).
    All correlation matrices have unit diagonal.
    """

    C_B: np.ndarray
    C_B_k: list[np.ndarray]
    C_I: np.ndarray
    C_I_k: list[np.ndarray]
    beta_BU: np.ndarray
    beta_BI: float
    beta_IU: np.ndarray
    # cached Hermitian square roots (same order as above)
    sqrt_C_B: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    sqrt_C_B_k: list[np.ndarray] = field(repr=False, default=None)  # type: ignore[assignment]
    sqrt_C_I: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    sqrt_C_I_k: list[np.ndarray] = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def K(self) -> int:
        return len(self.C_B_k)

    @property
    def M(self) -> int:
        return self.C_B.shape[0]

    @property
    def N(self) -> int:
        return self.C_I.shape[0]

    @staticmethod
    def create(
        C_B: np.ndarray,
        C_B_k: list[np.ndarray],
        C_I: np.ndarray,
        C_I_k: list[np.ndarray],
        beta_BU,
        beta_BI: float,
        beta_IU,
    ) -> "CovarianceSet":
        beta_BU = np.asarray(beta_BU, dtype=float)
        beta_IU = np.asarray(beta_IU, dtype=float)
        if np.any(beta_BU < 0) or np.any(beta_IU < 0) or beta_BI < 0:
            raise ValueError("path-loss gains must be nonnegative")
        for name, mat in [("C_B", C_B), ("C_I", C_I)] + [
            (f"C_B_{k}", m) for k, m in enumerate(C_B_k)
        ] + [(f"C_I_{k}", m) for k, m in enumerate(C_I_k)]:
            _check_correlation(name, mat)
        return CovarianceSet(
            C_B=C_B,
            C_B_k=list(C_B_k),
            C_I=C_I,
            C_I_k=list(C_I_k),
            beta_BU=beta_BU,
            beta_BI=float(beta_BI),
            beta_IU=beta_IU,
            sqrt_C_B=hermitian_sqrt(C_B),
            sqrt_C_B_k=[hermitian_sqrt(m) for m in C_B_k],
            sqrt_C_I=hermitian_sqrt(C_I),
            sqrt_C_I_k=[hermitian_sqrt(m) for m in C_I_k],
        )


def _check_correlation(name: str, mat: np.ndarray) -> None:
    if np.max(np.abs(np.diag(mat) - 1.0)) > 1e-9:
        raise NumericalError(f"{name}: correlation matrix must have unit diagonal")
    if np.max(np.abs(mat - mat.conj().T)) > 1e-8:
        raise NumericalError(f"{name}: correlation matrix must be Hermitian")
    wmin = float(np.linalg.eigvalsh(mat)[0])
    if wmin < -1e-9:
        raise NumericalError(f"{name}: min eigenvalue {wmin:.3e} below -1e-9")


def build_covariance_set(
    cfg: ScenarioConfig, rng: np.random.Generator | None = None
) -> CovarianceSet:
    """Construct the scenario's statistics from a ScenarioConfig.

    Model 1 uses the exponential correlation everywhere (BS-side coefficient
    cfg.c_bs, IRS-side cfg.c_irs). Model 2 keeps the exponential model at the
    BS and switches the IRS side to the sinc correlation at the configured
    element spacing. User placement is drawn once per config seed.
    """
    M, N, K = cfg.M, cfg.N, cfg.K
    if cfg.covariance_model == "identity":
        C_B = np.eye(M, dtype=complex)
        C_B_k = [np.eye(M, dtype=complex) for _ in range(K)]
        C_I = np.eye(N, dtype=complex)
        C_I_k = [np.eye(N, dtype=complex) for _ in range(K)]
    elif cfg.covariance_model == "model1":
        C_B = exponential_corr(M, cfg.c_bs)
        C_B_k = [exponential_corr(M, cfg.c_bs) for _ in range(K)]
        C_I = exponential_corr(N, cfg.c_irs)
        C_I_k = [exponential_corr(N, cfg.c_irs) for _ in range(K)]
    else:  # model2
        C_B = exponential_corr(M, cfg.c_bs)
        C_B_k = [exponential_corr(M, cfg.c_bs) for _ in range(K)]
        grid = cfg.irs_grid or default_grid(N)
        # wavelength normalized to 1; only the spacing/wavelength ratio matters
        C_I = sinc_corr(N, grid, cfg.spacing_over_wavelength, 1.0)
        C_I_k = [C_I.copy() for _ in range(K)]

    d_iu = cfg.user_distances(rng)
    beta_IU = np.array([path_loss(d, cfg.d0, cfg.beta0, cfg.alpha1) for d in d_iu])
    beta_BI = path_loss(cfg.d_bi, cfg.d0, cfg.beta0, cfg.alpha2)
    if cfg.beta_bu is not None:
        beta_BU = np.asarray(cfg.beta_bu, dtype=float)
    else:
        beta_BU = np.zeros(K)  # direct links blocked
    return CovarianceSet.create(C_B, C_B_k, C_I, C_I_k, beta_BU, beta_BI, beta_IU)


def coupling_matrix(cov: CovarianceSet, k: int) -> np.ndarray:
    """Hadamard coupling of the two IRS-side correlations for user k.

    Positive definite whenever both factors are (Schur product theorem);
    defines the quadratic form in the reflection vector that drives both the
    asymptotic rate and the reflection design.
    """
    return cov.C_I * cov.C_I_k[k].T


def reflected_gram(cov: CovarianceSet, k: int, phi: np.ndarray) -> np.ndarray:
    """Inner Gram of the reflected link for user k at reflection vector phi:
    sqrt(C_I) diag(phi) C_I_k diag(phi)^H sqrt(C_I)."""
    s = cov.sqrt_C_I
    d = s * phi[None, :]  # sqrt(C_I) @ diag(phi)
    return d @ cov.C_I_k[k] @ d.conj().T


def reflection_quadratic(cov: CovarianceSet, k: int, phi: np.ndarray) -> float:
    """phi^H (C_I o C_I_k^T) phi, real-valued for Hermitian coupling."""
    return float(np.real(phi.conj() @ (coupling_matrix(cov, k) @ phi)))


def effective_cov(cov: CovarianceSet, k: int, phi: np.ndarray) -> np.ndarray:
    """Covariance of user k's (unnormalized) effective channel:
    beta_BU C_B_k + beta_BI beta_IU (phi^H Cbar phi) C_B."""
    if phi.shape != (cov.N,):
        raise ValueError(f"phi must have shape ({cov.N},)")
    quad = reflection_quadratic(cov, k, phi)
    return (
        cov.beta_BU[k] * cov.C_B_k[k]
        + cov.beta_BI * cov.beta_IU[k] * quad * cov.C_B
    )
