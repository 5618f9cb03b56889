"""Per-coherence-block channel sampling and effective-channel assembly.

The direct, IRS-to-BS, and user-to-IRS links are correlated Rayleigh draws
shaped by the CovarianceSet square roots. One RNG stream is spawned per
sampled object (the shared IRS-to-BS matrix first, then one per user), so
adding users never perturbs the draws of existing ones.

The i.i.d. inner matrix of the IRS-to-BS link carries per-entry variance
beta_BI. With that convention the effective-channel covariance equals
beta_BU C_B_k + beta_BI beta_IU (phi^H Cbar phi) C_B and the 1/sqrt(N)
normalization leaves O(M) channel power, which the estimator and rate
modules rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from irs_mimo.covariance import CovarianceSet
from irs_mimo.linalg import NumericalError, sample_complex_gaussian


@dataclass(frozen=True)
class ReflectionPattern:
    """IRS coefficient vector; per-element amplitude at most 1."""

    phi: np.ndarray

    def __post_init__(self) -> None:
        amp = np.abs(self.phi)
        if amp.size and float(np.max(amp)) > 1.0 + 1e-9:
            raise ValueError(f"amplitude {np.max(amp):.6f} exceeds 1")

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.phi)

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.phi)

    @staticmethod
    def all_one(n: int) -> "ReflectionPattern":
        return ReflectionPattern(np.ones(n, dtype=complex))


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence block: direct channels h[k], IRS-to-BS matrix R,
    user-to-IRS channels t[k], and effective channels c[k]."""

    h: list[np.ndarray]
    R: np.ndarray
    t: list[np.ndarray]
    c: list[np.ndarray]
    phi: np.ndarray

    @property
    def K(self) -> int:
        return len(self.c)

    def c_normalized(self, k: int) -> np.ndarray:
        return self.c[k] / np.sqrt(self.phi.shape[0])


def _gaussian_or_zero(
    rows: int, cols: int, variance: float, rng: np.random.Generator
) -> np.ndarray:
    if variance == 0.0:
        return np.zeros((rows, cols), dtype=complex)
    return sample_complex_gaussian(rows, cols, variance, rng)


def _draw_user(
    cov: CovarianceSet, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Direct channel h_k and user-to-IRS channel t_k (h drawn first)."""
    if cov.beta_BU[k] > 0:
        h = cov.sqrt_C_B_k[k] @ sample_complex_gaussian(
            cov.M, 1, cov.beta_BU[k], rng
        ).ravel()
    else:
        h = np.zeros(cov.M, dtype=complex)
    t = cov.sqrt_C_I_k[k] @ _gaussian_or_zero(cov.N, 1, cov.beta_IU[k], rng).ravel()
    return h, t


def sample_block(
    cov: CovarianceSet, pattern: ReflectionPattern, rng: np.random.Generator
) -> ChannelRealization:
    """Draw one full coherence-block realization."""
    if pattern.n != cov.N:
        raise ValueError("reflection pattern size does not match N")
    streams = rng.spawn(1 + cov.K)
    R_tilde = _gaussian_or_zero(cov.M, cov.N, cov.beta_BI, streams[0])
    R = cov.sqrt_C_B @ R_tilde @ cov.sqrt_C_I
    h, t, c = [], [], []
    for k in range(cov.K):
        hk, tk = _draw_user(cov, k, streams[1 + k])
        h.append(hk)
        t.append(tk)
        c.append(hk + R @ (pattern.phi * tk))
    return ChannelRealization(h=h, R=R, t=t, c=c, phi=pattern.phi.copy())


def sample_effective(
    cov: CovarianceSet, pattern: ReflectionPattern, rng: np.random.Generator
) -> list[np.ndarray]:
    """Draw only the effective channels c_k for one block.

    Statistically identical to sample_block but never forms the M x N
    IRS-to-BS matrix: the reflected term is assembled as
    sqrt(C_B) (R_tilde (sqrt(C_I) diag(phi) t_k)), which is what makes the
    large-array Monte Carlo sweeps affordable.
    """
    if pattern.n != cov.N:
        raise ValueError("reflection pattern size does not match N")
    streams = rng.spawn(1 + cov.K)
    R_tilde = _gaussian_or_zero(cov.M, cov.N, cov.beta_BI, streams[0])
    out = []
    for k in range(cov.K):
        hk, tk = _draw_user(cov, k, streams[1 + k])
        v = cov.sqrt_C_I @ (pattern.phi * tk)
        out.append(hk + cov.sqrt_C_B @ (R_tilde @ v))
    return out


def sample_reflected_svd_path(
    cov: CovarianceSet,
    pattern: ReflectionPattern,
    k: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Whitened reflected-channel draw through the rotated (SVD) route.

    Decomposes sqrt(C_I) diag(phi) sqrt(C_I_k) = U S G^H, draws fresh i.i.d.
    factors, and returns (1/sqrt(N)) R_bar S t_bar. Distributionally equal
    to the direct route's whitened reflected term; used as a distribution
    oracle for the sampler.
    """
    L = cov.sqrt_C_I @ (pattern.phi[:, None] * cov.sqrt_C_I_k[k])
    try:
        s = np.linalg.svd(L, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD of reflected factor failed: {exc}") from exc
    R_bar = _gaussian_or_zero(cov.M, cov.N, cov.beta_BI, rng)
    t_bar = _gaussian_or_zero(cov.N, 1, cov.beta_IU[k], rng).ravel()
    return (R_bar @ (s * t_bar)) / np.sqrt(cov.N)
