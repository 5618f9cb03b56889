"""Pilot transmission, despreading, and LMMSE estimation of normalized channels.

Pilots are the K-point DFT book, so despreading with the conjugate sequence
nulls every other user exactly. The estimator is the linear MMSE filter for
the normalized effective channel c_k/sqrt(N); its error covariance depends
only on second-order statistics and is therefore exact at any finite N even
though the effective channel is only asymptotically Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from irs_mimo.channels import ChannelRealization
from irs_mimo.covariance import CovarianceSet, effective_cov
from irs_mimo.linalg import hermitian_eig, sample_complex_gaussian


@dataclass(frozen=True)
class PilotBook:
    """K x K unit-modulus book; column k is user k's sequence."""

    A: np.ndarray

    @property
    def K(self) -> int:
        return self.A.shape[0]


def make_pilots(K: int) -> PilotBook:
    """DFT pilot book: entry (i, k) = exp(-2j pi k i / K).

    Despreading column k of the received block with conj(a_k) accumulates
    K times user k's channel and exactly zero from every other user.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    idx = np.arange(K)
    A = np.exp(-2j * np.pi * np.outer(idx, idx) / K)
    return PilotBook(A=A)


def train_and_despread(
    block: ChannelRealization,
    pilots: PilotBook,
    p_t: float,
    sigma2: float,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    """Simulate the training stage and return per-user despread observations.

    The BS receives Y = sqrt(p_t) C A^T + Z with Z i.i.d. CN(0, sigma2) per
    received symbol; despreading with conj(a_k) sums K symbols, giving
    y_hat_k = K sqrt(p_t) c_k/sqrt(N) + z_hat_k, z_hat_k ~ CN(0, K sigma2 I / N).
    """
    K = block.K
    if pilots.K != K:
        raise ValueError("pilot book size does not match user count")
    M = block.c[0].shape[0]
    N = block.phi.shape[0]
    C = np.column_stack(block.c)  # M x K
    Y = np.sqrt(p_t) * C @ pilots.A.T
    if sigma2 > 0:
        Y = Y + sample_complex_gaussian(M, K, sigma2, rng)
    Yn = Y / np.sqrt(N)
    return [Yn @ np.conj(pilots.A[:, k]) for k in range(K)]


@dataclass(frozen=True)
class EstimationResult:
    """LMMSE estimates of c_k/sqrt(N) with per-user error covariances."""

    c_hat: list[np.ndarray]
    F: list[np.ndarray]

    @property
    def K(self) -> int:
        return len(self.c_hat)

    def mse_trace(self, k: int) -> float:
        return float(np.real(np.trace(self.F[k])))


@dataclass(frozen=True)
class LmmseFilter:
    """Precomputed per-user filter and error covariance for a fixed (cov, phi).

    The filter is V (V + sigma2/(K p_t) I)^{-1} applied to y_hat/(K sqrt(p_t));
    the error covariance is assembled on the eigenbasis of V as
    B diag(lam * sigma2 / (sigma2 + p_t K lam)) B^H / N, which is the
    Wiener-filter MSE of the normalized channel and satisfies
    tr(F) <= M sigma2 / (N p_t K).
    """

    W: np.ndarray
    F: np.ndarray
    K: int
    p_t: float

    def apply(self, y_hat_k: np.ndarray) -> np.ndarray:
        return self.W @ y_hat_k / (self.K * np.sqrt(self.p_t))


def lmmse_filter(
    cov: CovarianceSet, phi: np.ndarray, k: int, p_t: float, sigma2: float
) -> LmmseFilter:
    if p_t <= 0:
        raise ValueError("pilot power must be positive")
    V = effective_cov(cov, k, phi)
    K, N = cov.K, cov.N
    eig = hermitian_eig(V)
    lam = np.clip(eig.values, 0.0, None)
    B = eig.vectors
    if sigma2 > 0:
        gain = lam / (lam + sigma2 / (K * p_t))  # filter eigengains
    else:
        gain = (lam > 0).astype(float)  # noiseless: pass-through on the signal space
    W = (B * gain) @ B.conj().T
    err = lam * sigma2 / (sigma2 + p_t * K * lam) if sigma2 > 0 else np.zeros_like(lam)
    F = ((B * err) @ B.conj().T) / N
    F = 0.5 * (F + F.conj().T)
    return LmmseFilter(W=W, F=F, K=K, p_t=p_t)


def lmmse_estimate(
    cov: CovarianceSet,
    phi: np.ndarray,
    k: int,
    y_hat_k: np.ndarray,
    p_t: float,
    sigma2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Estimate c_k/sqrt(N) from the despread observation; returns (c_hat, F)."""
    f = lmmse_filter(cov, phi, k, p_t, sigma2)
    return f.apply(y_hat_k), f.F


def estimate_block(
    cov: CovarianceSet,
    phi: np.ndarray,
    y_hats: list[np.ndarray],
    p_t: float,
    sigma2: float,
    filters: list[LmmseFilter] | None = None,
) -> EstimationResult:
    if filters is None:
        filters = [lmmse_filter(cov, phi, k, p_t, sigma2) for k in range(cov.K)]
    c_hat = [f.apply(y) for f, y in zip(filters, y_hats)]
    return EstimationResult(c_hat=c_hat, F=[f.F for f in filters])


def mse_bound(M: int, N: int, p_t: float, K: int, sigma2: float) -> float:
    """Upper bound M sigma2 / (N p_t K) on tr(F_k)."""
    return M * sigma2 / (N * p_t * K)


def mse_trend(
    cov_builder,
    phi_builder,
    k: int,
    sizes: list[tuple[int, int]],
    p_t: float,
    sigma2: float,
) -> list[dict]:
    """tr(F_k)/M across an (N, M) ladder, with the closed-form upper bound.

    cov_builder(N, M) -> CovarianceSet and phi_builder(N) -> phi (array or
    ReflectionPattern) allow the caller to fix q = N/M and the reflection
    pattern family.
    """
    from irs_mimo.channels import ReflectionPattern

    rows = []
    for N, M in sizes:
        cov = cov_builder(N, M)
        phi = phi_builder(N)
        if isinstance(phi, ReflectionPattern):
            phi = phi.phi
        f = lmmse_filter(cov, phi, k, p_t, sigma2)
        tr = float(np.real(np.trace(f.F)))
        rows.append(
            {
                "N": N,
                "M": M,
                "user": k,
                "tr_F_over_M": tr / M,
                "bound": mse_bound(M, N, p_t, cov.K, sigma2),
                "tr_F": tr,
            }
        )
    return rows
