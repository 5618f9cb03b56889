"""Complex dense linear-algebra helpers and circularly-symmetric Gaussian sampling.

All decompositions are deterministic (LAPACK-backed) so that experiments are
bit-reproducible per seed. Eigenvalues and singular values are returned in
descending order throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericalError(RuntimeError):
    """Raised when a matrix violates a structural precondition."""


@dataclass(frozen=True)
class HermitianEig:
    """Eigendecomposition A = U diag(values) U^H, values descending."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class Svd:
    """Decomposition A = left diag(singulars) right^H, singulars descending."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def _check_hermitian(a: np.ndarray, tol: float = 1e-8) -> None:
    asym = np.max(np.abs(a - a.conj().T))
    scale = max(1.0, float(np.max(np.abs(a))))
    if asym > tol * scale:
        raise NumericalError(f"matrix is not Hermitian (asymmetry {asym:.3e})")


def hermitian_eig(a: np.ndarray) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    _check_hermitian(a)
    w, u = np.linalg.eigh(a)
    order = np.argsort(w)[::-1]
    return HermitianEig(values=w[order], vectors=u[:, order])


def svd(a: np.ndarray) -> Svd:
    """Reduced SVD: left is m x r, right is n x r with r = min(m, n)."""
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return Svd(left=u, singulars=s, right=vh.conj().T)


def hermitian_sqrt(a: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Slightly negative eigenvalues from roundoff are clamped to zero; a
    genuinely negative eigenvalue (below -1e-6 times the spectral norm)
    raises NumericalError.
    """
    _check_hermitian(a)
    w, u = np.linalg.eigh(a)
    norm2 = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -1e-6 * max(norm2, 1e-300):
        raise NumericalError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    s = (u * np.sqrt(w)) @ u.conj().T
    return 0.5 * (s + s.conj().T)


def sample_complex_gaussian(
    rows: int, cols: int, variance: float, rng: np.random.Generator
) -> np.ndarray:
    """i.i.d. CN(0, variance) matrix; real/imag parts each carry variance/2."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    scale = np.sqrt(variance / 2.0)
    return scale * (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    )


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(a, 2))


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise product; dimensions must match exactly."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b
