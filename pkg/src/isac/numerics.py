"""Dense Hermitian linear-algebra kernels.

Thin, validated wrappers around LAPACK (via numpy) so that every caller sees
the same conventions: eigenvalues sorted descending, Hermitian inputs
symmetrized silently, non-finite or non-square inputs rejected loudly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-12


class DimensionError(ValueError):
    """Matrix has the wrong shape for the requested operation."""


class DomainError(ValueError):
    """Matrix lies outside the domain of the operation (not HPD, not Hermitian...)."""

    def __init__(self, message: str, min_eig: float | None = None):
        super().__init__(message)
        self.min_eig = min_eig


@dataclass(frozen=True)
class HermEig:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, column k pairs with eigenvalues[k]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_cmatrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def hermitian_part(h) -> np.ndarray:
    """Return (H + H^H)/2 after checking H is Hermitian to HERMITIAN_RTOL."""
    m = as_cmatrix(h)
    _square(m)
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > HERMITIAN_RTOL * scale:
        raise DomainError("matrix is not Hermitian")
    return 0.5 * (m + m.conj().T)


def herm_eig(h) -> HermEig:
    m = as_cmatrix(h)
    _square(m)
    m = 0.5 * (m + m.conj().T)
    lam, v = np.linalg.eigh(m)
    return HermEig(lam[::-1].copy(), v[:, ::-1].copy())


def logdet_hpd(h) -> float:
    """Natural log-determinant of a Hermitian positive-definite matrix (Cholesky)."""
    m = as_cmatrix(h)
    _square(m)
    m = 0.5 * (m + m.conj().T)
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        lam_min = float(np.linalg.eigvalsh(m)[0])
        raise DomainError(
            f"matrix is not positive definite (min eigenvalue {lam_min:.3e})",
            min_eig=lam_min,
        ) from None
    return float(2.0 * np.sum(np.log(np.abs(np.diag(c)).real)))


def kron(a, b) -> np.ndarray:
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def real_embed(h) -> np.ndarray:
    """Map Hermitian H to the real symmetric [[Re H, -Im H], [Im H, Re H]]."""
    m = hermitian_part(h)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def real_unembed(s: np.ndarray) -> np.ndarray:
    """Inverse of :func:`real_embed`, averaging the redundant blocks."""
    n = s.shape[0] // 2
    re = 0.5 * (s[:n, :n] + s[n:, n:])
    im = 0.5 * (s[n:, :n] - s[:n, n:])
    return re + 1j * im
