"""Dense complex spectra: eigenvalues, singular values, the Hermitian
linearization of W - zI, and floored log-determinants.

Decompositions are delegated to LAPACK through numpy (zgeev, zgesdd, zheevd),
which carry the backward-stability guarantees the callers rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LOG_FLOOR = 1e-300


class SpectralConvergenceError(RuntimeError):
    """A dense decomposition failed to converge."""


@dataclass(frozen=True)
class EigenSpectrum:
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray  # descending
    shift: complex = 0.0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class LogDet:
    value: float
    floored_count: int


def as_square(M) -> np.ndarray:
    a = np.asarray(M, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def shifted(M, z: complex) -> np.ndarray:
    a = as_square(M).copy()
    if z != 0:
        a[np.diag_indices_from(a)] -= z
    return a


def eigenvalues(M) -> EigenSpectrum:
    a = as_square(M)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise SpectralConvergenceError(f"eigenvalue iteration did not converge (n={a.shape[0]}): {exc}") from exc
    return EigenSpectrum(vals.astype(np.complex128))


def singular_values(M, z: complex = 0.0) -> SingularSpectrum:
    """Singular values of M - zI, sorted descending."""
    a = shifted(M, z)
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SpectralConvergenceError(f"SVD did not converge (n={a.shape[0]}): {exc}") from exc
    return SingularSpectrum(np.sort(s)[::-1], complex(z))


def linearization(W, z: complex = 0.0) -> np.ndarray:
    """The 2n x 2n Hermitian block matrix [[0, W - zI], [(W - zI)^*, 0]]."""
    a = shifted(W, z)
    n = a.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    out[:n, n:] = a
    out[n:, :n] = a.conj().T
    return out


def linearized_spectrum(W, z: complex = 0.0) -> np.ndarray:
    """Eigenvalues of the Hermitian linearization, ascending.

    These are -s_1, ..., -s_n, s_n, ..., s_1. The raw eigenvalues are paired
    as (e[k] - e[2n-1-k]) / 2 so the output is exactly antisymmetric.
    """
    h = linearization(W, z)
    try:
        e = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise SpectralConvergenceError(f"Hermitian eigensolver did not converge: {exc}") from exc
    paired = 0.5 * (e - e[::-1])
    return paired


def log_abs_det(M, z: complex = 0.0, floor: float = DEFAULT_LOG_FLOOR) -> LogDet:
    """sum_j log max(s_j(M - zI), floor), with the number of floored values."""
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor}")
    s = singular_values(M, z).values
    hit = s < floor
    return LogDet(float(np.sum(np.log(np.where(hit, floor, s)))), int(hit.sum()))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with phase correction."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))
