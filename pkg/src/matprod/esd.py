"""Empirical distribution functions and summary statistics of spectra."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import limitlaw
from .linalg import EigenSpectrum, SingularSpectrum, log_abs_det, DEFAULT_LOG_FLOOR

MAX_MOMENT_ORDER = 8
GRID2D_SIZE = 64
GRID2D_EXTENT = 1.5


class EmpiricalCDF:
    """Right-continuous step function with uniform weights 1/N."""

    __slots__ = ("samples",)

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("EmpiricalCDF needs at least one sample")
        if np.isnan(s).any():
            raise ValueError("samples contain NaN")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __setattr__(self, name, value):
        raise AttributeError("EmpiricalCDF is immutable")

    def __len__(self):
        return self.samples.size

    def __call__(self, x):
        out = np.searchsorted(self.samples, x, side="right") / self.samples.size
        return float(out) if np.ndim(out) == 0 else out

    def left_limit(self, x):
        out = np.searchsorted(self.samples, x, side="left") / self.samples.size
        return float(out) if np.ndim(out) == 0 else out

    def jumps(self):
        """Distinct sample values with F at and just before each of them."""
        values, counts = np.unique(self.samples, return_counts=True)
        after = np.cumsum(counts) / self.samples.size
        before = np.concatenate([[0.0], after[:-1]])
        return values, before, after

    def to_csv(self, path) -> Path:
        path = Path(path)
        n = self.samples.size
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "cumulative_weight"])
            for k, v in enumerate(self.samples, start=1):
                w.writerow([repr(float(v)), repr(k / n)])
        return path

    @classmethod
    def from_csv(cls, path) -> "EmpiricalCDF":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls([float(r["sample"]) for r in rows])


@dataclass(frozen=True)
class PotentialEstimate:
    value: float
    floored_count: int
    smoothing_radius: float = 0.0
    replica_count: int = 1


def _values(eigenvalues) -> np.ndarray:
    if isinstance(eigenvalues, EigenSpectrum):
        return np.asarray(eigenvalues.values)
    return np.asarray(eigenvalues, dtype=complex)


def radial_ecdf(eigenvalues) -> EmpiricalCDF:
    return EmpiricalCDF(np.abs(_values(eigenvalues)))


def angular_ecdf(eigenvalues) -> EmpiricalCDF:
    """ECDF of arg(lambda) / 2 pi, mapped into [0, 1)."""
    return EmpiricalCDF(np.mod(np.angle(_values(eigenvalues)) / (2 * math.pi), 1.0))


def cdf2d(eigenvalues, x, y):
    """Fraction of eigenvalues with Re <= x and Im <= y (vectorised over x, y)."""
    lam = _values(eigenvalues)
    xs, ys = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    flat_x, flat_y = xs.ravel(), ys.ravel()
    out = np.empty(flat_x.size)
    re, im = lam.real, lam.imag
    chunk = max(1, 2_000_000 // max(lam.size, 1))
    for start in range(0, flat_x.size, chunk):
        sl = slice(start, start + chunk)
        hit = (re[None, :] <= flat_x[sl, None]) & (im[None, :] <= flat_y[sl, None])
        out[sl] = hit.mean(axis=1)
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def symmetrize(squared_value_cdf: EmpiricalCDF, x):
    """1/2 (1 + sign(x) F(x^2)) for the CDF F of squared values."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * (1.0 + np.sign(x) * squared_value_cdf(x * x))
    return float(out) if out.ndim == 0 else out


def ks_distance(empirical: EmpiricalCDF, reference: Callable) -> float:
    """sup_x |F(x) - G(x)| for a continuous nondecreasing reference G.

    Only the jump points of F need checking, on both sides of each jump.
    """
    values, before, after = empirical.jumps()
    try:
        g = np.asarray(reference(values), dtype=float)
        if g.shape != values.shape:
            raise ValueError
    except (TypeError, ValueError):
        g = np.array([float(reference(v)) for v in values])
    return float(min(1.0, max(np.max(np.abs(after - g)), np.max(np.abs(before - g)))))


def radial_ks(eigenvalues, m: int) -> float:
    """KS distance of the moduli against r -> min(r, 1)^(2/m)."""
    law = limitlaw.PowerDiscLaw(m)
    return ks_distance(radial_ecdf(eigenvalues), lambda r: limitlaw.radial_cdf_G(law, r))


def angular_ks(eigenvalues) -> float:
    return ks_distance(angular_ecdf(eigenvalues), lambda t: np.clip(t, 0.0, 1.0))


def grid2d_points(size: int = GRID2D_SIZE, extent: float = GRID2D_EXTENT):
    g = np.linspace(-extent, extent, size)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return X.ravel(), Y.ravel()


def grid2d_discrepancy(eigenvalues, m: int, grid_values: Optional[np.ndarray] = None,
                       size: int = GRID2D_SIZE, extent: float = GRID2D_EXTENT) -> float:
    """max |F_n - G| over the eigenvalue positions and a size x size grid.

    ``grid_values`` lets callers reuse G on the fixed grid across replicas.
    """
    lam = _values(eigenvalues)
    gx, gy = grid2d_points(size, extent)
    if grid_values is None:
        grid_values = limitlaw.cdf_G(m, gx, gy)
    px = np.concatenate([gx, lam.real])
    py = np.concatenate([gy, lam.imag])
    G = np.concatenate([grid_values, limitlaw.cdf_G(m, lam.real, lam.imag)])
    return float(np.max(np.abs(cdf2d(lam, px, py) - G)))


def empirical_log_potential(W, z: complex, smoothing_radius: float = 0.0,
                            smoothing_draws: int = 1,
                            rng: Optional[np.random.Generator] = None,
                            floor: float = DEFAULT_LOG_FLOOR) -> PotentialEstimate:
    """-(1/n) log|det(W - zI)|, optionally averaged over shifts z + r xi,
    xi uniform in the unit disc."""
    W = np.asarray(W)
    n = W.shape[0]
    if smoothing_radius < 0:
        raise ValueError("smoothing_radius must be nonnegative")
    if smoothing_radius == 0:
        ld = log_abs_det(W, z, floor)
        return PotentialEstimate(-ld.value / n, ld.floored_count, 0.0, 1)
    if smoothing_draws < 1:
        raise ValueError("smoothing_draws must be >= 1 when smoothing")
    if rng is None:
        raise ValueError("smoothing needs an explicit rng stream")
    total = 0.0
    floored = 0
    for _ in range(smoothing_draws):
        xi = math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
        ld = log_abs_det(W, z + smoothing_radius * xi, floor)
        total += ld.value
        floored += ld.floored_count
    return PotentialEstimate(-total / (n * smoothing_draws), floored,
                             float(smoothing_radius), 1)


def spectral_moment(singulars, p: int) -> float:
    """(1/n) sum_j s_j^(2p)."""
    if int(p) != p or p < 0:
        raise ValueError(f"p must be a nonnegative integer, got {p}")
    if p > MAX_MOMENT_ORDER:
        raise ValueError(f"p = {p} exceeds the overflow guard {MAX_MOMENT_ORDER}")
    s = np.asarray(singulars.values if isinstance(singulars, SingularSpectrum) else singulars,
                   dtype=float)
    return float(np.mean(s ** (2 * p)))
