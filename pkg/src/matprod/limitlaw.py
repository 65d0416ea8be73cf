"""Closed-form limiting objects for the law of zeta**m, zeta uniform on the disc.

Density, radial and two-dimensional distribution functions, logarithmic
potential, Fuss-Catalan moments and the edge of the singular-value support.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

FUSS_CATALAN_MAX_P = 12

# Gauss-Legendre rule reused by cdf_G on every smooth sub-interval
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


class LimitLawError(ValueError):
    pass


@dataclass(frozen=True)
class PowerDiscLaw:
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise LimitLawError(f"m must be a positive integer, got {self.m}")


class _PoleInfinity(float):
    """Infinite density value at the pole of g (m > 1, origin)."""

    def __new__(cls):
        return super().__new__(cls, math.inf)

    def __repr__(self):
        return "POLE"


POLE = _PoleInfinity()


def _m(law) -> int:
    return law.m if isinstance(law, PowerDiscLaw) else PowerDiscLaw(int(law)).m


def density_g(law, x: float, y: float) -> float:
    """1 / (pi m (x^2+y^2)^((m-1)/m)) inside the closed unit disc, else 0.

    At the origin with m > 1 the tagged infinity ``POLE`` is returned.
    """
    m = _m(law)
    r2 = x * x + y * y
    if r2 > 1.0:
        return 0.0
    if m == 1:
        return 1.0 / math.pi
    if r2 == 0.0:
        return POLE
    return 1.0 / (math.pi * m * r2 ** ((m - 1) / m))


def density_g_grid(law, x, y) -> np.ndarray:
    """Vectorised density; the pole is reported as +inf."""
    m = _m(law)
    r2 = np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2
    with np.errstate(divide="ignore"):
        g = 1.0 / (math.pi * m * r2 ** ((m - 1) / m))
    return np.where(r2 <= 1.0, g, 0.0)


def radial_cdf_G(law, r):
    """P(|zeta^m| <= r) = r^(2/m) on [0, 1], 1 beyond."""
    m = _m(law)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise LimitLawError("radius must be nonnegative")
    out = np.minimum(r, 1.0) ** (2.0 / m)
    return float(out) if out.ndim == 0 else out


def angular_fraction(r, x, y) -> np.ndarray:
    """Fraction of the circle of radius r lying in {Re <= x, Im <= y}.

    The complement arcs {cos t > x/r} (centred at 0) and {sin t > y/r}
    (centred at pi/2) are measured exactly, then inclusion-exclusion.
    """
    r = np.asarray(r, float)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cx = np.where(r > 0, x / r, np.where(x >= 0, np.inf, -np.inf))
        cy = np.where(r > 0, y / r, np.where(y >= 0, np.inf, -np.inf))
    a = np.arccos(np.clip(cx, -1.0, 1.0))
    b = np.arccos(np.clip(cy, -1.0, 1.0))
    overlap = np.zeros(np.broadcast(a, b).shape)
    for k in (-1, 0, 1):
        lo = np.maximum(-a, 0.5 * np.pi - b + 2 * np.pi * k)
        hi = np.minimum(a, 0.5 * np.pi + b + 2 * np.pi * k)
        overlap = overlap + np.maximum(hi - lo, 0.0)
    inside = 2 * np.pi - 2 * a - 2 * b + overlap
    return np.clip(inside / (2 * np.pi), 0.0, 1.0)


def cdf_G(law, x, y):
    """G(x, y) = P(Re zeta^m <= x, Im zeta^m <= y).

    Integrates the angular fraction against the radial law in the variable
    rho = r^(2/m) (uniform on [0, 1]). The integrand is piecewise smooth with
    square-root kinks at r = |x|, |y|, sqrt(x^2+y^2); each piece gets a
    smoothstep change of variables and a 48-point Gauss-Legendre rule.
    """
    m = _m(law)
    xs, ys = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    shape = xs.shape
    xs = xs.ravel()
    ys = ys.ravel()
    with np.errstate(invalid="ignore"):
        kinks = np.stack([np.abs(xs), np.abs(ys), np.hypot(xs, ys)], axis=1)
    kinks = np.where(np.isfinite(kinks), np.minimum(kinks, 1.0), 1.0)
    rho_k = np.sort(kinks ** (2.0 / m), axis=1)
    edges = np.concatenate([np.zeros((len(xs), 1)), rho_k, np.ones((len(xs), 1))], axis=1)
    lo = edges[:, :-1, None]
    width = (edges[:, 1:] - edges[:, :-1])[:, :, None]
    u = 0.5 * (_GL_NODES + 1.0)
    phi = u * u * (3.0 - 2.0 * u)
    dphi = 6.0 * u * (1.0 - u)
    rho = lo + width * phi
    frac = angular_fraction(rho ** (m / 2.0), xs[:, None, None], ys[:, None, None])
    vals = np.sum(frac * width * dphi * 0.5 * _GL_WEIGHTS, axis=(1, 2))
    vals = np.clip(vals, 0.0, 1.0)
    return float(vals[0]) if shape == () else vals.reshape(shape)


def potential_U(law, z) -> float:
    """Logarithmic potential: -log|z| outside the unit disc, (m/2)(1-|z|^(2/m)) inside."""
    m = _m(law)
    r = np.abs(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore"):
        out = np.where(r >= 1.0, -np.log(np.maximum(r, 1.0)), 0.5 * m * (1.0 - r ** (2.0 / m)))
    return float(out) if out.ndim == 0 else out


def fuss_catalan(m: int, p: int, alt_normalization: bool = False) -> Fraction:
    """FC_m(p) = binom((m+1)p, p) / (mp+1), exactly.

    ``alt_normalization`` selects binom(mp+p, p) / (mp+p) instead, which is not
    the moment sequence (it gives 3/2 at m=1, p=2); p = 0 maps to 1 there.
    """
    if int(m) != m or m < 1:
        raise LimitLawError(f"m must be a positive integer, got {m}")
    if int(p) != p or p < 0:
        raise LimitLawError(f"p must be a nonnegative integer, got {p}")
    if p > FUSS_CATALAN_MAX_P:
        raise LimitLawError(f"p = {p} exceeds the exact-arithmetic guard {FUSS_CATALAN_MAX_P}")
    if alt_normalization:
        if p == 0:
            return Fraction(1)
        return Fraction(comb(m * p + p, p), m * p + p)
    return Fraction(comb((m + 1) * p, p), m * p + 1)


def support_edge(m: int) -> float:
    """C_m = sqrt((m+1)^(m+1) / m^m), right end of the z = 0 singular-value law."""
    if int(m) != m or m < 1:
        raise LimitLawError(f"m must be a positive integer, got {m}")
    return math.sqrt((m + 1) ** (m + 1) / m**m)


def export_density_grid(law, path, extent: float = 1.2, size: int = 101) -> Path:
    """CSV with columns (x, y, g) on a square grid; the pole is written as inf."""
    path = Path(path)
    xs = np.linspace(-extent, extent, size)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    G = density_g_grid(law, X, Y)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "g"])
        for a, b, g in zip(X.ravel(), Y.ravel(), G.ravel()):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(g))])
    return path


def export_radial_cdf(law, path, size: int = 201, r_max: float = 1.2) -> Path:
    """CSV with columns (r, G_radial)."""
    path = Path(path)
    rs = np.linspace(0.0, r_max, size)
    Gr = radial_cdf_G(law, rs)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "G_radial"])
        for r, g in zip(rs, Gr):
            w.writerow([repr(float(r)), repr(float(g))])
    return path
