"""Solver for the limiting Stieltjes-transform system of the symmetrised
singular-value law of W - zI, and the quantities derived from it.

The system in (y, w), with a the spectral parameter, is

    F1 = 1 + w y + (-1)^(m+1) w^(m-1) y^(m+1) = 0
    F2 = y d^2 + d - y |z|^2 = 0,        d = w - a

Newton iterates on the pair (y, d). The upper-half-plane solution is reached
by continuation in Im a from v0 = 8 + |z| down to the target (geometric
ratio 0.7), with a tangent predictor and a damped corrector. Tracking (y, d)
continuously selects the sign of sqrt(1 + 4 y^2 |z|^2) in
d = (-1 +/- sqrt(1 + 4 y^2 |z|^2)) / (2y); the sign flips when the path
passes the branch point 1 + 4 y^2 |z|^2 = 0, which happens for |z| > 1.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .limitlaw import support_edge

SWEEP_RATIO = 0.7
NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 60
MAX_HALVINGS = 8
RESIDUAL_TOL = 1e-10
# scalar polishing is used where |R| = |1 + 2 y d| stays away from the branch point
POLISH_MIN_ROOT = 0.05
MAX_SUBDIVISIONS = 10
POLISH_TOL = 1e-14

DEFAULT_V_MIN = 1e-5
DEFAULT_GRID_SIZE = 2048
PDE_IMAG_PART = 1e-4


class StieltjesError(RuntimeError):
    """The continuation did not reach a converged upper-half-plane solution."""


@dataclass
class PathResult:
    """Vectorised solver output, one entry per real part."""

    alpha: np.ndarray
    y: np.ndarray
    d: np.ndarray  # w - alpha
    residual1: np.ndarray
    residual2: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def _continuation_schedule(v_target: float, zabs: float) -> list:
    v0 = 8.0 + zabs
    if v_target >= v0:
        return [v_target]
    vs = [v0]
    while vs[-1] * SWEEP_RATIO > v_target:
        vs.append(vs[-1] * SWEEP_RATIO)
    vs.append(v_target)
    return vs


def _system(m, s, q, a, y, d):
    """Residuals, Jacobian entries and dF1/da at (y, d)."""
    w = a + d
    wm1 = w ** (m - 1)
    ym = y**m
    f1 = 1.0 + w * y + s * wm1 * ym * y
    f2 = y * d * d + d - q * y
    f1_y = w + s * (m + 1) * wm1 * ym
    if m > 1:
        f1_d = y + s * (m - 1) * w ** (m - 2) * ym * y
    else:
        f1_d = y
    f2_y = d * d - q
    f2_d = 2.0 * y * d + 1.0
    return f1, f2, f1_y, f1_d, f2_y, f2_d


def _residuals(m, s, q, a, y, d):
    f1, f2, *_ = _system(m, s, q, a, y, d)
    # F2 is measured relative to its dominant term, |d| grows like 1/|y|
    return np.abs(f1), np.abs(f2) / np.maximum(1.0, np.abs(d))


def _signed_root(y, q, r_prev):
    """sqrt(1 + 4 q y^2) with the sign closest to ``r_prev``."""
    r = np.sqrt(1.0 + 4.0 * q * y * y)
    return np.where(np.abs(r - r_prev) <= np.abs(r + r_prev), r, -r)


def _scalar_system(m, s, q, a, y, r):
    """F1 after eliminating d = (R - 1) / (2y), R^2 = 1 + 4 q y^2.

    R - 1 and R + 1 are both formed without cancellation through
    (R - 1)(R + 1) = 4 q y^2, which keeps F1 accurate when y -> 0 on the
    R ~ -1 branch (spectral gap at the origin for |z| > 1).
    """
    qq = 4.0 * q * y * y
    upper = np.abs(r + 1.0) >= np.abs(r - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rm1 = np.where(upper, qq / (r + 1.0), r - 1.0)
        rp1 = np.where(upper, r + 1.0, qq / (r - 1.0))
    wy = a * y + 0.5 * rm1
    wym1 = wy ** (m - 1)
    f = a * y + 0.5 * rp1 + s * wym1 * y * y
    inner = 1.0 + (s * (m - 1) * wy ** (m - 2) * y * y if m > 1 else 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        df = (a + 2.0 * q * y / r) * inner + 2.0 * s * wym1 * y
        d = rm1 / (2.0 * y)
    return f, df, np.where(q == 0.0, 0.0, d)


def _damped(active, y, step):
    """Step length in {1, 1/2, ..., 2^-8} keeping Im y > 0; returns (lam, ok)."""
    lam = np.ones(y.shape)
    leaves = active & ((y - step).imag <= 0)
    for _ in range(MAX_HALVINGS):
        if not leaves.any():
            break
        lam = np.where(leaves, 0.5 * lam, lam)
        leaves = active & ((y - lam * step).imag <= 0)
    return lam, ~leaves


def _newton_pair(m, s, q, a, y, d, active, failed, iterations):
    """Damped Newton on (y, d); used near the branch point R = 0."""
    for _ in range(NEWTON_MAX_ITER):
        if not active.any():
            break
        f1, f2, f1_y, f1_d, f2_y, f2_d = _system(m, s, q, a, y, d)
        det = f1_y * f2_d - f1_d * f2_y
        with np.errstate(divide="ignore", invalid="ignore"):
            step_y = (f1 * f2_d - f1_d * f2) / det
            step_d = (f1_y * f2 - f2_y * f1) / det
        bad = active & ~(np.isfinite(step_y) & np.isfinite(step_d))
        failed |= bad
        active &= ~bad
        lam, ok = _damped(active, y, step_y)
        failed |= active & ~ok
        active &= ok
        y = np.where(active, y - lam * step_y, y)
        d = np.where(active, d - lam * step_d, d)
        iterations += active
        rel = np.maximum(np.abs(step_y) / np.abs(y),
                         np.abs(step_d) / (np.abs(d) + np.abs(y) * q + 1e-300))
        active &= ~((rel <= NEWTON_TOL) & (lam == 1.0))
    failed |= active
    return y, d


def _newton_scalar(m, s, q, a, y, d, active, failed, iterations):
    """Damped Newton on the eliminated scalar equation; R keeps its sign by continuity."""
    r = 1.0 + 2.0 * y * d
    for _ in range(NEWTON_MAX_ITER):
        if not active.any():
            break
        r = np.where(active, _signed_root(y, q, r), r)
        f, df, _ = _scalar_system(m, s, q, a, y, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        bad = active & ~np.isfinite(step)
        failed |= bad
        active &= ~bad
        lam, ok = _damped(active, y, step)
        failed |= active & ~ok
        active &= ok
        y = np.where(active, y - lam * step, y)
        iterations += active
        r = np.where(active, _signed_root(y, q, r), r)
        _, _, d_new = _scalar_system(m, s, q, a, y, r)
        d = np.where(active, d_new, d)
        active &= ~((np.abs(step) <= POLISH_TOL * np.abs(y)) & (lam == 1.0))
    failed |= active
    return y, d


def _correct(m, s, q, a, y, d, iterations):
    """Scalar Newton away from the branch point, pair Newton near it."""
    failed = np.zeros(y.shape, dtype=bool)
    far = np.abs(1.0 + 2.0 * y * d) >= POLISH_MIN_ROOT
    y, d = _newton_scalar(m, s, q, a, y, d, far.copy(), failed, iterations)
    y, d = _newton_pair(m, s, q, a, y, d, ~far, failed, iterations)
    return y, d, failed


def _advance(m, s, q, a_from, a_to, y, d, iterations, depth=0):
    """Tangent predictor plus corrector from a_from to a_to.

    Points whose corrector fails are retried from a_from in two half steps,
    recursively up to MAX_SUBDIVISIONS levels.
    """
    _, _, f1_y, f1_d, f2_y, f2_d = _system(m, s, q, a_from, y, d)
    det = f1_y * f2_d - f1_d * f2_y
    da = a_to - a_from
    with np.errstate(divide="ignore", invalid="ignore"):
        # J d(y, d)/da = -(dF1/da, 0) and dF1/da = dF1/dd
        py = -f1_d * f2_d / det * da
        pd = f1_d * f2_y / det * da
    ok = np.isfinite(py) & np.isfinite(pd) & ((y + py).imag > 0)
    y1, d1, failed = _correct(m, s, q, a_to, np.where(ok, y + py, y),
                              np.where(ok, d + pd, d), iterations)
    if failed.any() and depth < MAX_SUBDIVISIONS:
        idx = np.flatnonzero(failed)
        a_mid = 0.5 * (a_from[idx] + a_to[idx])
        sub_it = np.zeros(len(idx), dtype=int)
        ym, dm, fm = _advance(m, s, q, a_from[idx], a_mid, y[idx], d[idx], sub_it, depth + 1)
        ye, de, fe = _advance(m, s, q, a_mid, a_to[idx], ym, dm, sub_it, depth + 1)
        y1[idx] = ye
        d1[idx] = de
        failed[idx] = fm | fe
        iterations[idx] += sub_it
    return y1, d1, failed


def solve_paths(m: int, z, re_alpha, v_target: float) -> PathResult:
    """Solve the limit system at a = x + i v_target for every x in ``re_alpha``.

    All points share the continuation schedule; damping, step subdivision and
    failure flags are per point. Failed points are frozen, never fabricated.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if not v_target > 0:
        raise ValueError(f"Im(alpha) must be positive, got {v_target}")
    x = np.atleast_1d(np.asarray(re_alpha, dtype=float))
    zabs = abs(complex(z))
    q = zabs * zabs
    s = 1.0 if m % 2 == 1 else -1.0

    schedule = _continuation_schedule(float(v_target), zabs)
    a = x + 1j * schedule[0]
    iterations = np.zeros(x.shape, dtype=int)
    # far from the spectrum: y ~ -1/a, w - a ~ |z|^2 y
    y, d, failed = _correct(m, s, q, a, -1.0 / a, -q / a, iterations)

    for v in schedule[1:]:
        a_next = x + 1j * v
        live = np.flatnonzero(~failed)
        it = np.zeros(len(live), dtype=int)
        y_l, d_l, f_l = _advance(m, s, q, a[live], a_next[live], y[live], d[live], it)
        y[live] = y_l
        d[live] = d_l
        failed[live] = f_l
        iterations[live] += it
        a = a_next

    r1, r2 = _residuals(m, s, q, a, y, d)
    converged = ~failed & (r1 <= RESIDUAL_TOL) & (r2 <= RESIDUAL_TOL) & (y.imag > 0)
    return PathResult(alpha=a, y=y, d=d, residual1=r1, residual2=r2,
                      iterations=iterations, converged=converged)


@dataclass
class StieltjesState:
    """Solution (y, t, w) of the limit system at one (alpha, z)."""

    m: int
    alpha: complex
    z: complex
    y: complex
    t: complex
    w: complex
    residuals: tuple
    converged: bool
    iterations: int
    sqrt_sign: int  # sign taken in w - a = (-1 +/- sqrt(1 + 4 y^2 |z|^2)) / (2y)

    @property
    def shift(self) -> complex:
        """w - alpha."""
        return self.w - self.alpha

    def to_json(self) -> dict:
        def c(v):
            return [float(v.real), float(v.imag)]
        return {
            "m": self.m,
            "alpha": c(self.alpha),
            "z": c(self.z),
            "y": c(self.y),
            "t": c(self.t),
            "w": c(self.w),
            "residuals": [float(r) for r in self.residuals],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "sqrt_sign": self.sqrt_sign,
            "abs_shift": float(abs(self.shift)),
            "abs_z_squared": float(abs(self.z) ** 2),
        }


def _state_from(m: int, z: complex, res: PathResult, k: int = 0) -> StieltjesState:
    a = complex(res.alpha[k])
    y = complex(res.y[k])
    d = complex(res.d[k])
    z = complex(z)
    t = y * d / z if z != 0 else 0j
    root = np.sqrt(1 + 4 * y * y * abs(z) ** 2)
    sign = 1 if abs((2 * y * d + 1) - root) <= abs((2 * y * d + 1) + root) else -1
    return StieltjesState(m=m, alpha=a, z=z, y=y, t=t, w=a + d,
                          residuals=(float(res.residual1[k]), float(res.residual2[k])),
                          converged=bool(res.converged[k]),
                          iterations=int(res.iterations[k]), sqrt_sign=sign)


def solve_system(m: int, z, alpha) -> StieltjesState:
    """Solve the limit system at a single (alpha, z); never raises on failure,
    the returned state carries ``converged=False`` instead."""
    alpha = complex(alpha)
    if not alpha.imag > 0:
        raise ValueError(f"Im(alpha) must be positive, got {alpha}")
    res = solve_paths(m, z, [alpha.real], alpha.imag)
    return _state_from(m, complex(z), res)


def _require(res: PathResult, what: str):
    if not np.all(res.converged):
        bad = np.flatnonzero(~res.converged)
        raise StieltjesError(
            f"{what}: solver did not converge at {len(bad)} point(s), "
            f"first alpha={res.alpha[bad[0]]}")


def density_values(m: int, z, x, v_min: float = DEFAULT_V_MIN) -> np.ndarray:
    """p(x, z) = Im y / pi, Richardson-extrapolated from v_min and 2 v_min."""
    if not 1e-8 <= v_min <= 1e-2:
        raise ValueError(f"v_min must lie in [1e-8, 1e-2], got {v_min}")
    x = np.asarray(x, dtype=float)
    r1 = solve_paths(m, z, x.ravel(), v_min)
    r2 = solve_paths(m, z, x.ravel(), 2.0 * v_min)
    _require(r1, "density")
    _require(r2, "density")
    p = (2.0 * r1.y.imag - r2.y.imag) / math.pi
    return np.maximum(p, 0.0).reshape(x.shape)


def density_p(m: int, z, x: float, v_min: float = DEFAULT_V_MIN) -> float:
    return float(density_values(m, z, np.array([x]), v_min)[0])


def graded_grid(half_width: float, size: int, power: float = 2.0) -> np.ndarray:
    """Symmetric grid avoiding 0, nodes clustered toward the origin.

    x_k = L sign(t_k) |t_k|^power for uniform midpoints t_k in (-1, 1); the
    clustering resolves the |x|^(-(m-1)/(m+1)) growth at the origin and the
    logarithm in the potential integral.
    """
    t = -1.0 + (2.0 * np.arange(size) + 1.0) / size
    return half_width * np.sign(t) * np.abs(t) ** power


@dataclass
class DensityCurve:
    m: int
    z: complex
    x: np.ndarray
    p: np.ndarray
    v_min: float

    def integral(self) -> float:
        return float(np.trapezoid(self.p, self.x))

    def moment(self, k: int) -> float:
        return float(np.trapezoid(self.x**k * self.p, self.x))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "p"])
            for a, b in zip(self.x, self.p):
                w.writerow([repr(float(a)), repr(float(b))])
        return path


def density_curve(m: int, z, grid_size: int = DEFAULT_GRID_SIZE,
                  v_min: float = DEFAULT_V_MIN, margin: float = 0.2) -> DensityCurve:
    """p(., z) on a graded grid over [-(C_m + |z| + margin), C_m + |z| + margin]."""
    L = support_edge(m) + abs(complex(z)) + margin
    x = graded_grid(L, grid_size)
    return DensityCurve(m=m, z=complex(z), x=x, p=density_values(m, z, x, v_min), v_min=v_min)


def delta_function(m: int, z, x: float) -> float:
    """-i s(z, i x) for x > 0: real, nonnegative and at most 1/(2|z|)."""
    z = complex(z)
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if z == 0:
        raise ValueError("delta_function needs z != 0")
    res = solve_paths(m, z, [0.0], x)
    _require(res, "delta_function")
    val = -1j * complex(res.y[0])
    if abs(val.imag) > 1e-8:
        raise StieltjesError(f"delta_function: imaginary residue {val.imag:.3e} exceeds 1e-8")
    return float(val.real)


def pde_residual(m: int, z, x: float, h: float = 1e-3, v: float = PDE_IMAG_PART) -> float:
    """|dy/du - 2u y / sqrt(1 + 4|z|^2 y^2) * dy/dx| by central differences.

    z = u + i v_z; the square root is the branch 1 + 2 y (w - a) carried by the
    solver.
    """
    if not 1e-5 <= h <= 1e-2:
        raise ValueError(f"h must lie in [1e-5, 1e-2], got {h}")
    z = complex(z)
    u = z.real

    centre = solve_paths(m, z, [x - h, x, x + h], v)
    right = solve_paths(m, z + h, [x], v)
    left = solve_paths(m, z - h, [x], v)
    for r in (centre, right, left):
        _require(r, "pde_residual")
    y = complex(centre.y[1])
    d = complex(centre.d[1])
    dy_dx = (complex(centre.y[2]) - complex(centre.y[0])) / (2 * h)
    dy_du = (complex(right.y[0]) - complex(left.y[0])) / (2 * h)
    rhs = 2.0 * u * y / (2.0 * y * d + 1.0) * dy_dx
    return float(abs(dy_du - rhs))


def potential_from_solver(m: int, z, quadrature_grid_size: int = DEFAULT_GRID_SIZE,
                          v_min: float = DEFAULT_V_MIN) -> float:
    """-integral log|x| p(x, z) dx by trapezoid on the graded symmetric grid."""
    curve = density_curve(m, z, quadrature_grid_size, v_min)
    return float(np.trapezoid(-np.log(np.abs(curve.x)) * curve.p, curve.x))


def export_diagnostics(states, path) -> Path:
    """JSON list of solver states."""
    path = Path(path)
    path.write_text(json.dumps([s.to_json() for s in states], indent=2) + "\n")
    return path
