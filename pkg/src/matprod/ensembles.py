"""Random factor sampling, entry truncation and the product chain.

Entries are drawn unscaled (unit variance) and divided by sqrt(n) only when
the factor matrix is assembled, so truncation thresholds stay in the
unscaled units ``tau * sqrt(n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Optional, Sequence

import numpy as np
from scipy import integrate

ENTRY_LAWS = (
    "complex_gaussian",
    "real_gaussian",
    "rademacher",
    "uniform_pm_sqrt3",
    "truncated_pareto",
)

DEFAULT_PARETO_EXPONENT = 4.5

# constant c in the truncation level c * tau_n * sqrt(n)
TRUNCATION_CONSTANT = 1.0


class EnsembleError(ValueError):
    """Invalid ensemble description or matrix input."""


@dataclass(frozen=True)
class Truncation:
    # None means the default level n**-0.25, resolved per dimension
    tau: Optional[float] = None

    def __post_init__(self):
        if self.tau is not None and not 0.0 < self.tau < 1.0:
            raise EnsembleError(f"truncation tau must lie in (0, 1), got {self.tau}")

    def level(self, n: int) -> float:
        return self.tau if self.tau is not None else default_tau(n)


@dataclass(frozen=True)
class EnsembleSpec:
    """Full description of a product-of-random-matrices experiment."""

    m: int
    n: int
    entry_law: str = "complex_gaussian"
    truncation: Optional[Truncation] = None
    seed: int = 0
    pareto_exponent: float = DEFAULT_PARETO_EXPONENT

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise EnsembleError(f"m must be a positive integer, got {self.m}")
        if int(self.n) != self.n or self.n < 2:
            raise EnsembleError(f"n must be an integer >= 2, got {self.n}")
        if self.entry_law not in ENTRY_LAWS:
            raise EnsembleError(
                f"unknown entry law {self.entry_law!r}; expected one of {ENTRY_LAWS}")
        if not 0 <= int(self.seed) < 2**64:
            raise EnsembleError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.entry_law == "truncated_pareto" and not self.pareto_exponent > 2.0:
            raise EnsembleError("truncated_pareto needs exponent > 2 for finite variance")

    def with_n(self, n: int) -> "EnsembleSpec":
        return EnsembleSpec(self.m, n, self.entry_law, self.truncation, self.seed,
                            self.pareto_exponent)

    def with_seed(self, seed: int) -> "EnsembleSpec":
        return EnsembleSpec(self.m, self.n, self.entry_law, self.truncation, seed,
                            self.pareto_exponent)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"m": self.m, "n": self.n, "entry_law": self.entry_law}
        if self.entry_law == "truncated_pareto":
            out["pareto_exponent"] = self.pareto_exponent
        out["truncation"] = None if self.truncation is None else {"tau": self.truncation.tau}
        out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleSpec":
        try:
            trunc = data.get("truncation")
            if trunc is not None and not isinstance(trunc, dict):
                raise EnsembleError("truncation must be an object like {\"tau\": 0.2}")
            law = data.get("entry_law", "complex_gaussian")
            exponent = data.get("pareto_exponent", DEFAULT_PARETO_EXPONENT)
            # accept "truncated_pareto(3.5)" as well as a separate exponent key
            if isinstance(law, str) and law.startswith("truncated_pareto("):
                exponent = float(law[len("truncated_pareto("):-1])
                law = "truncated_pareto"
            return cls(
                m=int(data["m"]),
                n=int(data["n"]),
                entry_law=law,
                truncation=None if trunc is None else Truncation(trunc.get("tau")),
                seed=int(data.get("seed", 0)),
                pareto_exponent=float(exponent),
            )
        except KeyError as exc:
            raise EnsembleError(f"ensemble config is missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, EnsembleError):
                raise
            raise EnsembleError(f"malformed ensemble config: {exc}") from None


def default_tau(n: int) -> float:
    return float(n) ** -0.25


def stream(seed: int, factor_index: int, replica: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, factor_index, replica)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(factor_index), int(replica)))
    return np.random.Generator(np.random.Philox(ss))


@lru_cache(maxsize=None)
def pareto_scale(exponent: float) -> float:
    """Standard deviation of the sign-symmetric Pareto law on |x| >= 1.

    Computed by quadrature of the second moment so that the sampled law can
    be normalised to unit variance.
    """
    second, _ = integrate.quad(lambda t: t * t * exponent * t ** (-exponent - 1.0),
                               1.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    return math.sqrt(second)


def sample_raw(spec: EnsembleSpec, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
    """Unscaled n x n entries with mean 0 and E|X|^2 = 1."""
    n = spec.n if n is None else n
    shape = (n, n)
    law = spec.entry_law
    if law == "complex_gaussian":
        parts = rng.standard_normal((2, n, n))
        return (parts[0] + 1j * parts[1]) * math.sqrt(0.5)
    if law == "real_gaussian":
        return rng.standard_normal(shape).astype(np.complex128)
    if law == "rademacher":
        return (2.0 * rng.integers(0, 2, size=shape) - 1.0).astype(np.complex128)
    if law == "uniform_pm_sqrt3":
        s3 = math.sqrt(3.0)
        return rng.uniform(-s3, s3, size=shape).astype(np.complex128)
    if law == "truncated_pareto":
        a = spec.pareto_exponent
        # inverse CDF of P(|X| > t) = t**-a, t >= 1
        mag = (1.0 - rng.random(shape)) ** (-1.0 / a)
        sign = 2.0 * rng.integers(0, 2, size=shape) - 1.0
        return (sign * mag / pareto_scale(a)).astype(np.complex128)
    raise EnsembleError(f"unknown entry law {law!r}")


def truncate_recenter(raw_entries, threshold: float) -> np.ndarray:
    """Zero every entry with modulus above ``threshold``, then subtract the mean.

    The empirical mean of the matrix stands in for the exact expectation of
    the truncated variable.
    """
    if not threshold > 0:
        raise EnsembleError(f"threshold must be positive, got {threshold}")
    x = np.array(raw_entries, dtype=np.complex128)
    x[np.abs(x) > threshold] = 0.0
    x -= x.mean()
    return x


def lindeberg_ratio(raw_entries, tau: float) -> float:
    """(1/n^2) * sum |X_jk|^2 over entries with |X_jk| >= tau * sqrt(n)."""
    if not tau > 0:
        raise EnsembleError(f"tau must be positive, got {tau}")
    x = np.asarray(raw_entries)
    n = x.shape[0]
    mod2 = np.abs(x) ** 2
    return float(mod2[np.abs(x) >= tau * math.sqrt(n)].sum() / n**2)


def sample_raw_factor(spec: EnsembleSpec, factor_index: int, replica: int) -> np.ndarray:
    """Unscaled entries of factor ``factor_index`` (1-based) before truncation."""
    if not 1 <= factor_index <= spec.m:
        raise EnsembleError(f"factor_index must be in [1, {spec.m}], got {factor_index}")
    if replica < 0:
        raise EnsembleError(f"replica must be >= 0, got {replica}")
    return sample_raw(spec, stream(spec.seed, factor_index, replica))


def sample_factor(spec: EnsembleSpec, factor_index: int, replica: int) -> np.ndarray:
    """Scaled factor matrix X / sqrt(n), truncated and recentred if configured."""
    raw = sample_raw_factor(spec, factor_index, replica)
    if spec.truncation is not None:
        level = TRUNCATION_CONSTANT * spec.truncation.level(spec.n) * math.sqrt(spec.n)
        raw = truncate_recenter(raw, level)
    return raw / math.sqrt(spec.n)


def product_chain(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right product X1 @ X2 @ ... @ Xm."""
    if len(factors) == 0:
        raise EnsembleError("product_chain needs at least one factor")
    n = None
    for k, f in enumerate(factors):
        f = np.asarray(f)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise EnsembleError(f"factor {k + 1} is not square: shape {f.shape}")
        if n is None:
            n = f.shape[0]
        elif f.shape[0] != n:
            raise EnsembleError(
                f"factor {k + 1} has dimension {f.shape[0]}, expected {n}")
    out = np.array(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        out = out @ np.asarray(f, dtype=np.complex128)
    return out


def sample_product(spec: EnsembleSpec, replica: int) -> np.ndarray:
    """W = X(1) X(2) ... X(m) for one replica."""
    return product_chain([sample_factor(spec, nu, replica) for nu in range(1, spec.m + 1)])


def max_lindeberg_ratio(spec: EnsembleSpec, replica: int, tau: Optional[float] = None) -> float:
    """Largest Lindeberg ratio over the m raw factors of one replica."""
    if tau is None:
        tau = spec.truncation.level(spec.n) if spec.truncation else default_tau(spec.n)
    return max(lindeberg_ratio(sample_raw_factor(spec, nu, replica), tau)
               for nu in range(1, spec.m + 1))
