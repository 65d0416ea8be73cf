"""Experiment orchestration: replica loops, aggregation and report files.

Replicas run in a thread pool (LAPACK releases the GIL) and their results are
reduced in ascending replica order, so reports do not depend on scheduling.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import ensembles, esd, limitlaw, linalg, stieltjes
from .ensembles import EnsembleSpec

CONVERGENCE_METRICS = ("radial_ks", "angular_ks", "grid2d_ks")
ALL_METRICS = CONVERGENCE_METRICS + ("moments", "potential", "properties")

# calibration constants from pilot runs; the limit theorems carry no rate
DEFAULT_THRESHOLDS = {
    "radial_ks": 0.05,
    "angular_ks": 0.05,
    "grid2d_ks": 0.08,
    "moment_relerr": 0.05,
    "potential_abs": 0.05,
    "prod3_c": 0.05,
    "s1_margin": 0.5,
    "frobenius_low": 0.7,
    "frobenius_high": 1.3,
    "min_singular_value": 1e-8,
    "prod1_tol": 1e-8,
    "pairing_tol": 1e-8,
}

CSV_COLUMNS = ("n", "metric", "value", "iqr", "runtime_seconds")


class ConfigError(ValueError):
    """Malformed experiment configuration (CLI exit code 2)."""


def parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ConfigError(f"cannot parse complex value {v!r}") from None
    if isinstance(v, (int, float, complex)):
        return complex(v)
    raise ConfigError(f"cannot parse complex value {v!r}")


def zlabel(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


@dataclass
class ExperimentConfig:
    ensemble: EnsembleSpec
    n_values: list
    replicas: int = 10
    z_values: list = field(default_factory=lambda: [0j])
    metrics: list = field(default_factory=lambda: list(CONVERGENCE_METRICS))
    p_max: int = 4
    output_dir: str = "out"
    threads: int = 1
    thresholds: dict = field(default_factory=dict)
    # property-suite sizes
    prod1_pairs: int = 100
    prod1_dim: int = 8
    linearization_instances: int = 50
    property_z: complex = 0.5

    def __post_init__(self):
        if not self.n_values:
            raise ConfigError("n_values must be nonempty")
        if any(int(n) != n or n < 2 for n in self.n_values):
            raise ConfigError(f"n_values must be integers >= 2, got {self.n_values}")
        if list(self.n_values) != sorted(self.n_values):
            raise ConfigError(f"n_values must be sorted ascending, got {self.n_values}")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise ConfigError(f"replicas must be >= 1, got {self.replicas}")
        unknown = set(self.metrics) - set(ALL_METRICS)
        if unknown:
            raise ConfigError(f"unknown metrics {sorted(unknown)}; known: {ALL_METRICS}")
        if not 0 <= self.p_max <= esd.MAX_MOMENT_ORDER:
            raise ConfigError(f"p_max must lie in [0, {esd.MAX_MOMENT_ORDER}]")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            raise ConfigError(f"unknown thresholds {sorted(unknown)}")
        self.z_values = [complex(z) for z in self.z_values]
        self.property_z = complex(self.property_z)

    @property
    def seed(self) -> int:
        return self.ensemble.seed

    def threshold(self, name: str) -> float:
        return float(self.thresholds.get(name, DEFAULT_THRESHOLDS[name]))

    def spec_for(self, n: int) -> EnsembleSpec:
        return self.ensemble.with_n(n)

    def to_dict(self) -> dict:
        return {
            "ensemble": self.ensemble.to_dict(),
            "n_values": list(self.n_values),
            "replicas": self.replicas,
            "z_values": [[z.real, z.imag] for z in self.z_values],
            "metrics": list(self.metrics),
            "p_max": self.p_max,
            "output_dir": str(self.output_dir),
            "threads": self.threads,
            "thresholds": {k: self.threshold(k) for k in DEFAULT_THRESHOLDS},
            "prod1_pairs": self.prod1_pairs,
            "prod1_dim": self.prod1_dim,
            "linearization_instances": self.linearization_instances,
            "property_z": [self.property_z.real, self.property_z.imag],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        try:
            ens = dict(data["ensemble"])
        except KeyError:
            raise ConfigError("config is missing the 'ensemble' block") from None
        n_values = data.get("n_values", [ens.get("n")] if "n" in ens else None)
        if not n_values:
            raise ConfigError("config needs n_values (or ensemble.n)")
        ens.setdefault("n", n_values[0])
        try:
            spec = EnsembleSpec.from_dict(ens)
        except ensembles.EnsembleError as exc:
            raise ConfigError(str(exc)) from None
        known = {"ensemble", "n_values", "replicas", "z_values", "metrics", "p_max",
                 "output_dir", "threads", "thresholds", "prod1_pairs", "prod1_dim",
                 "linearization_instances", "property_z"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        try:
            return cls(
                ensemble=spec,
                n_values=[int(n) for n in n_values],
                replicas=int(data.get("replicas", 10)),
                z_values=[parse_complex(z) for z in data.get("z_values", [0])],
                metrics=list(data.get("metrics", CONVERGENCE_METRICS)),
                p_max=int(data.get("p_max", 4)),
                output_dir=str(data.get("output_dir", "out")),
                threads=int(data.get("threads", 1)),
                thresholds=dict(data.get("thresholds", {})),
                prod1_pairs=int(data.get("prod1_pairs", 100)),
                prod1_dim=int(data.get("prod1_dim", 8)),
                linearization_instances=int(data.get("linearization_instances", 50)),
                property_z=parse_complex(data.get("property_z", 0.5)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed config: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass
class ReportRow:
    n: int
    metric: str
    value: float
    iqr: float
    runtime_seconds: float


@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    config: dict
    code_version: str
    rows: list
    replica_counts: list  # [{"n", "included", "excluded"}]
    timestamp: str = ""

    def row(self, n: int, metric: str) -> ReportRow:
        for r in self.rows:
            if r.n == n and r.metric == metric:
                return r
        raise KeyError((n, metric))

    def value(self, n: int, metric: str) -> float:
        return self.row(n, metric).value

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        rows = [ReportRow(int(r["n"]), r["metric"], float(r["value"]), float(r["iqr"]),
                          float(r["runtime_seconds"])) for r in d["rows"]]
        return cls(experiment=d["experiment"], seed=int(d["seed"]), config=d["config"],
                   code_version=d["code_version"], rows=rows,
                   replica_counts=list(d["replica_counts"]), timestamp=d.get("timestamp", ""))


# ---------------------------------------------------------------- execution

def resolve_threads(requested: Optional[int] = None) -> int:
    env = os.environ.get("MATPROD_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ConfigError(f"MATPROD_THREADS must be an integer, got {env!r}") from None
        if k < 1:
            raise ConfigError("MATPROD_THREADS must be >= 1")
        return k
    return requested or 1


def map_replicas(fn: Callable[[int], dict], replicas: int, threads: int) -> list:
    """fn(replica) for every replica, results in ascending replica order."""
    if threads <= 1 or replicas == 1:
        return [fn(r) for r in range(replicas)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(replicas)))


def _guarded(fn: Callable[[int], dict]) -> Callable[[int], dict]:
    def run(replica: int) -> dict:
        try:
            return fn(replica)
        except linalg.SpectralConvergenceError as exc:
            return {"error": str(exc)}
    return run


def _iqr(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan
    q75, q25 = np.percentile(v, [75, 25])
    return float(q75 - q25)


def _median(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.median(v)) if v.size else math.nan


def _mean(values) -> float:
    v = np.asarray(values, dtype=float)
    # sequential sum in ascending replica order
    total = 0.0
    for x in v:
        total += float(x)
    return total / v.size if v.size else math.nan


def _elapsed(t0: float) -> float:
    return max(time.perf_counter() - t0, 1e-9)


def _new_report(name: str, config: ExperimentConfig) -> ExperimentReport:
    return ExperimentReport(experiment=name, seed=config.seed, config=config.to_dict(),
                            code_version=__version__, rows=[], replica_counts=[],
                            timestamp=datetime.now(timezone.utc).isoformat())


def _collect(config: ExperimentConfig, n: int, fn: Callable[[int], dict]):
    results = map_replicas(_guarded(fn), config.replicas, resolve_threads(config.threads))
    ok = [r for r in results if "error" not in r]
    counts = {"n": n, "included": len(ok), "excluded": len(results) - len(ok)}
    return ok, counts


def run_convergence(config: ExperimentConfig, name: str = "convergence") -> ExperimentReport:
    """Median KS-type distances of the eigenvalue ESD from the limit law, per n."""
    wanted = [m for m in CONVERGENCE_METRICS if m in config.metrics]
    if not wanted:
        raise ConfigError("run_convergence needs radial_ks, angular_ks or grid2d_ks in metrics")
    report = _new_report(name, config)
    m = config.ensemble.m
    grid_vals = None
    grid_time = 0.0
    if "grid2d_ks" in wanted:
        t0 = time.perf_counter()
        grid_vals = limitlaw.cdf_G(m, *esd.grid2d_points())
        grid_time = _elapsed(t0)

    for n in config.n_values:
        spec = config.spec_for(n)

        def one(replica: int) -> dict:
            t0 = time.perf_counter()
            ev = linalg.eigenvalues(ensembles.sample_product(spec, replica))
            out = {"_decomp": _elapsed(t0)}
            for metric in wanted:
                t1 = time.perf_counter()
                if metric == "radial_ks":
                    val = esd.radial_ks(ev, m)
                elif metric == "angular_ks":
                    val = esd.angular_ks(ev)
                else:
                    val = esd.grid2d_discrepancy(ev, m, grid_vals)
                out[metric] = (val, _elapsed(t1))
            return out

        ok, counts = _collect(config, n, one)
        report.replica_counts.append(counts)
        decomp = sum(r["_decomp"] for r in ok) / max(len(wanted), 1)
        for metric in wanted:
            vals = [r[metric][0] for r in ok]
            runtime = decomp + sum(r[metric][1] for r in ok)
            if metric == "grid2d_ks":
                runtime += grid_time
            report.rows.append(ReportRow(n, metric, _median(vals), _iqr(vals), runtime))
    return report


def run_moment_check(config: ExperimentConfig, name: str = "moments") -> ExperimentReport:
    """Replica-averaged (1/n) sum s_j^(2p) at z = 0 against Fuss-Catalan numbers."""
    if not any(z == 0 for z in config.z_values):
        raise ConfigError("run_moment_check needs z = 0 among z_values")
    report = _new_report(name, config)
    m = config.ensemble.m
    ps = range(config.p_max + 1)
    targets = {p: float(limitlaw.fuss_catalan(m, p)) for p in ps}

    for n in config.n_values:
        spec = config.spec_for(n)

        def one(replica: int) -> dict:
            t0 = time.perf_counter()
            sv = linalg.singular_values(ensembles.sample_product(spec, replica), 0.0)
            return {"moments": [esd.spectral_moment(sv, p) for p in ps], "_t": _elapsed(t0)}

        ok, counts = _collect(config, n, one)
        report.replica_counts.append(counts)
        per_p = max(len(ps), 1)
        runtime = sum(r["_t"] for r in ok) / per_p
        for p in ps:
            vals = [r["moments"][p] for r in ok]
            mean = _mean(vals)
            fc = targets[p]
            rel = [abs(v - fc) / fc for v in vals]
            report.rows.append(ReportRow(n, f"moment_p{p}", mean, _iqr(vals), runtime))
            report.rows.append(ReportRow(n, f"fuss_catalan_p{p}", fc, 0.0, runtime))
            report.rows.append(ReportRow(n, f"moment_p{p}_relerr", abs(mean - fc) / fc,
                                         _iqr(rel), runtime))
    return report


def run_potential_check(config: ExperimentConfig, name: str = "potential") -> ExperimentReport:
    """Empirical -(1/n) sum log s_j(W - zI) vs the closed form and the solver."""
    report = _new_report(name, config)
    m = config.ensemble.m
    solver_cache = {}
    for z in config.z_values:
        t0 = time.perf_counter()
        solver_cache[z] = (stieltjes.potential_from_solver(m, z), _elapsed(t0))

    for n in config.n_values:
        spec = config.spec_for(n)

        def one(replica: int) -> dict:
            W = ensembles.sample_product(spec, replica)
            out = {}
            for z in config.z_values:
                t0 = time.perf_counter()
                est = esd.empirical_log_potential(W, z)
                out[z] = (est.value, est.floored_count, _elapsed(t0))
            return out

        ok, counts = _collect(config, n, one)
        report.replica_counts.append(counts)
        for z in config.z_values:
            lab = zlabel(z)
            vals = [r[z][0] for r in ok]
            floored = [r[z][1] for r in ok]
            t_emp = sum(r[z][2] for r in ok)
            t0 = time.perf_counter()
            analytic = limitlaw.potential_U(m, z)
            t_an = _elapsed(t0)
            solver, t_solver = solver_cache[z]
            emp = _mean(vals)
            report.rows += [
                ReportRow(n, f"potential_empirical@z={lab}", emp, _iqr(vals), t_emp),
                ReportRow(n, f"potential_analytic@z={lab}", analytic, 0.0, t_an),
                ReportRow(n, f"potential_solver@z={lab}", solver, 0.0, t_solver),
                ReportRow(n, f"potential_abs_error@z={lab}", abs(emp - analytic),
                          _iqr([abs(v - analytic) for v in vals]), t_emp + t_an),
                ReportRow(n, f"potential_floored_count@z={lab}", float(sum(floored)), 0.0, t_emp),
            ]
    return report


# ------------------------------------------------------------ property suite

def prod1_violations(pairs: int, dim: int, seed: int, tol: float = 1e-8) -> int:
    """Count (pair, k) with prod_{j>=k} s_j(AB) < prod_{j>=k} s_j(A) s_j(B) - tol."""
    violations = 0
    for p in range(pairs):
        rng = ensembles.stream(seed, 0, 1_000_000 + p)
        A = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2 * dim)
        B = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2 * dim)
        sab = linalg.singular_values(A @ B).values
        sa = linalg.singular_values(A).values
        sb = linalg.singular_values(B).values
        for k in range(dim):
            if np.prod(sab[k:]) < np.prod(sa[k:] * sb[k:]) - tol:
                violations += 1
    return violations


def linearization_checks(instances: int, seed: int, tol: float = 1e-8):
    """(pairing violations, SVD-agreement violations) per dimension in {4, 16, 64}."""
    out = {}
    dims = (4, 16, 64)
    for n in dims:
        pair_bad = agree_bad = 0
        for i in range(instances):
            rng = ensembles.stream(seed, 0, 2_000_000 + 1000 * n + i)
            W = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)
            z = complex(*rng.uniform(-1.5, 1.5, 2))
            # pairing is checked on the raw Hermitian eigenvalues, before symmetrising
            raw = np.linalg.eigvalsh(linalg.linearization(W, z))
            lin = linalg.linearized_spectrum(W, z)
            sv = linalg.singular_values(W, z).values
            scale = max(sv[0], 1.0)
            if np.max(np.abs(raw + raw[::-1])) > tol * scale:
                pair_bad += 1
            if np.max(np.abs(lin[n:][::-1] - sv)) > tol * scale:
                agree_bad += 1
        out[n] = (pair_bad, agree_bad)
    return out


def run_property_suite(config: ExperimentConfig, name: str = "properties") -> ExperimentReport:
    """Deterministic inequalities plus empirical spectral bounds.

    Only the product singular-value inequality is a hard requirement; every
    other check is reported as a row.
    """
    report = _new_report(name, config)
    m = config.ensemble.m
    c = config.threshold("prod3_c")
    edge = limitlaw.support_edge(m)

    t0 = time.perf_counter()
    v = prod1_violations(config.prod1_pairs, config.prod1_dim, config.seed,
                         config.threshold("prod1_tol"))
    report.rows.append(ReportRow(config.prod1_dim, "prod1_violations", float(v), 0.0, _elapsed(t0)))

    t0 = time.perf_counter()
    lin = linearization_checks(config.linearization_instances, config.seed,
                               config.threshold("pairing_tol"))
    t_lin = _elapsed(t0) / len(lin)
    for dim, (pb, ab) in lin.items():
        report.rows.append(ReportRow(dim, "linearization_pairing_violations", float(pb), 0.0, t_lin))
        report.rows.append(ReportRow(dim, "linearization_svd_violations", float(ab), 0.0, t_lin))

    z = config.property_z
    for n in config.n_values:
        spec = config.spec_for(n)
        tau = spec.truncation.level(n) if spec.truncation else ensembles.default_tau(n)

        def one(replica: int) -> dict:
            t0 = time.perf_counter()
            W = ensembles.sample_product(spec, replica)
            s_shift = linalg.singular_values(W, z).values
            s_w = linalg.singular_values(W, 0.0).values
            jmax = int(math.floor(n - n**0.6))
            j = np.arange(1, jmax + 1)
            bound = c * np.sqrt((n - j) / n)
            frac_bad = float(np.mean(s_shift[:jmax] < bound)) if jmax > 0 else 0.0
            lind = ensembles.max_lindeberg_ratio(spec, replica, tau)
            return {
                "prod3": frac_bad,
                "s1": float(s_w[0]),
                "frob": float(np.sum(np.abs(W) ** 2) / n),
                "min_sv_ok": float(s_shift[-1] >= config.threshold("min_singular_value")),
                "lindeberg": lind,
                "_t": _elapsed(t0),
            }

        ok, counts = _collect(config, n, one)
        report.replica_counts.append(counts)
        rt = sum(r["_t"] for r in ok) / 7
        prod3 = [r["prod3"] for r in ok]
        s1 = [r["s1"] for r in ok]
        frob = [r["frob"] for r in ok]
        lind = [r["lindeberg"] for r in ok]
        max_s1 = max(s1) if s1 else math.nan
        s1_ok = (max_s1 < n) and (n < 256 or max_s1 <= edge + config.threshold("s1_margin"))
        lo, hi = config.threshold("frobenius_low"), config.threshold("frobenius_high")
        report.rows += [
            ReportRow(n, "prod3_violation_fraction", _mean(prod3), _iqr(prod3), rt),
            ReportRow(n, "max_s1", max_s1, _iqr(s1), rt),
            ReportRow(n, "s1_bound_ok", float(s1_ok), 0.0, rt),
            ReportRow(n, "frobenius_norm2_over_n", _median(frob), _iqr(frob), rt),
            ReportRow(n, "frobenius_in_range_fraction",
                      _mean([float(lo <= f <= hi) for f in frob]), 0.0, rt),
            ReportRow(n, "min_sv_ok_frequency", _mean([r["min_sv_ok"] for r in ok]), 0.0, rt),
            ReportRow(n, "lindeberg_ratio_over_tau2", max(lind) / tau**2 if lind else math.nan,
                      _iqr(lind), rt),
        ]
    return report


def hard_violations(report: ExperimentReport) -> int:
    return int(sum(r.value for r in report.rows if r.metric == "prod1_violations"))


# ------------------------------------------------------------------ output

def report_path(report: ExperimentReport, output_dir, fmt: str) -> Path:
    return Path(output_dir) / f"{report.experiment}_{report.seed}.{fmt}"


def emit_report(report: ExperimentReport, fmt: str = "csv", output_dir=None) -> Path:
    """Write ``<experiment>_<seed>.<fmt>`` into ``output_dir``."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    out_dir = Path(output_dir if output_dir is not None else report.config.get("output_dir", "."))
    path = report_path(report, out_dir, fmt)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(CSV_COLUMNS)
                for r in report.rows:
                    w.writerow([r.n, r.metric, repr(float(r.value)), repr(float(r.iqr)),
                                repr(float(r.runtime_seconds))])
        else:
            path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc
    return path


def load_report(path) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- sampling

@dataclass
class SpectralSample:
    """Eigenvalues of W and singular values of W - zI, for one replica."""

    n: int
    replica: int
    eigenvalues: np.ndarray
    singular_values: dict  # z -> descending array


def simulate(config: ExperimentConfig) -> list:
    out = []
    for n in config.n_values:
        spec = config.spec_for(n)

        def one(replica: int) -> SpectralSample:
            W = ensembles.sample_product(spec, replica)
            return SpectralSample(
                n=n, replica=replica, eigenvalues=linalg.eigenvalues(W).values,
                singular_values={z: linalg.singular_values(W, z).values for z in config.z_values})

        out += map_replicas(one, config.replicas, resolve_threads(config.threads))
    return out


def write_samples(samples: list, seed: int, fmt: str, output_dir) -> Path:
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"spectra_{seed}.{fmt}"
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "replica", "kind", "z", "index", "re", "im"])
            for s in samples:
                for k, lam in enumerate(s.eigenvalues):
                    w.writerow([s.n, s.replica, "eigenvalue", "", k, repr(float(lam.real)),
                                repr(float(lam.imag))])
                for z, sv in s.singular_values.items():
                    for k, val in enumerate(sv):
                        w.writerow([s.n, s.replica, "singular_value", zlabel(z), k,
                                    repr(float(val)), "0.0"])
    elif fmt == "json":
        data = [{
            "n": s.n, "replica": s.replica,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in s.eigenvalues],
            "singular_values": [{"z": [z.real, z.imag], "values": [float(v) for v in sv]}
                                for z, sv in s.singular_values.items()],
        } for s in samples]
        path.write_text(json.dumps(data) + "\n")
    else:
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return path
