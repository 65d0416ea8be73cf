"""The eleven acceptance criteria, each at its stated tolerance and time budget.

Every test records a one-line verdict that the conftest hook prints at the
end of the run.
"""
import cmath
import math
import time

import numpy as np
import pytest

from matprod import ensembles, esd, harness, limitlaw, linalg, stieltjes
from matprod.ensembles import EnsembleSpec
from matprod.harness import ExperimentConfig

THREADS = 4


def closed_form_y(m, z):
    r = abs(z)
    return 1j * math.sqrt(1 - r ** (2 / m)) / r ** (1 - 1 / m)


def test_c01_solver_matches_closed_form(record_criterion):
    t0 = time.perf_counter()
    worst_inside = worst_outside = 0.0
    all_converged = True
    for m in (1, 2, 3):
        for r in (0.25, 0.5, 0.9):
            st = stieltjes.solve_system(m, r, 1e-6j)
            all_converged &= st.converged
            worst_inside = max(worst_inside, abs(st.y - closed_form_y(m, r)))
        for r in (1.2, 2.0):
            st = stieltjes.solve_system(m, r, 1e-6j)
            all_converged &= st.converged
            worst_outside = max(worst_outside, abs(st.y))
    elapsed = time.perf_counter() - t0
    ok = all_converged and worst_inside <= 1e-3 and worst_outside <= 1e-2 and elapsed < 10
    record_criterion(1, ok, f"max|y-y0|={worst_inside:.2e} max|y| outside={worst_outside:.2e} "
                            f"({elapsed:.2f}s)")
    assert ok


def test_c02_semicircle_reduction(record_criterion):
    t0 = time.perf_counter()
    alphas = [complex(x, v) for x, v in zip(np.linspace(-3, 3, 20), np.geomspace(0.01, 2, 20))]
    worst = 0.0
    for a in alphas:
        root = cmath.sqrt(a * a - 4)
        ref = (-a + root) / 2
        if ref.imag < 0:
            ref = (-a - root) / 2
        worst = max(worst, abs(stieltjes.solve_system(1, 0, a).y - ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 1
    record_criterion(2, ok, f"max error {worst:.2e} on 20 points ({elapsed:.2f}s)")
    assert ok


def test_c03_potential_identity(record_criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for m in (1, 2, 3):
        for z in (0.2, 0.5, 0.8, 1.5, 2.0):
            worst = max(worst, abs(stieltjes.potential_from_solver(m, z)
                                   - limitlaw.potential_U(m, z)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and elapsed < 120
    record_criterion(3, ok, f"max |U_solver - U| = {worst:.2e} ({elapsed:.1f}s)")
    assert ok


def test_c04_density_properties(record_criterion):
    t0 = time.perf_counter()
    mass_err = moment_err = tail = 0.0
    for m in (1, 2, 3):
        curve = stieltjes.density_curve(m, 0)
        mass_err = max(mass_err, abs(curve.integral() - 1))
        for p in (1, 2, 3):
            fc = float(limitlaw.fuss_catalan(m, p))
            moment_err = max(moment_err, abs(curve.moment(2 * p) - fc) / fc)
        for z in (0.0, 0.5, 1.5):
            edge = limitlaw.support_edge(m) + abs(z) + 0.05
            xs = np.concatenate([edge + np.linspace(0, 1.0, 6), -(edge + np.linspace(0, 1.0, 6))])
            tail = max(tail, float(np.max(stieltjes.density_values(m, z, xs))))
    elapsed = time.perf_counter() - t0
    ok = mass_err <= 1e-3 and moment_err <= 0.01 and tail <= 1e-4 and elapsed < 120
    record_criterion(4, ok, f"mass err {mass_err:.1e}, moment rel err {moment_err:.1e}, "
                            f"tail max {tail:.1e} ({elapsed:.1f}s)")
    assert ok


def test_c05_pde_identity(record_criterion):
    t0 = time.perf_counter()
    points = [(0.3, 0.4 + 0.2j), (0.7, 0.6), (-0.5, 0.3 - 0.5j), (1.1, 0.8 + 0.1j), (0.2, 1.3)]
    generic = max(stieltjes.pde_residual(2, z, x, h=1e-3) for x, z in points)
    axis = max(stieltjes.pde_residual(2, 0.5j, x, h=1e-3) for x in (0.3, 0.9))
    elapsed = time.perf_counter() - t0
    ok = generic <= 1e-3 and axis <= 1e-4 and elapsed < 60
    record_criterion(5, ok, f"generic residual {generic:.1e}, u=0 residual {axis:.1e} "
                            f"({elapsed:.1f}s)")
    assert ok


def _config(m, n_values, metrics, law="complex_gaussian", z_values=(0,), seed=42, **kw):
    return ExperimentConfig(ensemble=EnsembleSpec(m=m, n=n_values[0], entry_law=law, seed=seed),
                            n_values=list(n_values), replicas=10, z_values=list(z_values),
                            metrics=list(metrics), threads=THREADS, **kw)


def test_c06_circular_law_generalization(record_criterion):
    t0 = time.perf_counter()
    cases = [(1, "complex_gaussian"), (2, "complex_gaussian"), (3, "complex_gaussian"),
             (2, "rademacher")]
    details, ok = [], True
    for m, law in cases:
        cfg = _config(m, [512], harness.CONVERGENCE_METRICS, law=law)
        rep = harness.run_convergence(cfg)
        rks, aks, g2 = (rep.value(512, k) for k in ("radial_ks", "angular_ks", "grid2d_ks"))
        ok &= rks <= 0.05 and aks <= 0.05 and g2 <= 0.08
        ok &= rep.replica_counts[0]["included"] == 10
        details.append(f"m{m}/{law[:4]} {rks:.3f}/{aks:.3f}/{g2:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 600
    record_criterion(6, ok, "; ".join(details) + f" ({elapsed:.0f}s)")
    assert ok


def test_c07_convergence_trend(record_criterion):
    t0 = time.perf_counter()
    ns = [64, 128, 256, 512]
    rep = harness.run_convergence(_config(2, ns, ["radial_ks"]))
    medians = [rep.value(n, "radial_ks") for n in ns]
    elapsed = time.perf_counter() - t0
    ok = all(a > b for a, b in zip(medians, medians[1:])) and elapsed < 600
    record_criterion(7, ok, "medians " + ", ".join(f"{v:.4f}" for v in medians)
                     + f" ({elapsed:.0f}s)")
    assert ok


def test_c08_fuss_catalan_moments(record_criterion):
    t0 = time.perf_counter()
    targets = {1: (1, 2, 5, 14), 2: (1, 3, 12, 55)}
    worst, ok = 0.0, True
    for m, fc in targets.items():
        rep = harness.run_moment_check(_config(m, [1024], ["moments"], p_max=4))
        for p, target in enumerate(fc, start=1):
            err = abs(rep.value(1024, f"moment_p{p}") - target) / target
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.05 and elapsed < 300
    record_criterion(8, ok, f"max relative error {worst:.4f} ({elapsed:.0f}s)")
    assert ok


def test_c09_empirical_potential(record_criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for m in (1, 2):
        rep = harness.run_potential_check(_config(m, [512], ["potential"],
                                                  z_values=(0, 0.5, 2.0)))
        for z in ("0", "0.5", "2"):
            worst = max(worst, rep.value(512, f"potential_abs_error@z={z}"))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.05 and elapsed < 120
    record_criterion(9, ok, f"max |empirical - U| = {worst:.4f} ({elapsed:.0f}s)")
    assert ok


def test_c10_deterministic_inequalities(record_criterion):
    t0 = time.perf_counter()
    prod1 = harness.prod1_violations(100, 8, seed=42, tol=1e-8)
    lin = harness.linearization_checks(50, seed=42, tol=1e-8)
    bad_lin = sum(a + b for a, b in lin.values())
    elapsed = time.perf_counter() - t0
    ok = prod1 == 0 and bad_lin == 0 and elapsed < 30
    record_criterion(10, ok, f"prod1 violations {prod1}, linearization violations {bad_lin} "
                             f"({elapsed:.1f}s)")
    assert ok


def _csv_without_wallclock(path):
    lines = path.read_text().splitlines()
    return "\n".join(",".join(line.split(",")[:4]) for line in lines)


def test_c11_reproducibility(record_criterion, tmp_path):
    t0 = time.perf_counter()
    cfg = _config(2, [64, 128], list(harness.ALL_METRICS), z_values=(0, 0.5, 2.0), seed=2024)
    texts = []
    for run, threads in enumerate((1, THREADS)):
        cfg.threads = threads
        out = tmp_path / f"run{run}"
        paths = [harness.emit_report(fn(cfg), "csv", out) for fn in
                 (harness.run_convergence, harness.run_moment_check,
                  harness.run_potential_check, harness.run_property_suite)]
        texts.append([_csv_without_wallclock(p) for p in paths])
    elapsed = time.perf_counter() - t0
    ok = texts[0] == texts[1] and elapsed < 60
    record_criterion(11, ok, f"4 reports identical across 1 and {THREADS} threads "
                             f"({elapsed:.1f}s)" if ok else "reports differ")
    assert ok
