import csv
import json
import math

import numpy as np
import pytest

from matprod import harness, limitlaw, linalg
from matprod.ensembles import EnsembleSpec
from matprod.harness import ConfigError, ExperimentConfig, ExperimentReport, ReportRow


def make_config(**kw):
    base = dict(ensemble=EnsembleSpec(m=2, n=16, seed=5), n_values=[16, 32], replicas=3,
                z_values=[0, 0.5, 2.0], metrics=list(harness.ALL_METRICS), p_max=3)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize("kw", [dict(n_values=[]), dict(n_values=[32, 16]), dict(replicas=0),
                                dict(metrics=["nonsense"]), dict(p_max=9), dict(threads=0),
                                dict(thresholds={"bogus": 1.0}), dict(n_values=[1])])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        make_config(**kw)


def test_config_dict_round_trip(tmp_path):
    cfg = make_config(thresholds={"prod3_c": 0.1}, property_z=0.3j)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = ExperimentConfig.load(path)
    assert back.to_dict() == cfg.to_dict()
    assert back.threshold("prod3_c") == 0.1
    assert back.threshold("radial_ks") == harness.DEFAULT_THRESHOLDS["radial_ks"]


def test_config_parses_complex_forms():
    cfg = ExperimentConfig.from_dict({"ensemble": {"m": 1}, "n_values": [8],
                                      "z_values": [0, [0.5, -0.5], "1+2i", "0.3j"]})
    assert cfg.z_values == [0, 0.5 - 0.5j, 1 + 2j, 0.3j]
    assert cfg.ensemble.n == 8


@pytest.mark.parametrize("data", [
    [], {"n_values": [8]}, {"ensemble": {"m": 1}}, {"ensemble": {"m": 1}, "n_values": [8], "x": 1},
    {"ensemble": {"m": 1}, "n_values": [8], "z_values": ["abc"]},
    {"ensemble": {"m": 1}, "n_values": [8], "z_values": [[1, 2, 3]]},
    {"ensemble": {"m": 1, "entry_law": "cauchy"}, "n_values": [8]},
    {"ensemble": {"m": 1}, "n_values": [8], "replicas": "many"},
])
def test_config_from_dict_errors(data):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_config_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_zlabel():
    assert harness.zlabel(0) == "0"
    assert harness.zlabel(0.5) == "0.5"
    assert harness.zlabel(0.5 - 1j) == "0.5-1i"


def test_degenerate_convergence_config():
    cfg = make_config(n_values=[2], replicas=1, metrics=list(harness.CONVERGENCE_METRICS))
    rep = harness.run_convergence(cfg)
    assert [(r.n, r.metric) for r in rep.rows] == [(2, m) for m in harness.CONVERGENCE_METRICS]
    for r in rep.rows:
        assert 0 <= r.value <= 1 and r.iqr == 0 and r.runtime_seconds > 0


def test_convergence_requires_a_distance_metric():
    with pytest.raises(ConfigError):
        harness.run_convergence(make_config(metrics=["moments"]))


def _rows_unique(rep):
    keys = [(r.n, r.metric) for r in rep.rows]
    return len(keys) == len(set(keys))


def test_reports_have_unique_rows_and_positive_runtimes():
    cfg = make_config()
    for fn in (harness.run_convergence, harness.run_moment_check, harness.run_potential_check,
               harness.run_property_suite):
        rep = fn(cfg)
        assert _rows_unique(rep)
        assert all(r.runtime_seconds > 0 for r in rep.rows)
        for c in rep.replica_counts:
            assert c["included"] + c["excluded"] == cfg.replicas


def test_moment_rows():
    rep = harness.run_moment_check(make_config())
    for n in (16, 32):
        assert rep.value(n, "moment_p0") == 1.0
        assert rep.value(n, "moment_p0_relerr") == 0.0
        assert rep.value(n, "fuss_catalan_p3") == 12.0
    with pytest.raises(ConfigError):
        harness.run_moment_check(make_config(z_values=[0.5]))


def test_potential_rows():
    rep = harness.run_potential_check(make_config(n_values=[64]))
    assert rep.value(64, "potential_analytic@z=0") == pytest.approx(1.0)
    assert rep.value(64, "potential_solver@z=2") == pytest.approx(-math.log(2), abs=1e-3)
    assert rep.value(64, "potential_empirical@z=2") == pytest.approx(-math.log(2), abs=0.05)
    assert rep.value(64, "potential_floored_count@z=0") == 0


def test_failed_replicas_are_excluded_and_counted(monkeypatch):
    real = linalg.eigenvalues
    calls = {"k": 0}

    def flaky(M):
        calls["k"] += 1
        if calls["k"] % 2 == 0:
            raise linalg.SpectralConvergenceError("synthetic failure")
        return real(M)

    monkeypatch.setattr(linalg, "eigenvalues", flaky)
    rep = harness.run_convergence(make_config(n_values=[16], replicas=4, threads=1,
                                              metrics=["radial_ks"]))
    assert rep.replica_counts == [{"n": 16, "included": 2, "excluded": 2}]
    assert 0 <= rep.value(16, "radial_ks") <= 1


def test_property_suite_examples():
    cfg = make_config(ensemble=EnsembleSpec(m=1, n=256, seed=42), n_values=[256], replicas=10,
                      threads=4, property_z=0.5)
    rep = harness.run_property_suite(cfg)
    assert rep.value(8, "prod1_violations") == 0
    assert rep.value(256, "prod3_violation_fraction") == 0
    assert rep.value(256, "frobenius_in_range_fraction") == 1
    assert rep.value(256, "min_sv_ok_frequency") == 1
    assert harness.hard_violations(rep) == 0
    cfg2 = make_config(ensemble=EnsembleSpec(m=2, n=256, seed=42), n_values=[256], replicas=10,
                       threads=4)
    rep2 = harness.run_property_suite(cfg2)
    assert rep2.value(256, "max_s1") <= 3.1
    assert rep2.value(256, "s1_bound_ok") == 1
    for dim in (4, 16, 64):
        assert rep2.value(dim, "linearization_pairing_violations") == 0
        assert rep2.value(dim, "linearization_svd_violations") == 0


def test_prod1_inequality_oracle_detects_violation(monkeypatch):
    # shrinking the singular values of AB (first call of each triple) must be caught
    real = linalg.singular_values
    calls = {"k": 0}

    def corrupted(M, z=0.0):
        calls["k"] += 1
        s = real(M, z)
        return linalg.SingularSpectrum(s.values * 0.1) if calls["k"] % 3 == 1 else s

    monkeypatch.setattr(linalg, "singular_values", corrupted)
    assert harness.prod1_violations(5, 4, seed=1) > 0


def test_map_replicas_preserves_order():
    out = harness.map_replicas(lambda r: r * r, 20, threads=6)
    assert out == [r * r for r in range(20)]


def test_thread_env_override(monkeypatch):
    monkeypatch.setenv("MATPROD_THREADS", "3")
    assert harness.resolve_threads(1) == 3
    monkeypatch.setenv("MATPROD_THREADS", "zero")
    with pytest.raises(ConfigError):
        harness.resolve_threads(1)
    monkeypatch.setenv("MATPROD_THREADS", "0")
    with pytest.raises(ConfigError):
        harness.resolve_threads(1)
    monkeypatch.delenv("MATPROD_THREADS")
    assert harness.resolve_threads(5) == 5


def test_thread_count_does_not_change_values():
    a = harness.run_convergence(make_config(threads=1))
    b = harness.run_convergence(make_config(threads=4))
    assert [(r.n, r.metric, r.value, r.iqr) for r in a.rows] == \
           [(r.n, r.metric, r.value, r.iqr) for r in b.rows]


def _empty_report():
    return ExperimentReport(experiment="empty", seed=3, config={}, code_version="0",
                            rows=[], replica_counts=[])


def test_empty_report_gives_header_only_csv(tmp_path):
    path = harness.emit_report(_empty_report(), "csv", tmp_path)
    assert path.name == "empty_3.csv"
    assert path.read_text() == "n,metric,value,iqr,runtime_seconds\n"


def test_csv_columns(tmp_path):
    rep = harness.run_moment_check(make_config(n_values=[16], p_max=1))
    path = harness.emit_report(rep, "csv", tmp_path)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(harness.CSV_COLUMNS)
    assert len(rows) == len(rep.rows)
    assert float(rows[0]["value"]) == rep.rows[0].value


def test_json_round_trip(tmp_path):
    rep = harness.run_convergence(make_config())
    path = harness.emit_report(rep, "json", tmp_path)
    assert path.name == "convergence_5.json"
    assert harness.load_report(path) == rep


def test_json_is_deterministic_except_wallclock(tmp_path):
    texts = []
    for k in range(2):
        rep = harness.run_convergence(make_config())
        data = json.loads(harness.emit_report(rep, "json", tmp_path / str(k)).read_text())
        data.pop("timestamp")
        for row in data["rows"]:
            row.pop("runtime_seconds")
        texts.append(json.dumps(data, sort_keys=True))
    assert texts[0] == texts[1]


def test_emit_report_errors(tmp_path):
    with pytest.raises(ConfigError):
        harness.emit_report(_empty_report(), "xml", tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        harness.emit_report(_empty_report(), "csv", blocker / "sub")


def test_simulate_and_write_samples(tmp_path):
    cfg = make_config(n_values=[8], replicas=2, z_values=[0.5])
    samples = harness.simulate(cfg)
    assert [(s.n, s.replica) for s in samples] == [(8, 0), (8, 1)]
    assert np.all(np.diff(samples[0].singular_values[0.5]) <= 0)
    path = harness.write_samples(samples, 5, "csv", tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,replica,kind,z,index,re,im"
    assert len(lines) == 1 + 2 * (8 + 8)
    data = json.loads(harness.write_samples(samples, 5, "json", tmp_path).read_text())
    assert len(data[1]["eigenvalues"]) == 8


def test_report_row_lookup():
    rep = _empty_report()
    rep.rows.append(ReportRow(4, "x", 1.5, 0.0, 0.1))
    assert rep.value(4, "x") == 1.5
    with pytest.raises(KeyError):
        rep.row(4, "y")


def test_simulated_moments_select_the_standard_fuss_catalan_formula():
    # the two candidate normalisations differ at m = 1, p = 2 (2 versus 3/2)
    cfg = make_config(ensemble=EnsembleSpec(m=1, n=256, seed=8), n_values=[256], replicas=4,
                      z_values=[0], p_max=3)
    rep = harness.run_moment_check(cfg)
    for p in (2, 3):
        simulated = rep.value(256, f"moment_p{p}")
        standard = float(limitlaw.fuss_catalan(1, p))
        variant = float(limitlaw.fuss_catalan(1, p, alt_normalization=True))
        assert abs(simulated - standard) < 0.05 * standard
        assert abs(simulated - variant) > 0.2 * variant
