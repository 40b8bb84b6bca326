import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from concordia import E, M, PI, W, GridCopula, Mixture, StudyConfig, run_study, sample_copula
from concordia.simulation import UnsupportedCopula, write_report

from .oracles import random_grid


def study_schema():
    return json.loads(resources.files("concordia").joinpath("schemas/study.schema.json").read_text())


def test_sampling_is_deterministic():
    G = GridCopula(np.eye(3) / 3)
    for C in (M, W, PI, G, Mixture([(0.5, M), (0.5, W)])):
        a, b = sample_copula(C, 50, seed=11), sample_copula(C, 50, seed=11)
        assert np.array_equal(a.rows, b.rows)
        assert not np.array_equal(a.rows, sample_copula(C, 50, seed=12).rows)


def test_sample_supports():
    u = sample_copula(M, 100, 0).rows
    assert np.array_equal(u[0], u[1])
    v = sample_copula(W, 100, 0).rows
    np.testing.assert_allclose(v[0] + v[1], 1.0)
    g = sample_copula(GridCopula(np.eye(4) / 4), 400, 0).rows
    assert np.array_equal(np.floor(g[0] * 4), np.floor(g[1] * 4))


def test_sample_marginals_uniform(rng):
    G = random_grid(5, rng)
    u = sample_copula(G, 20_000, 1).rows
    for row in u:
        counts = np.histogram(row, bins=10, range=(0, 1))[0]
        assert np.all(np.abs(counts - 2000) < 5 * np.sqrt(2000))


def test_sample_cell_frequencies(rng):
    G = random_grid(3, rng)
    n = 30_000
    u = sample_copula(G, n, 2).rows
    counts = np.histogram2d(u[0], u[1], bins=3, range=[[0, 1], [0, 1]])[0]
    sd = np.sqrt(n * G.mass * (1 - G.mass))
    assert np.all(np.abs(counts - n * G.mass) <= 5 * sd + 1)


def test_unsupported_copula():
    with pytest.raises(UnsupportedCopula):
        sample_copula(E, 10, 0)


def _config(**kw):
    base = dict(generator="spearman", copula={"kind": "E"}, sizes=[20, 40], replications=6, seed=5)
    base.update(kw)
    return StudyConfig.from_dict(base)


def test_study_report_shape_and_schema():
    report = run_study(_config())
    jsonschema.validate(report, study_schema())
    assert report["materialized"] is True
    assert report["kappa_exact"] == pytest.approx(0.0, abs=1e-12)
    assert len(report["replications"]) == 12
    assert [s["n"] for s in report["summary"]] == [20, 40]


def test_study_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_report(run_study(_config()), a)
    write_report(run_study(_config()), b)
    assert a.read_bytes() == b.read_bytes()
    json.loads(a.read_text())


def test_parallel_equals_serial():
    cfg = _config(copula={"kind": "mixture", "components": [{"weight": "1/2", "copula": {"kind": "M"}},
                                                            {"weight": "1/2", "copula": {"kind": "Pi"}}]})
    assert run_study(cfg, workers=1) == run_study(cfg, workers=3)


def test_replication_seeds_shared_across_sizes():
    rows = run_study(_config())["replications"]
    assert [r["seed"] for r in rows] == [5, 6, 7, 8, 9, 10] * 2


def test_failures_recorded():
    small = StudyConfig.from_dict(dict(generator="E", copula={"kind": "Pi"}, sizes=[3, 5], replications=2))
    rep = run_study(small)
    first, second = rep["summary"]
    assert first["failures"] == 2 and first["mean"] is None
    assert second["failures"] == 0
    assert "SampleTooSmall" in rep["replications"][0]["error"]
    jsonschema.validate(rep, study_schema())


def test_config_validation():
    with pytest.raises(ValueError):
        _config(replications=0)
    with pytest.raises(ValueError):
        _config(sizes=[1])
    with pytest.raises(ValueError):
        StudyConfig.from_dict({"generator": "spearman"})
