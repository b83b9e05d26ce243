import csv
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import greenwind as gw

FIXTURES = Path(os.environ.get("GREENWIND_FIXTURE_DIR", Path(__file__).parents[1] / "fixtures"))


def write_pair(tmp_path, n=48):
    rng = np.random.default_rng(5)
    names = gw.ATTRIBUTE_NAMES
    weather = ["timestamp," + ",".join(names)]
    energy = ["timestamp,wind_energy"]
    for h in range(n):
        stamp = f"2015-01-{1 + h // 24:02d}T{h % 24:02d}:00:00Z"
        row = [
            rng.normal(2, 3),
            rng.uniform(0, 1),
            rng.normal(1010, 5),
            rng.uniform(0, 15),
            rng.uniform(0, 360),
            rng.uniform(0, 2),
            rng.uniform(0, 1),
        ]
        weather.append(stamp + "," + ",".join(repr(float(v)) for v in row))
        energy.append(f"{stamp},{max(0.0, 1.5 * row[3] + rng.normal(0, 0.5))!r}")
    (tmp_path / "weather.csv").write_text("\n".join(weather) + "\n")
    (tmp_path / "energy.csv").write_text("\n".join(energy) + "\n")
    return tmp_path / "weather.csv", tmp_path / "energy.csv"


def test_pearson_matches_numpy_and_skips_missing():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    y = [2.0, 1.0, 4.0, 3.0, 6.0]
    assert gw.pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
    assert gw.pearson(x + [None], y + [100.0]) == pytest.approx(gw.pearson(x, y), abs=1e-15)


def test_constant_column_raises_data_error():
    with pytest.raises(gw.DataError):
        gw.pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_published_matrix_solve_agrees_with_numpy():
    text = (FIXTURES / "table1_correlation.csv").read_text()
    beta, cond = gw.solve_correlation(text)
    rows = list(csv.reader(text.splitlines()))
    m = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert np.array_equal(m, m.T)
    expected = np.linalg.solve(m[1:, 1:], m[1:, 0])
    assert [beta[a] for a in gw.ATTRIBUTE_NAMES] == pytest.approx(list(expected), abs=1e-9)
    assert 1.0 < cond < 1e8


def test_fit_predict_and_eq1(tmp_path):
    weather, energy = write_pair(tmp_path)
    ds = gw.load_dataset(weather, energy)
    assert len(ds) == 48
    assert json.loads(ds.join_report_json())["matched"] == 48
    corr = gw.correlation_matrix(ds)
    assert corr["labels"][0] == "wind_energy"
    model = gw.fit(ds)
    assert model["provenance"] == "fitted"
    preds = gw.predict(model, weather)
    assert len(preds) == 48
    assert all(e >= 0.0 for _, e, _ in preds)
    metrics = gw.evaluate(model, ds)
    assert metrics["rows"] == 48
    eq1 = gw.eq1_model(ds)
    assert eq1["provenance"] == "fixed-eq1"
    assert gw.EQ1_COEFFICIENTS["wind_speed"] == 0.71


def test_imputation_recovers_linear_relation():
    rng = np.random.default_rng(1)
    rows = [[float(x), 2.0 * float(x)] for x in rng.normal(size=40)]
    model = gw.fit_gaussian(rows, ["x", "y"])
    values, flags, degraded = gw.impute(model, [3.0, None])
    assert values[1] == pytest.approx(6.0, abs=1e-9)
    assert flags == [False, True]
    assert not degraded


def test_schedulers_on_fixture():
    jobs = json.loads((FIXTURES / "brute_force_jobs.json").read_text())
    profile = json.loads((FIXTURES / "brute_force_profile.json").read_text())
    best = gw.brute_force(jobs, profile, lambda_=0.0)
    assert best["cost"] == 0.0
    assert best["assignments"] == {"a": 0, "b": 0}
    assert gw.schedule_cost(best["assignments"], jobs, profile, 0.0) == 0.0
    assert gw.greedy(jobs, profile, 0.0)["cost"] >= best["cost"]
    a = gw.randomized_greedy(jobs, profile, 0.0, seed=11, k=2)
    b = gw.randomized_greedy(jobs, profile, 0.0, seed=11, k=2)
    assert a == b


def test_scheduling_errors_map_to_python_exceptions():
    jobs = json.loads((FIXTURES / "brute_force_jobs.json").read_text())
    tight = {"green": [1], "export_capacity": 0, "datacenter_cap": 1.5}
    with pytest.raises(gw.InfeasibleError):
        gw.greedy(jobs, tight)
    profile = json.loads((FIXTURES / "brute_force_profile.json").read_text())
    with pytest.raises(gw.LimitExceededError):
        gw.brute_force(jobs, profile, limit=3)
    assert issubclass(gw.DataError, gw.Error)
    assert not math.isnan(gw.schedule_cost({"a": 0, "b": 1}, jobs, profile))
