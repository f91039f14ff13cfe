import json
import math

import pytest

import obell


def test_bounds():
    assert obell.ob_bounds() == {"classical_bound": 1.0, "quantum_bound": 1.5, "fraction": 1.5}
    assert obell.chsh_bounds()["fraction"] == pytest.approx(math.sqrt(2))
    assert obell.theorem2_bound(0.25) == 1.5
    assert obell.theorem3_bound(8 / 9) == pytest.approx(1.5, abs=1e-15)
    assert obell.theorem4_bound_gamma(0.98, 0.9) == pytest.approx(1.34 / 0.9)
    assert obell.violation_feasible(0.98, 0.9)
    assert not obell.violation_feasible(0.75, 1.0)


def test_errors_become_value_errors():
    with pytest.raises(ValueError):
        obell.theorem3_bound(0.0)
    with pytest.raises(ValueError):
        obell.maximize_delta_q(0.0)


def test_feasibility_grid():
    rows = obell.feasibility_grid((0.98, 0.98), (0.89, 0.90), 0.01)
    assert [r["feasible"] for r in rows] == [False, True]


def test_quantum():
    h = math.sqrt(3) / 2
    assert obell.delta_q((1, 0, 0), (0.5, -h, 0), (-0.5, -h, 0)) == pytest.approx(1.5, abs=1e-15)
    assert obell.maximize_delta_q()["value"] == pytest.approx(1.5, abs=1e-6)
    assert obell.maximize_chsh()["value"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)


def test_oracles():
    perfect = obell.classical_ob_maximum(True)
    assert perfect["values"] == ["1"] * 8
    assert obell.classical_ob_maximum(False)["maximum"] == "3"
    r = obell.detection_ob_maximum(8 / 9, 9)
    assert r["bound"] == "3/2"
    assert r["maximum_value"] <= 1.5
    p_ab, p_ac, p_bc = obell.model_correlations(r["witness"], conditional=True)
    assert abs(p_ab - p_bc) - p_ac == pytest.approx(r["maximum_value"])


def test_run_experiment_is_reproducible():
    config = {
        "source": "quantum",
        "settings": {"a": [1, 0, 0], "b": [0.5, -math.sqrt(3) / 2, 0], "c": [-0.5, -math.sqrt(3) / 2, 0]},
        "trials_per_pair": 100000,
        "seed": 5,
    }
    first = obell.run_experiment(config)
    assert first == obell.run_experiment(config, threads=1)
    assert abs(first["statistic"] - 1.5) < 4 * first["statistic_se"]
    assert first["violation_sigma"] > 5


def test_cli_in_process():
    code, out, _ = obell.run_cli(["--json", "bounds", "--gamma", "0.98", "--eta", "0.9"])
    assert code == 0
    assert json.loads(out)["query"]["feasible"] is True
    code, _, err = obell.run_cli(["optimize", "ob", "--tolerance", "0"])
    assert code == 2
    assert "tolerance" in err
