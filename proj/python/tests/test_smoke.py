import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import multipath as mp

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def ring4():
    return mp.network({str(j): 1 for j in range(1, 5)},
                      {"1": ["1", "2"], "2": ["2", "3"], "3": ["3", "4"], "4": ["4", "1"]})


def test_ring4_allocation_levels():
    net = ring4()
    out = mp.allocate(net, {"1": 4, "2": 1, "3": 1, "4": 1})
    assert [level["rate"] for level in out["levels"]] == [Fraction(1, 2), Fraction(2, 3)]
    assert out["rates"] == {"1": Fraction(1, 2), "2": Fraction(2, 3), "3": Fraction(2, 3), "4": Fraction(2, 3)}
    for uid, row in out["splits"].items():
        assert sum(row.values()) == out["rates"][uid]
    assert mp.min_rate(net, [4, 1, 1, 1]) == Fraction(1, 2)
    assert mp.max_rate(net, [4, 1, 1, 1]) == Fraction(2, 3)


def test_redundant_resource_level_is_infinite():
    net = mp.network({"a": 1, "b": 1}, {"u": ["a"]})
    out = mp.allocate(net, [1])
    assert out["levels"][-1]["rate"] == math.inf
    assert out["redundant"] == ["b"]


def test_load_network_fixture():
    net, n, m = mp.load_network(FIXTURES / "ring4.json")
    assert net.num_resources == 4 and n == [4, 1, 1, 1] and m == [0, 0, 0, 0]


def test_cuts_and_maxflow_agree():
    net = ring4()
    loads = {"1": 2, "2": Fraction(2, 3), "3": Fraction(2, 3), "4": Fraction(2, 3)}
    assert mp.gcc_feasible(net, loads) == (True, [])
    assert mp.maxflow_feasible(net, loads)
    feasible, violated = mp.gcc_feasible(net, {"1": 3})
    assert not feasible and ["1", "2"] in violated
    assert not mp.maxflow_feasible(net, {"1": 3})


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_numerical_oracle_matches(alpha):
    sol = mp.solve_num(ring4(), [4, 1, 1, 1], alpha=alpha)
    assert np.allclose(sol["rates"], [0.5, 2 / 3, 2 / 3, 2 / 3], atol=1e-9)


def test_equilibria_and_errors():
    net = ring4()
    traffic = {u: {"lambda": Fraction(1, 4), "kappa": 1, "peak_rate": Fraction(1, 2)} for u in net.user_ids}
    integrated = mp.equilibrium(net, traffic)
    assert integrated["x_hat"]["1"] == Fraction(3, 4) / 1
    peak = mp.equilibrium(net, traffic, model="peak_rate")
    assert peak["n_hat"]["2"] == Fraction(1, 2)

    triangle = mp.network({"1": 1, "2": 1, "3": 1}, {"1": ["1", "2"], "2": ["2", "3"], "3": ["3", "1"]})
    tight = {"1": {"lambda": "1/4", "peak_rate": 1}, "2": {"lambda": "1/2", "peak_rate": 10},
                "3": {"lambda": "1/2", "peak_rate": 10}}
    with pytest.raises(mp.NonUniquenessError):
        mp.equilibrium(triangle, tight, model="peak_rate")
    with pytest.raises(mp.StabilityError):
        mp.equilibrium(net, {u: {"lambda": 2, "kappa": 1} for u in net.user_ids})
    assert issubclass(mp.StabilityError, mp.MultipathError)
    with pytest.raises(mp.InputError):
        mp.network({"a": 0}, {})


def test_blocking_single_resource():
    net = mp.network({"1": 2}, {"1": ["1"]})
    out = mp.streaming_blocking(net, {"1": {"kappa": 1, "eta": 1}}, 1)
    assert out["probability"]["1"] == Fraction(1, 5)
    assert out["states"] == 3


def test_circle_analytics():
    p = mp.CircleParams(N=5, r=2)
    assert mp.circle_equilibrium(p) == (1, 1, Fraction(1, 2))
    P, D = mp.drift_matrix(p)
    assert P.shape == (10, 10) and np.allclose(D, np.diag(np.diag(D)))
    assert np.allclose(mp.expm_closed(p, 0.7), mp.expm_numeric(P, 0.7), atol=1e-9)
    sigma = mp.covariance_numeric(P, D)
    assert np.allclose(mp.covariance_matrix_closed(p), sigma, rtol=1e-6)
    assert mp.covariance_closed(p)["var_m"] == pytest.approx(1.0)
    k, k0 = mp.most_likely_cluster_size(mp.CircleParams(N=200, r=3), 0.01)
    assert k == 2 and k0 == pytest.approx(2.0, abs=0.1)
    terms = mp.congestion_probabilities(p, 0.01)
    assert [t[0] for t in terms] == [1, 2, 3, 5]
    with pytest.raises(mp.InputError):
        mp.CircleParams(N=4, r=4)


def test_cli_in_process():
    code, out, err = mp.run_cli("allocate", "--network", str(FIXTURES / "ring4.json"))
    assert code == 0 and err == ""
    assert json.loads(out)["rates"]["1"] == "1/2"
    code, _, err = mp.run_cli("equilibrium", "--network", str(FIXTURES / "boundary.json"),
                              "--traffic", str(FIXTURES / "boundary_traffic.json"), "--model", "peak_rate")
    assert code == 3 and json.loads(err)["error"]["kind"] == "non_uniqueness"
