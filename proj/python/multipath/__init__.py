"""Exact multipath rate allocation on single-hop networks.

Exact quantities cross the boundary as rational strings and come back as
``fractions.Fraction``; the level rate of redundant resources is ``math.inf``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import _core
from ._core import (
    CircleParams,
    ConsistencyError,
    ConvergenceError,
    InputError,
    MultipathError,
    Network,
    NonUniquenessError,
    SizeError,
    StabilityError,
    congestion_probabilities,
    covariance_closed,
    covariance_matrix_closed,
    covariance_numeric,
    drift_matrix,
    expm_closed,
    expm_numeric,
    most_likely_cluster_size,
    solve_num as _solve_num,
)

__all__ = [
    "CircleParams",
    "ConsistencyError",
    "ConvergenceError",
    "InputError",
    "MultipathError",
    "Network",
    "NonUniquenessError",
    "SizeError",
    "StabilityError",
    "allocate",
    "circle_equilibrium",
    "congestion_probabilities",
    "covariance_closed",
    "covariance_matrix_closed",
    "covariance_numeric",
    "drift_matrix",
    "equilibrium",
    "expm_closed",
    "expm_numeric",
    "gcc_feasible",
    "load_network",
    "max_rate",
    "maxflow_feasible",
    "min_rate",
    "most_likely_cluster_size",
    "network",
    "run_cli",
    "solve_num",
    "streaming_blocking",
]


def _text(value) -> str:
    if isinstance(value, float):
        value = Fraction(value)
    return str(value)


def _fraction(text: str):
    return math.inf if text == "inf" else Fraction(text)


def _per_user(net: Network, values: Mapping[str, object] | Sequence[object]) -> list[str]:
    if isinstance(values, Mapping):
        unknown = set(values) - set(net.user_ids)
        if unknown:
            raise InputError(f"unknown users: {sorted(unknown)}")
        return [_text(values.get(uid, 0)) for uid in net.user_ids]
    return [_text(v) for v in values]


def network(resources: Mapping[str, object], users: Mapping[str, Iterable[str]]) -> Network:
    """Build a network from ``{resource: capacity}`` and ``{user: [resources]}``."""
    return Network([(rid, _text(c)) for rid, c in resources.items()],
                   [(uid, list(rs)) for uid, rs in users.items()])


def load_network(path) -> tuple[Network, list[int], list[int]]:
    """Read a network JSON file; returns the network and its n and m counts."""
    with open(path, encoding="utf-8") as fh:
        return Network.from_json(fh.read())


def _rates(doc: dict) -> dict:
    doc["rates"] = {k: Fraction(v) for k, v in doc["rates"].items()}
    doc["splits"] = {u: {r: Fraction(v) for r, v in row.items()} for u, row in doc["splits"].items()}
    for level in doc["levels"]:
        level["rate"] = _fraction(level["rate"])
    return doc


def allocate(net: Network, counts, max_resources: int = 20) -> dict:
    """Optimal per-flow rates, cluster levels and a split of each rate over resources."""
    return _rates(json.loads(_core.allocate(net, _per_user(net, counts), max_resources)))


def min_rate(net: Network, counts, max_resources: int = 20) -> Fraction:
    return Fraction(_core.min_rate(net, _per_user(net, counts), max_resources))


def max_rate(net: Network, counts, max_resources: int = 20) -> Fraction:
    return Fraction(_core.max_rate(net, _per_user(net, counts), max_resources))


def gcc_feasible(net: Network, loads, max_resources: int = 20) -> tuple[bool, list[list[str]]]:
    return _core.gcc_feasible(net, _per_user(net, loads), max_resources)


def maxflow_feasible(net: Network, loads) -> bool:
    return _core.maxflow_feasible(net, _per_user(net, loads))


def solve_num(net: Network, counts, alpha: float = 1.0, tol: float = 1e-8) -> dict:
    return _solve_num(net, _per_user(net, counts), alpha, tol)


def _traffic(traffic: Mapping[str, Mapping[str, object]]) -> str:
    users = []
    for uid, params in traffic.items():
        entry = {"id": uid}
        for key, value in params.items():
            entry[key] = None if value is None else _text(value)
        users.append(entry)
    return json.dumps({"users": users})


def equilibrium(net: Network, traffic: Mapping[str, Mapping[str, object]], model: str = "integrated",
                max_resources: int = 20) -> dict:
    """Fluid equilibrium; traffic maps user id to lambda, mu, kappa, eta and peak_rate."""
    doc = json.loads(_core.equilibrium(net, _traffic(traffic), model, max_resources))
    for key in ("n_hat", "m_hat", "x_hat"):
        doc[key] = {k: Fraction(v) for k, v in doc[key].items()}
    for level in doc["levels"]:
        level["rate"] = Fraction(level["rate"])
    return doc


def streaming_blocking(net: Network, traffic, threshold) -> dict:
    probability, states, bounds = _core.streaming_blocking(net, _traffic(traffic), _text(threshold))
    return {
        "probability": dict(zip(net.user_ids, map(Fraction, probability))),
        "states": states,
        "bounds": dict(zip(net.user_ids, bounds)),
    }


def circle_equilibrium(params: CircleParams) -> tuple[Fraction, Fraction, Fraction]:
    """(n_hat, m_hat, x_hat) per user of the symmetric circle."""
    return tuple(Fraction(v) for v in _core.circle_equilibrium(params))


def run_cli(*args: str) -> tuple[int, str, str]:
    """Run a ``multipath`` command in-process; returns (exit code, stdout, stderr)."""
    return _core.run_cli(list(args))
