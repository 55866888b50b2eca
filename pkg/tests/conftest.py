"""Shared fixtures and random-instance generators."""

from pathlib import Path

import numpy as np
import pytest

from opinionbudget.chain_analysis import analyze
from opinionbudget.decompose import decompose
from opinionbudget.model import confidence_matrix, load_instance, validate

DATA = Path(__file__).parent / "data"
PAPER_EXAMPLE = DATA / "paper_example.json"


@pytest.fixture(scope="session")
def paper_instance():
    return load_instance(PAPER_EXAMPLE)


@pytest.fixture(scope="session")
def paper_matrix(paper_instance):
    return confidence_matrix(paper_instance)


@pytest.fixture(scope="session")
def paper_decomposition(paper_matrix):
    return decompose(paper_matrix)


@pytest.fixture(scope="session")
def paper_analysis(paper_instance, paper_matrix, paper_decomposition):
    return analyze(paper_matrix, paper_decomposition, paper_instance.true_opinions)


def random_raw(rng, n_min=2, n_max=12, budget_scale=1.0):
    """Raw dict for a random valid instance with mixed chain structure."""
    n = int(rng.integers(n_min, n_max + 1))
    agents = [f"v{i}" for i in range(n)]
    weights = {}
    for i in range(n):
        weights[(i, i)] = float(rng.uniform(0.3, 1.2))
        out_degree = int(rng.integers(0, min(4, n)))
        targets = rng.choice(n, size=out_degree, replace=False)
        for j in targets:
            j = int(j)
            if j != i:
                weights[(i, j)] = float(rng.uniform(0.1, 1.0))
    opinions = rng.uniform(0.0, 1.0, n)
    costs = rng.uniform(0.5, 10.0, n)
    caps_total = float(np.sum(costs * (1.0 - opinions)))
    return {
        "agents": agents,
        "edges": [
            {"from": agents[i], "to": agents[j], "w": w}
            for (i, j), w in sorted(weights.items())
        ],
        "opinions": [float(x) for x in opinions],
        "costs": [float(c) for c in costs],
        "threshold": float(rng.uniform(0.2, 0.95)),
        "budget": float(rng.uniform(0.0, budget_scale * caps_total)),
    }


def random_instance(rng, n_min=2, n_max=12, budget_scale=1.0):
    return validate(random_raw(rng, n_min, n_max, budget_scale))


def random_class(rng, n_max=6):
    """Random irreducible aperiodic class: stationary vector, opinions, costs."""
    nk = int(rng.integers(1, n_max + 1))
    e = rng.uniform(0.1, 1.0, (nk, nk))
    e /= e.sum(axis=1, keepdims=True)
    opinions = rng.uniform(0.0, 1.0, nk)
    costs = rng.uniform(0.5, 10.0, nk)
    return e, opinions, costs
