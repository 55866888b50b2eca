"""Exact knapsack DP, the FPTAS, and the no-transient pipeline."""

import itertools
import math

import numpy as np
import pytest

from opinionbudget.chain_analysis import analyze
from opinionbudget.decompose import decompose
from opinionbudget.knapsack import (
    KnapsackItem,
    TransientsPresent,
    class_items,
    knapsack_exact,
    knapsack_fptas,
    solve_by_classes,
)
from opinionbudget.model import confidence_matrix, validate

from conftest import random_instance

PAPER_ITEMS = [KnapsackItem(0, 3, 210.0), KnapsackItem(1, 4, 99.0)]


def enumerate_best(items, budget):
    """Oracle: full subset enumeration with the documented tie-breaks."""
    best = (0, 0.0, ())
    for mask in range(1 << len(items)):
        sel = tuple(i for i in range(len(items)) if mask >> i & 1)
        weight = sum(items[i].weight for i in sel)
        value = sum(items[i].value for i in sel)
        if weight > budget + 1e-9:
            continue
        cand = (value, weight, sel)
        if (cand[0] > best[0]
                or (cand[0] == best[0] and cand[1] < best[1])
                or (cand[0] == best[0] and cand[1] == best[1] and cand[2] < best[2])):
            best = cand
    return best


def random_items(rng, count):
    return [
        KnapsackItem(i, int(rng.integers(1, 21)), float(rng.uniform(0, 50)))
        for i in range(count)
    ]


def test_paper_items_budget_309():
    sol = knapsack_exact(PAPER_ITEMS, 309.0)
    assert set(sol.selected) == {0, 1}
    assert sol.total_value == 7
    assert abs(sol.total_weight - 309.0) <= 1e-9


def test_paper_items_budget_99():
    sol = knapsack_exact(PAPER_ITEMS, 99.0)
    assert sol.selected == (1,)
    assert sol.total_value == 4


def test_zero_budget_empty_selection():
    sol = knapsack_exact(PAPER_ITEMS, 0.0)
    assert sol.selected == ()
    assert sol.total_value == 0
    assert sol.total_weight == 0.0


def test_exact_matches_enumeration():
    rng = np.random.default_rng(79)
    for size in list(range(1, 17)) + [8] * 24:
        items = random_items(rng, size)
        budget = float(rng.uniform(0, sum(it.weight for it in items)))
        value, weight, sel = enumerate_best(items, budget)
        sol = knapsack_exact(items, budget)
        assert sol.total_value == value
        assert abs(sol.total_weight - weight) <= 1e-9
        assert tuple(sorted(sol.selected)) == sel


def test_exact_lexicographic_tie_break():
    items = [KnapsackItem(0, 2, 5.0), KnapsackItem(1, 2, 5.0)]
    sol = knapsack_exact(items, 5.0)
    assert sol.selected == (0,)


def test_zero_weight_items_always_selected():
    items = [KnapsackItem(0, 3, 0.0), KnapsackItem(1, 1, 10.0)]
    sol = knapsack_exact(items, 0.0)
    assert sol.selected == (0,)
    assert sol.total_value == 3


def test_fptas_tiny_instance_exact():
    sol = knapsack_fptas(PAPER_ITEMS, 309.0, 0.1)
    assert sol.total_value == 7


def test_fptas_single_item_any_epsilon():
    items = [KnapsackItem(0, 5, 3.0)]
    for eps in (0.5, 0.1, 0.01):
        assert knapsack_fptas(items, 10.0, eps).selected == (0,)


def test_fptas_bound_on_random_instances():
    rng = np.random.default_rng(83)
    for _ in range(30):
        items = random_items(rng, 50)
        budget = float(rng.uniform(0, sum(it.weight for it in items)))
        exact = knapsack_exact(items, budget).total_value
        for eps in (0.5, 0.1, 0.01):
            sol = knapsack_fptas(items, budget, eps)
            assert sol.total_value >= math.ceil((1 - eps) * exact)
            assert sol.total_weight <= budget + 1e-9


def test_fptas_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        knapsack_fptas(PAPER_ITEMS, 10.0, 0.0)
    with pytest.raises(ValueError):
        knapsack_fptas(PAPER_ITEMS, 10.0, 1.0)


def test_item_validation():
    with pytest.raises(ValueError):
        KnapsackItem(0, 0, 1.0)
    with pytest.raises(ValueError):
        KnapsackItem(0, 1, -1.0)


def no_transient_instance(rng):
    """Random instance whose chain is a disjoint union of dense classes."""
    sizes = [int(rng.integers(1, 4)) for _ in range(int(rng.integers(1, 4)))]
    agents = []
    edges = []
    start = 0
    for size in sizes:
        block = [f"v{start + i}" for i in range(size)]
        agents.extend(block)
        for x in block:
            for y in block:
                edges.append({"from": x, "to": y, "w": float(rng.uniform(0.2, 1.0))})
        start += size
    n = len(agents)
    opinions = rng.uniform(0, 1, n)
    costs = rng.uniform(0.5, 10.0, n)
    caps = float(np.sum(costs * (1 - opinions)))
    return validate({
        "agents": agents,
        "edges": edges,
        "opinions": [float(x) for x in opinions],
        "costs": [float(c) for c in costs],
        "threshold": float(rng.uniform(0.3, 0.95)),
        "budget": float(rng.uniform(0, caps)),
    })


def test_solve_by_classes_pays_selected_classes_only():
    rng = np.random.default_rng(89)
    for _ in range(20):
        inst = no_transient_instance(rng)
        cm = confidence_matrix(inst)
        an = analyze(cm, decompose(cm), inst.true_opinions)
        plan, sol = solve_by_classes(inst, an)
        assert plan.total_spend <= inst.budget + 1e-6
        selected_members = {
            i for k in sol.selected for i in an.decomposition.classes[k]
        }
        for i in range(inst.n):
            if i not in selected_members:
                assert plan.payments[i] == 0.0
        # every member of a selected class becomes a supporter
        for k in sol.selected:
            for i in an.decomposition.classes[k]:
                assert inst.agents[i] in plan.supporters


def test_solve_by_classes_rejects_transients(paper_instance, paper_analysis):
    with pytest.raises(TransientsPresent):
        solve_by_classes(paper_instance, paper_analysis)


def test_class_items_on_modified_paper_instance(paper_instance, paper_analysis):
    items = class_items(paper_instance, paper_analysis)
    assert [it.value for it in items] == [3, 4]
    assert abs(items[0].weight - 210.0) <= 1e-9
    assert abs(items[1].weight - 99.0) <= 1e-9
