import itertools
import random
from fractions import Fraction

import pytest

from helpers import corpus, fixture
from invopt.errors import NegativeCycleError, NoPerfectMatchingError, UnreachableError
from invopt.forward import (
    is_laminar,
    laminar_load,
    max_flow_min_cut,
    min_arborescence_with_dual,
    min_perfect_matching_with_potentials,
    shortest_path_with_potentials,
)
from invopt.graphs import Arc, BipartiteGraph, Digraph
from invopt.oracle import enumerate_feasible


def brute_min(inst, i):
    return min(sum(inst.weights[i][e] for e in G) for G in enumerate_feasible(inst).members)


# values frozen from brute-force enumeration of the fixtures
FROZEN_MINIMA = {"fig2": (1, 1), "fig3": (0, 0), "fig4": (0, 0), "fig5": (0, 0)}


@pytest.mark.parametrize("name", sorted(FROZEN_MINIMA))
def test_fixture_minima(name):
    inst = fixture(name)
    for i, want in enumerate(FROZEN_MINIMA[name]):
        assert brute_min(inst, i) == want
        w = inst.weights[i]
        if inst.kind == "path":
            got = shortest_path_with_potentials(inst.graph, w, inst.s, inst.t).distance
        elif inst.kind == "matching":
            got = min_perfect_matching_with_potentials(inst.graph, w).weight
        else:
            got = min_arborescence_with_dual(inst.graph, inst.root, w).weight
        assert got == want


def test_fig2_first_weight_path():
    inst = fixture("fig2")
    res = shortest_path_with_potentials(inst.graph, inst.weights[0], "s", "t")
    assert res.distance == 1
    assert sum(inst.weights[0][a] for a in res.path) == 1


def test_shortest_path_errors():
    inst = fixture("fig1")
    with pytest.raises(NegativeCycleError):
        shortest_path_with_potentials(inst.graph, inst.weights[0], "s", "t")
    d = Digraph(("s", "t", "x"), (Arc("sx", "s", "x"),))
    with pytest.raises(UnreachableError):
        shortest_path_with_potentials(d, {"sx": 0}, "s", "t")


def test_shortest_path_certificates_on_corpus():
    for inst in corpus("path", count=150, seed=21):
        for w in inst.weights:
            res = shortest_path_with_potentials(inst.graph, w, inst.s, inst.t)
            y = res.potentials
            for a in inst.elements:
                assert y[a.head] - y[a.tail] <= w[a.id]
            for aid in res.path:
                a = inst.element(aid)
                assert y[a.head] - y[a.tail] == w[aid]
            assert res.distance == min(sum(w[e] for e in G) for G in enumerate_feasible(inst).members)


def test_matching_certificates_on_corpus():
    for inst in corpus("matching", count=150, seed=22):
        for w in inst.weights:
            res = min_perfect_matching_with_potentials(inst.graph, w)
            y = res.potentials
            for e in inst.elements:
                assert y[e.tail] + y[e.head] <= w[e.id]
            assert sum(y.values()) == res.weight
            assert res.weight == sum(w[e] for e in res.matching)
            # independent check: minimum over permutations of T
            S, T = sorted(inst.graph.S), sorted(inst.graph.T)
            cost = {(e.tail, e.head): w[e.id] for e in inst.elements}
            best = None
            for perm in itertools.permutations(T):
                if all((u, v) in cost for u, v in zip(S, perm)):
                    val = sum(cost[u, v] for u, v in zip(S, perm))
                    best = val if best is None else min(best, val)
            assert res.weight == best


def test_no_perfect_matching_reports_hall_violator():
    g = BipartiteGraph(("a1", "a2"), ("b1", "b2"), (Arc("a1b1", "a1", "b1"), Arc("a2b1", "a2", "b1")))
    with pytest.raises(NoPerfectMatchingError) as info:
        min_perfect_matching_with_potentials(g, {"a1b1": 0, "a2b1": 0})
    err = info.value
    assert len(err.neighbours) < len(err.deficient)


def test_arborescence_dual_on_corpus():
    for inst in corpus("arborescence", count=150, seed=23):
        for w in inst.weights:
            res = min_arborescence_with_dual(inst.graph, inst.root, w)
            family = res.dual
            assert is_laminar([Z for Z, _ in family])
            for Z, y in family:
                assert inst.root not in Z
                if len(Z) > 1:
                    assert y > 0
            for a in inst.elements:
                assert laminar_load(family, a) <= w[a.id]
            for aid in res.arcs:
                assert laminar_load(family, inst.element(aid)) == w[aid]
            assert sum(y for _, y in family) == res.weight
            assert res.weight == min(sum(w[e] for e in G) for G in enumerate_feasible(inst).members)


def test_arborescence_unreachable():
    d = Digraph(("r", "u", "v"), (Arc("ru", "r", "u"),))
    with pytest.raises(UnreachableError):
        min_arborescence_with_dual(d, "r", {"ru": 0})


def test_arborescence_prefers_given_arcs_on_ties():
    inst = fixture("fig5")
    zero = {a: Fraction(0) for a in inst.element_ids}
    res = min_arborescence_with_dual(inst.graph, "r", zero, prefer=inst.solution_set)
    assert set(res.arcs) == inst.solution_set


def _min_cut_brute(d, cap, s, t):
    others = [v for v in d.vertices if v not in (s, t)]
    best = None
    for mask in range(1 << len(others)):
        side = {s} | {others[j] for j in range(len(others)) if mask >> j & 1}
        val = sum(cap[a.id] for a in d.arcs if a.tail in side and a.head not in side)
        best = val if best is None else min(best, val)
    return best


def test_max_flow_equals_brute_min_cut():
    rng = random.Random(31)
    for _ in range(120):
        n = rng.randint(2, 7)
        vs = [f"v{j}" for j in range(n)]
        arcs = []
        for j in range(rng.randint(1, 14)):
            u, v = rng.sample(vs, 2)
            arcs.append(Arc(f"e{j}", u, v))
        d = Digraph(tuple(vs), tuple(arcs))
        cap = {a.id: Fraction(rng.randint(0, 4), rng.randint(1, 3)) for a in arcs}
        res = max_flow_min_cut(d, cap, "v0", vs[-1])
        assert res.value == _min_cut_brute(d, cap, "v0", vs[-1])
        assert vs[-1] in res.sink_side or res.value == 0 or n == 1
        cut = sum(cap[a.id] for a in arcs if a.tail not in res.sink_side and a.head in res.sink_side)
        assert cut == res.value
        for a in arcs:
            assert 0 <= res.flow[a.id] <= cap[a.id]
