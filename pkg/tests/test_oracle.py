import itertools
from fractions import Fraction

import pytest

from helpers import corpus, fixture
from invopt.errors import TruncatedFamilyError
from invopt.graphs import DeviationVector, instance_from_dict, instance_to_dict
from invopt.multi import inverse_path_multi
from invopt.oracle import (
    brute_force_optimum,
    brute_force_restricted,
    check_mildly_adequate_condition,
    condition_fails_at,
    default_bound,
    enumerate_feasible,
    is_feasible_by_enumeration,
    synthesize_counterexample_weight,
)

# frozen from exhaustive enumeration of the fixtures
FAMILY_SIZES = {"fig1": 4, "fig2": 4, "fig3": 6, "fig4": 6, "fig5": 16}
FLOW_SIZES = {"fig1": 5, "fig2": 5, "fig3": 8}


@pytest.mark.parametrize("name", sorted(FAMILY_SIZES))
def test_family_sizes(name):
    fam = enumerate_feasible(fixture(name))
    assert len(fam) == FAMILY_SIZES[name] and not fam.truncated
    assert len(set(fam.members)) == len(fam)
    if name in FLOW_SIZES:
        assert len(enumerate_feasible(fixture(name), semantics="flow")) == FLOW_SIZES[name]


def _det(m):
    m = [[Fraction(v) for v in row] for row in m]
    n, det = len(m), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


def test_matching_count_is_permanent():
    for inst in corpus("matching", count=60, seed=51):
        S, T = sorted(inst.graph.S), sorted(inst.graph.T)
        adj = {(e.tail, e.head) for e in inst.elements}
        perm = sum(all((u, v) in adj for u, v in zip(S, p)) for p in itertools.permutations(T))
        assert len(enumerate_feasible(inst)) == perm


def test_arborescence_count_matrix_tree():
    for inst in corpus("arborescence", count=60, seed=52):
        others = [v for v in inst.vertices if v != inst.root]
        idx = {v: j for j, v in enumerate(others)}
        lap = [[0] * len(others) for _ in others]
        for a in inst.elements:
            if a.head == inst.root:
                continue
            lap[idx[a.head]][idx[a.head]] += 1
            if a.tail != inst.root:
                lap[idx[a.tail]][idx[a.head]] -= 1
        assert len(enumerate_feasible(inst)) == _det(lap)


def test_single_arc_instance():
    doc = {
        "kind": "path",
        "vertices": ["s", "t"],
        "elements": [{"id": "st", "tail": "s", "head": "t"}],
        "anchors": {"s": "s", "t": "t"},
        "solution": ["st"],
        "weights": [[{"id": "st", "w": "3"}]],
    }
    inst = instance_from_dict(doc)
    assert enumerate_feasible(inst).members == (frozenset({"st"}),)
    assert brute_force_optimum(inst).optimum == 0


def test_truncation():
    fam = enumerate_feasible(fixture("fig5"), cap=3)
    assert fam.truncated and len(fam) == 3
    with pytest.raises(TruncatedFamilyError):
        fam.require_complete()


def test_oracle_values():
    assert brute_force_optimum(fixture("fig2")).optimum == 1
    assert brute_force_optimum(fixture("fig3")).optimum == Fraction(3, 2)
    assert brute_force_restricted(fixture("fig2"), "mild").optimum == 2
    assert brute_force_restricted(fixture("fig3"), "integral", bound=2).optimum == 2
    assert brute_force_restricted(fixture("fig4"), "mild").optimum == Fraction(3, 2)
    assert default_bound(fixture("fig5")) == 2


def test_feasibility_by_enumeration():
    inst = fixture("fig2")
    assert is_feasible_by_enumeration(inst, DeviationVector.of(inst, {"ab": -1}))
    assert not is_feasible_by_enumeration(inst, DeviationVector.zero(inst))


def test_adequacy_reports():
    r5 = check_mildly_adequate_condition(fixture("fig5"))
    assert r5.holds and r5.pairing == {"rv": "uv", "rw": "vw", "uw": "vw", "vu": "ru", "wu": "ru", "wv": "uv"}
    assert check_mildly_adequate_condition(fixture("fig4")).holds
    r2 = check_mildly_adequate_condition(fixture("fig2"))
    assert not r2.holds and r2.violating == "ab"
    assert condition_fails_at(fixture("fig2"), "ab")
    assert not condition_fails_at(fixture("fig2"), "sa")


def test_counterexample_synthesis():
    inst = fixture("fig2")
    w = synthesize_counterexample_weight(inst, "ab")
    assert w["ab"] == -1 and sum(abs(v) for v in w.values()) == 1
    single = instance_from_dict({**instance_to_dict(inst), "weights": [[{"id": e, "w": str(v)} for e, v in w.items()]]})
    assert brute_force_optimum(single).optimum < brute_force_restricted(single, "mild").optimum
    with pytest.raises(ValueError):
        synthesize_counterexample_weight(inst, "sa")
    with pytest.raises(ValueError):
        synthesize_counterexample_weight(inst, "zz")


def test_simple_path_semantics_regression():
    """Simple-path optimum 7, unit-flow and LP optimum 8, with the seeded instance pinned."""
    inst = fixture("regress_simple_vs_lp")
    simple = brute_force_optimum(inst)
    flow = brute_force_optimum(inst, semantics="flow")
    lp = inverse_path_multi(inst, allow_nonconservative=True)
    assert (simple.optimum, flow.optimum, lp.optimum) == (7, 8, 8)


def test_flow_oracle_matches_lp_on_random_paths():
    for inst in corpus("path", count=80, seed=53):
        res = inverse_path_multi(inst, allow_nonconservative=True)
        assert res.optimum == brute_force_optimum(inst, semantics="flow").optimum
