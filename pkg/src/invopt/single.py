"""Single-weight inverse solvers built from the dual of a forward solve.

Each solver returns a mildly adequate optimal p together with a witness of
the matching min-max value.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import forward
from .errors import NegativeCycleError
from .graphs import ARBORESCENCE, MATCHING, PATH, DeviationVector, Instance, conservative_verdict
from .multi import (
    FractionalCoverWitness,
    _expect_optimal,
    build_arborescence_primal,
    cover_witness_objective,
    solve_cover_dual,
    verify_deviation,
)
from .numeric import ZERO, solve_lp


@dataclass(frozen=True)
class SingleInverseResult:
    p: DeviationVector
    optimum: Fraction
    witness: object  # path arcs, matching edges, or a FractionalCoverWitness
    p_source: str = "potentials"


def _single_weight(instance: Instance, kind: str):
    if instance.kind != kind:
        raise ValueError(f"expected a {kind} instance, got {instance.kind}")
    if instance.k != 1:
        raise ValueError(f"single-weight solver needs k=1, got k={instance.k}")
    return instance.weights[0]


def _confirm(instance, p):
    bad = [v for v in verify_deviation(instance, p) if not v.feasible]
    if bad:
        raise RuntimeError(f"deviation vector failed the forward re-check: {bad}")


def inverse_path_single(instance: Instance) -> SingleInverseResult:
    """p(uv) = w(uv) - (y(v) - y(u)) on P with y the shortest-path distances from s."""
    w = _single_weight(instance, PATH)
    verdict = conservative_verdict(instance.graph, w)
    if not verdict.conservative:
        raise NegativeCycleError(verdict.cycle, verdict.weight)
    sp = forward.shortest_path_with_potentials(instance.graph, w, instance.s, instance.t)
    y = sp.potentials
    values = {}
    for aid in instance.solution:
        a = instance.element(aid)
        values[aid] = w[aid] - (y[a.head] - y[a.tail])
    p = DeviationVector.of(instance, values)
    _confirm(instance, p)
    optimum = instance.weight_of(0, instance.solution) - sp.distance
    assert p.norm1 == optimum
    return SingleInverseResult(p, optimum, sp.path)


def inverse_matching_single(instance: Instance) -> SingleInverseResult:
    """p(uv) = w(uv) - y(u) - y(v) on M with y optimal Hungarian potentials."""
    w = _single_weight(instance, MATCHING)
    res = forward.min_perfect_matching_with_potentials(instance.graph, w)
    y = res.potentials
    values = {}
    for eid in instance.solution:
        e = instance.element(eid)
        values[eid] = w[eid] - y[e.tail] - y[e.head]
    p = DeviationVector.of(instance, values)
    _confirm(instance, p)
    optimum = instance.weight_of(0, instance.solution) - res.weight
    assert p.norm1 == optimum
    return SingleInverseResult(p, optimum, res.matching)


def laminar_deviation(instance: Instance) -> DeviationVector:
    """p(a) = w(a) minus the dual load on a, for a in F.

    The load only counts members of the forward laminar dual that F enters
    exactly once; dropping the others keeps the dual feasible, so the result
    always makes F optimal, though not always at minimum norm.
    """
    w = instance.weights[0]
    F = instance.solution_set
    res = forward.min_arborescence_with_dual(instance.graph, instance.root, w, prefer=F)
    kept = []
    for Z, y in res.dual:
        entering = sum(1 for a in instance.elements if a.id in F and a.head in Z and a.tail not in Z)
        if entering == 1:
            kept.append((Z, y))
    values = {a.id: w[a.id] - forward.laminar_load(kept, a) for a in instance.elements if a.id in F}
    return DeviationVector.of(instance, values)


def inverse_arborescence_single(instance: Instance) -> SingleInverseResult:
    """Fractional-cover witness by row generation; p from the forward laminar dual when it is tight.

    When the laminar candidate is not tight, p comes from the restricted
    primal over the rows generated for the witness.
    """
    _single_weight(instance, ARBORESCENCE)
    rg = solve_cover_dual(instance)
    family = tuple((0, Z) for Z in rg.cuts[0])
    witness = FractionalCoverWitness(rg.x, family, cover_witness_objective(instance, rg.x))
    p = laminar_deviation(instance)
    source = "laminar"
    if p.norm1 != rg.objective:
        primal = build_arborescence_primal(instance, rg.cuts)
        sol = solve_lp(primal)
        _expect_optimal(sol, "restricted arborescence primal")
        if sol.objective != rg.objective:
            raise RuntimeError("restricted primal and cover dual optima differ")
        F = instance.solution_set
        p = DeviationVector.of(instance, {a: sol.primal[f"p[{a}]"] for a in instance.element_ids if a in F})
        source = "lp"
    _confirm(instance, p)
    return SingleInverseResult(p, rg.objective, witness, source)


def solve_inverse_single(instance: Instance) -> SingleInverseResult:
    if instance.kind == PATH:
        return inverse_path_single(instance)
    if instance.kind == MATCHING:
        return inverse_matching_single(instance)
    return inverse_arborescence_single(instance)


def witness_value(instance: Instance, result: SingleInverseResult) -> Fraction:
    """w(F) minus the weight of the witness (or of the fractional cover)."""
    if isinstance(result.witness, FractionalCoverWitness):
        return cover_witness_objective(instance, result.witness.x)
    return instance.weight_of(0, instance.solution) - sum((instance.weights[0][e] for e in result.witness), ZERO)
