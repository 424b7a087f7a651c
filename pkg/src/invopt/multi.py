"""Inverse problems with k weight functions: LP formulations, row generation, verifiers."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import forward
from .errors import IterationLimitError, NegativeCycleError
from .graphs import (
    ARBORESCENCE,
    MATCHING,
    PATH,
    Arc,
    DeviationVector,
    Instance,
    apply_deviation,
    bellman_ford,
    conservative_verdict,
)
from .numeric import EQ, GE, LE, MAX, MIN, OPTIMAL, ZERO, LinearProgram, LpBuilder, LpSolution, format_rational, solve_lp

# --------------------------------------------------------------------------
# witnesses and results


@dataclass(frozen=True)
class MultiCommodityWitness:
    flows: tuple  # one arc -> value map per weight function
    objective: Fraction


@dataclass(frozen=True)
class FractionalMatchingWitness:
    x: tuple
    objective: Fraction


@dataclass(frozen=True)
class FractionalCoverWitness:
    x: tuple
    family: tuple  # (commodity index, frozenset Z) for every generated row
    objective: Fraction


@dataclass(frozen=True)
class MultiInverseResult:
    p: DeviationVector
    optimum: Fraction
    witness: object
    iterations: int = 0
    lps: tuple = field(default=(), repr=False)  # ((LinearProgram, LpSolution), ...) for auditing


def _col(prefix, i, key):
    return f"{prefix}{i + 1}[{key}]"


def _set_key(Z):
    return "{" + ",".join(sorted(Z)) + "}"


def _expect_optimal(sol: LpSolution, what: str):
    if sol.status != OPTIMAL:
        raise RuntimeError(f"{what} LP ended with status {sol.status}")


# --------------------------------------------------------------------------
# shortest paths


def build_path_primal(instance: Instance) -> LinearProgram:
    """Min sum_P p - sum_{A-P} p over potentials y_i and deviations p with p>=0 on P, p<=0 off P."""
    P = instance.solution_set
    lp = LpBuilder(MIN)
    for i in range(instance.k):
        for v in instance.vertices:
            lp.column(_col("y", i, v), lower=None)
    for a in instance.elements:
        if a.id in P:
            lp.column(f"p[{a.id}]", cost=1)
        else:
            lp.column(f"p[{a.id}]", lower=None, upper=ZERO, cost=-1)
    for i, w in enumerate(instance.weights):
        for a in instance.elements:
            coeffs = {_col("y", i, a.head): 1, f"p[{a.id}]": 1}
            coeffs[_col("y", i, a.tail)] = coeffs.get(_col("y", i, a.tail), 0) - 1
            lp.row(_col("pot", i, a.id), coeffs, GE if a.id in P else LE, w[a.id])
    return lp.build()


def build_path_dual(instance: Instance, unit_on_path: bool = False) -> LinearProgram:
    """Multi-commodity s-t flow LP: each x_i a unit flow, >= k-1 in total on P, <= 1 off P.

    ``unit_on_path`` adds the rows x_i(a) <= 1 on P, which is the exact LP dual
    before those rows are argued redundant.
    """
    P = instance.solution_set
    k = instance.k
    s, t = instance.s, instance.t
    lp = LpBuilder(MAX)
    for i, w in enumerate(instance.weights):
        for a in instance.elements:
            lp.column(_col("x", i, a.id), cost=-w[a.id])
        lp.constant += instance.weight_of(i, P)
    for i in range(k):
        for v in instance.vertices:
            coeffs = {}
            for a in instance.elements:
                if a.head == v:
                    coeffs[_col("x", i, a.id)] = coeffs.get(_col("x", i, a.id), 0) + 1
                if a.tail == v:
                    coeffs[_col("x", i, a.id)] = coeffs.get(_col("x", i, a.id), 0) - 1
            rhs = -1 if v == s else (1 if v == t else 0)
            lp.row(_col("flow", i, v), coeffs, EQ, rhs)
    for a in instance.elements:
        coeffs = {_col("x", i, a.id): 1 for i in range(k)}
        if a.id in P:
            lp.row(f"cover[{a.id}]", coeffs, GE, k - 1)
        else:
            lp.row(f"cap[{a.id}]", coeffs, LE, 1)
    if unit_on_path:
        for i in range(k):
            for a in instance.elements:
                if a.id in P:
                    lp.row(_col("unit", i, a.id), {_col("x", i, a.id): 1}, LE, 1)
    return lp.build()


def _flows_from(instance, sol):
    return tuple(
        {a.id: sol.primal[_col("x", i, a.id)] for a in instance.elements} for i in range(instance.k)
    )


def path_witness_objective(instance: Instance, flows) -> Fraction:
    P = instance.solution_set
    total = ZERO
    for i, w in enumerate(instance.weights):
        total += instance.weight_of(i, P) - sum((w[a] * flows[i][a] for a in instance.element_ids), ZERO)
    return total


def _support_path(instance, flow, start, goal, banned=()):
    """Shortest (by arc count) path from start to goal on arcs with positive flow."""
    out = {}
    for a in sorted(instance.elements, key=lambda a: a.id):
        if flow[a.id] > 0 and a.id not in banned:
            out.setdefault(a.tail, []).append(a)
    parent = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if v == goal:
            break
        for a in out.get(v, ()):
            if a.head not in parent:
                parent[a.head] = a
                queue.append(a.head)
    if goal not in parent:
        return None
    arcs = []
    v = goal
    while parent[v] is not None:
        arcs.append(parent[v])
        v = parent[v].tail
    arcs.reverse()
    return arcs


def trim_path_flows(instance: Instance, flows):
    """Cancel circulations so that x_i(a) <= 1 on every arc of P.

    For an arc a of P with x_i(a) > 1, some cycle of the flow decomposition of
    x_i passes through a; flow is removed around such a cycle. Returns the
    trimmed flows, or None when no cycle can be cancelled without breaking a
    ``>= k-1`` row.
    """
    P = instance.solution_set
    k = instance.k
    flows = [dict(f) for f in flows]
    by_id = {a.id: a for a in instance.elements}
    for _ in range(10 * len(by_id) * k + 10):
        over = [(i, a) for i in range(k) for a in sorted(P) if flows[i][a] > 1]
        if not over:
            return tuple(flows)
        i, aid = over[0]
        a = by_id[aid]
        back = _support_path(instance, flows[i], a.head, a.tail, banned={aid})
        if back is None:
            return None
        cycle = [a] + back
        theta = min([flows[i][aid] - 1] + [flows[i][c.id] for c in cycle])
        for c in cycle:
            if c.id in P:
                theta = min(theta, sum(flows[j][c.id] for j in range(k)) - (k - 1))
        if theta <= 0:
            return None
        for c in cycle:
            flows[i][c.id] -= theta
    return None


def inverse_path_multi(instance: Instance, allow_nonconservative: bool = False) -> MultiInverseResult:
    """Solve the primal/dual pair for paths; the witness is a multi-commodity flow.

    Non-conservative weight functions raise NegativeCycleError unless
    ``allow_nonconservative`` is set. The witness comes from the transformed
    dual after cycle trimming when that works, and otherwise from the dual with
    explicit x_i(a) <= 1 rows on P, which is tight by LP duality.
    """
    if instance.kind != PATH:
        raise ValueError("inverse_path_multi needs a path instance")
    for i, w in enumerate(instance.weights):
        verdict = conservative_verdict(instance.graph, w)
        if not verdict.conservative and not allow_nonconservative:
            err = NegativeCycleError(verdict.cycle, verdict.weight)
            err.index = i
            raise err

    primal = build_path_primal(instance)
    psol = solve_lp(primal)
    _expect_optimal(psol, "path primal")
    dual = build_path_dual(instance)
    dsol = solve_lp(dual)
    lps = [(primal, psol), (dual, dsol)]

    # Without x_i <= 1 on P the dual can exceed the primal: cancelling a cycle
    # through one P arc may break the >= k-1 row of another P arc on it.
    flows = None
    if dsol.status == OPTIMAL and dsol.objective == psol.objective:
        flows = trim_path_flows(instance, _flows_from(instance, dsol))
        if flows is not None and path_witness_objective(instance, flows) != dsol.objective:
            flows = None
    if flows is None:
        bounded = build_path_dual(instance, unit_on_path=True)
        bsol = solve_lp(bounded)
        _expect_optimal(bsol, "bounded path dual")
        if bsol.objective != psol.objective:
            raise RuntimeError("strong duality failed between path primal and bounded dual")
        lps.append((bounded, bsol))
        flows = _flows_from(instance, bsol)

    p = DeviationVector.of(instance, {a.id: psol.primal[f"p[{a.id}]"] for a in instance.elements})
    witness = MultiCommodityWitness(flows, path_witness_objective(instance, flows))
    return MultiInverseResult(p, psol.objective, witness, 0, tuple(lps))


# --------------------------------------------------------------------------
# bipartite perfect matchings


def build_matching_primal(instance: Instance) -> LinearProgram:
    M = instance.solution_set
    lp = LpBuilder(MIN)
    for i in range(instance.k):
        for v in instance.vertices:
            lp.column(_col("y", i, v), lower=None)
    for e in instance.elements:
        if e.id in M:
            lp.column(f"p[{e.id}]", cost=1)
    for i, w in enumerate(instance.weights):
        for e in instance.elements:
            coeffs = {_col("y", i, e.tail): 1, _col("y", i, e.head): 1}
            if e.id in M:
                coeffs[f"p[{e.id}]"] = 1
                lp.row(_col("pot", i, e.id), coeffs, GE, w[e.id])
            else:
                lp.row(_col("pot", i, e.id), coeffs, LE, w[e.id])
    return lp.build()


def build_matching_dual(instance: Instance) -> LinearProgram:
    """k fractional perfect matchings covering every edge of M at least k-1 times in total."""
    M = instance.solution_set
    k = instance.k
    lp = LpBuilder(MAX)
    for i, w in enumerate(instance.weights):
        for e in instance.elements:
            lp.column(_col("x", i, e.id), cost=-w[e.id])
        lp.constant += instance.weight_of(i, M)
    for i in range(k):
        for v in instance.vertices:
            coeffs = {_col("x", i, e.id): 1 for e in instance.elements if v in (e.tail, e.head)}
            lp.row(_col("deg", i, v), coeffs, EQ, 1)
    for e in instance.elements:
        if e.id in M:
            lp.row(f"cover[{e.id}]", {_col("x", i, e.id): 1 for i in range(k)}, GE, k - 1)
    return lp.build()


def matching_witness_objective(instance: Instance, x) -> Fraction:
    return path_witness_objective(instance, x)


def inverse_matching_multi(instance: Instance) -> MultiInverseResult:
    if instance.kind != MATCHING:
        raise ValueError("inverse_matching_multi needs a matching instance")
    primal = build_matching_primal(instance)
    psol = solve_lp(primal)
    _expect_optimal(psol, "matching primal")
    dual = build_matching_dual(instance)
    dsol = solve_lp(dual)
    _expect_optimal(dsol, "matching dual")
    if psol.objective != dsol.objective:
        raise RuntimeError("strong duality failed between matching primal and dual")
    M = instance.solution_set
    p = DeviationVector.of(instance, {e: psol.primal[f"p[{e}]"] for e in instance.element_ids if e in M})
    x = _flows_from(instance, dsol)
    witness = FractionalMatchingWitness(x, matching_witness_objective(instance, x))
    return MultiInverseResult(p, psol.objective, witness, 0, ((primal, psol), (dual, dsol)))


# --------------------------------------------------------------------------
# arborescences


def _enters(a, Z):
    return a.head in Z and a.tail not in Z


def separate_arborescence(x: Mapping, instance: Instance) -> Optional[frozenset]:
    """Find Z with |Z|>1, d_F^-(Z)=1 and x(delta^-(Z)) < 1, or return None.

    Works on x~ = x + chi_F: such a Z exists exactly when some r-v cut of x~ has
    capacity below 2. Vertices are scanned in id order and the first deficient
    cut is returned (as the sink side of a minimum cut).
    """
    r = instance.root
    F = instance.solution_set
    for a in instance.elements:
        if x.get(a.id, ZERO) < 0:
            raise ValueError(f"separation needs x >= 0; x({a.id}) < 0")
    for v in instance.vertices:
        if v == r:
            continue
        indeg = sum((x.get(a.id, ZERO) for a in instance.elements if a.head == v), ZERO)
        if indeg != 1:
            raise ValueError(f"separation needs x(delta^-({v})) = 1, got {format_rational(indeg)}")
    cap = {a.id: x.get(a.id, ZERO) + (1 if a.id in F else 0) for a in instance.elements}
    for v in sorted(instance.vertices):
        if v == r:
            continue
        res = forward.max_flow_min_cut(instance.graph, cap, r, v)
        if res.value < 2:
            Z = res.sink_side
            assert len(Z) > 1
            assert sum(1 for a in instance.elements if a.id in F and _enters(a, Z)) == 1
            assert sum((x.get(a.id, ZERO) for a in instance.elements if _enters(a, Z)), ZERO) < 1
            return Z
    return None


def build_arborescence_dual(instance: Instance, cuts: Sequence[Sequence[frozenset]], weights=None) -> LinearProgram:
    """The fractional-cover LP restricted to the generated sets ``cuts[i]`` for commodity i."""
    weights = instance.weights if weights is None else weights
    k = len(weights)
    r = instance.root
    F = instance.solution_set
    lp = LpBuilder(MAX)
    for i, w in enumerate(weights):
        for a in instance.elements:
            lp.column(_col("x", i, a.id), cost=-w[a.id])
        lp.constant += sum((w[a] for a in F), ZERO)
    for i in range(k):
        for v in instance.vertices:
            if v != r:
                lp.row(_col("deg", i, v), {_col("x", i, a.id): 1 for a in instance.elements if a.head == v}, EQ, 1)
    if k > 1:
        for a in instance.elements:
            if a.id in F:
                lp.row(f"cover[{a.id}]", {_col("x", i, a.id): 1 for i in range(k)}, GE, k - 1)
    for i in range(k):
        for Z in cuts[i]:
            coeffs = {_col("x", i, a.id): 1 for a in instance.elements if _enters(a, Z)}
            lp.row(_col("cut", i, _set_key(Z)), coeffs, GE, 1)
    return lp.build()


def build_arborescence_primal(instance: Instance, cuts: Sequence[Sequence[frozenset]], weights=None) -> LinearProgram:
    """Deviation LP with y_i on singletons (free) and on the generated sets (>= 0)."""
    weights = instance.weights if weights is None else weights
    r = instance.root
    F = instance.solution_set
    lp = LpBuilder(MIN)
    families = []
    for i in range(len(weights)):
        fam = [frozenset([v]) for v in instance.vertices if v != r]
        for Z in cuts[i]:
            if Z not in fam:
                fam.append(Z)
        families.append(fam)
        for Z in fam:
            lp.column(_col("y", i, _set_key(Z)), lower=None if len(Z) == 1 else ZERO)
    for a in instance.elements:
        if a.id in F:
            lp.column(f"p[{a.id}]", cost=1)
    for i, w in enumerate(weights):
        for a in instance.elements:
            coeffs = {_col("y", i, _set_key(Z)): 1 for Z in families[i] if _enters(a, Z)}
            if a.id in F:
                coeffs[f"p[{a.id}]"] = 1
                lp.row(_col("pot", i, a.id), coeffs, GE, w[a.id])
            else:
                lp.row(_col("pot", i, a.id), coeffs, LE, w[a.id])
    return lp.build()


def cover_witness_objective(instance: Instance, x, weights=None) -> Fraction:
    weights = instance.weights if weights is None else weights
    F = instance.solution_set
    total = ZERO
    for i, w in enumerate(weights):
        total += sum((w[a] for a in F), ZERO) - sum((w[a] * x[i][a] for a in instance.element_ids), ZERO)
    return total


@dataclass
class RowGenerationResult:
    x: tuple
    cuts: list
    objective: Fraction
    iterations: int
    lps: list


def solve_cover_dual(instance: Instance, weights=None, max_rounds: Optional[int] = None) -> RowGenerationResult:
    """Row generation on the fractional-cover LP until separation finds nothing.

    Each round solves the restricted LP and adds at most one violated set per
    commodity. ``iterations`` counts rounds that added rows.
    """
    weights = instance.weights if weights is None else weights
    k = len(weights)
    n = len(instance.vertices)
    if max_rounds is None:
        max_rounds = 10 * k * n * n
    cuts = [[] for _ in range(k)]
    rounds = 0
    while True:
        lp = build_arborescence_dual(instance, cuts, weights)
        sol = solve_lp(lp)
        _expect_optimal(sol, "cover dual")
        x = _flows_from_k(instance, sol, k)
        added = False
        for i in range(k):
            Z = separate_arborescence(x[i], instance)
            if Z is not None:
                if Z in cuts[i]:
                    raise RuntimeError(f"separation returned an existing row {_set_key(Z)}")
                cuts[i].append(Z)
                added = True
        if not added:
            return RowGenerationResult(x, cuts, sol.objective, rounds, [(lp, sol)])
        rounds += 1
        if rounds > max_rounds:
            raise IterationLimitError(f"row generation exceeded {max_rounds} rounds ({sum(map(len, cuts))} rows)")


def _flows_from_k(instance, sol, k):
    return tuple({a.id: sol.primal[_col("x", i, a.id)] for a in instance.elements} for i in range(k))


def inverse_arborescence_multi(instance: Instance, max_rounds: Optional[int] = None) -> MultiInverseResult:
    """Row generation for the cover witness, then the restricted primal for p.

    The restricted primal only uses sets generated for the dual, so its feasible
    points are feasible for the full deviation LP; equal optima make p optimal.
    """
    if instance.kind != ARBORESCENCE:
        raise ValueError("inverse_arborescence_multi needs an arborescence instance")
    rg = solve_cover_dual(instance, max_rounds=max_rounds)
    primal = build_arborescence_primal(instance, rg.cuts)
    psol = solve_lp(primal)
    _expect_optimal(psol, "restricted arborescence primal")
    if psol.objective != rg.objective:
        raise RuntimeError("restricted primal and cover dual optima differ")
    F = instance.solution_set
    p = DeviationVector.of(instance, {a: psol.primal[f"p[{a}]"] for a in instance.element_ids if a in F})
    family = tuple((i, Z) for i in range(instance.k) for Z in rg.cuts[i])
    witness = FractionalCoverWitness(rg.x, family, cover_witness_objective(instance, rg.x))
    return MultiInverseResult(p, psol.objective, witness, rg.iterations, tuple(rg.lps) + ((primal, psol),))


def solve_inverse_multi(instance: Instance, **kwargs) -> MultiInverseResult:
    if instance.kind == PATH:
        return inverse_path_multi(instance, **kwargs)
    if instance.kind == MATCHING:
        return inverse_matching_multi(instance)
    return inverse_arborescence_multi(instance, **kwargs)


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class WeightVerdict:
    index: int
    # "optimal" | "not-optimal" | "non-conservative-certified" | "non-conservative"
    status: str
    solution_weight: Fraction
    optimum: Optional[Fraction]

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "non-conservative-certified")


def forward_optimum(instance: Instance, w: Mapping) -> Fraction:
    """Optimum of the underlying problem under ``w`` (raises on non-conservative paths)."""
    if instance.kind == PATH:
        return forward.shortest_path_with_potentials(instance.graph, w, instance.s, instance.t).distance
    if instance.kind == MATCHING:
        return forward.min_perfect_matching_with_potentials(instance.graph, w).weight
    return forward.min_arborescence_with_dual(instance.graph, instance.root, w).weight


def path_potential_certificate(instance: Instance, w: Mapping) -> Optional[dict]:
    """Potentials y with y(v)-y(u) <= w(uv) off P and >= w(uv) on P, if any exist.

    Such y prove P shortest among all simple s-t paths even when w has a
    negative cycle: a path P' loses at most the slack of the P arcs it shares.
    Found as a difference-constraint system, with P arcs reversed and negated.
    """
    P = instance.solution_set
    aux = []
    weights = {}
    for a in instance.elements:
        if a.id in P:
            aux.append(Arc(a.id, a.head, a.tail))
            weights[a.id] = -w[a.id]
        else:
            aux.append(a)
            weights[a.id] = w[a.id]
    try:
        y, _ = bellman_ford(instance.vertices, aux, weights)
    except NegativeCycleError:
        return None
    return y


def verify_deviation(instance: Instance, p: DeviationVector) -> list:
    """For every w_i, is the input solution optimal under w_i - p?

    A path instance whose w_i - p has a negative cycle is only accepted via
    ``path_potential_certificate``; its status says so.
    """
    verdicts = []
    for i, w in enumerate(apply_deviation(instance, p)):
        fw = sum((w[e] for e in instance.solution), ZERO)
        if instance.kind == PATH and not conservative_verdict(instance.graph, w).conservative:
            certified = path_potential_certificate(instance, w) is not None
            status = "non-conservative-certified" if certified else "non-conservative"
            verdicts.append(WeightVerdict(i, status, fw, None))
            continue
        opt = forward_optimum(instance, w)
        verdicts.append(WeightVerdict(i, "optimal" if fw == opt else "not-optimal", fw, opt))
    return verdicts


@dataclass(frozen=True)
class WitnessVerdict:
    ok: bool
    objective: Fraction
    failures: tuple = ()


def verify_witness(instance: Instance, witness) -> WitnessVerdict:
    """Check every stated invariant of a witness exactly; failures name the broken row."""
    fails = []
    k = instance.k
    F = instance.solution_set
    if isinstance(witness, MultiCommodityWitness):
        if instance.kind != PATH:
            raise ValueError("multi-commodity witness needs a path instance")
        x = witness.flows
        objective = path_witness_objective(instance, x)
    elif isinstance(witness, FractionalMatchingWitness):
        if instance.kind != MATCHING:
            raise ValueError("fractional matching witness needs a matching instance")
        x = witness.x
        objective = matching_witness_objective(instance, x)
    elif isinstance(witness, FractionalCoverWitness):
        if instance.kind != ARBORESCENCE:
            raise ValueError("fractional cover witness needs an arborescence instance")
        x = witness.x
        objective = cover_witness_objective(instance, x)
    else:
        raise TypeError(f"unknown witness type {type(witness).__name__}")

    if len(x) != k:
        return WitnessVerdict(False, ZERO, (f"expected {k} commodities, got {len(x)}",))
    for i in range(k):
        for a in instance.element_ids:
            if x[i].get(a, ZERO) < 0:
                fails.append(f"nonneg{i + 1}[{a}]")

    if isinstance(witness, MultiCommodityWitness):
        for i in range(k):
            for v in instance.vertices:
                net = sum((x[i][a.id] for a in instance.elements if a.head == v), ZERO)
                net -= sum((x[i][a.id] for a in instance.elements if a.tail == v), ZERO)
                want = -1 if v == instance.s else (1 if v == instance.t else 0)
                if net != want:
                    fails.append(f"flow{i + 1}[{v}]")
        for a in instance.element_ids:
            total = sum((x[i][a] for i in range(k)), ZERO)
            if a in F:
                if total < k - 1:
                    fails.append(f"cover[{a}]")
                for i in range(k):
                    if x[i][a] > 1:
                        fails.append(f"unit{i + 1}[{a}]")
            elif total > 1:
                fails.append(f"cap[{a}]")
    elif isinstance(witness, FractionalMatchingWitness):
        for i in range(k):
            for v in instance.vertices:
                deg = sum((x[i][e.id] for e in instance.elements if v in (e.tail, e.head)), ZERO)
                if deg != 1:
                    fails.append(f"deg{i + 1}[{v}]")
        for e in F:
            if sum((x[i][e] for i in range(k)), ZERO) < k - 1:
                fails.append(f"cover[{e}]")
    else:
        r = instance.root
        degrees_ok = True
        for i in range(k):
            for v in instance.vertices:
                if v == r:
                    continue
                deg = sum((x[i][a.id] for a in instance.elements if a.head == v), ZERO)
                if deg != 1:
                    fails.append(f"deg{i + 1}[{v}]")
                    degrees_ok = False
        if k > 1:
            for a in F:
                if sum((x[i][a] for i in range(k)), ZERO) < k - 1:
                    fails.append(f"cover[{a}]")
        if degrees_ok and not any(f.startswith("nonneg") for f in fails):
            for i in range(k):
                Z = separate_arborescence(x[i], instance)
                if Z is not None:
                    fails.append(f"cut{i + 1}[{_set_key(Z)}]")

    if objective != witness.objective:
        fails.append(f"objective: stated {format_rational(witness.objective)}, recomputed {format_rational(objective)}")
    return WitnessVerdict(not fails, objective, tuple(fails))
