"""Brute-force ground truth over the full feasible family, plus adequacy checks.

Nothing here uses potentials or LP duality theory: feasibility of p is tested
directly against every feasible solution F'.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import forward
from .errors import TruncatedFamilyError
from .graphs import ARBORESCENCE, MATCHING, PATH, DeviationVector, Instance
from .numeric import GE, INFEASIBLE, MIN, OPTIMAL, ZERO, LpBuilder, solve_lp

DEFAULT_CAP = 100_000


class _Full(Exception):
    pass


@dataclass(frozen=True)
class FeasibleFamily:
    members: tuple  # frozensets of element ids
    truncated: bool
    cap: int

    def __len__(self):
        return len(self.members)

    def require_complete(self):
        if self.truncated:
            raise TruncatedFamilyError(self.cap)
        return self


def _paths(instance, emit):
    s, t = instance.s, instance.t
    out = {}
    for a in sorted(instance.elements, key=lambda a: a.id):
        out.setdefault(a.tail, []).append(a)
    chosen = []
    visited = {s}

    def walk(v):
        if v == t:
            emit(frozenset(chosen))
            return
        for a in out.get(v, ()):
            if a.head not in visited:
                visited.add(a.head)
                chosen.append(a.id)
                walk(a.head)
                chosen.pop()
                visited.discard(a.head)

    walk(s)


def _matchings(instance, emit):
    g = instance.graph
    S = sorted(g.S)
    at = {u: sorted((e for e in g.edges if e.tail == u), key=lambda e: e.id) for u in S}
    used = set()
    chosen = []

    def place(j):
        if j == len(S):
            emit(frozenset(chosen))
            return
        for e in at[S[j]]:
            if e.head not in used:
                used.add(e.head)
                chosen.append(e.id)
                place(j + 1)
                chosen.pop()
                used.discard(e.head)

    place(0)


def _arborescences(instance, emit):
    r = instance.root
    others = sorted(v for v in instance.vertices if v != r)
    into = {v: sorted((a for a in instance.elements if a.head == v and a.tail != v), key=lambda a: a.id) for v in others}
    parent = {}
    chosen = []

    def creates_cycle(v):
        # with one in-arc per vertex, following parents from v returns to v iff there is a cycle
        u = parent[v]
        while u in parent:
            if u == v:
                return True
            u = parent[u]
        return u == v

    def place(j):
        if j == len(others):
            emit(frozenset(chosen))
            return
        v = others[j]
        for a in into[v]:
            parent[v] = a.tail
            if not creates_cycle(v):
                chosen.append(a.id)
                place(j + 1)
                chosen.pop()
            del parent[v]

    place(0)


def _unit_flows(instance, emit):
    """Arc sets whose indicator is an s-t flow of value 1: a simple path plus arc-disjoint cycles."""
    s, t = instance.s, instance.t
    arcs = sorted(instance.elements, key=lambda a: a.id)
    last = {}
    for j, a in enumerate(arcs):
        last[a.tail] = j
        last[a.head] = j
    want = {v: 0 for v in instance.vertices}
    want[s] = -1
    want[t] = 1
    for v in instance.vertices:
        if v not in last and want[v] != 0:
            return
    closing = {}
    for v, j in last.items():
        closing.setdefault(j, []).append(v)
    balance = {v: 0 for v in instance.vertices}
    chosen = []

    def place(j):
        if j == len(arcs):
            emit(frozenset(chosen))
            return
        a = arcs[j]
        for take in (False, True):
            if take:
                if a.tail == a.head:
                    continue
                balance[a.head] += 1
                balance[a.tail] -= 1
                chosen.append(a.id)
            if all(balance[v] == want[v] for v in closing.get(j, ())):
                place(j + 1)
            if take:
                chosen.pop()
                balance[a.head] -= 1
                balance[a.tail] += 1

    place(0)


def enumerate_feasible(instance: Instance, cap: int = DEFAULT_CAP, semantics: str = "simple") -> FeasibleFamily:
    """All s-t paths (simple), perfect matchings, or spanning r-arborescences.

    For paths, ``semantics="flow"`` enumerates every arc set forming a unit
    s-t flow instead (a simple path together with arc-disjoint cycles).
    """
    members = []

    def emit(member):
        if len(members) >= cap:
            raise _Full
        members.append(member)

    if semantics not in ("simple", "flow"):
        raise ValueError(f"unknown semantics {semantics!r}")
    walker = {PATH: _paths, MATCHING: _matchings, ARBORESCENCE: _arborescences}[instance.kind]
    if semantics == "flow" and instance.kind == PATH:
        walker = _unit_flows
    truncated = False
    try:
        walker(instance, emit)
    except _Full:
        truncated = True
    return FeasibleFamily(tuple(members), truncated, cap)


def _family(instance, family, cap, semantics="simple"):
    if family is None:
        family = enumerate_feasible(instance, cap, semantics)
    return family.require_complete()


def _requirements(instance, family):
    """For each F' != F: (F - F', F' - F, max_i (w_i(F) - w_i(F'))), deduplicated."""
    F = instance.solution_set
    reqs = {}
    for G in family.members:
        if G == F:
            continue
        need = max(instance.weight_of(i, F) - instance.weight_of(i, G) for i in range(instance.k))
        key = (frozenset(F - G), frozenset(G - F))
        if key not in reqs or reqs[key] < need:
            reqs[key] = need
    return [(plus, minus, need) for (plus, minus), need in sorted(reqs.items(), key=lambda kv: (sorted(kv[0][0]), sorted(kv[0][1])))]


def is_feasible_by_enumeration(
    instance: Instance, p: DeviationVector, family: Optional[FeasibleFamily] = None, cap=DEFAULT_CAP, semantics: str = "simple"
) -> bool:
    family = _family(instance, family, cap, semantics)
    for plus, minus, need in _requirements(instance, family):
        if sum((p[e] for e in plus), ZERO) - sum((p[e] for e in minus), ZERO) < need:
            return False
    return True


@dataclass(frozen=True)
class OracleResult:
    p: Optional[DeviationVector]
    optimum: Optional[Fraction]
    family_size: int
    mode: str = "none"
    bound: Optional[int] = None


def _oracle_lp(instance, family, mild):
    F = instance.solution_set
    lp = LpBuilder(MIN)
    for e in instance.element_ids:
        if e in F or not mild:
            lp.column(f"up[{e}]", cost=1)
        if not mild:
            lp.column(f"down[{e}]", cost=1)
    for n, (plus, minus, need) in enumerate(_requirements(instance, family)):
        coeffs = {}
        for e, sign in [(e, 1) for e in plus] + [(e, -1) for e in minus]:
            if e in F or not mild:
                coeffs[f"up[{e}]"] = coeffs.get(f"up[{e}]", 0) + sign
            if not mild:
                coeffs[f"down[{e}]"] = coeffs.get(f"down[{e}]", 0) - sign
        lp.row(f"vs{n}", coeffs, GE, need)
    return lp.build()


def _solve_oracle(instance, family, mild, mode):
    lp = _oracle_lp(instance, family, mild)
    sol = solve_lp(lp)
    if sol.status == INFEASIBLE:
        # only reachable in mild mode, e.g. when F' contains F
        return OracleResult(None, None, len(family), mode)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"oracle LP ended with status {sol.status}")
    values = {}
    for e in instance.element_ids:
        v = sol.primal.get(f"up[{e}]", ZERO) - sol.primal.get(f"down[{e}]", ZERO)
        values[e] = v
    return OracleResult(DeviationVector.of(instance, values), sol.objective, len(family), mode)


def brute_force_optimum(
    instance: Instance, family: Optional[FeasibleFamily] = None, cap=DEFAULT_CAP, semantics: str = "simple"
) -> OracleResult:
    """min ||p||_1 subject to F beating every enumerated F' under every w_i - p.

    ``semantics`` picks the competitor family for paths (see enumerate_feasible).
    """
    family = _family(instance, family, cap, semantics)
    return _solve_oracle(instance, family, mild=False, mode="none")


def default_bound(instance: Instance) -> int:
    top = max((abs(w[e]) for w in instance.weights for e in instance.element_ids), default=ZERO)
    return 1 + math.ceil(top)


def _integral_search(instance, family, bound):
    reqs = _requirements(instance, family)
    # elements outside every symmetric difference never help, so they stay 0
    relevant = sorted({e for plus, minus, _ in reqs for e in plus | minus})
    idx = {e: j for j, e in enumerate(relevant)}
    rows = [([idx[e] for e in plus], [idx[e] for e in minus], need) for plus, minus, need in reqs]
    d = len(relevant)

    def ok(vec):
        for plus, minus, need in rows:
            if sum(vec[j] for j in plus) - sum(vec[j] for j in minus) < need:
                return False
        return True

    def vectors(norm):
        vec = [0] * d

        def fill(j, left):
            if j == d:
                if left == 0:
                    yield tuple(vec)
                return
            if left > bound * (d - j):
                return
            for mag in range(0, min(bound, left) + 1):
                for sign in ((1,) if mag == 0 else (1, -1)):
                    vec[j] = sign * mag
                    yield from fill(j + 1, left - mag)
            vec[j] = 0

        yield from fill(0, norm)

    for norm in range(0, bound * d + 1):
        for vec in vectors(norm):
            if ok(vec):
                return {relevant[j]: Fraction(vec[j]) for j in range(d)}, Fraction(norm)
    return None, None


def brute_force_restricted(
    instance: Instance,
    mode: str,
    bound: Optional[int] = None,
    family: Optional[FeasibleFamily] = None,
    cap=DEFAULT_CAP,
    semantics: str = "simple",
) -> OracleResult:
    """Restricted optimum: mode "mild" (p >= 0 on F, zero elsewhere) or "integral" (entries in [-B, B]).

    A None optimum means no restricted p exists; in integral mode only within
    the bound.
    """
    family = _family(instance, family, cap, semantics)
    if mode == "mild":
        return _solve_oracle(instance, family, mild=True, mode="mild")
    if mode != "integral":
        raise ValueError(f"unknown restriction {mode!r}")
    if bound is None:
        bound = default_bound(instance)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    values, optimum = _integral_search(instance, family, bound)
    p = None if values is None else DeviationVector.of(instance, values)
    return OracleResult(p, optimum, len(family), "integral", bound)


def lower_bound(instance: Instance) -> Fraction:
    """max_i (w_i(F) - OPT_i) from the forward solvers."""
    best = ZERO
    for i, w in enumerate(instance.weights):
        if instance.kind == PATH:
            opt = forward.shortest_path_with_potentials(instance.graph, w, instance.s, instance.t).distance
        elif instance.kind == MATCHING:
            opt = forward.min_perfect_matching_with_potentials(instance.graph, w).weight
        else:
            opt = forward.min_arborescence_with_dual(instance.graph, instance.root, w).weight
        best = max(best, instance.weight_of(i, instance.solution) - opt)
    return best


# --------------------------------------------------------------------------
# adequacy condition


@dataclass(frozen=True)
class AdequacyReport:
    holds: bool
    violating: Optional[str]  # first e outside F with no partner, when the condition fails
    pairing: dict  # e -> f for every e that has a partner
    family_size: int


def _structural_partner(instance, e):
    a = instance.element(e)
    F = sorted(instance.solution_set)
    if instance.kind == ARBORESCENCE:
        same_head = [f for f in F if instance.element(f).head == a.head]
        return same_head[0] if same_head else None
    if instance.kind == MATCHING:
        for end in (a.tail, a.head):
            for f in F:
                b = instance.element(f)
                if end in (b.tail, b.head):
                    return f
    return None


def _partners(instance, family, e):
    F = sorted(instance.solution_set)
    return [f for f in F if not any(e in G and f in G for G in family.members)]


def check_mildly_adequate_condition(instance: Instance, family: Optional[FeasibleFamily] = None, cap=DEFAULT_CAP) -> AdequacyReport:
    """For every e outside F, look for f in F that no feasible solution contains together with e.

    For matchings and arborescences the structural partner (an M edge sharing
    an end, or the F arc with the same head) is tried first and checked
    against the enumeration.
    """
    family = _family(instance, family, cap)
    F = instance.solution_set
    pairing = {}
    violating = None
    for e in sorted(instance.element_ids):
        if e in F:
            continue
        partners = _partners(instance, family, e)
        preferred = _structural_partner(instance, e)
        if preferred is not None:
            if preferred not in partners:
                raise AssertionError(f"structural partner {preferred} of {e} shares a feasible solution with it")
            pairing[e] = preferred
        elif partners:
            pairing[e] = partners[0]
        elif violating is None:
            violating = e
    return AdequacyReport(violating is None, violating, pairing, len(family))


def condition_fails_at(instance: Instance, e, family: Optional[FeasibleFamily] = None, cap=DEFAULT_CAP) -> bool:
    family = _family(instance, family, cap)
    return e not in instance.solution_set and not _partners(instance, family, e)


def synthesize_counterexample_weight(instance: Instance, e, family: Optional[FeasibleFamily] = None, cap=DEFAULT_CAP) -> dict:
    """w(e) = -1 and 0 elsewhere; refuses when some f in F never shares a feasible solution with e."""
    if e not in instance.element_ids:
        raise ValueError(f"unknown element {e!r}")
    if not condition_fails_at(instance, e, family, cap):
        raise ValueError(f"the adequacy condition does not fail at {e!r}")
    return {x: (Fraction(-1) if x == e else ZERO) for x in instance.element_ids}


# --------------------------------------------------------------------------
# exhaustive separation


def violated_sets_by_enumeration(x, instance: Instance) -> list:
    """All Z with |Z| > 1, exactly one F arc entering, and x(delta^-(Z)) < 1."""
    r = instance.root
    F = instance.solution_set
    others = sorted(v for v in instance.vertices if v != r)
    found = []
    for size in range(2, len(others) + 1):
        for combo in itertools.combinations(others, size):
            Z = frozenset(combo)
            entering = [a for a in instance.elements if a.head in Z and a.tail not in Z]
            if sum(1 for a in entering if a.id in F) != 1:
                continue
            if sum((x.get(a.id, ZERO) for a in entering), ZERO) < 1:
                found.append(Z)
    return found
