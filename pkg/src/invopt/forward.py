"""Forward solvers that return a dual certificate alongside the optimum.

Ties are broken towards the lexicographically smallest element id so that
results are reproducible.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .errors import NoPerfectMatchingError, UnreachableError
from .graphs import BipartiteGraph, Digraph, bellman_ford
from .numeric import ZERO


@dataclass(frozen=True)
class ShortestPathResult:
    path: tuple
    distance: Fraction
    potentials: Mapping[str, Fraction]


@dataclass(frozen=True)
class MatchingResult:
    matching: tuple
    weight: Fraction
    potentials: Mapping[str, Fraction]


@dataclass(frozen=True)
class ArborescenceResult:
    arcs: tuple
    weight: Fraction
    dual: tuple  # ((frozenset Z, y(Z)), ...)


@dataclass(frozen=True)
class FlowResult:
    value: Fraction
    flow: Mapping[str, Fraction]
    sink_side: frozenset


def shortest_path_with_potentials(d: Digraph, w: Mapping, s, t) -> ShortestPathResult:
    """Bellman-Ford shortest s-t path plus a feasible potential on every vertex.

    Raises NegativeCycleError for non-conservative ``w`` and UnreachableError
    when t cannot be reached from s.
    """
    # whole-graph check first, so cycles away from s are reported too
    base, _ = bellman_ford(d.vertices, d.arcs, w)
    dist, pred = bellman_ford(d.vertices, d.arcs, w, source=s)
    if dist[t] is None:
        raise UnreachableError([t], "t is not reachable from s")
    by_id = {a.id: a for a in d.arcs}
    path = []
    v = t
    while v != s:
        aid = pred[v]
        path.append(aid)
        v = by_id[aid].tail
    path.reverse()

    # Off the reachable set distances are undefined. There y := base + C, where
    # base is a feasible potential from the super-source run and C is the least
    # shift keeping every arc from an unreachable tail into the reachable set
    # feasible. No arc leaves the reachable set towards an unreachable head.
    y = {v: dv for v, dv in dist.items() if dv is not None}
    shift = ZERO
    for a in d.arcs:
        if dist[a.tail] is None and dist[a.head] is not None:
            shift = max(shift, y[a.head] - w[a.id] - base[a.tail])
    for v, dv in dist.items():
        if dv is None:
            y[v] = base[v] + shift
    return ShortestPathResult(tuple(path), dist[t], y)


def min_perfect_matching_with_potentials(g: BipartiteGraph, w: Mapping) -> MatchingResult:
    """Hungarian algorithm keeping feasible potentials ``y(u) + y(v) <= w(uv)`` throughout."""
    S = sorted(g.S)
    T = sorted(g.T)
    if len(S) != len(T):
        raise NoPerfectMatchingError(S, T) if len(S) > len(T) else NoPerfectMatchingError([], [])
    n = len(S)
    if n == 0:
        return MatchingResult((), ZERO, {})
    edge_at = {}
    for e in sorted(g.edges, key=lambda e: e.id):
        edge_at.setdefault((e.tail, e.head), e)
    # 1-indexed rows (S) and columns (T); None is +infinity
    cost = [[None] * (n + 1) for _ in range(n + 1)]
    for (a, b), e in edge_at.items():
        cost[S.index(a) + 1][T.index(b) + 1] = Fraction(w[e.id])

    u = [ZERO] * (n + 1)
    v = [ZERO] * (n + 1)
    match_col = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match_col[0] = i
        j0 = 0
        minv = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            delta = None
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                c = cost[i0][j]
                if c is not None:
                    cur = c - u[i0] - v[j]
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                if minv[j] is not None and (delta is None or minv[j] < delta):
                    delta = minv[j]
                    j1 = j
            if delta is None:
                rows = sorted(S[match_col[j] - 1] for j in range(n + 1) if used[j])
                cols = sorted(T[j - 1] for j in range(1, n + 1) if used[j])
                raise NoPerfectMatchingError(rows, cols)
            for j in range(n + 1):
                if used[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                elif minv[j] is not None:
                    minv[j] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while True:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
            if j0 == 0:
                break

    matching = []
    for j in range(1, n + 1):
        e = edge_at[(S[match_col[j] - 1], T[j - 1])]
        matching.append(e.id)
    y = {S[i - 1]: u[i] for i in range(1, n + 1)}
    y.update({T[j - 1]: v[j] for j in range(1, n + 1)})
    weight = sum((Fraction(w[e]) for e in matching), ZERO)
    return MatchingResult(tuple(sorted(matching)), weight, y)


def reachable_from(d: Digraph, r, arcs=None) -> set:
    arcs = d.arcs if arcs is None else arcs
    out = {}
    for a in arcs:
        out.setdefault(a.tail, []).append(a.head)
    seen = {r}
    todo = [r]
    while todo:
        x = todo.pop()
        for y in out.get(x, ()):
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen


def min_arborescence_with_dual(d: Digraph, r, w: Mapping, prefer=()) -> ArborescenceResult:
    """Chu-Liu/Edmonds contraction, recording the laminar dual as it goes.

    Each (super)vertex Z gets y(Z) = the minimum reduced weight entering it;
    contracted cycles become the non-singleton members of the family. Ties go
    to arcs in ``prefer`` first, then to the smallest id.
    """
    missing = set(d.vertices) - reachable_from(d, r)
    if missing:
        raise UnreachableError(sorted(missing), "no spanning r-arborescence; unreachable from root")
    prefer = set(prefer)
    nodes = [frozenset([v]) for v in sorted(d.vertices)]
    root = frozenset([r])
    node_of = {v: frozenset([v]) for v in d.vertices}
    arcs = [
        (a.id, node_of[a.tail], node_of[a.head], Fraction(w[a.id]), (a.id not in prefer, a.id))
        for a in d.arcs
        if a.tail != a.head
    ]
    choice, duals = _edmonds(nodes, root, arcs)
    total = {}
    for Z, y in duals:
        total[Z] = total.get(Z, ZERO) + y
    family = tuple(
        sorted(((Z, y) for Z, y in total.items() if y), key=lambda zy: (len(zy[0]), sorted(zy[0])))
    )
    chosen = tuple(sorted(choice.values()))
    weight = sum((Fraction(w[a]) for a in chosen), ZERO)
    return ArborescenceResult(chosen, weight, family)


def _edmonds(nodes, root, arcs):
    best = {}
    duals = []
    for v in nodes:
        if v == root:
            continue
        cands = [a for a in arcs if a[2] == v]
        a = min(cands, key=lambda a: (a[3], a[4]))
        best[v] = a
        duals.append((v, a[3]))
    y = {v: a[3] for v, a in best.items()}
    reduced = [(aid, t, h, wt - y.get(h, ZERO), rank) for aid, t, h, wt, rank in arcs]

    cycle = None
    for start in nodes:
        seen = []
        v = start
        while v != root and v not in seen:
            seen.append(v)
            v = best[v][1]
        if v != root:
            cycle = seen[seen.index(v):]
            break
    if cycle is None:
        return {v: a[0] for v, a in best.items()}, duals

    members = set(cycle)
    C = frozenset().union(*cycle)
    new_nodes = [v for v in nodes if v not in members] + [C]
    new_arcs = []
    head_here = {}
    for aid, t, h, wt, rank in reduced:
        t2 = C if t in members else t
        h2 = C if h in members else h
        if t2 == h2:
            continue
        new_arcs.append((aid, t2, h2, wt, rank))
        head_here[aid] = h
    sub_choice, sub_duals = _edmonds(new_nodes, root, new_arcs)
    choice = {}
    for v, aid in sub_choice.items():
        if v == C:
            h = head_here[aid]
            choice[h] = aid
            for m in cycle:
                if m != h:
                    choice[m] = best[m][0]
        else:
            choice[v] = aid
    return choice, duals + sub_duals


def is_laminar(sets) -> bool:
    sets = [frozenset(Z) for Z in sets]
    for i, A in enumerate(sets):
        for B in sets[i + 1:]:
            if A & B and not (A <= B or B <= A):
                return False
    return True


def laminar_load(family, arc) -> Fraction:
    """Sum of y(Z) over members Z entered by ``arc``."""
    return sum((y for Z, y in family if arc.head in Z and arc.tail not in Z), ZERO)


def max_flow_min_cut(d: Digraph, cap: Mapping, s, t) -> FlowResult:
    """Edmonds-Karp on exact capacities; parallel arcs allowed."""
    arcs = sorted(d.arcs, key=lambda a: a.id)
    for a in arcs:
        if cap.get(a.id, ZERO) < 0:
            raise ValueError(f"negative capacity on {a.id}")
    flow = {a.id: ZERO for a in arcs}
    # residual moves: (arc, +1) forward along arc, (arc, -1) backwards
    adj = {v: [] for v in d.vertices}
    for a in arcs:
        adj[a.tail].append((a, 1))
        adj[a.head].append((a, -1))

    def residual(a, sgn):
        return cap.get(a.id, ZERO) - flow[a.id] if sgn > 0 else flow[a.id]

    def bfs():
        parent = {s: None}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for a, sgn in adj[x]:
                y = a.head if sgn > 0 else a.tail
                if y not in parent and residual(a, sgn) > 0:
                    parent[y] = (a, sgn, x)
                    queue.append(y)
        return parent

    value = ZERO
    if s != t:
        while True:
            parent = bfs()
            if t not in parent:
                break
            steps = []
            x = t
            while parent[x] is not None:
                a, sgn, prev = parent[x]
                steps.append((a, sgn))
                x = prev
            delta = min(residual(a, sgn) for a, sgn in steps)
            for a, sgn in steps:
                flow[a.id] += delta * sgn
            value += delta
    source_side = set(bfs())
    return FlowResult(value, flow, frozenset(set(d.vertices) - source_side))
