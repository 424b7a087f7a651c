"""Graphs, problem instances, deviation vectors and the JSON instance format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import InstanceError, NegativeCycleError
from .numeric import ZERO, format_rational, parse_rational

PATH, MATCHING, ARBORESCENCE = "path", "matching", "arborescence"
KINDS = (PATH, MATCHING, ARBORESCENCE)


@dataclass(frozen=True)
class Arc:
    """A directed arc, or a bipartite edge with ``tail`` in S and ``head`` in T."""

    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Digraph:
    vertices: tuple
    arcs: tuple

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise InstanceError("duplicate vertex id")
        ids = [a.id for a in self.arcs]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate element id")
        for a in self.arcs:
            if a.tail not in vs or a.head not in vs:
                raise InstanceError(f"element {a.id} references an undeclared vertex")

    @property
    def elements(self):
        return self.arcs

    def in_arcs(self, v):
        return [a for a in self.arcs if a.head == v]

    def out_arcs(self, v):
        return [a for a in self.arcs if a.tail == v]


@dataclass(frozen=True)
class BipartiteGraph:
    S: tuple
    T: tuple
    edges: tuple

    def __post_init__(self):
        if set(self.S) & set(self.T):
            raise InstanceError("sides S and T overlap")
        if len(set(self.S)) != len(self.S) or len(set(self.T)) != len(self.T):
            raise InstanceError("duplicate vertex id")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate element id")
        s_side, t_side = set(self.S), set(self.T)
        seen = set()
        for e in self.edges:
            if e.tail not in s_side or e.head not in t_side:
                raise InstanceError(f"edge {e.id} must join a vertex of S (tail) to a vertex of T (head)")
            if (e.tail, e.head) in seen:
                raise InstanceError(f"parallel edge {e.id}")
            seen.add((e.tail, e.head))

    @property
    def vertices(self):
        return self.S + self.T

    @property
    def elements(self):
        return self.edges

    def incident(self, v):
        return [e for e in self.edges if e.tail == v or e.head == v]


@dataclass(frozen=True)
class Instance:
    kind: str
    graph: object
    anchors: Mapping
    solution: tuple
    weights: tuple

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def elements(self):
        return self.graph.elements

    @property
    def element_ids(self):
        return tuple(e.id for e in self.graph.elements)

    @property
    def solution_set(self) -> frozenset:
        return frozenset(self.solution)

    @property
    def s(self):
        return self.anchors["s"]

    @property
    def t(self):
        return self.anchors["t"]

    @property
    def root(self):
        return self.anchors["root"]

    def element(self, eid) -> Arc:
        for e in self.graph.elements:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def weight_of(self, i: int, ids) -> Fraction:
        w = self.weights[i]
        return sum((w[e] for e in ids), ZERO)

    def with_weights(self, weights: Sequence[Mapping]) -> "Instance":
        """Same graph and solution under different weight vectors."""
        inst = replace(self, weights=tuple({e: Fraction(w[e]) for e in self.element_ids} for w in weights))
        _check_weights(inst)
        return inst

    def select_weights(self, indices: Sequence[int]) -> "Instance":
        return self.with_weights([self.weights[i] for i in indices])


@dataclass(frozen=True)
class DeviationVector:
    values: Mapping[str, Fraction]
    solution: frozenset = field(default_factory=frozenset)

    @classmethod
    def of(cls, instance: Instance, values: Mapping) -> "DeviationVector":
        ids = set(instance.element_ids)
        unknown = set(values) - ids
        if unknown:
            raise InstanceError(f"deviation references unknown elements {sorted(unknown)}")
        full = {e: Fraction(values.get(e, ZERO)) for e in instance.element_ids}
        return cls(full, instance.solution_set)

    @classmethod
    def zero(cls, instance: Instance) -> "DeviationVector":
        return cls.of(instance, {})

    @property
    def norm1(self) -> Fraction:
        return sum((abs(v) for v in self.values.values()), ZERO)

    @property
    def adequate(self) -> bool:
        return all((v >= 0) if e in self.solution else (v <= 0) for e, v in self.values.items())

    @property
    def mildly_adequate(self) -> bool:
        return all((v >= 0) if e in self.solution else (v == 0) for e, v in self.values.items())

    @property
    def integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values.values())

    def __getitem__(self, eid):
        return self.values[eid]

    def support(self):
        return {e: v for e, v in self.values.items() if v}


# --------------------------------------------------------------------------
# Bellman-Ford


def bellman_ford(vertices, arcs, w: Mapping, source=None):
    """Shortest distances from ``source`` or, if None, from a zero-arc super-source.

    Returns ``(dist, pred)`` where ``pred`` maps a vertex to the id of its tree
    arc. Unreachable vertices get distance None. Raises NegativeCycleError with
    the cycle's arc ids, rotated so the smallest id comes first.
    """
    arcs = sorted(arcs, key=lambda a: a.id)
    if source is None:
        dist = {v: ZERO for v in vertices}
    else:
        dist = {v: None for v in vertices}
        dist[source] = ZERO
    pred = {}
    by_id = {a.id: a for a in arcs}
    n = len(vertices)
    rounds = 0
    while True:
        changed = False
        for a in arcs:
            du = dist[a.tail]
            if du is None:
                continue
            nd = du + w[a.id]
            dv = dist[a.head]
            if dv is None or nd < dv:
                dist[a.head] = nd
                pred[a.head] = a.id
                changed = True
        rounds += 1
        if not changed:
            return dist, pred
        if rounds >= n:
            # any cycle of the predecessor graph has negative weight
            cycle = _pred_cycle(pred, by_id)
            if cycle is not None:
                i = cycle.index(min(cycle))
                cycle = cycle[i:] + cycle[:i]
                raise NegativeCycleError(cycle, sum((w[a] for a in cycle), ZERO))


def _pred_cycle(pred, by_id):
    state = {}
    for start in sorted(pred):
        path = []
        v = start
        while v in pred and v not in state:
            state[v] = start
            path.append(v)
            v = by_id[pred[v]].tail
        if v in pred and state.get(v) == start:
            cycle = []
            u = v
            while True:
                aid = pred[u]
                cycle.append(aid)
                u = by_id[aid].tail
                if u == v:
                    break
            cycle.reverse()
            return cycle
    return None


@dataclass(frozen=True)
class ConservativeVerdict:
    conservative: bool
    cycle: tuple = ()
    weight: Optional[Fraction] = None


def validate_conservative(instance: Instance, i: int) -> ConservativeVerdict:
    if instance.kind != PATH:
        raise ValueError("conservativeness applies to path instances")
    if not 0 <= i < instance.k:
        raise IndexError(f"weight index {i} out of range")
    return conservative_verdict(instance.graph, instance.weights[i])


def conservative_verdict(graph: Digraph, w: Mapping) -> ConservativeVerdict:
    try:
        bellman_ford(graph.vertices, graph.arcs, w)
    except NegativeCycleError as exc:
        return ConservativeVerdict(False, exc.cycle, exc.weight)
    return ConservativeVerdict(True)


def apply_deviation(instance: Instance, p: DeviationVector) -> list:
    """The revised weight vectors ``w_i - p``."""
    if set(p.values) != set(instance.element_ids):
        raise InstanceError("deviation vector does not index the instance's elements")
    return [{e: w[e] - p.values[e] for e in instance.element_ids} for w in instance.weights]


# --------------------------------------------------------------------------
# JSON instance format


def parse_instance(text) -> Instance:
    """Parse and validate an instance document (bytes or str)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceError(f"instance is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc)


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object")
    for key in ("kind", "vertices", "elements", "anchors", "solution", "weights"):
        if key not in doc:
            raise InstanceError(f"missing field {key!r}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise InstanceError(f"unknown kind {kind!r}")
    try:
        vertices = tuple(str(v) for v in doc["vertices"])
        elements = tuple(Arc(str(e["id"]), str(e["tail"]), str(e["head"])) for e in doc["elements"])
        anchors = dict(doc["anchors"])
        solution = tuple(str(e) for e in doc["solution"])
    except (TypeError, KeyError) as exc:
        raise InstanceError(f"malformed instance: {exc}") from exc

    if kind == MATCHING:
        sides = anchors.get("sides")
        if not isinstance(sides, dict) or "S" not in sides or "T" not in sides:
            raise InstanceError("matching instance needs anchors.sides.S and anchors.sides.T")
        S = tuple(str(v) for v in sides["S"])
        T = tuple(str(v) for v in sides["T"])
        if set(S) | set(T) != set(vertices) or len(S) + len(T) != len(vertices):
            raise InstanceError("sides S and T must partition the vertices")
        graph = BipartiteGraph(S, T, elements)
        anchors = {"sides": {"S": list(S), "T": list(T)}}
    elif kind == PATH:
        graph = Digraph(vertices, elements)
        if "s" not in anchors or "t" not in anchors:
            raise InstanceError("path instance needs anchors s and t")
        anchors = {"s": str(anchors["s"]), "t": str(anchors["t"])}
        for v in anchors.values():
            if v not in vertices:
                raise InstanceError(f"anchor {v!r} is not a vertex")
    else:
        graph = Digraph(vertices, elements)
        if "root" not in anchors:
            raise InstanceError("arborescence instance needs anchors.root")
        anchors = {"root": str(anchors["root"])}
        if anchors["root"] not in vertices:
            raise InstanceError("root is not a vertex")

    ids = {e.id for e in elements}
    for e in solution:
        if e not in ids:
            raise InstanceError(f"solution references unknown element {e!r}")
    if len(set(solution)) != len(solution):
        raise InstanceError("solution repeats an element")

    raw_weights = doc["weights"]
    if not isinstance(raw_weights, list) or not raw_weights:
        raise InstanceError("weights must be a non-empty list of weight vectors")
    weights = []
    for i, vec in enumerate(raw_weights):
        wi = {}
        try:
            for entry in vec:
                eid = str(entry["id"])
                if eid in wi:
                    raise InstanceError(f"weight vector {i} lists {eid!r} twice")
                wi[eid] = parse_rational(entry["w"])
        except (TypeError, KeyError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"weight vector {i}: {exc}") from exc
        weights.append(wi)

    inst = Instance(kind, graph, anchors, solution, tuple(weights))
    _check_weights(inst)
    _check_solution(inst)
    return inst


def _check_weights(inst: Instance):
    ids = set(inst.element_ids)
    if inst.k < 1:
        raise InstanceError("at least one weight vector is required")
    for i, w in enumerate(inst.weights):
        if set(w) != ids:
            raise InstanceError(f"weight vector {i} does not index exactly the element set")


def _check_solution(inst: Instance):
    F = [inst.element(e) for e in inst.solution]
    if inst.kind == PATH:
        if not is_st_path(F, inst.s, inst.t):
            raise InstanceError("solution is not a simple s-t path")
    elif inst.kind == MATCHING:
        g = inst.graph
        if len(g.S) != len(g.T):
            raise InstanceError("|S| != |T|: no perfect matching exists")
        if not is_perfect_matching(F, g.vertices):
            raise InstanceError("solution is not a perfect matching")
    else:
        r = inst.root
        if any(a.head == r for a in inst.elements):
            raise InstanceError("root has incoming arcs; its in-degree must be 0")
        if not is_spanning_arborescence(F, inst.vertices, r):
            raise InstanceError("solution is not a spanning r-arborescence")


def order_path(arcs, s, t):
    """Arcs of a simple s-t path in traversal order, or None."""
    out = {}
    for a in arcs:
        if a.tail in out:
            return None
        out[a.tail] = a
    seq = []
    seen = {s}
    v = s
    while v != t:
        a = out.get(v)
        if a is None or a.head in seen:
            return None
        seq.append(a)
        seen.add(a.head)
        v = a.head
    if len(seq) != len(arcs):
        return None
    return seq


def is_st_path(arcs, s, t) -> bool:
    if s == t:
        return False
    return order_path(list(arcs), s, t) is not None


def is_perfect_matching(edges, vertices) -> bool:
    covered = []
    for e in edges:
        covered += [e.tail, e.head]
    return len(covered) == len(set(covered)) and set(covered) == set(vertices)


def is_spanning_arborescence(arcs, vertices, root) -> bool:
    parent = {}
    for a in arcs:
        if a.head == root or a.head in parent:
            return False
        parent[a.head] = a.tail
    if set(parent) != set(vertices) - {root}:
        return False
    for v in parent:
        seen = set()
        u = v
        while u != root:
            if u in seen or u not in parent:
                return False
            seen.add(u)
            u = parent[u]
    return True


def instance_to_dict(inst: Instance) -> dict:
    return {
        "kind": inst.kind,
        "vertices": list(inst.vertices),
        "elements": [{"id": e.id, "tail": e.tail, "head": e.head} for e in inst.elements],
        "anchors": json.loads(json.dumps(inst.anchors)),
        "solution": list(inst.solution),
        "weights": [[{"id": e, "w": format_rational(w[e])} for e in inst.element_ids] for w in inst.weights],
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"
