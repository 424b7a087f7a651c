"""Seeded random instances with a planted feasible solution."""
from __future__ import annotations

import random
import string

from .graphs import ARBORESCENCE, MATCHING, PATH, Instance, instance_from_dict


def _weights(rng, ids, k, wmin, wmax):
    return [[{"id": e, "w": str(rng.randint(wmin, wmax))} for e in ids] for _ in range(k)]


def _extra_arcs(rng, vertices, existing, extra, allowed):
    """Up to ``extra`` new arcs (no loops, no parallels) drawn from the pairs ``allowed`` permits."""
    pairs = [(u, v) for u in vertices for v in vertices if u != v and (u, v) not in existing and allowed(u, v)]
    rng.shuffle(pairs)
    return pairs[:extra]


def _path_doc(rng, n, k, wmin, wmax, extra):
    if wmin < 0:
        raise ValueError("path instances need nonnegative weights (wmin >= 0) to stay conservative")
    if n < 2:
        raise ValueError("a path instance needs at least 2 vertices")
    middle = list(string.ascii_lowercase[: n - 2])
    vertices = ["s"] + middle + ["t"]
    inner = rng.sample(middle, rng.randint(0, len(middle)))
    route = ["s"] + inner + ["t"]
    pairs = list(zip(route, route[1:]))
    pairs += _extra_arcs(rng, vertices, set(pairs), extra, lambda u, v: True)
    ids = [u + v for u, v in pairs]
    return {
        "kind": PATH,
        "vertices": vertices,
        "elements": [{"id": u + v, "tail": u, "head": v} for u, v in pairs],
        "anchors": {"s": "s", "t": "t"},
        "solution": ids[: len(route) - 1],
        "weights": _weights(rng, ids, k, wmin, wmax),
    }


def _matching_doc(rng, n, k, wmin, wmax, extra):
    if n % 2 or n < 2:
        raise ValueError("a matching instance needs an even, positive vertex count (equal sides)")
    m = n // 2
    S = [f"a{j}" for j in range(1, m + 1)]
    T = [f"b{j}" for j in range(1, m + 1)]
    perm = rng.sample(T, m)
    pairs = list(zip(S, perm))
    pairs += _extra_arcs(rng, S + T, set(pairs), extra, lambda u, v: u in S and v in T)
    ids = [u + v for u, v in pairs]
    return {
        "kind": MATCHING,
        "vertices": S + T,
        "elements": [{"id": u + v, "tail": u, "head": v} for u, v in pairs],
        "anchors": {"sides": {"S": S, "T": T}},
        "solution": ids[:m],
        "weights": _weights(rng, ids, k, wmin, wmax),
    }


def _arborescence_doc(rng, n, k, wmin, wmax, extra):
    if n < 1:
        raise ValueError("an arborescence instance needs at least 1 vertex")
    others = list(string.ascii_lowercase[: n - 1])
    if "r" in others:
        others[others.index("r")] = "z"
    vertices = ["r"] + others
    order = rng.sample(others, len(others))
    pairs = []
    placed = ["r"]
    for v in order:
        pairs.append((rng.choice(placed), v))
        placed.append(v)
    pairs += _extra_arcs(rng, vertices, set(pairs), extra, lambda u, v: v != "r")
    ids = [u + v for u, v in pairs]
    return {
        "kind": ARBORESCENCE,
        "vertices": vertices,
        "elements": [{"id": u + v, "tail": u, "head": v} for u, v in pairs],
        "anchors": {"root": "r"},
        "solution": ids[: len(others)],
        "weights": _weights(rng, ids, k, wmin, wmax),
    }


_MAKERS = {PATH: _path_doc, MATCHING: _matching_doc, ARBORESCENCE: _arborescence_doc}


def random_instance(rng: random.Random, kind: str, vertices: int, k: int = 1, wmin: int = 0, wmax: int = 5, extra: int = 4) -> Instance:
    """One instance; raises ValueError on parameters no valid instance satisfies."""
    if kind not in _MAKERS:
        raise ValueError(f"unknown kind {kind!r}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if wmin > wmax:
        raise ValueError("wmin exceeds wmax")
    if extra < 0:
        raise ValueError("extra must be nonnegative")
    if vertices > 26:
        raise ValueError("at most 26 vertices are supported")
    return instance_from_dict(_MAKERS[kind](rng, vertices, k, wmin, wmax, extra))


def generate(kind: str, vertices: int, k: int = 1, wmin: int = 0, wmax: int = 5, extra: int = 4, count: int = 1, seed: int = 0) -> list:
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = random.Random(seed)
    return [random_instance(rng, kind, vertices, k, wmin, wmax, extra) for _ in range(count)]
