"""Shared fixtures loader and the seeded random corpus."""
import random
from pathlib import Path

from invopt.generate import random_instance
from invopt.graphs import MATCHING, PATH, parse_instance

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "golden"

CORPUS_SEEDS = {"path": 11, "matching": 12, "arborescence": 13}


def fixture(name):
    return parse_instance((FIXTURES / f"{name}.json").read_text())


def corpus(kind, count=500, seed=None, k_max=3):
    """Random instances with at most 8 vertices and k in 1..k_max.

    Path weights are nonnegative, so every path instance is conservative.
    """
    rng = random.Random(CORPUS_SEEDS[kind] if seed is None else seed)
    out = []
    for _ in range(count):
        if kind == MATCHING:
            n = 2 * rng.randint(1, 4)
        elif kind == PATH:
            n = rng.randint(2, 8)
        else:
            n = rng.randint(2, 8)
        k = rng.randint(1, k_max)
        wmin = 0 if kind == PATH else -3
        out.append(random_instance(rng, kind, n, k, wmin, 4, rng.randint(0, 6)))
    return out
