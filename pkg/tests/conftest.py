"""Independent reference implementations used as test oracles."""

import itertools
import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@lru_cache(maxsize=None)
def tree_letter_counts(m: int, v: int) -> frozenset:
    """Every achievable letter-usage vector of a prefix tree with m leaves.

    Entry j of a vector is the number of times letter j appears over all
    leaf paths, so a tree's total leaf cost is ``counts @ C``.  Internal
    nodes may use any subset of at least two letters, so this covers
    non-full trees too.
    """
    if m == 1:
        return frozenset({(0,) * v})
    out = set()
    for size in range(2, min(v, m) + 1):
        for letters in itertools.combinations(range(v), size):
            for parts in _compositions(m, size):
                pools = [tree_letter_counts(k, v) for k in parts]
                for combo in itertools.product(*pools):
                    vec = [0] * v
                    for letter, k, sub in zip(letters, parts, combo):
                        vec[letter] += k
                        for j in range(v):
                            vec[j] += sub[j]
                    out.add(tuple(vec))
    return frozenset(out)


def _compositions(n: int, k: int):
    """Ordered ways to write n as k positive parts."""
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(k))


def brute_min_tree_cost(k: int, costs) -> float:
    c = np.asarray(costs, dtype=float)
    vecs = np.array(sorted(tree_letter_counts(k, c.size)), dtype=float)
    return float((vecs @ c).min())


def brute_root(g, target, lo, hi, iters=300):
    """Plain bisection for an increasing-or-decreasing g on [lo, hi]."""
    glo = g(lo) - target
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid) - target
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shannon(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@pytest.fixture
def english_costs():
    return [0, 0.58, 0.87, 1.29]


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def random_costs(rng, v, lo=0.1, hi=3.0):
    return rng.uniform(lo, hi, size=v).round(6).tolist()


def log2(x):
    return math.log2(x)
