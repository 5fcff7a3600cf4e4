"""Minimum-cost code trees for equiprobable messages (Varn codes).

A tree with ``k`` leaves over an output alphabet with letter costs ``C`` is
built so that the sum of leaf costs is minimal.  Leaf cost is the sum of the
letter costs along its path.

Two constructions are provided:

* ``"greedy"``: Varn's rule, repeatedly splitting the cheapest leaf into all
  ``v`` children.  It is optimal for binary alphabets, and it is the
  exhaustive tree the modified (power-of-two) code is trimmed from.
* ``"dp"``: an exact dynamic program over subtree leaf counts.  For ``v >= 3``
  the best tree need not be full (a node may use only its cheapest letters),
  so the greedy rule can lose; the DP cannot.

Paths are tuples of user symbol indices.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import CorruptStream, DimensionError
from .model import CodeBook, CostVector, Path, as_costs, check_prefix_free
from .optimizer import solve_mu_capacity

_KEY_DIGITS = 9


def _cost_key(cost: float) -> float:
    return round(cost, _KEY_DIGITS)


def _leaf_order(leaf):
    path, cost = leaf
    return (_cost_key(cost), len(path), path)


@dataclass(frozen=True, eq=False)
class CodeTree:
    """A prefix tree whose leaves are the codewords.

    ``leaves`` is sorted by ascending cost, ties broken shortlex (shorter
    path first, then lexicographic), and leaf ``i`` encodes message ``i``.
    """

    v: int
    cost_vector: CostVector
    leaves: Tuple[Tuple[Path, float], ...]
    full_size: Optional[int] = None
    trimmed: int = 0

    def __post_init__(self):
        leaves = tuple(sorted(((tuple(p), float(w)) for p, w in self.leaves),
                              key=_leaf_order))
        object.__setattr__(self, "leaves", leaves)
        children, leaf_at = _build_trie(self.v, [p for p, _ in leaves])
        object.__setattr__(self, "_children", children)
        object.__setattr__(self, "_leaf_at", leaf_at)

    @classmethod
    def from_paths(cls, paths: Sequence[Path], costs, **kw) -> "CodeTree":
        c = as_costs(costs)
        paths = [tuple(int(s) for s in p) for p in paths]
        if any(not 0 <= s < c.v for p in paths for s in p):
            raise ValueError(f"a path uses a symbol outside 0..{c.v - 1}")
        leaves = [(p, float(sum(c.costs[s] for s in p))) for p in paths]
        return cls(c.v, c, tuple(leaves), **kw)

    @property
    def k(self) -> int:
        return len(self.leaves)

    @property
    def paths(self) -> List[Path]:
        return [p for p, _ in self.leaves]

    @property
    def leaf_costs(self) -> np.ndarray:
        return np.array([w for _, w in self.leaves])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(p) for p, _ in self.leaves])

    @property
    def total_cost(self) -> float:
        return float(self.leaf_costs.sum())

    @property
    def avg_codeword_cost(self) -> float:
        return float(self.leaf_costs.mean())

    @property
    def mean_length(self) -> float:
        return float(self.lengths.mean())

    def length_histogram(self) -> dict:
        """Map codeword length to the number of leaves of that length."""
        lengths, counts = np.unique(self.lengths, return_counts=True)
        return {int(n): int(m) for n, m in zip(lengths, counts)}

    def canonical_json(self) -> str:
        body = {"v": self.v, "costs": self.cost_vector.tolist(),
                "leaves": sorted([list(p) for p in self.paths])}
        return json.dumps(body, sort_keys=True, separators=(",", ":"))

    def tree_hash(self) -> int:
        return fnv1a_64(self.canonical_json().encode("utf-8"))

    def to_dict(self) -> dict:
        d = json.loads(self.canonical_json())
        d["leaves"] = [list(p) for p in self.paths]
        d["leaf_costs"] = self.leaf_costs.tolist()
        if self.full_size is not None:
            d["full_size"] = self.full_size
            d["trimmed"] = self.trimmed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CodeTree":
        return cls.from_paths([tuple(p) for p in d["leaves"]], d["costs"],
                              full_size=d.get("full_size"), trimmed=d.get("trimmed", 0))

    def encode(self, messages) -> np.ndarray:
        """Concatenate the codewords of a message sequence."""
        msgs = np.asarray(messages, dtype=np.int64)
        if msgs.size == 0:
            return np.zeros(0, dtype=np.int64)
        if msgs.min() < 0 or msgs.max() >= self.k:
            raise ValueError("message index out of range")
        words = [np.array(p, dtype=np.int64) for p in self.paths]
        return np.concatenate([words[m] for m in msgs.tolist()])


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _build_trie(v: int, paths: Sequence[Path]):
    children = [[-1] * v]
    leaf_at = [-1]
    for i, p in enumerate(paths):
        node = 0
        for s in p:
            if not 0 <= s < v:
                raise ValueError(f"path {p} has symbol outside 0..{v - 1}")
            nxt = children[node][s]
            if nxt < 0:
                nxt = len(children)
                children[node][s] = nxt
                children.append([-1] * v)
                leaf_at.append(-1)
            elif leaf_at[nxt] >= 0:
                raise ValueError("leaf paths are not prefix-free")
            node = nxt
        if node == 0 or leaf_at[node] >= 0 or any(ch >= 0 for ch in children[node]):
            raise ValueError("leaf paths are not prefix-free")
        leaf_at[node] = i
    return children, leaf_at


# -- constructions -----------------------------------------------------------

def _greedy_leaves(k: int, c: CostVector) -> List[Tuple[Path, float]]:
    """Split the cheapest leaf until ``k`` leaves exist; the last split may be partial."""
    v = c.v
    letters = [int(x) for x in c.order]
    costs = c.sorted_costs.tolist()
    heap = [(0.0, 0, (), 0.0)]
    n = 1
    while n < k:
        _, _, path, w = heapq.heappop(heap)
        r = min(v, k - n + 1)
        for j in range(r):
            cw = w + costs[j]
            heapq.heappush(heap, (_cost_key(cw), len(path) + 1, path + (letters[j],), cw))
        n += r - 1
    return [(p, w) for _, _, p, w in heap]


def _dp_leaves(k: int, c: CostVector) -> List[Tuple[Path, float]]:
    """Exact minimum-cost tree via a DP over subtree leaf counts.

    ``G[m]`` is the cheapest tree with m leaves hanging from a cost-0 root.
    A subtree with m leaves below a letter of cost C adds ``m * C + G[m]``.
    WLOG a node with d children uses the d cheapest letters.  ``H[j][m]`` is
    the cheapest way to spread m leaves over the children using letters
    ``0..j`` (sorted order), each child getting at least one leaf.
    """
    v = c.v
    costs = c.sorted_costs
    inf = math.inf
    G = np.full(k + 1, inf)
    G[1] = 0.0
    H = np.full((v, k + 1), inf)
    split = np.zeros((v, k + 1), dtype=np.int64)
    arity = np.zeros(k + 1, dtype=np.int64)
    H[0, 1] = costs[0]
    for m in range(2, k + 1):
        kj = np.arange(1, m)
        for j in range(1, v):
            cand = H[j - 1, m - kj] + kj * costs[j] + G[kj]
            best = int(np.argmin(cand))
            H[j, m] = cand[best]
            split[j, m] = kj[best]
        d = 1 + int(np.argmin(H[1:, m]))
        arity[m] = d
        G[m] = H[d, m]
        H[0, m] = m * costs[0] + G[m]

    letters = [int(x) for x in c.order]
    out: List[Tuple[Path, float]] = []
    stack = [(k, (), 0.0)]
    while stack:
        m, path, w = stack.pop()
        if m == 1:
            out.append((path, w))
            continue
        rem = m
        for j in range(int(arity[m]), 0, -1):
            kj = int(split[j, rem])
            stack.append((kj, path + (letters[j],), w + costs[j]))
            rem -= kj
        stack.append((rem, path + (letters[0],), w + costs[0]))
    return out


def varn_build(k: int, c, method: str = "auto") -> CodeTree:
    """Minimum total-cost prefix tree with ``k`` equiprobable leaves.

    ``method="auto"`` uses the greedy split for binary alphabets (where it
    is exact and fast) and the DP otherwise.
    """
    c = as_costs(c)
    if int(k) != k or k < 2:
        raise ValueError(f"codebook size must be an integer >= 2, got {k!r}")
    k = int(k)
    if method == "auto":
        method = "greedy" if c.v == 2 else "dp"
    if method == "greedy":
        leaves = _greedy_leaves(k, c)
    elif method == "dp":
        leaves = _dp_leaves(k, c)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CodeTree(c.v, c, tuple(leaves))


def modified_varn_params(k_bits: int, v: int) -> Tuple[int, int, int]:
    """``(nu, delta, M)`` for the power-of-two codebook of ``2**k_bits`` words."""
    nu = (2 ** k_bits - 1) % (v - 1)
    delta = v - 1 - nu if nu > 0 else 0
    return nu, delta, 2 ** k_bits + delta


def modified_varn_build(k_bits: int, c) -> CodeTree:
    """Power-of-two codebook with a per-codeword cost guarantee.

    An exhaustive greedy tree with ``M >= 2**k_bits`` leaves is built and its
    ``M - 2**k_bits`` most expensive leaves are dropped.  Every remaining
    leaf costs at most ``log2(M) / mu + max(C)``.
    """
    c = as_costs(c)
    if int(k_bits) != k_bits or k_bits < 1:
        raise ValueError(f"k_bits must be a positive integer, got {k_bits!r}")
    solve_mu_capacity(c)  # raises ZeroMinCost for a free symbol
    _, delta, M = modified_varn_params(int(k_bits), c.v)
    leaves = _greedy_leaves(M, c)
    leaves.sort(key=_leaf_order)
    kept = leaves[:len(leaves) - delta] if delta else leaves
    return CodeTree(c.v, c, tuple(kept), full_size=M, trimmed=delta)


def tree_to_codebook(t: CodeTree, u: int, q: int) -> CodeBook:
    """Lexicographic source block ``i`` gets the i-th cheapest leaf."""
    if t.k != u ** q:
        raise DimensionError(f"tree has {t.k} leaves but there are {u}**{q} = {u ** q} blocks")
    return CodeBook(u, q, t.v, tuple(t.paths))


def decode_stream(t: CodeTree, symbols) -> Tuple[List[int], Path]:
    """Parse a symbol stream into leaf indices.

    Returns ``(indices, residual)``, the residual being a trailing partial
    path.  A symbol that leaves the tree raises CorruptStream.
    """
    seq = symbols.tolist() if isinstance(symbols, np.ndarray) else list(symbols)
    out, start = _parse(t, seq)
    return out, tuple(int(s) for s in seq[start:])


def _parse(t: CodeTree, symbols, max_words: Optional[int] = None) -> Tuple[List[int], int]:
    """Leaf indices of up to ``max_words`` codewords and the position after the last one."""
    children, leaf_at = t._children, t._leaf_at
    v = t.v
    out: List[int] = []
    node = 0
    start = 0
    if max_words == 0:
        return out, 0
    seq = symbols.tolist() if isinstance(symbols, np.ndarray) else symbols
    for pos, s in enumerate(seq):
        if not 0 <= s < v:
            raise CorruptStream(f"symbol {s!r} at position {pos} is outside 0..{v - 1}")
        node = children[node][s]
        if node < 0:
            raise CorruptStream(f"position {pos}: path enters a branch with no codeword")
        leaf = leaf_at[node]
        if leaf >= 0:
            out.append(leaf)
            node = 0
            start = pos + 1
            if max_words is not None and len(out) == max_words:
                break
    return out, start


def savari_bounds(k: int, c) -> Tuple[float, float]:
    """Lower and upper bound on the average codeword cost of a k-word Varn code."""
    c = as_costs(c)
    mu = solve_mu_capacity(c)
    lo = math.log2(k) / mu
    return lo, lo + c.max_cost


def is_prefix_free(t: CodeTree) -> bool:
    return check_prefix_free(t.paths)
