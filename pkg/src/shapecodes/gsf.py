"""Generalized Shannon-Fano codes for costly channels.

Blocks are laid out on ``[0, 1)`` by probability.  The output tree also
tiles ``[0, 1)``: a node whose path costs ``W`` owns an interval of width
``2**(-mu W)``, split among its children in proportion to
``2**(-mu C_i)`` (these sum to one at the capacity root ``mu``).  Each
block gets the cheapest node lying wholly inside its own interval.  Nodes
inside disjoint intervals are never ancestors of each other, so the code
is prefix-free.

One such node is the shallowest node that contains the interval midpoint
and is at most ``P(x) / 2`` wide.  Its parent is wider than ``P(x) / 2``,
so ``W(x) < -log2 P(x) / mu + 1 / mu + max(C) <= -log2 P(x) / mu + 2 max(C)``
and the cheapest inside node can only do better.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SupportError
from .model import CodeBook, SourceSpec, as_costs, check_prefix_free
from .optimizer import solve_mu_capacity

MAX_BLOCKS = 2 ** 20


@dataclass(frozen=True)
class GsfCode:
    codebook: CodeBook
    mu: float
    q: int
    costs: np.ndarray

    @property
    def codeword_costs(self) -> np.ndarray:
        """Cost of each block's codeword, blocks in lexicographic order."""
        return self.costs


def gsf_build(src: SourceSpec, c) -> GsfCode:
    """Build the code for ``src`` over the costly alphabet ``c``."""
    c = as_costs(c)
    mu = solve_mu_capacity(c)
    if src.n_blocks > MAX_BLOCKS:
        raise ValueError(f"{src.n_blocks} blocks is more than the {MAX_BLOCKS} supported")
    probs = src.block_probs()
    if np.any(probs <= 0):
        raise SupportError("every source block needs positive probability")

    order = np.argsort(-probs, kind="stable")
    starts = np.empty_like(probs)
    starts[order] = np.concatenate([[0.0], np.cumsum(probs[order])[:-1]])

    shares = np.exp2(-mu * c.sorted_costs)
    bounds = np.concatenate([[0.0], np.cumsum(shares)])
    bounds[-1] = 1.0
    letters = c.order.tolist()
    sorted_costs = c.sorted_costs.tolist()

    ctx = (shares, bounds, letters, sorted_costs)
    entries = []
    word_costs = np.empty(probs.size)
    for i, p in enumerate(probs):
        word, cost = _midpoint_node(starts[i], p, ctx)
        better = _cheapest_inside(starts[i], starts[i] + p, cost, ctx)
        if better is not None:
            word, cost = better
        entries.append(tuple(word))
        word_costs[i] = cost

    if not check_prefix_free(entries):
        raise ArithmeticError("interval subdivision lost precision; codewords collide")
    cb = CodeBook(src.u, src.q, c.v, tuple(entries))
    return GsfCode(codebook=cb, mu=mu, q=src.q, costs=word_costs)


def _child(lo, width, j, ctx):
    shares, bounds, _, _ = ctx
    last = j == len(shares) - 1
    return lo + width * bounds[j], width * (1.0 - bounds[j] if last else shares[j])


def _midpoint_node(start, p, ctx):
    """Shallowest node containing the interval midpoint and at most ``p / 2`` wide."""
    shares, bounds, letters, sorted_costs = ctx
    mid = start + 0.5 * p
    lo, width, cost = 0.0, 1.0, 0.0
    word = []
    while width > 0.5 * p:
        j = int(np.searchsorted(bounds, (mid - lo) / width, side="right")) - 1
        j = min(max(j, 0), len(shares) - 1)
        lo, width = _child(lo, width, j, ctx)
        cost += sorted_costs[j]
        word.append(letters[j])
    return word, cost


def _cheapest_inside(a, b, limit, ctx):
    """Cheapest node inside ``[a, b)`` costing less than ``limit``, or None.

    Only nodes straddling an end of the interval need to be opened, so the
    search visits a narrow band of the tree.  Ties go to the shorter word.
    """
    _, _, letters, sorted_costs = ctx
    best = None
    stack = [(0.0, 1.0, 0.0, ())]
    while stack:
        lo, width, cost, word = stack.pop()
        if cost >= limit - 1e-12:
            continue
        if lo >= a and lo + width <= b:
            if best is None or (cost, len(word)) < (best[1], len(best[0])):
                best = (list(word), cost)
                limit = cost
            continue
        if lo + width <= a or lo >= b:
            continue
        for j in range(len(letters) - 1, -1, -1):
            clo, cw = _child(lo, width, j, ctx)
            stack.append((clo, cw, cost + sorted_costs[j], word + (letters[j],)))
    return best


def gsf_total_cost(code: GsfCode, src: SourceSpec, c=None) -> float:
    """Expected codeword cost per source symbol."""
    if c is None:
        w = code.costs
    else:
        costs = as_costs(c).costs
        w = np.array([costs[list(e)].sum() for e in code.codebook.entries])
    return float(src.block_probs() @ w) / src.q
