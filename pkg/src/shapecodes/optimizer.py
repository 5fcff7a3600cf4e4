"""Cost/entropy optimization for shaping and distribution-matching codes.

The minimizing output distribution always has the exponential form
``p_i = 2**(-mu * C_i) / N`` with ``N = sum_i 2**(-mu * C_i)``; every solver
here reduces to a one-dimensional search for ``mu`` on a monotone map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .errors import InfeasibleRate, SupportError, ZeroMinCost
from .model import CostVector, Pmf, as_costs, as_pmf, entropy

MAX_ITER = 200
LN2 = math.log(2.0)


@dataclass(frozen=True)
class ShapingSolution:
    mu: float
    N: float
    p_hat: Pmf
    f: float
    avg_cost: float
    total_cost: float
    entropy_h: float

    def to_dict(self) -> dict:
        return {
            "mu": self.mu, "N": self.N, "p_hat": self.p_hat.tolist(), "f": self.f,
            "avg_cost": self.avg_cost, "total_cost": self.total_cost,
            "entropy_h": self.entropy_h,
        }


@dataclass(frozen=True)
class CurvePoint:
    f: float
    mu: float
    N: float
    avg_cost: float
    total_cost: float
    entropy_h: float


# -- exponential family helpers ---------------------------------------------

def tilted(costs, mu: float) -> Tuple[np.ndarray, float]:
    """Return ``(p_hat, N)`` for the distribution ``2**(-mu C) / N``.

    The weights are computed relative to the cheapest symbol so large ``mu``
    does not underflow the normalizer to zero.
    """
    c = as_costs(costs).costs
    shift = c.min()
    w = np.exp2(-mu * (c - shift))
    s = w.sum()
    p = w / s
    N = s * 2.0 ** (-mu * shift) if mu * shift < 1000 else 0.0
    return p, float(N)


def _entropy_arr(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _entropy_of_mu(c: np.ndarray, mu: float) -> float:
    p, _ = tilted(c, mu)
    return _entropy_arr(p)


def _bisect_decreasing(g: Callable[[float], float], target: float, lo: float = 0.0,
                       hi: float = 1.0, tol: float = 0.0) -> float:
    """Solve ``g(mu) = target`` for a decreasing ``g`` on ``[lo, inf)``.

    The upper end of the bracket doubles until it straddles the target.
    """
    expansions = 0
    while g(hi) > target:
        lo, hi = hi, 2.0 * hi
        expansions += 1
        if expansions > 1100:
            raise InfeasibleRate("bracket expansion did not straddle the target")
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == target:
            return mid
        if gm > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    # pick whichever end has the smaller residual
    return lo if abs(g(lo) - target) <= abs(g(hi) - target) else hi


def _solution(c: CostVector, h_source: float, mu: float) -> ShapingSolution:
    p, N = tilted(c, mu)
    h = _entropy_arr(p)
    f = h_source / h
    avg = float(p @ c.costs)
    return ShapingSolution(mu=mu, N=N, p_hat=Pmf(p), f=f, avg_cost=avg,
                           total_cost=f * avg, entropy_h=h)


# -- public solvers ----------------------------------------------------------

def solve_mu_capacity(c) -> float:
    """Unique ``mu > 0`` with ``sum_i 2**(-mu C_i) = 1``.

    Raises ZeroMinCost when the cheapest cost is 0 (no such root).
    """
    c = as_costs(c)
    if c.min_cost <= 0:
        raise ZeroMinCost("minimum cost is 0: total cost decreases in f without bound")
    costs = c.costs
    return _bisect_decreasing(lambda mu: float(np.sum(np.exp2(-mu * costs))), 1.0)


def entropy_bounds(c) -> Tuple[float, float]:
    """``(H_min, H_max)``: the open lower and closed upper entropy limits of the tilted family."""
    c = as_costs(c)
    return math.log2(c.min_multiplicity), math.log2(c.v)


def min_avg_cost(c, h_source: float, f: float) -> ShapingSolution:
    """Minimum average cost per output symbol at expansion factor ``f``.

    Parameters
    ----------
    c : CostVector or sequence of float
    h_source : float
        Source entropy per source symbol, in bits.
    f : float
        Expansion factor (output symbols per source symbol).

    Returns
    -------
    ShapingSolution
        ``p_hat`` is the cost-minimizing output distribution with entropy
        ``h_source / f``.

    Raises
    ------
    InfeasibleRate
        If ``h_source / f`` is not in ``(log2 m, log2 v]``, m being the
        number of cheapest symbols.
    """
    c = as_costs(c)
    if h_source <= 0 or f <= 0:
        raise InfeasibleRate("source entropy and expansion factor must be positive")
    h = h_source / f
    h_min, h_max = entropy_bounds(c)
    if h > h_max + 1e-12:
        raise InfeasibleRate(
            f"f={f!r} is below h_source/log2(v)={h_source / h_max!r}: the output "
            "would need more than log2(v) bits per symbol")
    if h >= h_max - 1e-12:
        return _solution(c, h_source, 0.0)
    if c.all_equal or h <= h_min:
        raise InfeasibleRate(
            f"target entropy {h!r} is not above the lower limit log2(m)={h_min!r}")
    costs = c.costs
    mu = _bisect_decreasing(lambda m: _entropy_of_mu(costs, m), h)
    return _solution(c, h_source, mu)


def optimal_expansion(c, h_source: float) -> Tuple[float, float, ShapingSolution]:
    """Expansion factor and total cost of the optimal type-II shaping code.

    Returns ``(f_opt, t_min, sol)`` where ``t_min = h_source / mu``.
    """
    c = as_costs(c)
    mu = solve_mu_capacity(c)
    sol = _solution(c, h_source, mu)
    return sol.f, h_source / mu, sol


def equivalent_cost_vector(p_hat) -> CostVector:
    """Self-information costs ``-log2 p_hat``; their capacity root is ``mu = 1``."""
    p = as_pmf(p_hat).probs
    if np.any(p <= 0):
        raise SupportError("every symbol needs positive probability")
    return CostVector(np.maximum(-np.log2(p), 0.0))


def total_cost_curve(c, h_source: float, f_grid: Sequence[float]) -> List[CurvePoint]:
    out = []
    for f in f_grid:
        s = min_avg_cost(c, h_source, float(f))
        out.append(CurvePoint(f=float(f), mu=s.mu, N=s.N, avg_cost=s.avg_cost,
                              total_cost=s.total_cost, entropy_h=s.entropy_h))
    return out


def total_cost_at(c, h_source: float, f: float) -> float:
    """Minimum total cost at a fixed expansion factor.

    Works whether or not the cheapest cost is zero; with a free symbol it
    keeps falling as ``f`` grows.
    """
    return min_avg_cost(c, h_source, f).total_cost


def feasible_f_range(c, h_source: float) -> Tuple[float, float]:
    """``[f_lo, f_hi)`` accepted by :func:`min_avg_cost` (``f_hi`` may be inf)."""
    h_min, h_max = entropy_bounds(as_costs(c))
    return h_source / h_max, (math.inf if h_min == 0 else h_source / h_min)


def self_information_costs(target) -> CostVector:
    p = as_pmf(target).probs
    if np.any(p <= 0):
        raise SupportError("target distribution must be strictly positive")
    return CostVector(np.maximum(-np.log2(p), 0.0))


def dm_design(target, h_source: float) -> Tuple[CostVector, float]:
    """Cost vector and optimal expansion factor of an optimal DM code."""
    c = self_information_costs(target)
    return c, h_source / entropy(target)


def i_min_of_f(target, h_source: float, f: float) -> float:
    """Smallest normalized I-divergence reachable at expansion factor ``f``."""
    c = self_information_costs(target)
    s = min_avg_cost(c, h_source, f)
    return max(0.0, s.avg_cost - h_source / f)


def min_kl_under_cost(target, budget: float) -> Tuple[float, Pmf]:
    """Smallest ``D(p || target)`` over pmfs with average self-information cost <= budget.

    Returns ``(d, p_hat)``.
    """
    p_target = as_pmf(target)
    c = self_information_costs(p_target)
    costs = c.costs
    mean_cost = float(p_target.probs @ costs)
    if budget >= mean_cost:
        return 0.0, p_target
    if budget <= c.min_cost:
        raise InfeasibleRate(f"budget {budget!r} is not above the minimum cost {c.min_cost!r}")

    def avg(mu):
        p, _ = tilted(costs, mu)
        return float(p @ costs)

    mu = _bisect_decreasing(avg, budget, lo=1.0, hi=2.0)
    p, _ = tilted(costs, mu)
    d = float(p @ costs) - _entropy_arr(p)
    return max(d, 0.0), Pmf(p)


# -- closed-form derivatives along the mu parametrization --------------------

def _pair_spread(costs: np.ndarray, mu: float) -> float:
    """``sum_{i<j} 2**(-mu (C_i + C_j)) (C_i - C_j)**2``."""
    w = np.exp2(-mu * costs)
    d = costs[:, None] - costs[None, :]
    return 0.5 * float(np.sum(np.outer(w, w) * d * d))


def _rate_denominator(costs: np.ndarray, mu: float) -> float:
    w = np.exp2(-mu * costs)
    N = w.sum()
    return float(np.sum(mu * costs * w) + N * math.log2(N))


def expansion_of_mu(c, h_source: float, mu: float) -> float:
    """Expansion factor at which the tilted pmf with parameter mu is optimal."""
    costs = as_costs(c).costs
    N = float(np.sum(np.exp2(-mu * costs)))
    return N * h_source / _rate_denominator(costs, mu)


def total_cost_of_mu(c, h_source: float, mu: float) -> float:
    costs = as_costs(c).costs
    w = np.exp2(-mu * costs)
    return h_source * float(np.sum(costs * w)) / _rate_denominator(costs, mu)


def df_dmu(c, h_source: float, mu: float) -> float:
    costs = as_costs(c).costs
    return mu * LN2 * h_source * _pair_spread(costs, mu) / _rate_denominator(costs, mu) ** 2


def dtotal_dmu(c, h_source: float, mu: float) -> float:
    costs = as_costs(c).costs
    N = float(np.sum(np.exp2(-mu * costs)))
    return (-LN2 * h_source * math.log2(N) * _pair_spread(costs, mu)
            / _rate_denominator(costs, mu) ** 2)


def di_min_dmu(c, mu: float) -> float:
    costs = as_costs(c).costs
    N = float(np.sum(np.exp2(-mu * costs)))
    return (mu - 1.0) * LN2 * _pair_spread(costs, mu) / N ** 2


def di_min_df(h_source: float, f: float, mu: float) -> float:
    return h_source / f ** 2 * (mu - 1.0) / mu
