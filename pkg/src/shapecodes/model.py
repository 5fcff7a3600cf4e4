"""Value types and information measures shared by the rest of the package.

All logarithms are base 2 and ``0 * log 0`` is taken to be 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import DimensionError, SupportError

PMF_TOL = 1e-9
RENORMALIZE_TOL = 1e-6

Path = Tuple[int, ...]


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CostVector:
    """Per-symbol channel costs, kept in user order.

    ``order[j]`` is the user index of the j-th cheapest symbol, so
    ``sorted_costs == costs[order]``.  Ties keep user order.
    """

    costs: np.ndarray
    order: np.ndarray = field(init=False)
    sorted_costs: np.ndarray = field(init=False)

    def __init__(self, costs: Iterable[float]):
        arr = np.asarray(list(costs), dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a cost vector needs at least two symbols")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"costs must be finite and non-negative, got {arr.tolist()}")
        order = np.argsort(arr, kind="stable")
        object.__setattr__(self, "costs", _frozen(arr))
        object.__setattr__(self, "order", _frozen(order, dtype=np.int64))
        object.__setattr__(self, "sorted_costs", _frozen(arr[order]))

    @property
    def v(self) -> int:
        return int(self.costs.size)

    @property
    def min_cost(self) -> float:
        return float(self.sorted_costs[0])

    @property
    def max_cost(self) -> float:
        return float(self.sorted_costs[-1])

    @property
    def all_equal(self) -> bool:
        return bool(self.sorted_costs[-1] == self.sorted_costs[0])

    @property
    def min_multiplicity(self) -> int:
        """Number of symbols sharing the minimum cost."""
        return int(np.count_nonzero(self.costs == self.min_cost))

    def tolist(self) -> list:
        return self.costs.tolist()

    def __len__(self) -> int:
        return self.v

    def __repr__(self) -> str:
        return f"CostVector({self.costs.tolist()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, CostVector) and np.array_equal(self.costs, other.costs)

    def __hash__(self) -> int:
        return hash(tuple(self.costs.tolist()))


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over ``{0, ..., len(probs) - 1}``.

    Inputs summing to 1 within ``RENORMALIZE_TOL`` are renormalized;
    anything further off is rejected.
    """

    probs: np.ndarray

    def __init__(self, probs: Iterable[float], tolerance: float = PMF_TOL):
        arr = np.asarray(list(probs), dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a pmf needs at least one entry")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"probabilities must be finite and non-negative, got {arr.tolist()}")
        total = arr.sum()
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if abs(total - 1.0) > tolerance:
            arr = arr / total
        object.__setattr__(self, "probs", _frozen(arr))

    def __len__(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs.tolist())

    def tolist(self) -> list:
        return self.probs.tolist()

    def __repr__(self) -> str:
        return f"Pmf({self.probs.tolist()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    __hash__ = None

    @classmethod
    def uniform(cls, n: int) -> "Pmf":
        return cls(np.full(n, 1.0 / n))


def as_pmf(p) -> Pmf:
    return p if isinstance(p, Pmf) else Pmf(p)


def as_costs(c) -> CostVector:
    return c if isinstance(c, CostVector) else CostVector(c)


@dataclass(frozen=True)
class SourceSpec:
    """An i.i.d. source read in blocks of ``q`` symbols."""

    pmf: Pmf
    q: int = 1

    def __post_init__(self):
        if not isinstance(self.pmf, Pmf):
            object.__setattr__(self, "pmf", Pmf(self.pmf))
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"block length must be a positive integer, got {self.q!r}")

    @property
    def u(self) -> int:
        return len(self.pmf)

    @property
    def entropy(self) -> float:
        """Entropy per source symbol, in bits."""
        return entropy(self.pmf)

    @property
    def n_blocks(self) -> int:
        return self.u ** self.q

    def block_probs(self) -> np.ndarray:
        """Probabilities of all ``u**q`` blocks in lexicographic order."""
        probs = np.ones(1)
        for _ in range(self.q):
            probs = np.outer(probs, self.pmf.probs).ravel()
        return probs

    @classmethod
    def uniform(cls, u: int, q: int = 1) -> "SourceSpec":
        return cls(Pmf.uniform(u), q)


def block_symbols(u: int, q: int) -> np.ndarray:
    """Rows are the ``u**q`` source blocks in lexicographic order."""
    idx = np.arange(u ** q)
    digits = np.empty((u ** q, q), dtype=np.int64)
    for pos in range(q - 1, -1, -1):
        digits[:, pos] = idx % u
        idx = idx // u
    return digits


@dataclass(frozen=True)
class CodeBook:
    """Prefix-free map from the ``u**q`` source blocks to output strings.

    ``entries[i]`` is the codeword of the i-th block in lexicographic order.
    """

    u: int
    q: int
    v: int
    entries: Tuple[Path, ...]

    def __post_init__(self):
        entries = tuple(tuple(int(s) for s in e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) != self.u ** self.q:
            raise DimensionError(
                f"codebook has {len(entries)} entries, expected {self.u}**{self.q} = {self.u ** self.q}")
        for e in entries:
            if not e:
                raise ValueError("empty codeword")
            if min(e) < 0 or max(e) >= self.v:
                raise ValueError(f"codeword {e} uses symbols outside 0..{self.v - 1}")
        if not check_prefix_free(entries):
            raise ValueError("codebook entries are not prefix-free")

    @classmethod
    def from_strings(cls, words: Sequence[str], u: int, q: int, v: int = None) -> "CodeBook":
        """Build from digit strings such as ``["000", "001", "01", "1"]``."""
        entries = [tuple(int(ch) for ch in w) for w in words]
        if v is None:
            v = max(max(e) for e in entries) + 1
            v = max(v, 2)
        return cls(u, q, v, tuple(entries))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(e) for e in self.entries], dtype=float)

    def symbol_counts(self) -> np.ndarray:
        """Matrix ``N[i, j]``: occurrences of output symbol j in codeword i."""
        cached = self.__dict__.get("_counts")
        if cached is None:
            lens = np.array([len(e) for e in self.entries], dtype=np.int64)
            flat = np.fromiter((s for e in self.entries for s in e), dtype=np.int64,
                               count=int(lens.sum()))
            rows = np.repeat(np.arange(lens.size), lens)
            cached = np.bincount(rows * self.v + flat,
                                 minlength=lens.size * self.v).reshape(lens.size, self.v)
            cached = cached.astype(float)
            cached.flags.writeable = False
            object.__setattr__(self, "_counts", cached)
        return cached

    def kraft_sum(self) -> float:
        return float(np.sum(float(self.v) ** -self.lengths))

    def as_strings(self) -> list:
        sep = "" if self.v <= 10 else ","
        return [sep.join(str(s) for s in e) for e in self.entries]


def entropy(p) -> float:
    """Shannon entropy in bits."""
    probs = as_pmf(p).probs
    nz = probs[probs > 0]
    return float(-np.sum(nz * np.log2(nz)))


def kl_divergence(p, q) -> float:
    """D(p || q) in bits.

    Raises SupportError when p puts mass where q has none.
    """
    pp, qq = as_pmf(p).probs, as_pmf(q).probs
    if pp.size != qq.size:
        raise DimensionError(f"pmfs have different lengths ({pp.size} vs {qq.size})")
    mask = pp > 0
    if np.any(qq[mask] == 0):
        raise SupportError("p has mass outside the support of q")
    return float(max(0.0, np.sum(pp[mask] * np.log2(pp[mask] / qq[mask]))))


def codebook_stats(cb: CodeBook, src: SourceSpec):
    """Expected codeword length, expansion factor and expected symbol counts.

    Returns
    -------
    (E_L, f, expected_counts) with ``f = E_L / q`` and
    ``expected_counts[i]`` the mean number of output symbol i per codeword.
    """
    _check_dims(cb, src)
    probs = src.block_probs()
    counts = probs @ cb.symbol_counts()
    e_l = float(probs @ cb.lengths)
    return e_l, e_l / src.q, counts


def _check_dims(cb: CodeBook, src: SourceSpec) -> None:
    if cb.u != src.u or cb.q != src.q:
        raise DimensionError(
            f"codebook is for u={cb.u}, q={cb.q} but the source has u={src.u}, q={src.q}")


def check_prefix_free(entries) -> bool:
    """True iff no entry equals or is a proper prefix of another."""
    words = sorted(tuple(e) for e in entries)
    for a, b in zip(words, words[1:]):
        if b[:len(a)] == a:
            return False
    return True
