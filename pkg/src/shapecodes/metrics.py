"""Performance measures for shaping and distribution-matching codes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import DimensionError, SupportError
from .model import CodeBook, Pmf, SourceSpec, as_costs, as_pmf, codebook_stats, entropy


@dataclass(frozen=True)
class MetricsReport:
    p_hat: Pmf
    f: float
    avg_cost: float
    total_cost: float
    gef: float
    i_div: float
    norm_i_div: float
    kl_gap: float
    serial_kl: List[float] = field(default_factory=list)

    FIELDS = ("p_hat", "f", "avg_cost", "total_cost", "gef", "i_div",
              "norm_i_div", "kl_gap", "serial_kl")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.FIELDS}
        d["p_hat"] = self.p_hat.tolist()
        d["serial_kl"] = list(self.serial_kl)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        kw = {k: d[k] for k in cls.FIELDS}
        kw["p_hat"] = Pmf(kw["p_hat"])
        return cls(**kw)


def _target_logs(target, v: int) -> np.ndarray:
    p = as_pmf(target).probs
    if p.size != v:
        raise DimensionError(f"target has {p.size} symbols, the code alphabet has {v}")
    if np.any(p <= 0):
        raise SupportError("target probabilities must all be positive")
    return np.log2(p)


def asymptotic_occurrence(cb: CodeBook, src: SourceSpec) -> Pmf:
    """Long-run output symbol frequencies, ``E(N_i) / E(L)``."""
    e_l, _, counts = codebook_stats(cb, src)
    return Pmf(counts / e_l)


def gef(cb: CodeBook, src: SourceSpec, target) -> float:
    """Generalized expansion factor of ``cb`` for ``target``."""
    logs = _target_logs(target, cb.v)
    _, f, _ = codebook_stats(cb, src)
    p_hat = asymptotic_occurrence(cb, src).probs
    return float(-f * (p_hat @ logs) / math.log2(cb.v))


def i_divergence(cb: CodeBook, src: SourceSpec, target) -> float:
    """KL divergence from the codeword distribution to the target's leaf probabilities."""
    logs = _target_logs(target, cb.v)
    probs = src.block_probs()
    leaf_log = cb.symbol_counts() @ logs
    nz = probs > 0
    return float(np.sum(probs[nz] * (np.log2(probs[nz]) - leaf_log[nz])))


def i_divergence_from_gef(cb: CodeBook, src: SourceSpec, target) -> float:
    """Same quantity as :func:`i_divergence`, obtained from the GEF."""
    log_v = math.log2(cb.v)
    return (gef(cb, src, target) - src.entropy / log_v) * src.q * log_v


def normalized_i_divergence(cb: CodeBook, src: SourceSpec, target) -> float:
    """I-divergence per output symbol."""
    e_l, _, _ = codebook_stats(cb, src)
    return i_divergence(cb, src, target) / e_l


def normalized_i_divergence_closed_form(cb: CodeBook, src: SourceSpec, target) -> float:
    """``sum_i p_hat_i C_i - H(X) / f`` with self-information costs ``C_i``."""
    logs = _target_logs(target, cb.v)
    _, f, _ = codebook_stats(cb, src)
    p_hat = asymptotic_occurrence(cb, src).probs
    return float(-(p_hat @ logs) - src.entropy / f)


def kl_gap(cb: CodeBook, src: SourceSpec) -> float:
    """Per-symbol KL divergence between the output process and an i.i.d. one.

    Equals ``H(p_hat) - H(Y)``, with ``H(Y) = q H(X) / E(L)``.
    """
    e_l, _, counts = codebook_stats(cb, src)
    return entropy(counts / e_l) - src.q * src.entropy / e_l


def serial_kl(stream, target, order: int) -> float:
    """KL divergence of empirical overlapping m-gram frequencies from the i.i.d. target.

    With ``l`` symbols there are ``l - m + 1`` overlapping m-grams; each is
    compared to the product of target probabilities of its letters.
    """
    s = np.asarray(stream, dtype=np.int64)
    p = as_pmf(target).probs
    if np.any(p <= 0):
        raise SupportError("target probabilities must all be positive")
    if order < 1:
        raise ValueError("order must be at least 1")
    if s.size <= order:
        raise ValueError(f"stream of length {s.size} is too short for order {order}")
    v = p.size
    if s.min() < 0 or s.max() >= v:
        raise DimensionError("stream symbol outside the target alphabet")
    n = s.size - order + 1
    codes = np.zeros(n, dtype=np.int64)
    for k in range(order):
        codes = codes * v + s[k:k + n]
    freq = np.bincount(codes, minlength=v ** order) / n
    logp = np.log2(p)
    model = np.zeros(1)
    for _ in range(order):
        model = (model[:, None] + logp[None, :]).ravel()
    nz = freq > 0
    return float(max(0.0, np.sum(freq[nz] * (np.log2(freq[nz]) - model[nz]))))


def serial_kl_reference(stream, target, order: int) -> float:
    """Slow m-gram count by dictionary, kept as an independent check."""
    seq = [int(x) for x in stream]
    p = as_pmf(target).probs
    n = len(seq) - order + 1
    counts = {}
    for i in range(n):
        key = tuple(seq[i:i + order])
        counts[key] = counts.get(key, 0) + 1
    total = 0.0
    for key, cnt in counts.items():
        fr = cnt / n
        total += fr * math.log2(fr / math.prod(p[k] for k in key))
    return max(total, 0.0)


def empirical_pmf(stream, v: int) -> Pmf:
    s = np.asarray(stream, dtype=np.int64)
    return Pmf(np.bincount(s, minlength=v) / s.size)


def evaluate(cb: CodeBook, src: SourceSpec, target=None, costs=None, stream=None,
             orders=(1, 2, 3)) -> MetricsReport:
    """Collect every measure into one report.

    ``costs`` defaults to the self-information costs of ``target``; the
    target defaults to uniform.  Serial KL is computed only when a symbol
    stream is supplied.
    """
    if target is None:
        target = Pmf.uniform(cb.v)
    target = as_pmf(target)
    logs = _target_logs(target, cb.v)
    c = -logs if costs is None else as_costs(costs).costs
    _, f, _ = codebook_stats(cb, src)
    p_hat = asymptotic_occurrence(cb, src)
    avg = float(p_hat.probs @ c)
    serial = [] if stream is None else [serial_kl(stream, target, m) for m in orders]
    return MetricsReport(
        p_hat=p_hat, f=f, avg_cost=avg, total_cost=f * avg,
        gef=gef(cb, src, target), i_div=i_divergence(cb, src, target),
        norm_i_div=normalized_i_divergence(cb, src, target),
        kl_gap=kl_gap(cb, src), serial_kl=serial)
