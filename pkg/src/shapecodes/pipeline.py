"""Compress-then-shape: LZ78 front end, power-of-two Varn back end.

Stream layout (all integers little-endian)::

    "SHPC" | version u8 = 1 | v u8 | k_bits u8 | tree hash u64 | bit count u64 | payload

``tree hash`` is FNV-1a 64 of the tree's canonical JSON.  ``bit count`` is
the exact number of input bits; the last k_bits block is zero padded before
shaping and the padding is dropped again on decode.  The payload holds the
output symbols, ``ceil(log2 v)`` bits each, MSB first, zero padded to a byte.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import CorruptStream, InfeasibleRate, TreeMismatch
from .lz78 import lz78_compress, lz78_decompress
from .metrics import MetricsReport, empirical_pmf, evaluate
from .model import Pmf, SourceSpec, as_costs, kl_divergence
from .optimizer import ShapingSolution, _solution, equivalent_cost_vector, min_avg_cost
from .varn import CodeTree, _parse, modified_varn_build, tree_to_codebook

MAGIC = b"SHPC"
VERSION = 1
_HEADER = struct.Struct("<4sBBBQQ")


def symbol_width(v: int) -> int:
    return max(1, math.ceil(math.log2(v)))


def tree_k_bits(tree: CodeTree) -> int:
    k_bits = tree.k.bit_length() - 1
    if tree.k != 1 << k_bits:
        raise ValueError(f"tree has {tree.k} leaves, not a power of two")
    return k_bits


@dataclass(frozen=True, eq=False)
class ShapedStream:
    v: int
    k_bits: int
    tree_hash: int
    bit_count: int
    symbols: np.ndarray

    @property
    def n_blocks(self) -> int:
        return -(-self.bit_count // self.k_bits)

    def expansion(self, bits_per_symbol: float = 1.0) -> float:
        """Output symbols per input source symbol of ``bits_per_symbol`` bits."""
        if self.bit_count == 0:
            return 0.0
        return self.symbols.size * bits_per_symbol / self.bit_count

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(MAGIC, VERSION, self.v, self.k_bits, self.tree_hash, self.bit_count)
        w = symbol_width(self.v)
        sym = np.asarray(self.symbols, dtype=np.int64)
        shifts = np.arange(w - 1, -1, -1)
        bits = ((sym[:, None] >> shifts[None, :]) & 1).astype(np.uint8).ravel()
        return header + np.packbits(bits).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ShapedStream":
        if len(blob) < _HEADER.size:
            raise CorruptStream("stream is shorter than its header")
        magic, version, v, k_bits, tree_hash, bit_count = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise CorruptStream(f"bad magic {magic!r}")
        if version != VERSION:
            raise CorruptStream(f"unsupported version {version}")
        if v < 2 or k_bits < 1:
            raise CorruptStream("invalid alphabet size or block length")
        w = symbol_width(v)
        bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8, offset=_HEADER.size))
        n = bits.size // w
        weights = 1 << np.arange(w - 1, -1, -1)
        sym = bits[:n * w].reshape(n, w).astype(np.int64) @ weights
        return cls(v=v, k_bits=k_bits, tree_hash=tree_hash, bit_count=bit_count, symbols=sym)


def shape_encode(bits, tree: CodeTree) -> ShapedStream:
    """Map k_bits-bit blocks (MSB first) to codewords of ``tree``."""
    k_bits = tree_k_bits(tree)
    b = np.asarray(bits, dtype=np.uint8)
    n = b.size
    pad = (-n) % k_bits
    if pad:
        b = np.concatenate([b, np.zeros(pad, dtype=np.uint8)])
    weights = 1 << np.arange(k_bits - 1, -1, -1, dtype=np.int64)
    blocks = b.reshape(-1, k_bits).astype(np.int64) @ weights if b.size else np.zeros(0, np.int64)
    return ShapedStream(v=tree.v, k_bits=k_bits, tree_hash=tree.tree_hash(), bit_count=n,
                        symbols=tree.encode(blocks))


def shape_decode(s: ShapedStream, tree: CodeTree) -> np.ndarray:
    if s.tree_hash != tree.tree_hash() or s.v != tree.v or s.k_bits != tree_k_bits(tree):
        raise TreeMismatch("stream was not written with this tree")
    n_blocks = s.n_blocks
    idx, consumed = _parse(tree, s.symbols, n_blocks)
    if len(idx) < n_blocks:
        raise CorruptStream(f"stream holds {len(idx)} codewords, header implies {n_blocks}")
    leftover = np.asarray(s.symbols[consumed:])
    if leftover.size * symbol_width(s.v) >= 8 or np.any(leftover != 0):
        raise CorruptStream("unexpected data after the last codeword")
    k = s.k_bits
    blocks = np.asarray(idx, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1)
    bits = ((blocks[:, None] >> shifts[None, :]) & 1).astype(np.uint8).ravel()
    if np.any(bits[s.bit_count:]):
        raise CorruptStream("nonzero padding in the last block")
    return bits[:s.bit_count]


def encode_bytes(data: bytes, tree: CodeTree) -> bytes:
    """LZ78-compress ``data`` and shape the result with ``tree``."""
    return shape_encode(lz78_compress(data), tree).to_bytes()


def decode_bytes(blob: bytes, tree: CodeTree) -> bytes:
    return lz78_decompress(shape_decode(ShapedStream.from_bytes(blob), tree))


# -- separation pipeline -----------------------------------------------------

@dataclass(frozen=True)
class PipelineReport:
    """Rates and costs of one compress-then-shape run.

    ``metrics`` evaluates the back-end code for uniform input bits against
    the back-end target distribution.  ``g`` is compressed bits per input bit; ``f_prime`` the back-end
    expansion factor that makes ``g * f_prime == f_target``.  Expansion
    factors count output symbols per ``bits_per_symbol`` input bits.
    """

    g: float
    f_target: float
    f_prime: float
    f_backend: float
    overall_expansion: float
    bits_per_symbol: float
    solution: ShapingSolution
    equivalent_costs: list
    analytic_avg_cost: float
    code_avg_cost: float
    avg_cost: float
    p_hat_target: Pmf
    p_hat_code: Pmf
    p_hat_measured: Pmf
    deviation: float
    n_input_bytes: int
    n_compressed_bits: int
    n_output_symbols: int
    metrics: MetricsReport

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["solution"] = self.solution.to_dict()
        d["metrics"] = self.metrics.to_dict()
        for k in ("p_hat_target", "p_hat_code", "p_hat_measured"):
            d[k] = d[k].tolist()
        return d


def backend_solution(c, bits_per_symbol: float, f_prime: float) -> ShapingSolution:
    """Cheapest output distribution for a uniform back-end source.

    When the back end cannot expand (``f_prime`` at or below
    ``bits_per_symbol / log2 v``) nothing can be shaped and the uniform
    distribution is returned.
    """
    c = as_costs(c)
    if bits_per_symbol / f_prime >= math.log2(c.v):
        return _solution(c, bits_per_symbol, 0.0)
    return min_avg_cost(c, bits_per_symbol, f_prime)


def pipeline_report(data: bytes, c, k_bits: int, f_target: float = 1.0,
                    bits_per_symbol: float = None) -> PipelineReport:
    """Run LZ78 -> type-I solve -> equivalent costs -> modified Varn -> shape.

    Parameters
    ----------
    data : bytes
        Input file contents.
    c : CostVector or sequence of float
        Channel costs.
    k_bits : int
        Input block length of the power-of-two back-end code.
    f_target : float
        Desired overall output symbols per source symbol.
    bits_per_symbol : float, optional
        Bits that make up one source symbol; defaults to ``log2 v`` so an
        uncoded write uses one output symbol per source symbol.
    """
    c = as_costs(c)
    if not data:
        raise ValueError("pipeline needs non-empty input")
    b = math.log2(c.v) if bits_per_symbol is None else float(bits_per_symbol)
    bits = lz78_compress(data)
    g = bits.size / (8.0 * len(data))
    f_prime = f_target / g
    sol = backend_solution(c, b, f_prime)
    if np.any(sol.p_hat.probs <= 0):
        raise InfeasibleRate("target distribution has an unusable zero-probability symbol")
    c_eq = equivalent_cost_vector(sol.p_hat)
    tree = modified_varn_build(k_bits, c_eq)
    stream = shape_encode(bits, tree)

    cb = tree_to_codebook(tree, 2, tree_k_bits(tree))
    report = evaluate(cb, SourceSpec.uniform(2, cb.q), target=sol.p_hat, costs=c,
                      stream=stream.symbols if stream.symbols.size > 3 else None)
    p_code = report.p_hat
    p_meas = empirical_pmf(stream.symbols, c.v)
    return PipelineReport(
        g=g, f_target=f_target, f_prime=f_prime,
        f_backend=stream.expansion(b),
        overall_expansion=stream.symbols.size * b / (8.0 * len(data)),
        bits_per_symbol=b, solution=sol, equivalent_costs=c_eq.tolist(),
        analytic_avg_cost=sol.avg_cost,
        code_avg_cost=float(p_code.probs @ c.costs),
        avg_cost=float(c.costs[stream.symbols].mean()),
        p_hat_target=sol.p_hat, p_hat_code=p_code, p_hat_measured=p_meas,
        deviation=kl_divergence(p_meas, sol.p_hat),
        n_input_bytes=len(data), n_compressed_bits=int(bits.size),
        n_output_symbols=int(stream.symbols.size), metrics=report)
