"""Command-line drivers.

Subcommands: solve, curve, build, encode, decode, eval, dm-test.  JSON
output keeps full precision; CSV output uses 6 significant digits.  Exit
codes: 0 ok, 1 bad arguments, 2 infeasible rate, 3 zero minimum cost,
4 I/O error or corrupt stream.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import List, Optional

import numpy as np

from .errors import CorruptStream, InfeasibleRate, ShapingError, TreeMismatch, ZeroMinCost
from .metrics import evaluate, serial_kl
from .model import CodeBook, Pmf, SourceSpec, entropy
from .optimizer import (i_min_of_f, min_avg_cost, optimal_expansion, self_information_costs,
                        solve_mu_capacity, total_cost_curve)
from .pipeline import decode_bytes, encode_bytes
from .rng import make_rng, random_messages
from .varn import CodeTree, modified_varn_build, savari_bounds, tree_to_codebook, varn_build

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_ZERO_COST, EXIT_IO = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    costs: Optional[List[float]] = None
    source_pmf: Optional[List[float]] = None
    target_pmf: Optional[List[float]] = None
    hsource: Optional[float] = None
    q: Optional[int] = None
    f: Optional[float] = None
    optimal: bool = False
    k_bits: Optional[int] = None
    K: Optional[List[int]] = None
    seed: Optional[int] = None
    grid: Optional[str] = None
    entries: Optional[List[str]] = None
    tree: Optional[str] = None
    input: Optional[str] = None
    output: Optional[str] = None
    divergence: bool = False
    histogram: bool = False
    n_codewords: int = 100_000
    workers: int = 1

    def h_source(self) -> float:
        """Source entropy per source symbol, given explicitly or taken from the pmf."""
        if self.hsource is not None:
            return float(self.hsource)
        if self.source_pmf is not None:
            return entropy(self.source_pmf)
        raise UsageError("need --hsource or --source-pmf")

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise UsageError("missing required option(s): " + ", ".join(
                "--" + n.replace("_", "-") for n in missing))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit status 2 is reserved for infeasible rates
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(s: str) -> List[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def _ints(s: str) -> List[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def parse_grid(spec: str) -> np.ndarray:
    """``"a:b:n"`` -> n evenly spaced points from a to b inclusive."""
    try:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise UsageError(f"grid must look like a:b:n, got {spec!r}") from None


def fmt6(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt6(x) for x in r])
    return buf.getvalue()


def write_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- configuration -----------------------------------------------------------

_FLAG_FIELDS = {f.name for f in fields(RunConfig)}


def build_config(ns: argparse.Namespace) -> RunConfig:
    """JSON config file first, then any flag given on the command line."""
    values = {}
    if getattr(ns, "config", None):
        with open(ns.config) as fh:
            loaded = json.load(fh)
        if "target" in loaded and "target_pmf" not in loaded:
            loaded["target_pmf"] = loaded.pop("target")
        unknown = set(loaded) - _FLAG_FIELDS
        if unknown:
            raise UsageError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        values.update(loaded)
    for name in _FLAG_FIELDS:
        v = getattr(ns, name, None)
        if v is not None and v is not False:
            values[name] = v
    cfg = RunConfig(**values)
    if cfg.K is not None and not isinstance(cfg.K, list):
        cfg.K = [int(cfg.K)]
    return cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--costs", type=_floats, help="comma-separated channel symbol costs")
    p.add_argument("--target", dest="target_pmf", type=_floats, help="target pmf")
    p.add_argument("--source-pmf", type=_floats, help="source symbol pmf")
    p.add_argument("--hsource", type=float, help="source entropy per symbol (bits)")
    p.add_argument("--q", type=int, help="source block length")
    p.add_argument("--f", type=float, help="expansion factor")
    p.add_argument("--optimal", action="store_true", default=None,
                   help="use the total-cost optimal expansion factor")
    p.add_argument("--k-bits", type=int, help="input bits per codeword of a power-of-two code")
    p.add_argument("--K", type=_ints, help="codebook size(s), comma-separated")
    p.add_argument("--seed", type=int, help="PRNG seed")
    p.add_argument("--grid", help="a:b:n grid of expansion factors")
    p.add_argument("--out", dest="output", help="output file (default stdout)")


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="shapecodes", description="Shaping and distribution-matching codes.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="optimal output distribution as JSON")
    _add_common(p)

    p = sub.add_parser("curve", help="cost (or I-divergence) versus f as CSV")
    _add_common(p)
    p.add_argument("--divergence", action="store_true", default=None,
                   help="emit I_min(f) for --target instead of costs")

    p = sub.add_parser("build", help="Varn or modified Varn tree as JSON")
    _add_common(p)
    p.add_argument("--histogram", action="store_true", default=None,
                   help="emit codeword length histogram as CSV")

    for name, desc in (("encode", "compress and shape a file"),
                       ("decode", "invert encode")):
        p = sub.add_parser(name, help=desc)
        _add_common(p)
        p.add_argument("--tree", help="tree JSON from `build`")
        p.add_argument("--in", dest="input", help="input file")

    p = sub.add_parser("eval", help="metrics report for a codebook as JSON")
    _add_common(p)
    p.add_argument("--entries", type=lambda s: s.split(","),
                   help="codewords of the blocks in lexicographic order, e.g. 0,10,11")
    p.add_argument("--dm-test", action="store_true", help="run the serial test instead")
    p.add_argument("--n-codewords", type=int, help="codewords per serial test run")
    p.add_argument("--workers", type=int, help="worker processes for --dm-test")

    p = sub.add_parser("dm-test", help="serial test of binary Varn DM codes as CSV")
    _add_common(p)
    p.add_argument("--n-codewords", type=int, help="codewords per run (default 1e5)")
    p.add_argument("--workers", type=int, help="worker processes")
    return ap


# -- commands ----------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> str:
    cfg.require("costs")
    h = cfg.h_source()
    if cfg.optimal:
        f_opt, t_min, sol = optimal_expansion(cfg.costs, h)
        out = sol.to_dict()
        out.update(f_opt=f_opt, t_min=t_min)
    else:
        cfg.require("f")
        out = min_avg_cost(cfg.costs, h, cfg.f).to_dict()
    return write_json(out)


def cmd_curve(cfg: RunConfig) -> str:
    cfg.require("grid")
    grid = parse_grid(cfg.grid)
    if cfg.divergence:
        cfg.require("target_pmf")
        h = cfg.h_source()
        rows = []
        for f in grid:
            c = self_information_costs(cfg.target_pmf)
            s = min_avg_cost(c, h, float(f))
            rows.append((f, s.mu, i_min_of_f(cfg.target_pmf, h, float(f))))
        return write_csv(["f", "mu", "i_min"], rows)
    cfg.require("costs")
    pts = total_cost_curve(cfg.costs, cfg.h_source(), grid)
    return write_csv(["f", "mu", "N", "entropy_h", "avg_cost", "total_cost"],
                     [(p.f, p.mu, p.N, p.entropy_h, p.avg_cost, p.total_cost) for p in pts])


def _tree_from_config(cfg: RunConfig) -> CodeTree:
    if cfg.tree:
        with open(cfg.tree) as fh:
            return CodeTree.from_dict(json.load(fh))
    cfg.require("costs")
    if cfg.k_bits is not None:
        return modified_varn_build(cfg.k_bits, cfg.costs)
    cfg.require("K")
    if len(cfg.K) != 1:
        raise UsageError("build takes a single --K")
    return varn_build(cfg.K[0], cfg.costs)


def cmd_build(cfg: RunConfig) -> str:
    t = _tree_from_config(cfg)
    if cfg.histogram:
        hist = t.length_histogram()
        return write_csv(["length", "count"], sorted(hist.items()))
    d = t.to_dict()
    d["k"] = t.k
    d["avg_codeword_cost"] = t.avg_codeword_cost
    d["mean_length"] = t.mean_length
    d["tree_hash"] = f"{t.tree_hash():016x}"
    if cfg.q:
        d["expansion_factor"] = t.mean_length / cfg.q
    if t.cost_vector.min_cost > 0:
        d["mu"] = solve_mu_capacity(t.cost_vector)
        d["savari_bounds"] = list(savari_bounds(t.k, t.cost_vector))
    return write_json(d)


def _read_input(cfg: RunConfig) -> bytes:
    if cfg.input in (None, "-"):
        return sys.stdin.buffer.read()
    with open(cfg.input, "rb") as fh:
        return fh.read()


def cmd_encode(cfg: RunConfig) -> bytes:
    return encode_bytes(_read_input(cfg), _tree_from_config(cfg))


def cmd_decode(cfg: RunConfig) -> bytes:
    return decode_bytes(_read_input(cfg), _tree_from_config(cfg))


def cmd_eval(cfg: RunConfig) -> str:
    cfg.require("entries")
    words = cfg.entries
    pmf = cfg.source_pmf
    if pmf is None:
        raise UsageError("eval needs --source-pmf")
    cb = CodeBook.from_strings(words, len(pmf), cfg.q or 1,
                               v=len(cfg.target_pmf) if cfg.target_pmf else None)
    src = SourceSpec(Pmf(pmf), cfg.q or 1)
    rep = evaluate(cb, src, target=cfg.target_pmf, costs=cfg.costs)
    return write_json(rep.to_dict())


def dm_test_row(target, K: int, n_codewords: int, seed: int, stream_index: int):
    """One serial-test run: ``(K, P_hat_0, GEF ratio, I_1, I_2, I_3)``.

    The GEF ratio divides the GEF by its lower bound ``log2 K / log2 v``, so
    it tends to 1 for a good matcher.
    """
    c = self_information_costs(target)
    t = varn_build(K, c)
    cb = tree_to_codebook(t, K, 1)
    rep = evaluate(cb, SourceSpec.uniform(K, 1), target=target)
    msgs = random_messages(make_rng(seed, stream_index), K, n_codewords)
    stream = t.encode(msgs)
    serial = [serial_kl(stream, target, m) for m in (1, 2, 3)]
    ratio = rep.gef * math.log2(len(target)) / math.log2(K)
    return (K, float(rep.p_hat.probs[0]), ratio, *serial)


def cmd_dm_test(cfg: RunConfig) -> str:
    cfg.require("target_pmf", "K", "seed")
    jobs = [(cfg.target_pmf, K, cfg.n_codewords, cfg.seed, i) for i, K in enumerate(cfg.K)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            rows = list(ex.map(dm_test_row, *zip(*jobs)))
    else:
        rows = [dm_test_row(*j) for j in jobs]
    for m in (3, 4, 5):
        col = [r[m] for r in rows]
        if any(b > a for a, b in zip(col, col[1:])):
            print(f"note: I_{m - 2} is not monotone decreasing in K", file=sys.stderr)
    return write_csv(["K", "p_hat0", "gef_ratio", "I1", "I2", "I3"], rows)


COMMANDS = {
    "solve": cmd_solve, "curve": cmd_curve, "build": cmd_build,
    "encode": cmd_encode, "decode": cmd_decode, "eval": cmd_eval, "dm-test": cmd_dm_test,
}


def run(argv=None) -> int:
    ns = make_parser().parse_args(argv)
    try:
        cfg = build_config(ns)
        cmd = ns.command
        if cmd == "eval" and ns.dm_test:
            cmd = "dm-test"
        result = COMMANDS[cmd](cfg)
        if isinstance(result, str):
            result = result.encode("utf-8")
        if cfg.output in (None, "-"):
            sys.stdout.buffer.write(result)
            sys.stdout.flush()
        else:
            with open(cfg.output, "wb") as fh:
                fh.write(result)
    except InfeasibleRate as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ZeroMinCost as e:
        print(f"zero minimum cost: {e}", file=sys.stderr)
        return EXIT_ZERO_COST
    except (OSError, CorruptStream, TreeMismatch, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ShapingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
