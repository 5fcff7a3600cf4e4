import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from shapecodes.cli import RunConfig, parse_grid, run
from shapecodes.model import entropy
from shapecodes.rng import make_rng


def _run(capsysbinary, *argv):
    rc = run(list(argv))
    out = capsysbinary.readouterr()
    return rc, out.out, out.err


def _json(capsysbinary, *argv):
    rc, out, _ = _run(capsysbinary, *argv)
    assert rc == 0
    return json.loads(out)


def _csv(capsysbinary, *argv):
    rc, out, _ = _run(capsysbinary, *argv)
    assert rc == 0
    return list(csv.DictReader(io.StringIO(out.decode())))


# -- solve -------------------------------------------------------------------

def test_solve_english(capsysbinary):
    d = _json(capsysbinary, "solve", "--costs", "0,0.58,0.87,1.29", "--hsource", "2",
              "--f", "2.740")
    assert d["p_hat"] == pytest.approx([0.8606, 0.0989, 0.0335, 0.0070], abs=5e-4)


def test_solve_equal_costs_is_uniform(capsysbinary):
    d = _json(capsysbinary, "solve", "--costs", "1,1", "--hsource", "1", "--f", "1")
    assert d["p_hat"] == pytest.approx([0.5, 0.5])


def test_solve_optimal(capsysbinary):
    d = _json(capsysbinary, "solve", "--costs", "1,2,3,4", "--hsource", "2", "--optimal")
    # capacity root of sum 2^(-mu c) = 1 by plain bisection
    lo, hi = 0.1, 5.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if sum(2 ** (-mid * c) for c in (1, 2, 3, 4)) > 1 else (lo, mid)
    assert d["mu"] == pytest.approx(lo, abs=1e-9)
    assert d["mu"] == pytest.approx(0.9468, abs=1e-4)
    assert d["t_min"] == pytest.approx(2 / lo, rel=1e-9)
    assert d["f_opt"] == pytest.approx(2 / entropy(d["p_hat"]), rel=1e-9)


def test_solve_exit_codes(capsysbinary):
    assert _run(capsysbinary, "solve", "--costs", "0,1", "--hsource", "1", "--optimal")[0] == 3
    assert _run(capsysbinary, "solve", "--costs", "1,2", "--hsource", "2", "--f", "1")[0] == 2
    assert _run(capsysbinary, "solve", "--costs", "1,2")[0] == 1
    with pytest.raises(SystemExit) as e:
        run(["solve", "--bogus"])
    assert e.value.code == 1


def test_missing_file_exit_code(capsysbinary, tmp_path):
    rc, _, err = _run(capsysbinary, "decode", "--tree", str(tmp_path / "nope.json"),
                      "--in", str(tmp_path / "x"))
    assert rc == 4 and b"error" in err


# -- curve -------------------------------------------------------------------

def test_curve_columns_and_format(capsysbinary):
    rows = _csv(capsysbinary, "curve", "--costs", "1,2,3", "--hsource", "1.5",
                "--grid", "1:3:5")
    assert list(rows[0]) == ["f", "mu", "N", "entropy_h", "avg_cost", "total_cost"]
    assert [float(r["f"]) for r in rows] == [1, 1.5, 2, 2.5, 3]
    for r in rows:
        assert float(r["total_cost"]) == pytest.approx(
            float(r["f"]) * float(r["avg_cost"]), rel=1e-5)
        for v in r.values():
            assert len(v.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 6
    totals = [float(r["total_cost"]) for r in rows]
    assert min(totals) < totals[-1]


def test_curve_equal_costs(capsysbinary):
    # equal costs leave f = h_source as the only feasible point
    rows = _csv(capsysbinary, "curve", "--costs", "1,1", "--hsource", "1",
                "--grid", "1:1:1")
    assert [(float(r["avg_cost"]), float(r["total_cost"])) for r in rows] == [(1.0, 1.0)]
    assert _run(capsysbinary, "curve", "--costs", "1,1", "--hsource", "1",
                "--grid", "1:2:3")[0] == 2


def test_curve_divergence_decreasing(capsysbinary):
    rows = _csv(capsysbinary, "curve", "--divergence", "--target", "0.7,0.3",
                "--hsource", "1", "--grid", "1:1.1:6")
    vals = [float(r["i_min"]) for r in rows]
    assert list(rows[0]) == ["f", "mu", "i_min"]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_bad_grid(capsysbinary):
    assert _run(capsysbinary, "curve", "--costs", "1,2", "--hsource", "1",
                "--grid", "1:2")[0] == 1
    assert parse_grid("0:1:3").tolist() == [0, 0.5, 1]


# -- build -------------------------------------------------------------------

def test_build_symmetric_binary(capsysbinary):
    d = _json(capsysbinary, "build", "--costs", "1,1", "--K", "4")
    assert d["k"] == 4 and d["avg_codeword_cost"] == 2.0
    assert sorted(map(tuple, d["leaves"])) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_build_english_256(capsysbinary):
    d = _json(capsysbinary, "build", "--costs", "0.2167,3.3378,4.8983,7.1585",
              "--K", "256", "--q", "4")
    assert d["expansion_factor"] == pytest.approx(2.768, abs=5e-3)
    lo, hi = d["savari_bounds"]
    assert lo <= d["avg_codeword_cost"] <= hi


def test_build_histogram(capsysbinary):
    rows = _csv(capsysbinary, "build", "--costs", "1,2", "--K", "13", "--histogram")
    d = _json(capsysbinary, "build", "--costs", "1,2", "--K", "13")
    lengths = [len(p) for p in d["leaves"]]
    assert {int(r["length"]): int(r["count"]) for r in rows} == {
        n: lengths.count(n) for n in set(lengths)}


# -- encode / decode ---------------------------------------------------------

@pytest.mark.parametrize("payload", [b"", b"hello, shaping", None])
def test_encode_decode_files(capsysbinary, tmp_path, payload):
    if payload is None:
        payload = make_rng(12).bytes(5000)
    src, enc, dec, tree = (tmp_path / n for n in ("in", "enc", "dec", "tree.json"))
    src.write_bytes(payload)
    assert _run(capsysbinary, "build", "--costs", "0.2,3.3,4.9,7.2", "--k-bits", "6",
                "--out", str(tree))[0] == 0
    assert _run(capsysbinary, "encode", "--tree", str(tree), "--in", str(src),
                "--out", str(enc))[0] == 0
    assert enc.read_bytes()[:4] == b"SHPC"
    assert _run(capsysbinary, "decode", "--tree", str(tree), "--in", str(enc),
                "--out", str(dec))[0] == 0
    assert dec.read_bytes() == payload


def test_encode_without_tree_file(capsysbinary, tmp_path):
    src, enc, dec = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    src.write_bytes(b"abracadabra" * 20)
    flags = ["--costs", "1,1.5,2.5", "--k-bits", "4"]
    assert _run(capsysbinary, "encode", *flags, "--in", str(src), "--out", str(enc))[0] == 0
    assert _run(capsysbinary, "decode", *flags, "--in", str(enc), "--out", str(dec))[0] == 0
    assert dec.read_bytes() == src.read_bytes()


def test_decode_with_wrong_tree_or_corrupt(capsysbinary, tmp_path):
    src, enc = tmp_path / "a", tmp_path / "b"
    src.write_bytes(b"some text to shape")
    assert _run(capsysbinary, "encode", "--costs", "1,2", "--k-bits", "4",
                "--in", str(src), "--out", str(enc))[0] == 0
    assert _run(capsysbinary, "decode", "--costs", "1,3", "--k-bits", "4",
                "--in", str(enc))[0] == 4
    enc.write_bytes(enc.read_bytes()[:-2])
    assert _run(capsysbinary, "decode", "--costs", "1,2", "--k-bits", "4",
                "--in", str(enc))[0] == 4


# -- eval / dm-test ----------------------------------------------------------

def test_eval_example1(capsysbinary):
    d = _json(capsysbinary, "eval", "--entries", "000,001,01,1", "--source-pmf", "0.5,0.5",
              "--q", "2", "--target", "0.666667,0.333333")
    assert d["p_hat"] == pytest.approx([2 / 3, 1 / 3], abs=1e-12)
    assert d["kl_gap"] == pytest.approx(0.0294, abs=1e-4)
    assert d["f"] == pytest.approx(9 / 8)


def test_eval_uniform_target_gef_equals_f(capsysbinary):
    d = _json(capsysbinary, "eval", "--entries", "0,10,11", "--source-pmf", "0.5,0.25,0.25",
              "--target", "0.5,0.5")
    assert d["gef"] == pytest.approx(d["f"])
    assert d["gef"] == pytest.approx(1.5)


def test_dm_test_deterministic_and_trend(capsysbinary):
    argv = ["dm-test", "--target", "0.666667,0.333333", "--K", "16,256,4096",
            "--seed", "5", "--n-codewords", "20000"]
    rc, a, _ = _run(capsysbinary, *argv)
    rc2, b, _ = _run(capsysbinary, *argv)
    assert rc == rc2 == 0 and a == b
    rows = list(csv.DictReader(io.StringIO(a.decode())))
    assert list(rows[0]) == ["K", "p_hat0", "gef_ratio", "I1", "I2", "I3"]
    assert float(rows[-1]["I1"]) < float(rows[0]["I1"])
    assert all(float(r["gef_ratio"]) >= 1 for r in rows)


def test_dm_test_workers_match_serial(capsysbinary):
    argv = ["dm-test", "--target", "0.6,0.4", "--K", "8,32", "--seed", "9",
            "--n-codewords", "2000"]
    _, serial, _ = _run(capsysbinary, *argv)
    _, pooled, _ = _run(capsysbinary, *argv, "--workers", "2")
    _, alias, _ = _run(capsysbinary, "eval", "--dm-test", *argv[1:])
    assert serial == pooled == alias


def test_dm_test_needs_seed(capsysbinary):
    assert _run(capsysbinary, "dm-test", "--target", "0.6,0.4", "--K", "8")[0] == 1


# -- config ------------------------------------------------------------------

def test_config_file_and_flag_precedence(capsysbinary, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"costs": [1, 2], "hsource": 1, "f": 1.5}))
    d = _json(capsysbinary, "solve", "--config", str(cfg))
    assert d["f"] == pytest.approx(1.5)
    d = _json(capsysbinary, "solve", "--config", str(cfg), "--f", "1.2")
    assert d["f"] == pytest.approx(1.2)
    cfg.write_text(json.dumps({"costs": [1, 1], "colour": 3}))
    assert _run(capsysbinary, "solve", "--config", str(cfg))[0] == 1


def test_config_entropy_from_pmf():
    cfg = RunConfig(source_pmf=[0.25] * 4)
    assert cfg.h_source() == 2.0


def test_config_target_alias(capsysbinary, tmp_path):
    cfg = tmp_path / "dm.json"
    cfg.write_text(json.dumps({"target": [0.6, 0.4], "K": [8], "seed": 3,
                               "n_codewords": 500}))
    rc, a, _ = _run(capsysbinary, "dm-test", "--config", str(cfg))
    _, b, _ = _run(capsysbinary, "dm-test", "--target", "0.6,0.4", "--K", "8", "--seed", "3",
                   "--n-codewords", "500")
    assert rc == 0 and a == b


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "shapecodes", "solve", "--costs", "0,1",
                        "--hsource", "1", "--optimal"], capture_output=True)
    assert p.returncode == 3
