import json
import math
import subprocess
import sys

import pytest
from scipy import special

from jfx.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def lines(text):
    return [json.loads(x) for x in text.splitlines() if x.strip()]


@pytest.mark.parametrize("kind,n,r,d", [("sym:2", 3, 2, 1), ("real", 1, 1, 0), ("spin:4", 4, 2, 2),
                                        ("herm:3", 9, 3, 2)])
def test_algebra_catalog(capsys, kind, n, r, d):
    code, out, _ = run(capsys, "algebra", kind)
    data = json.loads(out)
    assert code == 0
    assert (data["n"], data["r"], data["d"]) == (n, r, d)
    assert len(data["frame"]) == r and len(data["gram"]) == n


def test_algebra_unknown_kind(capsys):
    code, _, err = run(capsys, "algebra", "bogus")
    assert code == 2 and "bogus" in err


def test_eval_I_example(capsys):
    code, out, _ = run(capsys, "eval", "I", "--algebra", "real", "--lambda", "1.5", "--z", "1.0", "--w", "1.0")
    data = json.loads(out)
    expect = math.gamma(1.5) * special.iv(0.5, 2.0)
    assert code == 0 and abs(data["value"] - expect) <= 1e-12
    assert data["shells_used"] > 0 and data["tail_estimate"] >= 0


def test_eval_K_example(capsys):
    code, out, _ = run(capsys, "eval", "K", "--algebra", "real", "--lambda", "2", "--x", "1")
    assert code == 0 and abs(json.loads(out)["value"] - 2 * special.kv(1, 2.0)) <= 1e-9


def test_eval_phi_trivial(capsys):
    code, out, _ = run(capsys, "eval", "phi", "--m", "0")
    data = json.loads(out)
    assert code == 0 and data["value"] == 1.0 and data["exact"]


def test_eval_complex_point_and_boundary_k(capsys):
    code, out, _ = run(capsys, "eval", "J", "--algebra", "spin:3", "--lambda", "5/2", "--z", "1+i,0.5",
                       "--w", "1,0.5")
    assert code == 0 and isinstance(json.loads(out)["value"], list)
    code, out, _ = run(capsys, "eval", "K", "--algebra", "spin:3", "--lambda", "1/2", "--x", "1,0")
    assert code == 0 and json.loads(out)["value"] > 0


def test_eval_errors(capsys):
    assert run(capsys, "eval", "J", "--algebra", "real", "--lambda", "1.5", "--z", "1e6", "--w", "1e6")[0] == 3
    assert run(capsys, "eval", "I", "--algebra", "real", "--lambda", "-1", "--z", "1", "--w", "1")[0] == 2
    assert run(capsys, "eval", "I", "--algebra", "real", "--lambda", "x", "--z", "1", "--w", "1")[0] == 2
    assert run(capsys, "eval", "I", "--algebra", "real", "--lambda", "1")[0] == 2
    assert run(capsys, "eval", "I", "--algebra", "sym:2", "--lambda", "2", "--z", "1", "--w", "1")[0] == 2
    assert run(capsys, "eval", "nope")[0] == 2


def test_verify_fischer_fock_example(capsys):
    code, out, _ = run(capsys, "verify", "fischer-fock", "--algebra", "sym:2", "--max-weight", "4")
    recs = lines(out)
    assert code == 0
    assert recs[-1]["summary"] and recs[-1]["failed"] == 0 and recs[-1]["records"] == len(recs) - 1
    assert all(r["ok"] for r in recs)


def test_verify_branching_example(capsys):
    code, out, _ = run(capsys, "verify", "branching", "--n", "4", "--m", "2", "--cap", "4")
    assert code == 0 and lines(out)[-1]["ok"]


def test_verify_jordan_axioms_example(capsys):
    code, out, _ = run(capsys, "verify", "jordan-axioms", "--algebra", "herm:3")
    assert code == 0 and lines(out)[-1]["ok"]


def test_verify_identity_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "bargmann", "--algebra", "real", "--lambda", "2", "--tol", "1e-17")
    assert code == 1 and not lines(out)[-1]["ok"]


def test_verify_unknown_suite(capsys):
    code, out, err = run(capsys, "verify", "bogus", "--algebra", "real")
    assert code == 2 and out == "" and "unknown suite" in err


def test_verify_reports_are_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for p in paths:
        code, out, _ = run(capsys, "verify", "measures", "--algebra", "spin:3", "--lambda", "17/10", "--seed", "5", "--out", str(p))
        assert code == 0 and json.loads(out)["summary"]
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_verify_csv(capsys, tmp_path):
    p = tmp_path / "r.csv"
    code, _, _ = run(capsys, "verify", "inversion", "--algebra", "real", "--csv", "--out", str(p))
    rows = p.read_text().splitlines()
    assert code == 0
    header = rows[0].split(",")
    assert "identity" in header and "ok" in header and len(rows) > 1


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "jfx.cli", "algebra", "real"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["n"] == 1
