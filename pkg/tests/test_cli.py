import json
import subprocess
import sys

import pytest

from proofnet import cli
from proofnet.predictor import Prediction

from .conftest import CORPUS_DIR


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def net_file(tmp_path, text, name="n.net"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_check_ok(capsys):
    code, out = run(capsys, "check", CORPUS_DIR / "okada.net")
    assert code == 0 and out == {"acyclic_switchings": True, "failures": []}


def test_check_cycle(capsys, tmp_path):
    code, out = run(capsys, "check", net_file(tmp_path, "(net (concl t) (ax a b) (tensor a b -> t))"))
    assert code == 2 and not out["acyclic_switchings"] and out["failures"]


def test_parse_error(capsys, tmp_path):
    code, out = run(capsys, "check", net_file(tmp_path, "(net (concl c) (one c)"))
    assert code == 2 and out["error"] == "syntax" and "position" in out


def test_missing_file(capsys, tmp_path):
    code, out = run(capsys, "check", tmp_path / "nope.net")
    assert code == 1 and out["error"] == "io"


def test_reduce_trace(capsys):
    code, out = run(capsys, "reduce", CORPUS_DIR / "ax-cut.net", "--trace")
    assert code == 0 and out["status"] == "normal" and out["steps"] == 1
    assert out["trace"] == [{"step": 0, "cut": "cut:a,b", "rule": "Ax", "erasing": False, "depth": 0}]


def test_reduce_fuel(capsys):
    code, out = run(capsys, "reduce", CORPUS_DIR / "okada.net", "--fuel", 5)
    assert code == 3 and out["status"] == "fuel_exhausted"


def test_reduce_clash(capsys):
    code, out = run(capsys, "reduce", CORPUS_DIR / "clash-tensor-bot.net")
    assert code == 0 and out["status"] == "clash_blocked"


def test_reduce_strategy(capsys):
    code, out = run(capsys, "reduce", CORPUS_DIR / "ne-and-e.net", "--strategy", "nonerasing")
    assert out["status"] == "ne_normal" and out["steps"] == 1


def test_strong_okada(capsys):
    code, out = run(capsys, "strong", CORPUS_DIR / "okada.net", "--fuel", 100)
    assert code == 0 and out["summary"].startswith("NotSN(cycle")
    assert out["status"] == "NotSN" and out["witness"] == "cycle"


def test_strong_modes(capsys):
    code, out = run(capsys, "strong", CORPUS_DIR / "ne-and-e.net")
    assert out["summary"] == "SN(2)"
    code, out = run(capsys, "strong", CORPUS_DIR / "ne-and-e.net", "--mode", "nonerasing_only")
    assert out["summary"] == "SN(1)"


def test_strong_fuel(capsys):
    code, out = run(capsys, "strong", CORPUS_DIR / "tensor-par.net", "--fuel", 1)
    assert code == 3 and out["status"] == "Unknown"


def test_interp_one_sm(capsys):
    code, out = run(capsys, "interp", CORPUS_DIR / "one.net", "--mode", "sm")
    assert code == 0 and out == ["(point (result (+ *)) (w) (sbis 1))"]


def test_interp_budget(capsys, tmp_path):
    f = net_file(tmp_path, "(net (concl c) (why -> c))")
    # the budget bounds the experiment size s', here 1 + 2 for one weakening label
    code, out = run(capsys, "interp", f, "--budget", 2)
    assert out == ["(point (result (- (bag))) (w) (sbis 1))"]
    code, out = run(capsys, "interp", f, "--budget", 3)
    assert out == ["(point (result (- (bag (+ a1)))) (w (+ a1)) (sbis 5))", "(point (result (- (bag))) (w) (sbis 1))"]


def test_predict_one_bot(capsys):
    code, out = run(capsys, "predict", CORPUS_DIR / "one.net", CORPUS_DIR / "bot.net", "--c", "c", "--c2", "c")
    assert code == 0 and out["status"] == "SN" and out["predicted_strong"] == 1


def test_predict_no_match(capsys):
    one = CORPUS_DIR / "one.net"
    code, out = run(capsys, "predict", one, one, "--c", "c", "--c2", "c", "--budget", 16)
    assert code == 3 and out["status"] == "NotSN_within_budget"
    assert out["budget"]["cap"] == 16


def test_predict_bad_edge(capsys):
    one = CORPUS_DIR / "one.net"
    code, out = run(capsys, "predict", one, one, "--c", "zz", "--c2", "c")
    assert code == 1 and out["error"] == "usage"


def test_compare(capsys):
    code, rows = run(capsys, "compare", CORPUS_DIR, "--no-timing")
    assert code == 0
    assert len(rows) >= 24 and all(r["match"] for r in rows)
    assert [r["pair"] for r in rows] == sorted(r["pair"] for r in rows)
    assert set(rows[0]) == {"pair", "oracle_strong", "predicted_strong", "match", "budget"}


def test_compare_mismatch(capsys, monkeypatch, tmp_path):
    from proofnet.corpus import build_corpus

    build_corpus(tmp_path, pairs=1)
    monkeypatch.setattr(cli, "predict", lambda *a, **k: Prediction("SN", 99))
    code, rows = run(capsys, "compare", tmp_path)
    assert code == 4 and not all(r["match"] for r in rows)
    assert "runtime_ms" in rows[0]


def test_compare_not_a_directory(capsys, tmp_path):
    code, out = run(capsys, "compare", tmp_path / "missing")
    assert code == 1


def test_build_corpus(capsys, tmp_path):
    code, out = run(capsys, "build-corpus", tmp_path / "c")
    assert code == 0 and out["fixtures"] > 40
    assert (tmp_path / "c" / "okada.net").exists()


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["reduce", "x.net", "--strategy", "bogus"], ["predict", "a", "b"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as err:
        cli.main(argv)
    assert err.value.code == 1


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "proofnet.cli", "strong", str(CORPUS_DIR / "ax-cut.net")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["summary"] == "SN(1)"
