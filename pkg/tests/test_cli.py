import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contdiag import cli
from contdiag.serialize import TRACK_COLUMNS, atomic_write, fmt

CONST = ["--f", "1", "--g", "2", "--h-re", "0", "--h-im", "0", "--a", "0", "--b", "1"]


def run(argv, environ=None):
    buf = io.StringIO()
    code = cli.main(argv, stream=buf, environ=environ or {})
    return code, buf.getvalue()


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_constant_field_writes_track(tmp_path):
    code, out = run(["diagonalize", *CONST, "--n", "101", "--mode", "distinct", "--out", str(tmp_path)])
    assert code == 0 and "ok" in out
    header, data = read_csv(tmp_path / "diagonalize.csv")
    assert tuple(header) == TRACK_COLUMNS
    assert data.shape == (101, 13)
    np.testing.assert_array_equal(data[:, header.index("d1")], 2.0)
    np.testing.assert_array_equal(data[:, header.index("d2")], 1.0)
    report = json.loads((tmp_path / "diagonalize.json").read_text())
    assert report["status"] == "ok" and report["exit_code"] == 0
    assert "timings" not in report
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]


@pytest.mark.parametrize("argv, code", [
    (["diagonalize", "--gallery", "paper-ex-2.1", "--mode", "c1"], 5),
    (["diagonalize", "--gallery", "paper-ex-smooth", "--mode", "c1"], 4),
    (["diagonalize", "--gallery", "zero-interval"], 6),
    (["diagonalize", "--f", "t", "--g=-t", "--a", "-1", "--b", "1", "--mode", "distinct"], 3),
    (["diagonalize", "--f", "sin(t", "--a", "0", "--b", "1"], 2),
    (["diagonalize", "--f", "tan(t)", "--a", "0", "--b", "1"], 2),
    (["diagonalize", *CONST, "--n", "1"], 2),
    (["diagonalize", "--f", "1", "--a", "1", "--b", "0"], 2),
    (["diagonalize", *CONST, "--tol-offdiag", "-1"], 2),
    (["diagonalize", "--f", "1"], 2),
    (["diagonalize", *CONST, "--gallery", "pauli-x"], 2),
    (["diagonalize", "--gallery", "no-such-entry"], 2),
    (["diagonalize", "--f", "1/(t-0.5)", "--a", "0", "--b", "1", "--n", "3"], 1),
])
def test_exit_codes(argv, code):
    assert run(argv)[0] == code


def test_argparse_errors_use_config_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["diagonalize", "--n", "many"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["diagonalize", *CONST, "--mode", "fast"])
    assert info.value.code == 2


def test_error_report_is_json(tmp_path):
    code, out = run(["diagonalize", "--gallery", "paper-ex-2.1", "--json", "--out", str(tmp_path)])
    rep = json.loads(out)
    assert code == 5 and rep["status"] == "error"
    assert rep["error"]["type"] == "DerivativeDiscontinuous"
    assert json.loads((tmp_path / "diagonalize.json").read_text()) == rep
    assert not (tmp_path / "diagonalize.csv").exists()


def test_outputs_are_byte_identical(tmp_path):
    argv = ["diagonalize", "--gallery", "c1-multi", "--n", "501", "--seed", "7"]
    run([*argv, "--out", str(tmp_path / "one")])
    run([*argv, "--out", str(tmp_path / "two")])
    for name in ("diagonalize.csv", "diagonalize.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_environment_overrides_and_flag_precedence(tmp_path):
    env = {"CONTDIAG_N": "51", "CONTDIAG_OUT": str(tmp_path), "CONTDIAG_TOL_OFFDIAG": "1e-9"}
    assert run(["diagonalize", *CONST], env)[0] == 0
    rep = json.loads((tmp_path / "diagonalize.json").read_text())
    assert rep["config"]["n"] == 51 and rep["config"]["tol_offdiag"] == 1e-9
    assert run(["diagonalize", *CONST, "--n", "21"], env)[0] == 0
    rep = json.loads((tmp_path / "diagonalize.json").read_text())
    assert rep["config"]["n"] == 21
    assert run(["diagonalize", *CONST], {"CONTDIAG_N": "lots"})[0] == 2
    # an environment mode beats the gallery entry's own mode
    assert run(["diagonalize", "--gallery", "c1-diagonal"], {"CONTDIAG_MODE": "distinct"})[0] == 3


def test_sample_file_input(tmp_path):
    t = np.linspace(-1, 1, 201)
    path = tmp_path / "field.csv"
    lines = ["t,f,g,h_re,h_im"] + [",".join(fmt(x) for x in (s, s, -s, 0.3, 0.1 * s)) for s in t]
    path.write_text("\n".join(lines) + "\n")
    code, out = run(["diagonalize", "--input", str(path), "--json"])
    assert code == 0, out
    rep = json.loads(out)
    assert rep["config"]["a"] == -1.0 and rep["config"]["source"] == {"input": "field.csv"}
    bad = tmp_path / "bad.csv"
    bad.write_text("t,f,g\n0,1,2\n")
    assert run(["diagonalize", "--input", str(bad)])[0] == 2
    assert run(["diagonalize", "--input", str(tmp_path / "missing.csv")])[0] == 2


def test_check_mode(tmp_path):
    code, out = run(["check", "--gallery", "paper-ex-2.1", "--n", "1000", "--json", "--out", str(tmp_path)])
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["oracle_max_jump"] > 1.0
    assert abs(rep["result"]["oracle_max_jump_at"]) < 1e-2
    assert rep["result"]["c1_hypotheses_hold"] is False
    header, data = read_csv(tmp_path / "check.csv")
    assert header == ["t_mid", "oracle_jump"] and data.shape == (999, 2)
    assert run(["diagonalize", "--gallery", "paper-ex-2.1", "--mode", "check"])[0] == 0


def test_oracle_compare(tmp_path):
    code, out = run(["oracle-compare", *CONST, "--n", "101", "--json"])
    rep = json.loads(out)
    assert code == 0 and rep["result"]["min_alignment"] == 1.0
    code, out = run(["oracle-compare", "--gallery", "complex-twist", "--n", "10000", "--json",
                     "--out", str(tmp_path)])
    rep = json.loads(out)
    assert rep["result"]["min_alignment"] >= 1 - 1e-8
    assert rep["result"]["identities"]["max_det_defect"] <= 1e-12
    header, _ = read_csv(tmp_path / "oracle-compare.csv")
    assert header == ["t", "oracle_lambda1", "oracle_lambda2", "align1", "align2"]
    code, out = run(["oracle-compare", "--gallery", "c1-offdiag", "--n", "1001", "--json"])
    rep = json.loads(out)
    assert code == 0 and rep["result"]["min_alignment"] >= 1 - 1e-8
    assert rep["result"]["excluded_degenerate_points"] == 1


def test_gallery_list_and_run():
    code, out = run(["gallery", "list", "--json"])
    entries = json.loads(out)["entries"]
    assert code == 0 and len(entries) >= 9
    counts = {c: sum(e["category"] == c for e in entries) for c in ("distinct", "c1", "endpoint", "counterexample")}
    assert counts["distinct"] >= 3 and counts["c1"] >= 3 and counts["endpoint"] >= 1
    assert counts["counterexample"] == 2
    assert any(e["category"] == "distinct" and e["h_im"] != "0" for e in entries)
    for code_ in (2, 3, 4, 5, 6):
        assert any(e["expected_exit"] == code_ for e in entries)
    code, out = run(["gallery", "run", "paper-ex-2.1"])
    assert code == 0 and out.startswith("PASS paper-ex-2.1") and "observed 5" in out
    assert run(["gallery", "run"])[0] == 2
    assert run(["gallery", "run", "nope"])[0] == 2


def test_gallery_run_all(tmp_path):
    code, out = run(["gallery", "run-all", "--n", "2001", "--out", str(tmp_path)])
    assert code == 0, out
    rep = json.loads((tmp_path / "gallery.json").read_text())
    assert rep["all_passed"] and rep["n"] == 2001


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(fmt(x)) == x


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "sub" / "f.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two"
    assert os.listdir(p.parent) == ["f.txt"]


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "contdiag.cli", "gallery", "list"], capture_output=True,
                         text=True, check=True)
    assert "paper-ex-smooth" in out.stdout
