import io
import json
import subprocess
import sys

import pytest

from hortonlab import (
    SamplerConfig,
    TokunagaSequence,
    estimate,
    horton_exponent,
    horton_statistics,
    zeta_by_recursion,
)
from hortonlab.cli import run
from hortonlab.newick import read_trees


def invoke(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def parse_csv(text):
    """``(header dict, {table: [row dicts]})`` from a CSV report."""
    header, tables, name, cols = {}, {}, None, None
    for line in text.splitlines():
        if not line:
            name = cols = None
        elif line.startswith("# table="):
            name = line[len("# table=") :]
            tables[name] = []
        elif line.startswith("# "):
            key, _, value = line[2:].partition("=")
            header[key] = value
        elif cols is None:
            cols = line.split(",")
        else:
            tables[name].append(dict(zip(cols, line.split(","))))
    return header, tables


GEO = ("--family", "geometric", "--a", "1", "--c", "2")


def test_predict_geometric():
    code, out = invoke("predict", *GEO, "--K", "4")
    assert code == 0
    header, tables = parse_csv(out)
    assert header["R"] == "4"
    assert [r["zeta_k"] for r in tables["zeta"]] == ["43", "11", "3", "1"]


def test_predict_explicit_empty_is_two():
    code, out = invoke("predict", "--family", "explicit", "--T", "", "--K", "3")
    assert code == 0
    header, tables = parse_csv(out)
    assert header["R"] == "2"
    assert [r["zeta_k"] for r in tables["zeta"]] == ["4", "2", "1"]


def test_predict_cells_are_exact_library_values():
    seq = TokunagaSequence.differentiated(0.7, 1.3)
    code, out = invoke("predict", "--family", "differentiated", "--a", "0.7", "--c", "1.3", "--K", "9")
    header, tables = parse_csv(out)
    table = zeta_by_recursion(seq, 9)
    assert [float(r["zeta_k"]) for r in tables["zeta"]] == table.zeta.tolist()
    assert [float(r["xi_k"]) for r in tables["zeta"]] == table.xi.tolist()
    assert float(header["R"]) == horton_exponent(seq).R


def test_predict_json():
    code, out = invoke("predict", *GEO, "--K", "3", "--format", "json")
    doc = json.loads(out)
    assert doc["command"] == "predict"
    assert doc["results"]["R"] == 4.0
    assert [r["zeta_k"] for r in doc["tables"]["zeta"]] == [11, 3, 1]


def test_analyze_reference_tree(tmp_path):
    code, out = invoke("analyze", "--input", "tests/data/order3_reference.nwk")
    assert code == 0
    header, tables = parse_csv(out)
    assert header["trees"] == "1"
    assert {r["k"]: r["N_k"] for r in tables["branches"]} == {"1": "10", "2": "3", "3": "1"}
    pairs = {(r["i"], r["j"]): r["N_ij"] for r in tables["side_branches"]}
    assert pairs == {("1", "2"): "3", ("1", "3"): "1", ("2", "3"): "1"}


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "geometric", "a": 1, "c": 2, "K": 5}))
    code, out = invoke("predict", "--config", str(cfg), "--K", "3")
    assert code == 0
    assert len(parse_csv(out)[1]["zeta"]) == 3


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "geometric", "bogus": 1}))
    assert invoke("predict", "--config", str(cfg), "--K", "3")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ("predict", "--family", "geometric", "--a", "-1", "--c", "2", "--K", "3"),
        ("predict", *GEO),
        ("predict", *GEO, "--K", "0"),
        ("simulate", "--family", "geometric", "--a", "0.5", "--c", "2", "--K", "3", "--dist", "deterministic"),
        ("frobnicate",),
        ("verify", *GEO, "--Kmax", "3", "--jmax", "9"),
    ],
)
def test_validation_errors_exit_1(argv):
    assert invoke(*argv)[0] == 1


def test_runtime_errors_exit_2(tmp_path):
    assert invoke("analyze", "--input", str(tmp_path / "missing.nwk"))[0] == 2
    assert invoke("predict", "--family", "geometric", "--a", "10", "--c", "10", "--K", "400")[0] == 2


def test_malformed_newick_is_validation_error(tmp_path):
    bad = tmp_path / "bad.nwk"
    bad.write_text("(a,b,c);\n")
    assert invoke("analyze", "--input", str(bad))[0] == 1


def test_simulate_byte_identical_repeats():
    argv = ("simulate", *GEO, "--K", "4", "--samples", "100", "--seed", "3")
    assert invoke(*argv) == invoke(*argv)


def test_simulate_matches_library():
    code, out = invoke("simulate", *GEO, "--K", "4", "--samples", "50", "--seed", "9")
    rep = estimate(SamplerConfig(TokunagaSequence.geometric(1, 2), 4, seed=9, samples=50))
    rows = parse_csv(out)[1]["branches"]
    assert [float(r["mean_Nk"]) for r in rows] == rep.mean_Nk[1:].tolist()
    assert [float(r["se_Nk"]) for r in rows] == rep.se_Nk[1:].tolist()


def test_emit_trees_then_analyze(tmp_path):
    path = tmp_path / "t.nwk"
    code, out = invoke("simulate", *GEO, "--K", "4", "--samples", "1", "--seed", "5", "--emit-trees", str(path))
    assert code == 0
    sim = parse_csv(out)[1]["branches"]
    code, out = invoke("analyze", "--input", str(path))
    ana = parse_csv(out)[1]["branches"]
    assert [float(r["mean_Nk"]) for r in sim] == [float(r["N_k"]) for r in ana]
    stats = horton_statistics(read_trees(path)[0])
    assert [stats.N(k) for k in range(1, 5)] == [int(r["N_k"]) for r in ana]


def test_verify_and_prunecheck_run():
    code, out = invoke("verify", *GEO, "--Kmax", "30")
    header, tables = parse_csv(out)
    assert code == 0 and header["diverged"] == "false"
    code, out = invoke("prunecheck", *GEO, "--K", "3", "--samples", "50", "--seed", "2")
    header, _ = parse_csv(out)
    assert code == 0 and header["identity_violations"] == "0"


def test_missing_seed_is_reported():
    proc = subprocess.run(
        [sys.executable, "-m", "hortonlab", "simulate", *GEO, "--K", "3", "--samples", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stderr.startswith("seed=")


def test_out_flag_writes_file(tmp_path):
    path = tmp_path / "r.csv"
    code, out = invoke("predict", *GEO, "--K", "3", "--out", str(path))
    assert code == 0 and out == ""
    assert "# R=4" in path.read_text()
