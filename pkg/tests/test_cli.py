import json

import pytest

from adelic import bundles as bd
from adelic.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pnl_check(capsys):
    assert run(capsys, "pnl", "2", "4", "--check")[:2] == (0, "12 12 OK\n")


def test_pnl_trivial_and_factored(capsys):
    assert run(capsys, "pnl", "1", "100")[1] == "1\n"
    assert run(capsys, "pnl", "3", "2", "--factored")[1] == "2 = 2^1\n"
    assert run(capsys, "pnl", "3", "4", "--method", "both")[1] == "12 12\n"


def test_pnl_bad_input_and_cap(capsys):
    assert run(capsys, "pnl", "0", "3")[0] == 2
    # 12 parts of 40: far beyond the brute-force composition cap
    code, _, err = run(capsys, "pnl", "12", "40", "--method", "brute")
    assert code == 2 and "cap" in err


def test_pnl_grid(capsys):
    code, out, _ = run(capsys, "pnl-grid", "--n-max", "2", "--l-max", "4")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,l,p,factored"
    assert "2,4,12,2^2 * 3^1" in lines


@pytest.mark.parametrize("args", [["standard", "--n", "3"], ["an", "--n", "3"], ["eq", "--q", "1/4"], ["mh", "--n", "2"]])
def test_gallery_round_trips_through_bundle(capsys, tmp_path, args):
    code, out, _ = run(capsys, "gallery", *args)
    assert code == 0
    doc = json.loads(out)
    assert "metadata" in doc and "expected" in doc["metadata"]
    path = tmp_path / "b.json"
    path.write_text(out)
    code, out, _ = run(capsys, "bundle", str(path), "slope")
    assert code == 0
    assert json.loads(out) == doc["metadata"]["expected"]["slope"]
    code, out, _ = run(capsys, "bundle", str(path), "dual")
    assert bd.bundle_from_json(json.loads(out)).dim == doc["dim"]


def test_bundle_eq_examples(capsys, tmp_path):
    path = tmp_path / "eq.json"
    path.write_text(run(capsys, "gallery", "eq", "--q", "1/4")[1])
    assert json.loads(run(capsys, "bundle", str(path), "slope")[1]) == {"e": "0", "logs": {"5": "-1/8"}}
    tensor = tmp_path / "t.json"
    tensor.write_text(run(capsys, "bundle", str(path), "tensor")[1])
    out = json.loads(run(capsys, "bundle", str(tensor), "height", "--x", "1,0,0,-1")[1])
    assert out == {"exact": {"e": "0", "logs": {"2": "1/2", "5": "1/4"}}}


def test_bundle_an_minsearch(capsys, tmp_path):
    path = tmp_path / "a3.json"
    path.write_text(run(capsys, "gallery", "an", "--n", "3")[1])
    out = json.loads(run(capsys, "bundle", str(path), "minsearch", "--radius", "2")[1])
    assert out["height"] == {"exact": {"e": "0", "logs": {"2": "1/2"}}}
    assert out["witness"] == [1, 0, 0]


def test_bundle_powers_and_maxslope(capsys, tmp_path):
    path = tmp_path / "s.json"
    path.write_text(run(capsys, "gallery", "standard", "--n", "2")[1])
    sym = json.loads(run(capsys, "bundle", str(path), "sym", "--l", "3")[1])
    assert sym["dim"] == 4
    assert json.loads(run(capsys, "bundle", str(path), "ext", "--l", "2")[1])["dim"] == 1
    ms = json.loads(run(capsys, "bundle", str(path), "maxslope")[1])
    assert ms["kind"] == "Exact" and ms["value"] == {"e": "0", "logs": {}}
    assert run(capsys, "bundle", str(path), "ext", "--l", "3")[0] == 2


def test_bundle_errors(capsys, tmp_path):
    assert run(capsys, "bundle", str(tmp_path / "missing.json"), "slope")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2, "arch_gram": [["1", "2"], ["2", "1"]]}')
    assert run(capsys, "bundle", str(bad), "slope")[0] == 2
    bad.write_text("not json")
    assert run(capsys, "bundle", str(bad), "slope")[0] == 2
    good = tmp_path / "good.json"
    good.write_text('{"dim": 2}')
    assert run(capsys, "bundle", str(good), "height", "--x", "1,2,3")[0] == 2
    assert run(capsys, "bundle", str(good), "height", "--x", "0,0")[0] == 2


def test_verify_only_lcm(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--only", "lcm.chain", "--output", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["entries"] and all(e["statement_id"].startswith("lcm") for e in doc["entries"])


def test_verify_radius_zero(capsys):
    code, out, _ = run(capsys, "verify", "--only", "min,counterexample", "--radius", "0", "--format", "json")
    assert code == 0
    assert "Undecided" in {e["verdict"] for e in json.loads(out)["entries"]}


def test_verify_markdown_and_csv(capsys):
    code, out, _ = run(capsys, "verify", "--only", "counterexample", "--radius", "1", "--format", "md")
    assert code == 0 and out.startswith("Summary:")
    code, out, _ = run(capsys, "verify", "--only", "counterexample", "--radius", "1", "--format", "csv")
    assert out.startswith("statement_id,")


def test_verify_env_override(capsys, monkeypatch):
    monkeypatch.setenv("ADELIC_SEARCH_RADIUS", "0")
    code, out, _ = run(capsys, "verify", "--only", "min")
    assert code == 0
    doc = json.loads(out)
    assert doc["header"]["config"]["search_radius"] == 0
    monkeypatch.setenv("ADELIC_PRECISION_BITS", "5")
    assert run(capsys, "verify", "--only", "min")[0] == 2


def test_verify_io_error(capsys, tmp_path):
    target = tmp_path / "no" / "such" / "dir" / "r.json"
    assert run(capsys, "verify", "--only", "lcm.chain", "--output", str(target))[0] == 3


def test_verify_byte_identical(capsys):
    first = run(capsys, "verify", "--only", "convexity", "--trials", "15")[1]
    second = run(capsys, "verify", "--only", "convexity", "--trials", "15")[1]
    assert first == second
