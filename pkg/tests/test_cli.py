import json
from importlib.resources import files
from pathlib import Path

import pytest

from pnsynth.cli import main

DATA = Path(__file__).parent / "data"
FIXTURE = str(files("pnsynth").joinpath("nets/production_line.json"))


def write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return str(p)


def fixture_decl():
    return json.loads(Path(FIXTURE).read_text(encoding="utf-8"))


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_fixture(capsys):
    code, out, _ = run(["analyze", FIXTURE], capsys)
    assert code == 0
    report = json.loads(out)
    assert len(report["forbidden"]) == 6 and len(report["border"]) == 6
    assert report["possible_state_count"] == 18
    assert "message" not in report


def test_analyze_text(capsys):
    code, out, _ = run(["analyze", FIXTURE, "--format", "text"], capsys)
    assert code == 0
    assert "P1P4P7" in out and "Φ" in out


def test_all_controllable(tmp_path, capsys):
    decl = fixture_decl()
    for t in decl["transitions"]:
        t["controllable"] = True
    code, out, _ = run(["analyze", write(tmp_path, "ctl.json", decl)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["forbidden"] == [] and report["message"] == "specification controllable"


def test_malformed_json(tmp_path, capsys):
    path = write(tmp_path, "bad.json", '{"places": [\n  {"id": "P1",}\n]}')
    code, _, err = run(["analyze", path], capsys)
    assert code == 2
    assert f"{path}:2:" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["analyze", str(tmp_path / "nope.json")], capsys)
    assert code == 2 and "nope.json" in err


def test_bad_declaration(tmp_path, capsys):
    decl = fixture_decl()
    decl["transitions"][0]["inputs"] = ["P99"]
    code, _, err = run(["synthesize", write(tmp_path, "x.json", decl)], capsys)
    assert code == 2 and "P99" in err


def test_state_cap(capsys):
    code, _, err = run(["analyze", FIXTURE, "--max-states", "3"], capsys)
    assert code == 3


def test_infeasible(tmp_path, capsys):
    decl = {
        "places": [
            {"id": "P1", "kind": "process", "initial": 1},
            {"id": "P2", "kind": "process", "initial": 0},
            {"id": "S1", "kind": "spec", "initial": 0},
            {"id": "S2", "kind": "spec", "initial": 1},
        ],
        "transitions": [
            {"id": "u", "controllable": False, "inputs": ["P1", "S1"], "outputs": ["P2", "S2"]},
            {"id": "v", "controllable": True, "inputs": ["P2", "S2"], "outputs": ["P1", "S1"]},
        ],
    }
    code, _, err = run(["synthesize", write(tmp_path, "inf.json", decl)], capsys)
    assert code == 4 and "dangerous" in err


def test_inadmissible(capsys):
    code, _, err = run(["synthesize", str(DATA / "inadmissible.json")], capsys)
    assert code == 5 and "uncontrollable" in err


def test_synthesize_fixture(tmp_path, capsys):
    code, _, _ = run(["synthesize", FIXTURE, "--out", str(tmp_path)], capsys)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    syn = report["synthesis"]
    assert syn["verified"] is True
    assert sorted(("".join(c["places"]), c["bound"]) for c in syn["constraints"]) == [
        ("P2P3P8", 1), ("P5P6P7", 1)
    ]
    assert syn["transitions"] == ["c1", "f1", "t1", "c2", "f2", "t2"]
    controlled = json.loads((tmp_path / "controlled_net.json").read_text(encoding="utf-8"))
    assert [p["id"] for p in controlled["places"]][-2:] == ["C1", "C2"]


def test_synthesize_text(capsys):
    code, out, _ = run(["synthesize", FIXTURE, "--format", "text", "--exact-cover", "--tie-break", "places"], capsys)
    assert code == 0
    assert "cover matrix:" in out and "m(P5) + m(P6) + m(P7) <= 1" in out


def test_verify(tmp_path, capsys):
    code, out, _ = run(["verify", FIXTURE], capsys)
    assert code == 0 and json.loads(out)["verification"]["ok"]
    tight = write(tmp_path, "c.json", [{"places": ["P5", "P6", "P7"], "bound": 1},
                                       {"places": ["P2", "P3", "P8"], "bound": 0}])
    code, out, _ = run(["verify", FIXTURE, "--constraints", tight], capsys)
    assert code == 6
    ce = json.loads(out)["verification"]["counterexample"]
    assert ce["reason"] == "admissible state unreachable"
    bad = write(tmp_path, "b.json", [{"places": ["Q"], "bound": 0}])
    assert run(["verify", FIXTURE, "--constraints", bad], capsys)[0] == 2


def test_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert main(["synthesize", FIXTURE, "--out", str(d)]) == 0
        assert main(["export-dot", FIXTURE, "--out", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"report.json", "controlled_net.json", "rg_real.dot", "rg_quasi.dot", "rg_controlled.dot"}
    json.loads(outs[0]["report.json"])


def test_export_dot(tmp_path):
    assert main(["export-dot", FIXTURE, "--out", str(tmp_path)]) == 0
    nodes = {}
    for name in ("rg_real", "rg_quasi", "rg_controlled"):
        text = (tmp_path / f"{name}.dot").read_text(encoding="utf-8")
        assert text.startswith("digraph")
        nodes[name] = text.count("label=\"P")
    assert nodes["rg_quasi"] >= nodes["rg_real"] == 18
    assert nodes["rg_controlled"] == 6


def test_one_place_net(tmp_path):
    path = write(tmp_path, "one.json", {"places": [{"id": "P1", "initial": 1}], "transitions": []})
    assert main(["export-dot", path, "--out", str(tmp_path)]) == 0
    for name in ("rg_real", "rg_quasi", "rg_controlled"):
        text = (tmp_path / f"{name}.dot").read_text(encoding="utf-8")
        assert text.count("->") == 0 and text.count("label=\"P1\"") == 1


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
