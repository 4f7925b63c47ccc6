"""CLI surface: golden verdicts, exit codes, stable output."""

import json
import subprocess
import sys

from cuntzcal.cli import main
from cuntzcal.permdecide import PermUnitary, decide_automorphism

FIXTURE = "fixtures/three_cycle_2_4.json"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_fixture_golden(capsys):
    code, out, _ = run(capsys, "check", "--perm", FIXTURE)
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == 1
    assert payload["aut"]["status"] == "automorphism"
    assert payload["aut"]["m"] == 6
    assert payload["aut_order"] == 6
    assert payload["out_order"] == 6
    assert payload["fixes_S2"] is True and payload["fixes_S1"] is False
    assert all(tree["is_tree"] for tree in payload["trees"])
    assert payload["diagonal"]["is_aut"] is True
    # The reported inverse agrees with the library decision.
    verdict = decide_automorphism(
        PermUnitary.from_json(open(FIXTURE).read())
    )
    assert payload["aut"]["inverse_map"] == list(verdict.inverse.table)
    assert payload["aut"]["inverse_level"] == verdict.inverse.k


def test_check_output_is_byte_stable(capsys):
    _, first, _ = run(capsys, "check", "--perm", FIXTURE)
    _, second, _ = run(capsys, "check", "--perm", FIXTURE)
    assert first == second


def test_check_budget_exit_code(capsys):
    code, out, _ = run(capsys, "check", "--perm", FIXTURE, "--budget", "2")
    assert code == 2
    assert json.loads(out)["aut"]["status"] == "undecided"


def test_census_cli_matches_library(capsys):
    code, out, _ = run(
        capsys, "census", "--n", "2", "--k", "2", "--mode", "brute"
    )
    assert code == 0
    payload = json.loads(out)
    assert (payload["b"], payload["d"]) == (8, 4)
    code, orbit_out, _ = run(
        capsys, "census", "--n", "2", "--k", "2", "--workers", "1"
    )
    orbit = json.loads(orbit_out)
    for key in ("b", "d", "undecided", "shapes"):
        assert orbit[key] == payload[key]


def test_census_cli_warns_on_ignored_checkpoint(tmp_path, capsys):
    log = tmp_path / "sweep.jsonl"
    code, out, err = run(
        capsys,
        "census", "--n", "2", "--k", "2",
        "--classes", "--checkpoint", str(log),
    )
    assert code == 0
    assert json.loads(out)["class_count"] == 2
    assert "--checkpoint is ignored" in err
    assert not log.exists()


def test_compose_cancels_inverse(tmp_path, capsys):
    inverse = decide_automorphism(
        PermUnitary.from_json(open(FIXTURE).read())
    ).inverse
    inv_path = tmp_path / "inv.json"
    inv_path.write_text(inverse.to_json())
    code, out, _ = run(capsys, "compose", "--a", FIXTURE, "--b", str(inv_path))
    assert code == 0
    payload = json.loads(out)
    assert payload["k"] == 0 and payload["map"] == [0]


def test_order_fixture(capsys):
    code, out, _ = run(capsys, "order", "--perm", FIXTURE)
    assert code == 0
    payload = json.loads(out)
    assert payload["aut_order"] == 6 and payload["out_order"] == 6


def test_order_with_tight_max_is_undecided(capsys):
    code, out, _ = run(capsys, "order", "--perm", FIXTURE, "--max", "3")
    assert code == 2
    assert json.loads(out)["aut_order"] is None


def test_trees_level_three(capsys):
    code, out, _ = run(capsys, "trees", "--n", "2", "--k", "3")
    assert code == 0
    payload = json.loads(out)
    # Four rooted trees on four nodes; over n=2 the root allows one child,
    # so only the chain and the one-deep fork admit endomorphisms.
    assert len(payload["shapes"]) == 4
    assert sum(rec["endo"] for rec in payload["shapes"]) == 2


def test_normalform_identity(tmp_path, capsys):
    expr = tmp_path / "expr.txt"
    expr.write_text("S1* S1")
    code, out, _ = run(capsys, "normalform", "--expr", str(expr))
    assert code == 0
    assert out.strip() == "1"


def test_normalform_json_and_out_file(tmp_path, capsys):
    expr = tmp_path / "expr.txt"
    expr.write_text("1/2 S11 S2* ( S2 S1* + S12 S21* )")
    target = tmp_path / "result.json"
    code, out, _ = run(
        capsys, "normalform", "--expr", str(expr), "--json", "--out", str(target)
    )
    assert code == 0 and out == ""
    payload = json.loads(target.read_text())
    assert payload["terms"] == [
        {"alpha": "11", "beta": "1", "re": "1/2", "im": "0"}
    ]


def test_error_exit_code(tmp_path, capsys):
    bogus = tmp_path / "bogus.json"
    bogus.write_text("{not json")
    code, _, err = run(capsys, "check", "--perm", str(bogus))
    assert code == 1
    assert "error:" in err
    missing = tmp_path / "missing.json"
    code, _, err = run(capsys, "check", "--perm", str(missing))
    assert code == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cuntzcal.cli", "order", "--perm", FIXTURE],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["aut_order"] == 6
