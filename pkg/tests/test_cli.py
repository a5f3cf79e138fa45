import json
import subprocess
import sys

import pytest

from helpers import FIXTURES, oracle_model, same_model

from treelogic import load_model, model_from_dict, parse
from treelogic.cli import main

ORACLE = str(FIXTURES / "fig_oracle.json")
FRAME = str(FIXTURES / "frame_two_level.json")
PROOF = str(FIXTURES / "proof_scheme10_from_scheme12.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_command(capsys):
    code, out, _ = run(capsys, "parse", "<>K Q1")
    assert code == 0 and out.strip() == "<>K Q1"
    code, out, _ = run(capsys, "parse", "--ast", "<>A")
    assert code == 0
    assert out.splitlines()[0] == "not"
    code, _, err = run(capsys, "parse", "A & & B")
    assert code == 2 and "error:" in err


def test_check_command(capsys):
    code, out, _ = run(capsys, "check", "--model", ORACLE, "--point", "q1",
                       "--open", "top", "<>K Q1")
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(capsys, "check", "--model", ORACLE, "--point", "q1",
                       "--open", "top", "K Q1")
    assert code == 1 and out.strip() == "false"
    code, out, _ = run(capsys, "check", "--json", "--model", ORACLE,
                       "--point", "q4", "--open", "top", "<>K ~Q2")
    assert code == 0 and json.loads(out)["holds"] is True
    code, _, err = run(capsys, "check", "--model", ORACLE, "--point", "q9",
                       "--open", "top", "A")
    assert code == 2
    code, _, err = run(capsys, "check", "--model", ORACLE, "--point", "q1",
                       "--open", "top", "--strict-atoms", "Mystery")
    assert code == 2 and "unknown atom" in err


def test_valid_in_model_and_treelike(capsys):
    code, out, _ = run(capsys, "valid-in-model", "--model", ORACLE,
                       "Q1 -> []Q1")
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(capsys, "valid-in-model", "--model", ORACLE, "K Q1")
    assert code == 1 and out.strip() == "false"
    code, out, _ = run(capsys, "treelike-check", "--model", ORACLE)
    assert code == 0 and out.strip() == "true"


def test_partition_command(capsys):
    code, out, _ = run(capsys, "partition", "--model", ORACLE, "--json", "K Q1")
    assert code == 0
    data = json.loads(out)
    assert data["family_sizes"]["K Q1"] == 2
    assert sorted(map(tuple, data["members"])) == \
        [("q1", "q2"), ("q1", "q2", "q3", "q4")]


def test_filtrate_and_extract_commands(tmp_path, capsys):
    out_model = tmp_path / "out.json"
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "extract", "--model", ORACLE,
                       "-o", str(out_model), "--report", str(report),
                       "--json", "<>K Q1")
    assert code == 0
    data = json.loads(report.read_text())
    assert data["output_points"] == 2 and data["output_opens"] == 2
    assert data["bound_points"] == 512 and data["bound_opens"] == 8
    small = load_model(out_model)
    assert len(small.space.points) == 2

    code, _, _ = run(capsys, "filtrate", "--model", ORACLE,
                     "-o", str(out_model), "K Q1")
    assert code == 0
    filtered = load_model(out_model)
    assert len(filtered.space.opens) == 2


def test_sat_command(tmp_path, capsys):
    witness = tmp_path / "witness.json"
    code, out, err = run(capsys, "sat", "--use-bound", "-o", str(witness),
                         "L A & L ~A")
    assert code == 0 and out.strip() == "sat"
    model = load_model(witness)
    assert len(model.space.points) == 2
    assert "searched" in err

    code, out, _ = run(capsys, "sat", "--use-bound", "K A & ~A")
    assert code == 1 and out.strip() == "unsat_proved"
    code, out, _ = run(capsys, "sat", "--max-points", "2", "K A & ~A")
    assert code == 2 and out.strip() == "unsat_within"
    code, _, err = run(capsys, "sat", "A")
    assert code == 2 and "error" in err


def test_valid_command(tmp_path, capsys):
    counter = tmp_path / "counter.json"
    code, out, _ = run(capsys, "valid", "--use-bound", "A -> K A",
                       "-o", str(counter))
    assert code == 1 and out.strip() == "countermodel"
    assert load_model(counter).space.points == ("p1", "p2")
    code, out, _ = run(capsys, "valid", "--use-bound",
                       "[](([]A -> B)) | []([]B -> A)")
    assert code == 0 and out.strip() == "valid"
    code, out, _ = run(capsys, "valid", "--max-points", "2", "K A -> []K A")
    assert code == 2 and out.strip() == "inconclusive"


def test_prove_command(capsys):
    code, out, _ = run(capsys, "prove", "--proof", PROOF)
    assert code == 0 and out.startswith("accepted:")
    code, out, _ = run(capsys, "prove", "--proof", PROOF, "--system", "mp")
    assert code == 1 and "rejected at line 8" in out
    code, out, _ = run(capsys, "prove", "--proof", PROOF, "--json")
    assert code == 0 and json.loads(out)["accepted"] is True


def test_soundness_command(capsys):
    code, out, _ = run(capsys, "soundness", "--max-points", "2",
                       "--schemes", "1-12", "--atoms", "1", "--depth", "1")
    assert code == 0 and out.strip() == "0 violations"
    code, out, _ = run(capsys, "soundness", "--max-points", "3",
                       "--schemes", "C10", "--atoms", "1", "--depth", "1")
    assert code == 1 and "violations" in out
    code, out, _ = run(capsys, "soundness", "--max-points", "3",
                       "--schemes", "S13", "--atoms", "1", "--depth", "1",
                       "--all-spaces", "--json")
    assert code == 1
    data = json.loads(out)
    assert data["violations"]
    assert not model_from_dict(
        data["violations"][0]["model"]).space.is_treelike()


def test_unfold_command(tmp_path, capsys):
    out_path = tmp_path / "unfolded.json"
    code, out, _ = run(capsys, "unfold", "--frame", FRAME, "--root", "r1",
                       "-o", str(out_path))
    assert code == 0 and "open sizes: [6, 3, 2, 2]" in out
    golden = load_model(FIXTURES / "frame_two_level_unfolded.json")
    assert same_model(load_model(out_path), golden)
    code, _, err = run(capsys, "unfold", "--frame", FRAME, "--root", "s1",
                       "-o", str(out_path))
    assert code == 2 and "not generated" in err


def test_build_commands(tmp_path, capsys):
    oracle_path = tmp_path / "oracle.json"
    code, out, _ = run(capsys, "build-oracle",
                       "--points", "q1,q2,q3,q4",
                       "--question", "Q1=q1,q2",
                       "--question", "Q2=q1,q2,q3",
                       "-o", str(oracle_path))
    assert code == 0
    assert same_model(load_model(oracle_path), oracle_model())

    stream_path = tmp_path / "stream.json"
    code, out, _ = run(capsys, "build-stream", "--depth", "2",
                       "-o", str(stream_path))
    assert code == 0
    assert len(load_model(stream_path).space.opens) == 7


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["sat", "--help"])
    assert exit_info.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--max-points", "--max-opens", "--use-bound", "--all-spaces",
                 "--formula-file", "--json"):
        assert flag in out
    with pytest.raises(SystemExit):
        main(["soundness", "--help"])
    out = capsys.readouterr().out
    for flag in ("--schemes", "--atoms", "--depth", "--jobs", "--all-spaces"):
        assert flag in out


def test_outputs_are_reproducible(capsys):
    first = run(capsys, "--seed", "1", "soundness", "--max-points", "2",
                "--schemes", "7-9", "--atoms", "1", "--depth", "1", "--json")
    second = run(capsys, "--seed", "1", "soundness", "--max-points", "2",
                 "--schemes", "7-9", "--atoms", "1", "--depth", "1", "--json")
    assert first[1] == second[1]        # byte-identical stdout
    third = run(capsys, "sat", "--use-bound", "--json", "K A & ~A")
    fourth = run(capsys, "sat", "--use-bound", "--json", "K A & ~A")
    assert third[1] == fourth[1]


def test_console_entry_point_runs():
    result = subprocess.run(
        [sys.executable, "-m", "treelogic", "parse", "K A -> A"],
        capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.strip() == "K A -> A"
