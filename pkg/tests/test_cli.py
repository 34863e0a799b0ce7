"""Command-line behavior: exit codes, formats, flags, determinism."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from gthm import cli

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fx(name):
    return str(FIXTURES / name)


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- exit codes ----------------------------------------------------------


def test_prove_proved_exits_zero(capsys):
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "20")
    assert code == 0
    assert out.rstrip().endswith("Check whether OD = CD ... PROVED")


def test_prove_refuted_exits_one(capsys):
    code, out, err = run(capsys, "prove", fx("parallelogram_bad.gthm"),
                         "--samples", "20")
    assert code == 1
    assert "REFUTED" in out


def test_prove_underivable_exits_two(capsys):
    code, out, err = run(capsys, "prove", fx("unreachable.gthm"),
                         "--samples", "5")
    assert code == 2
    assert "INCONCLUSIVE: no derivation schedule" in out


def test_prove_degenerate_exits_two(capsys):
    code, out, err = run(capsys, "prove", fx("degenerate.gthm"),
                         "--samples", "5")
    assert code == 2
    assert "degenerate hypotheses" in out


def test_missing_file_exits_three(capsys):
    code, out, err = run(capsys, "prove", "no_such_file.gthm")
    assert code == 3
    assert err.startswith("gthm: cannot read input")


def test_parse_error_exits_three(tmp_path, capsys):
    bad = tmp_path / "bad.gthm"
    bad.write_text("point A = nonsense(1)\n")
    code, out, err = run(capsys, "prove", str(bad))
    assert code == 3
    assert err.startswith("gthm:")


# --- formats -------------------------------------------------------------


def test_prove_emits_json(capsys):
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "20", "--emit", "json")
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "PROVED"
    assert len(data["steps"]) == 15


def test_prove_emits_dot(capsys):
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "5", "--emit", "dot")
    assert code == 0
    assert out.startswith("digraph derivation {")


def test_prove_emits_scene(capsys):
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "5", "--emit", "scene")
    assert code == 0
    assert "point O = (0, 0)" in out


def test_graph_emits_dot_with_goals(capsys):
    code, out, err = run(capsys, "graph", fx("parallelogram.gthm"),
                         "--samples", "5")
    assert code == 0
    assert '"DO"' in out and '"CD"' in out


def test_graph_styles_pending_nodes_and_exits_two(capsys):
    code, out, err = run(capsys, "graph", fx("unreachable.gthm"),
                         "--samples", "5")
    assert code == 2
    assert out.startswith("digraph derivation {")
    assert "style=dashed" in out


def test_graph_rejects_text_format(capsys):
    code, out, err = run(capsys, "graph", fx("parallelogram.gthm"),
                         "--emit", "text")
    assert code == 3
    assert "cannot emit" in err


def test_check_rejects_dot_format(capsys):
    code, out, err = run(capsys, "check", fx("parallelogram.gthm"),
                         "--emit", "dot")
    assert code == 3


# --- the oracle-only command ----------------------------------------------


def test_check_proves_without_derivation(capsys):
    code, out, err = run(capsys, "check", fx("imo2012.gthm"),
                         "--samples", "20")
    assert code == 0
    assert "oracle only" in out


def test_check_refutes_bad_claim(capsys):
    code, out, err = run(capsys, "check", fx("parallelogram_bad.gthm"),
                         "--samples", "10")
    assert code == 1


def test_check_degenerate_exits_two(capsys):
    code, out, err = run(capsys, "check", fx("degenerate.gthm"),
                         "--samples", "5")
    assert code == 2


@pytest.mark.parametrize("name", ["parallelogram.gthm",
                                  "parallelogram_bd.gthm",
                                  "parallelogram_bad.gthm",
                                  "imo2012.gthm",
                                  "degenerate.gthm"])
def test_prove_and_check_agree_on_fully_derivable_fixtures(name, capsys):
    # unreachable.gthm is the deliberate exception: its claim is true
    # by coordinates but admits no derivation, so prove stays
    # inconclusive while check passes
    prove_code, _, _ = run(capsys, "prove", fx(name), "--samples", "10")
    check_code, _, _ = run(capsys, "check", fx(name), "--samples", "10")
    assert prove_code == check_code


# --- flags ---------------------------------------------------------------


def test_seed_env_var_is_honored(capsys, monkeypatch):
    monkeypatch.setenv("GRAATP_SEED", "7")
    code, out_env, err = run(capsys, "prove", fx("parallelogram.gthm"),
                             "--samples", "5", "--emit", "json")
    monkeypatch.delenv("GRAATP_SEED")
    code, out_flag, err = run(capsys, "prove", fx("parallelogram.gthm"),
                              "--samples", "5", "--emit", "json",
                              "--seed", "7")
    assert out_env == out_flag


def test_seed_flag_overrides_env(capsys, monkeypatch):
    monkeypatch.setenv("GRAATP_SEED", "7")
    code, out_a, _ = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "5", "--emit", "json", "--seed", "42")
    monkeypatch.delenv("GRAATP_SEED")
    code, out_b, _ = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "5", "--emit", "json")
    assert out_a == out_b


def test_bad_env_seed_is_an_input_error(capsys, monkeypatch):
    monkeypatch.setenv("GRAATP_SEED", "not-a-number")
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"))
    assert code == 3
    assert "GRAATP_SEED" in err


@pytest.mark.parametrize("flags", [("--samples", "0"),
                                   ("--tol", "0"),
                                   ("--tol", "-1e-9"),
                                   ("--max-nodes", "0"),
                                   ("--range", "5:1"),
                                   ("--range", "0:4"),
                                   ("--range", "nonsense")])
def test_invalid_flag_values_exit_three(capsys, flags):
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"), *flags)
    assert code == 3
    assert err.startswith("gthm:")


def test_unknown_flag_exits_three(capsys):
    code, out, err = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--bogus")
    assert code == 3


def test_custom_range_shifts_samples(capsys):
    code, out_a, _ = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "5", "--emit", "scene")
    code, out_b, _ = run(capsys, "prove", fx("parallelogram.gthm"),
                         "--samples", "5", "--emit", "scene",
                         "--range", "20:30")
    assert code == 0
    assert out_a != out_b


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0


# --- determinism -----------------------------------------------------------


@pytest.mark.parametrize("emit", ["text", "json", "dot"])
def test_output_bytes_stable_across_runs(capsys, emit):
    args = ("prove", fx("parallelogram.gthm"), "--samples", "20",
            "--emit", emit, "--seed", "11")
    _, out_a, _ = run(capsys, *args)
    _, out_b, _ = run(capsys, *args)
    assert out_a == out_b
    assert out_a.endswith("\n")


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "gthm.cli", "prove",
         fx("parallelogram.gthm"), "--samples", "5"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PROVED" in proc.stdout
