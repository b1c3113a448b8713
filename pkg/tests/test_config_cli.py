import os

import pytest

from iqbench.cli import dispatch
from iqbench.config import (InvalidValue, MissingSeed, UnknownKey,
                            parse_config, parse_config_text, write_config)


def test_defaults_match_documentation():
    config = parse_config(None, {"master_seed": 1})
    assert config.games == 100
    assert config.max_steps_per_game == 1000
    assert config.n_states == 20
    assert config.count == 200
    assert config.small_step_budget == 100
    assert config.threshold == 0.7
    assert config.figures is True


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("master_seed = 5\nn_states = 7\n# comment\n\ngames = 12\n")
    config = parse_config(path, {"n_states": 9})
    assert config.master_seed == 5
    assert config.n_states == 9
    assert config.games == 12


def test_unknown_key_is_named():
    with pytest.raises(UnknownKey) as err:
        parse_config_text("n_sates = 3\n")
    assert "n_sates" in str(err.value)


def test_bad_value_rejected():
    with pytest.raises(InvalidValue):
        parse_config_text("games = soon\n")


def test_missing_seed():
    config = parse_config(None, {})
    with pytest.raises(MissingSeed):
        config.require_seed()


def test_config_roundtrips_through_file(tmp_path):
    config = parse_config(None, {"master_seed": 3, "agents": ("random", "dead:0"),
                                 "figures": False, "p_emit": 0.75})
    path = tmp_path / "cfg"
    write_config(config, path)
    assert parse_config(path) == config


# --- CLI ----------------------------------------------------------------------


def run_cli(*argv) -> int:
    return dispatch(list(argv))


def test_unknown_subcommand_exits_one(capsys):
    assert run_cli("frobnicate") == 1
    assert run_cli() == 1


def test_missing_seed_exits_one(capsys):
    assert run_cli("eval") == 1
    assert "seed" in capsys.readouterr().err


def test_gen_suite_deterministic(tmp_path):
    a, b = tmp_path / "a.suite", tmp_path / "b.suite"
    args = ["gen-suite", "--seed", "9", "--n-states", "3", "--count", "4"]
    assert run_cli(*args, "--suite", str(a)) == 0
    assert run_cli(*args, "--suite", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_eval_end_to_end(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli("eval", "--seed", "4", "--agent", "random",
                   "--n-states", "4", "--count", "6", "--games", "5",
                   "--max-steps", "20", "--out", str(out), "--logs")
    assert code == 0
    printed = capsys.readouterr().out
    assert "IQ=" in printed and "qualifies=no" in printed
    assert (out / "report.csv").exists()
    assert (out / "per_world.csv").exists()
    assert (out / "report.png").exists()
    lives = sorted((out / "lives").glob("*.liferec"))
    assert len(lives) == 6
    assert lives[0].read_text().startswith("liferec/1\n")


def test_eval_reproducible_bytes(tmp_path):
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        code = run_cli("eval", "--seed", "11", "--agent", "dead:0",
                       "--n-states", "3", "--count", "5", "--games", "4",
                       "--max-steps", "15", "--out", str(out), "--logs", "--no-figures")
        assert code == 0
        outs.append(out)
    for rel in ["report.csv", "per_world.csv"] + [
            f"lives/{p.name}" for p in sorted((outs[0] / "lives").glob("*"))]:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel


def test_eval_respects_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("master_seed = 4\nn_states = 3\ncount = 4\ngames = 3\n"
                   "max_steps_per_game = 10\nout_dir = " + str(tmp_path / "o") + "\n"
                   "figures = false\n")
    assert run_cli("eval", "--config", str(cfg), "--agent", "dead:1") == 0
    report = (tmp_path / "o" / "report.csv").read_text()
    assert "dead:1" in report


def test_eval_parallel_same_bytes(tmp_path):
    args = ["eval", "--seed", "21", "--agent", "random", "--n-states", "3",
            "--count", "6", "--games", "4", "--max-steps", "10", "--no-figures"]
    out1, out2 = tmp_path / "serial", tmp_path / "parallel"
    assert run_cli(*args, "--out", str(out1)) == 0
    os.environ["IQBENCH_THREADS"] = "3"
    try:
        assert run_cli(*args, "--out", str(out2)) == 0
    finally:
        del os.environ["IQBENCH_THREADS"]
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
    assert (out1 / "per_world.csv").read_bytes() == (out2 / "per_world.csv").read_bytes()


def test_compare_needs_two_agents(tmp_path):
    assert run_cli("compare", "--seed", "3", "--agents", "random",
                   "--out", str(tmp_path)) == 1


def test_compare_end_to_end(tmp_path, capsys):
    out = tmp_path / "cmp"
    code = run_cli("compare", "--seed", "3", "--agents", "random,dead:0",
                   "--n-states", "3", "--count", "5", "--games", "4",
                   "--max-steps", "12", "--out", str(out))
    assert code == 0
    text = (out / "compare.csv").read_text()
    assert text.startswith("# compare/1\n")
    assert "random" in text and "dead:0" in text
    assert (out / "compare.png").exists()


def test_limit_iq_subcommand(tmp_path, capsys):
    out = tmp_path / "lim"
    code = run_cli("limit-iq", "--seed", "6", "--agent", "random",
                   "--schedule", "2:4:10,2:6:12,3:8:14,3:10:16,4:12:18,4:14:20",
                   "--out", str(out), "--no-figures")
    assert code == 0
    assert (out / "series.csv").read_text().startswith("# series/1\n")
    assert (out / "limits.csv").read_text().startswith("# limits/1\n")
    assert "new_iq=" in capsys.readouterr().out


def test_alt_measures_subcommand(tmp_path, capsys):
    out = tmp_path / "alt"
    code = run_cli("alt-measures", "--seed", "6", "--agents", "random,dead:0",
                   "--c-max", "3", "--samples-per-c", "4", "--horizon", "40",
                   "--n-states", "3", "--count", "4", "--games", "4",
                   "--max-steps", "10", "--out", str(out), "--no-figures")
    assert code == 0
    for name in ("terms.csv", "corrected.csv", "separation.csv"):
        assert (out / name).exists(), name
    printed = capsys.readouterr().out
    assert "expected_complexity=" in printed


def test_fatal_audit_subcommand(tmp_path, capsys):
    out = tmp_path / "audit"
    code = run_cli("fatal-audit", "--seed", "2", "--world", "trap",
                   "--agent", "dead:0", "--games", "6", "--max-steps", "3",
                   "--out", str(out), "--no-figures")
    assert code == 0
    printed = capsys.readouterr().out
    assert "fatal_groups=[[1]]" in printed
    assert (out / "audit.csv").read_text().startswith("# audit/1\n")


def test_oscillation_demo_subcommand(tmp_path, capsys):
    out = tmp_path / "osc"
    code = run_cli("oscillation-demo", "--depth", "10", "--out", str(out),
                   "--no-figures")
    assert code == 0
    printed = capsys.readouterr().out
    assert "depth=10 checkpoints=11" in printed
    assert "new_iq=0.5" in printed
    assert (out / "oscillation.csv").exists()
    assert (out / "oscillation_limits.csv").exists()
