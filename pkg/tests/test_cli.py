"""CLI behavior through CliRunner; commands stay thin over the service layer."""

import json

import pytest
from click.testing import CliRunner

from pricing_lab.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_run_prints_trace_json(runner):
    result = runner.invoke(main, ["run", "--algo", "oracle", "--horizon", "16", "--seed", "2"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert body["key"] == "oracle-uniform-d5-T16-s2"
    assert body["final_regret"] == 0.0


def test_run_requires_an_algorithm(runner):
    result = runner.invoke(main, ["run", "--horizon", "16"])
    assert result.exit_code != 0
    assert "algorithm is required" in result.output


def test_run_flag_overrides_config_file(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"algo": "fixed-price", "fixed_price": 2.2, "horizon": 64, "seed": 5}))
    result = runner.invoke(main, ["run", "--config", str(cfg), "--horizon", "16"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert body["key"] == "fixed-price-uniform-d5-T16-s5"
    assert body["config"]["fixed_price"] == 2.2


def test_run_rejects_unknown_config_keys(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"algo": "oracle", "horizonz": 16}))
    result = runner.invoke(main, ["run", "--config", str(cfg)])
    assert result.exit_code != 0
    assert "horizonz" in result.output


def test_run_writes_out_file(runner, tmp_path):
    out = tmp_path / "trace.json"
    result = runner.invoke(
        main, ["run", "--algo", "oracle", "--horizon", "16", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert "final_regret=0.0" in result.output
    assert json.loads(out.read_text())["key"] == "oracle-uniform-d5-T16-s0"


def test_sweep_fit_report_pipeline(runner, tmp_path):
    out = tmp_path / "sw"
    args = [
        "sweep",
        "--algo", "fixed-price",
        "--fixed-price", "2.2",
        "--noise", "uniform",
        "--horizons", "16,64",
        "--seeds", "2",
        "--out", str(out),
    ]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert "4/4 runs done" in result.output
    traces = out / "traces.csv"
    before = traces.read_bytes()

    # resumable: identical invocation leaves identical bytes
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert traces.read_bytes() == before

    result = runner.invoke(main, ["fit", "--input", str(traces)])
    assert result.exit_code == 0, result.output
    fits = json.loads(result.output)
    assert fits["fixed-price/uniform"]["n_points"] == 2

    result = runner.invoke(main, ["fit", "--input", str(traces), "--algo", "cmrup"])
    assert result.exit_code != 0
    assert "no matching runs" in result.output

    rep = tmp_path / "rep"
    result = runner.invoke(main, ["report", "--input", str(traces), "--out", str(rep)])
    assert result.exit_code == 0, result.output
    assert (rep / "figure_input.csv").exists()
    assert "regret ~" in result.output


def test_sweep_conflicting_directory_fails(runner, tmp_path):
    out = tmp_path / "sw"
    base = ["sweep", "--algo", "oracle", "--horizons", "16", "--seeds", "1", "--out", str(out)]
    assert runner.invoke(main, base).exit_code == 0
    result = runner.invoke(main, base[:-2] + ["--seeds", "2", "--out", str(out)])
    assert result.exit_code != 0
    assert "different sweep" in result.output


def test_sweep_bad_horizons_string(runner, tmp_path):
    result = runner.invoke(
        main, ["sweep", "--algo", "oracle", "--horizons", "16,abc", "--out", str(tmp_path)]
    )
    assert result.exit_code != 0
    assert "bad --horizons" in result.output


def test_fit_degenerate_group_exits_nonzero(runner, tmp_path):
    out = tmp_path / "sw"
    args = ["sweep", "--algo", "oracle", "--horizons", "16,64", "--seeds", "1", "--out", str(out)]
    assert runner.invoke(main, args).exit_code == 0
    # oracle regret is identically zero, so every selected fit is degenerate
    result = runner.invoke(main, ["fit", "--input", str(out / "traces.csv")])
    assert result.exit_code == 1
    assert "non-positive" in result.output


def test_help_lists_subcommands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for cmd in ("run", "sweep", "fit", "report", "serve"):
        assert cmd in result.output
