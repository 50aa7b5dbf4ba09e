"""Tests for the aoilab CLI."""

import csv

from click.testing import CliRunner

from aoilab.cli import cli
from aoilab.cli.commands import EXIT_IO, EXIT_PARAMETER, EXIT_TOLERANCE


def invoke(*args: str):
    return CliRunner().invoke(cli, list(args))


def csv_rows(path):
    with path.open(newline="") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def test_help_lists_commands():
    """Test the group help names every subcommand."""
    result = invoke("--help")

    assert result.exit_code == 0
    for name in ("sweep", "single", "figure", "analytic"):
        assert name in result.output


def test_analytic_prints_closed_forms():
    """Test the analytic table at rho = 1."""
    result = invoke("analytic", "--rho", "1")

    assert result.exit_code == 0
    assert "3.60417" in result.output
    assert "2/mu = 2" in result.output


def test_analytic_names_bad_mu():
    """Test a negative computing rate is reported against mu."""
    result = invoke("analytic", "--mu", "-1")

    assert result.exit_code == EXIT_PARAMETER
    assert "mu must be positive" in result.output
    assert "lambda" not in result.output


def test_sweep_writes_csv(tmp_path):
    """Test a small sweep exits 0 and writes rows."""
    out = tmp_path / "sweep.csv"

    result = invoke("sweep", "--rho", "0.5,1", "--packets", "2000", "--out", str(out), "--no-timestamp")

    assert result.exit_code == 0, result.output
    assert not out.read_text().startswith("#")
    rows = csv_rows(out)
    assert [r["rho"] for r in rows] == ["0.5", "1"]
    assert [r["seed"] for r in rows] == ["0", "1"]


def test_sweep_both_policies(tmp_path):
    """Test --policy both writes a row per policy."""
    out = tmp_path / "sweep.csv"

    result = invoke("sweep", "--rho", "0.5", "--policy", "both", "--packets", "2000", "--out", str(out))

    assert result.exit_code == 0, result.output
    assert [r["policy"] for r in csv_rows(out)] == ["replacement", "fcfs"]


def test_sweep_empty_grid_is_parameter_error(tmp_path):
    """Test an empty rho list exits 1."""
    result = invoke("sweep", "--rho", "", "--out", str(tmp_path / "s.csv"))

    assert result.exit_code == EXIT_PARAMETER


def test_invalid_choice_is_parameter_error():
    """Test click usage errors exit 1."""
    result = invoke("sweep", "--policy", "lifo")

    assert result.exit_code == EXIT_PARAMETER


def test_unknown_group_option_is_parameter_error():
    """Test a usage error before the subcommand also exits 1."""
    result = invoke("--bogus", "analytic")

    assert result.exit_code == EXIT_PARAMETER


def test_sweep_unwritable_output(tmp_path):
    """Test an unwritable output path exits 3."""
    blocker = tmp_path / "blocker"
    blocker.write_text("x")

    result = invoke("sweep", "--rho", "1", "--packets", "2000", "--out", str(blocker / "s.csv"))

    assert result.exit_code == EXIT_IO


def test_single_tolerance_failure():
    """Test an under-sampled run against a tight gate exits 2."""
    result = invoke("single", "--rho", "1", "--packets", "1000", "--seed", "42", "--threshold", "0.001")

    assert result.exit_code == EXIT_TOLERANCE
    assert "avg_age" in result.output


def test_single_loose_threshold_passes(tmp_path):
    """Test a generous gate exits 0 and writes the trace dump."""
    dump = tmp_path / "trace.csv"

    result = invoke(
        "single", "--lambda", "1", "--mu", "1", "--packets", "5000", "--threshold", "0.5", "--trace-dump", str(dump)
    )

    assert result.exit_code == 0, result.output
    assert dump.exists()


def test_single_rejects_lambda_and_rho():
    """Test giving both rates is a parameter error."""
    result = invoke("single", "--lambda", "1", "--rho", "1")

    assert result.exit_code == EXIT_PARAMETER


def test_single_rejects_non_positive_rate():
    """Test a zero rate exits 1."""
    result = invoke("single", "--lambda", "0")

    assert result.exit_code == EXIT_PARAMETER


def test_config_file_with_flag_override(tmp_path):
    """Test config values apply and command-line flags win."""
    out = tmp_path / "sweep.csv"
    config = tmp_path / "run.conf"
    config.write_text(f"# sweep settings\nrho = 0.5,1\npackets = 5000\nseed = 7\nout = {out}\nno_timestamp = true\n")

    result = invoke("sweep", "--config", str(config), "--packets", "2000")

    assert result.exit_code == 0, result.output
    rows = csv_rows(out)
    assert [r["packets"] for r in rows] == ["2000", "2000"]
    assert [r["seed"] for r in rows] == ["7", "8"]
    assert not out.read_text().startswith("#")


def test_config_file_unknown_key(tmp_path):
    """Test an unknown key exits 1."""
    config = tmp_path / "run.conf"
    config.write_text("colour = blue\n")

    result = invoke("analytic", "--config", str(config))

    assert result.exit_code == EXIT_PARAMETER


def test_config_file_bad_value(tmp_path):
    """Test a value the option rejects exits 1."""
    config = tmp_path / "run.conf"
    config.write_text("mu = fast\n")

    result = invoke("analytic", "--config", str(config))

    assert result.exit_code == EXIT_PARAMETER


def test_figure_writes_data_and_stub(tmp_path):
    """Test figure output files."""
    out = tmp_path / "figure.csv"

    result = invoke("figure", "--rho", "0.5,1", "--packets", "2000", "--out", str(out), "--no-timestamp")

    assert result.exit_code == 0, result.output
    assert [r["asymptote"] for r in csv_rows(out)] == ["2", "2"]
    assert (tmp_path / "figure_plot.txt").exists()
