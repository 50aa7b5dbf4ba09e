"""CLI commands for aoilab."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import click
from click.core import ParameterSource
from rich.console import Console
from rich.table import Table

from aoilab import analytics
from aoilab.config import get_settings, read_key_value_config
from aoilab.exceptions import AoiLabError, ParameterError, ToleranceExceededError
from aoilab.logging import configure_logging
from aoilab.models import MomentReport, QueuePolicy, SweepRow, SweepSpec, SystemParams, make_params, parse_rho_grid
from aoilab.sweep import check_tolerance, default_figure_spec, emit_figure_data, run_sweep, simulate_single

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_PARAMETER = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3

# Config-file keys and the option each one feeds
CONFIG_KEYS = {
    "rho": "rho",
    "mu": "mu",
    "lambda": "lambda_",
    "policy": "policy",
    "packets": "packets",
    "warmup_frac": "warmup_frac",
    "seed": "seed",
    "workers": "workers",
    "out": "out",
    "threshold": "threshold",
    "trace_dump": "trace_dump",
    "no_timestamp": "no_timestamp",
}

POLICY_CHOICES = {
    "replacement": [QueuePolicy.REPLACEMENT],
    "fcfs": [QueuePolicy.FCFS],
    "both": [QueuePolicy.REPLACEMENT, QueuePolicy.FCFS],
}


@contextmanager
def exit_codes() -> Iterator[None]:
    """Print library errors in red and exit with the matching status code."""
    try:
        yield
    except ToleranceExceededError as e:
        err_console.print(f"[red]Tolerance check failed:[/red] {e}")
        raise click.exceptions.Exit(EXIT_TOLERANCE) from e
    except OSError as e:
        err_console.print(f"[red]I/O error:[/red] {e}")
        raise click.exceptions.Exit(EXIT_IO) from e
    except AoiLabError as e:
        err_console.print(f"[red]Error:[/red] {e}")
        raise click.exceptions.Exit(EXIT_PARAMETER) from e


def merge_config_file(ctx: click.Context, values: dict[str, Any]) -> dict[str, Any]:
    """Fill options not given on the command line from --config.

    Args:
        ctx: Current click context
        values: Parsed option values of the command

    Returns:
        Values with config-file entries applied where the option kept its default

    Raises:
        ParameterError: On an unknown key or a value the option rejects
    """
    path = values.get("config")
    if path is None:
        return values
    options = {p.name: p for p in ctx.command.params}
    merged = dict(values)
    for key, raw in read_key_value_config(path).items():
        name = CONFIG_KEYS.get(key)
        if name is None:
            raise ParameterError(f"Unknown config key {key!r} in {path}", field=key)
        if name not in options:
            continue
        if ctx.get_parameter_source(name) is ParameterSource.COMMANDLINE:
            continue
        try:
            merged[name] = options[name].type_cast_value(ctx, raw)
        except click.BadParameter as e:
            raise ParameterError(f"Invalid value for {key!r} in {path}: {e.message}", field=key) from e
    return merged


def _params_from(lambda_: float | None, rho: float | None, mu: float) -> SystemParams:
    if lambda_ is not None and rho is not None:
        raise ParameterError("Give either --lambda or --rho, not both", field="lambda")
    if lambda_ is not None:
        return make_params(lambda_, mu)
    return SystemParams.from_rho(rho if rho is not None else 1.0, mu)


def _fmt(value: float | None, digits: int = 6) -> str:
    return "-" if value is None else f"{value:.{digits}g}"


def _sweep_table(title: str) -> Table:
    table = Table(title=title)
    table.add_column("rho", style="cyan", justify="right")
    table.add_column("Policy", style="yellow")
    table.add_column("Analytic age", justify="right")
    table.add_column("Simulated age", style="green", justify="right")
    table.add_column("±95%", style="dim", justify="right")
    table.add_column("Discarded", justify="right")
    table.add_column("Notes", style="red")
    return table


def _add_sweep_row(table: Table, row: SweepRow) -> None:
    table.add_row(
        f"{row.rho:g}",
        str(row.policy),
        _fmt(row.analytic_avg_age),
        _fmt(row.sim_avg_age),
        _fmt(row.ci_half_width, 3),
        _fmt(row.discarded_fraction, 3),
        row.error or row.warning,
    )


def _report_table(report: MomentReport) -> Table:
    p = report.params
    table = Table(title=f"{report.policy} at lambda={p.lambda_:g}, mu={p.mu:g} (rho={p.rho:g}), {report.packets} packets")
    table.add_column("Quantity", style="cyan")
    table.add_column("Simulated", style="green", justify="right")
    table.add_column("±95%", style="dim", justify="right")
    table.add_column("Analytic", justify="right")
    table.add_column("Rel. error", justify="right")
    for est in report.estimates.values():
        rel = "-" if est.relative_error is None else f"{est.relative_error:.3%}"
        table.add_row(est.name, _fmt(est.point_estimate), _fmt(est.half_width, 3), _fmt(est.analytic_value), rel)
    return table


class AoiLabGroup(click.Group):
    """Command group that reports usage errors with the parameter-error status."""

    def make_context(
        self, info_name: str | None, args: list[str], parent: click.Context | None = None, **extra: Any
    ) -> click.Context:
        # Group-level options are parsed here, before invoke
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = EXIT_PARAMETER
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_PARAMETER
            raise


@click.group(cls=AoiLabGroup)
@click.option("--verbose", "-v", is_flag=True, help="Log progress at INFO level")
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """aoilab: age-of-information lab for a two-stage update pipeline."""
    ctx.ensure_object(dict)
    settings = get_settings()
    configure_logging(
        level=logging.INFO if verbose else None,
        json_output=True if settings.log_json else None,
    )


config_option = click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="key=value file; command-line flags win",
)
mu_option = click.option("--mu", type=float, default=1.0, show_default=True, help="Computing rate")
packets_option = click.option(
    "--packets", type=click.IntRange(min=1), default=1_000_000, show_default=True, help="Computed packets per point"
)
warmup_option = click.option(
    "--warmup-frac", type=click.FloatRange(0.0, 1.0, max_open=True), default=None, help="Warmup fraction"
)
seed_option = click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Base seed")
workers_option = click.option(
    "--workers", type=click.IntRange(min=1), default=None, help="Worker processes (default: AOILAB_WORKERS or 1)"
)
no_timestamp_option = click.option("--no-timestamp", is_flag=True, help="Omit the generated-at comment line")


@cli.command("sweep")
@click.option("--rho", default="0.5,1,2", show_default=True, help="Single value, comma list or start:stop:step")
@mu_option
@click.option("--policy", type=click.Choice(list(POLICY_CHOICES)), default="replacement", show_default=True)
@packets_option
@warmup_option
@seed_option
@workers_option
@click.option("--out", type=click.Path(path_type=Path), default=Path("sweep.csv"), show_default=True)
@no_timestamp_option
@config_option
@click.pass_context
def sweep(ctx: click.Context, **values: Any) -> None:
    """Sweep utilization and write one CSV row per (rho, policy).

    Example:
        aoilab sweep --rho 0.1:3:0.1 --policy both --packets 100000
        aoilab sweep --rho 0.5,1,2 --workers 4 --out results/sweep.csv
    """
    with exit_codes():
        v = merge_config_file(ctx, values)
        spec = SweepSpec.build(
            mu=v["mu"],
            rho_values=parse_rho_grid(str(v["rho"])),
            policies=POLICY_CHOICES[v["policy"]],
            packets_per_point=v["packets"],
            seed=v["seed"],
            output_path=v["out"],
            warmup_fraction=v["warmup_frac"],
            workers=v["workers"],
            timestamp=not v["no_timestamp"],
        )
        table = _sweep_table(f"Sweep over {len(spec.rho_values)} rho values")
        rows = run_sweep(spec, on_row=lambda row: _add_sweep_row(table, row))
        console.print(table)
        console.print(f"[green]✓[/green] Wrote {len(rows)} rows to {spec.output_path}")
        failed = [r for r in rows if not r.ok]
        if failed:
            err_console.print(f"[yellow]Warning:[/yellow] {len(failed)} point(s) failed; see the error column")


@cli.command("single")
@click.option("--lambda", "lambda_", type=float, default=None, help="Transmission rate")
@click.option("--rho", type=float, default=None, help="Utilization (alternative to --lambda; default 1)")
@mu_option
@click.option("--policy", type=click.Choice(["replacement", "fcfs"]), default="replacement", show_default=True)
@packets_option
@warmup_option
@seed_option
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write the report as JSON")
@click.option("--trace-dump", type=click.Path(path_type=Path), default=None, help="Write every record as CSV")
@click.option("--threshold", type=click.FloatRange(min=0.0, min_open=True), default=None, help="Relative-error gate")
@config_option
@click.pass_context
def single(ctx: click.Context, **values: Any) -> None:
    """Simulate one point, compare with closed forms, and gate on relative error.

    Exits with status 2 when any quantity with a closed form misses by more
    than the threshold (default 5%).

    Example:
        aoilab single --rho 1 --packets 1000000 --seed 42
        aoilab single --lambda 2 --mu 1 --trace-dump trace.csv --threshold 0.01
    """
    with exit_codes():
        v = merge_config_file(ctx, values)
        params = _params_from(v["lambda_"], v["rho"], v["mu"])
        report = simulate_single(
            params,
            policy=QueuePolicy(v["policy"]),
            packets=v["packets"],
            seed=v["seed"],
            warmup_fraction=v["warmup_frac"],
            trace_dump=v["trace_dump"],
            report_path=v["out"],
        )
        console.print(_report_table(report))
        console.print(
            f"Discarded fraction: {report.discarded_fraction:.4f}   corr(X_prev, Z): {report.corr_x_prev_z:+.4f}"
        )
        if v["trace_dump"]:
            console.print(f"[green]✓[/green] Trace written to {v['trace_dump']}")
        check_tolerance(report, v["threshold"])
        console.print("[green]✓[/green] All closed-form pairings within tolerance")


@cli.command("figure")
@click.option("--rho", default="0.1:3:0.1", show_default=True, help="Utilization grid")
@mu_option
@packets_option
@seed_option
@workers_option
@click.option("--out", type=click.Path(path_type=Path), default=Path("figure.csv"), show_default=True)
@no_timestamp_option
@config_option
@click.pass_context
def figure(ctx: click.Context, **values: Any) -> None:
    """Write replacement vs FCFS age curves and the 2/mu asymptote for plotting.

    Example:
        aoilab figure --packets 200000 --workers 8
    """
    with exit_codes():
        v = merge_config_file(ctx, values)
        spec = default_figure_spec(
            mu=v["mu"],
            rho_values=parse_rho_grid(str(v["rho"])),
            packets_per_point=v["packets"],
            seed=v["seed"],
            output_path=v["out"],
            workers=v["workers"],
            timestamp=not v["no_timestamp"],
        )
        data_path, stub_path = emit_figure_data(spec)
        console.print(f"[green]✓[/green] Figure data written to {data_path}")
        console.print(f"Plotting stub: [cyan]{stub_path}[/cyan]")


@cli.command("analytic")
@click.option("--rho", default="0.5,1,2", show_default=True, help="Single value, comma list or start:stop:step")
@mu_option
@config_option
@click.pass_context
def analytic(ctx: click.Context, **values: Any) -> None:
    """Print closed-form age components over a rho grid (no simulation).

    Example:
        aoilab analytic --rho 0.1:3:0.1
    """
    with exit_codes():
        v = merge_config_file(ctx, values)
        rhos = parse_rho_grid(str(v["rho"]))
        if not rhos:
            raise ParameterError("rho grid is empty", field="rho")
        table = Table(title=f"Closed forms at mu={v['mu']:g}")
        for name in ("rho", "Pr(W=0)", "E[X]", "E[Y]", "E[Y²]", "E[TY]", "avg age"):
            table.add_column(name, justify="right", style="cyan" if name == "rho" else None)
        for rho in rhos:
            c = analytics.replacement_components(SystemParams.from_rho(rho, v["mu"]))
            table.add_row(
                f"{rho:g}",
                _fmt(c.prob_wait_zero),
                _fmt(c.mean_x),
                _fmt(c.mean_y),
                _fmt(c.mean_y_sq),
                _fmt(c.mean_ty),
                _fmt(c.avg_age),
            )
        console.print(table)
        console.print(f"Asymptotic minimum 2/mu = {analytics.avg_age_min(v['mu']):g}")


def main() -> None:
    """Console-script entry point."""
    cli(prog_name="aoilab")
