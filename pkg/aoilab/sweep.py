"""Parameter sweeps, single-point self-tests and figure data.

Sweep points are independent: point i runs with seed base + i under both
policies (common random numbers), so points can be run in any order by any
number of worker processes. Rows are always written in grid order.
"""

import csv
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from datetime import UTC, datetime
from pathlib import Path

from aoilab import analytics
from aoilab.config import get_settings
from aoilab.estimators import build_moment_report
from aoilab.exceptions import AoiLabError, OutputError, ToleranceExceededError
from aoilab.logging import get_logger
from aoilab.models import (
    MomentReport,
    PointTask,
    QueuePolicy,
    SimConfig,
    SweepRow,
    SweepSpec,
    SystemParams,
    parse_rho_grid,
)
from aoilab.simulator import run_simulation
from aoilab.tracefile import format_real, write_trace_dump

logger = get_logger(__name__)

SWEEP_COLUMNS = tuple(SweepRow.model_fields)
FIGURE_COLUMNS = ("rho", "replacement_analytic", "replacement_sim", "fcfs_sim", "asymptote")
DEFAULT_FIGURE_GRID = "0.1:3:0.1"

PLOT_SCRIPT_STUB = """\
# Plotting stub for {data_name}; requires pandas and matplotlib.
import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv("{data_name}", comment="#")
fig, ax = plt.subplots()
ax.plot(df["rho"], df["replacement_analytic"], "-", label="replacement (analytic)")
ax.plot(df["rho"], df["replacement_sim"], "o", label="replacement (simulated)")
ax.plot(df["rho"], df["fcfs_sim"], "s", label="FCFS (simulated)")
ax.plot(df["rho"], df["asymptote"], "--", label="2/mu")
ax.set_xlabel("rho = lambda / mu")
ax.set_ylabel("average age")
ax.set_ylim(0, {y_max})
ax.legend()
fig.savefig("{stem}.pdf")
"""


# ============================================================================
# Points
# ============================================================================


def build_tasks(spec: SweepSpec) -> list[PointTask]:
    """Expand a spec into point tasks in output order."""
    settings = get_settings()
    warmup = spec.warmup_fraction if spec.warmup_fraction is not None else settings.warmup_fraction
    return [
        PointTask(
            index=i,
            rho=rho,
            mu=spec.mu,
            policy=policy,
            packets=spec.packets_per_point,
            seed=spec.point_seed(i),
            warmup_fraction=warmup,
            num_batches=settings.num_batches,
        )
        for i, rho in enumerate(spec.rho_values)
        for policy in spec.policies
    ]


def _fcfs_cap(task: PointTask) -> tuple[int, str]:
    """Packet count for a point, capped with a warning for unstable FCFS queues."""
    settings = get_settings()
    if task.policy is not QueuePolicy.FCFS or task.rho < settings.fcfs_warning_rho:
        return task.packets, ""
    packets = min(task.packets, settings.fcfs_packet_cap)
    warning = f"FCFS queue unstable near or above rho=1; ran {packets} packets"
    logger.warning(f"rho={task.rho}: {warning}")
    return packets, warning


def run_point(task: PointTask) -> SweepRow:
    """Simulate one sweep point and summarize it as a row.

    Simulation and estimation failures are recorded in the row's error field.
    """
    started = time.perf_counter()
    packets, warning = _fcfs_cap(task)
    row = SweepRow(rho=task.rho, mu=task.mu, policy=task.policy, packets=packets, seed=task.seed, warning=warning)
    try:
        params = SystemParams.from_rho(task.rho, task.mu)
        if task.policy is QueuePolicy.REPLACEMENT:
            row.analytic_avg_age = analytics.avg_age_replacement(params)
            row.prob_w0_analytic = analytics.prob_wait_zero(params)
        config = SimConfig.build(
            params=params,
            policy=task.policy,
            target_computed_packets=packets,
            warmup_computed_packets=int(packets * task.warmup_fraction),
            seed=task.seed,
        )
        report = build_moment_report(run_simulation(config), num_batches=task.num_batches)
    except AoiLabError as e:
        row.error = f"{type(e).__name__}: {e}"
        logger.error(f"Sweep point rho={task.rho} policy={task.policy} failed: {row.error}")
        return row

    row.sim_avg_age = report["avg_age"].point_estimate
    row.ci_half_width = report["avg_age"].half_width
    row.mean_x = report["mean_x"].point_estimate
    row.mean_y = report["mean_y"].point_estimate
    row.mean_y_sq = report["mean_y_sq"].point_estimate
    row.mean_ty = report["mean_ty"].point_estimate
    row.prob_w0_emp = report["prob_w0"].point_estimate
    row.discarded_fraction = report.discarded_fraction
    logger.info(
        "Sweep point finished",
        extra={
            "rho": task.rho,
            "policy": str(task.policy),
            "seed": task.seed,
            "packets": packets,
            "elapsed_s": round(time.perf_counter() - started, 3),
        },
    )
    return row


def collect_rows(
    spec: SweepSpec,
    on_row: Callable[[SweepRow], None] | None = None,
) -> list[SweepRow]:
    """Run every point of a sweep.

    Args:
        spec: Sweep specification
        on_row: Called with each row as it becomes available, in grid order

    Returns:
        Rows in grid order, policies in spec order within a point
    """
    tasks = build_tasks(spec)
    workers = min(spec.workers or get_settings().workers, len(tasks))
    logger.info(f"Running {len(tasks)} sweep points with {workers} worker(s)")

    rows: list[SweepRow] = []
    if workers <= 1:
        results: Iterable[SweepRow] = map(run_point, tasks)
        for row in results:
            rows.append(row)
            if on_row:
                on_row(row)
        return rows

    with ProcessPoolExecutor(max_workers=workers) as pool:
        for row in pool.map(run_point, tasks):
            rows.append(row)
            if on_row:
                on_row(row)
    return rows


# ============================================================================
# Output
# ============================================================================


def _row_fields(row: SweepRow) -> list[str]:
    out: list[str] = []
    for name in SWEEP_COLUMNS:
        value = getattr(row, name)
        if isinstance(value, float) or value is None:
            out.append(format_real(value))
        else:
            out.append(str(value))
    return out


def _open_output(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write to {path}: {e}") from e


def _timestamp_line() -> str:
    return f"# generated {datetime.now(UTC).isoformat(timespec='seconds').replace('+00:00', 'Z')} by aoilab\n"


def write_sweep_csv(rows: Iterable[SweepRow], path: Path, timestamp: bool = True) -> Path:
    """Write sweep rows with the fixed column order.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        with _open_output(path) as f:
            if timestamp:
                f.write(_timestamp_line())
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            writer.writerows(_row_fields(row) for row in rows)
    except OSError as e:
        raise OutputError(f"Cannot write sweep CSV to {path}: {e}") from e
    return path


def run_sweep(spec: SweepSpec, on_row: Callable[[SweepRow], None] | None = None) -> list[SweepRow]:
    """Run a sweep and write its CSV to spec.output_path.

    The output path is opened before the first point runs, so an unwritable
    destination fails fast.

    Raises:
        OutputError: If the output path cannot be written
    """
    _open_output(spec.output_path).close()
    rows = collect_rows(spec, on_row)
    write_sweep_csv(rows, spec.output_path, timestamp=spec.timestamp)
    failed = sum(1 for r in rows if not r.ok)
    logger.info(f"Sweep wrote {len(rows)} rows to {spec.output_path} ({failed} failed)")
    return rows


# ============================================================================
# Single point
# ============================================================================


def simulate_single(
    params: SystemParams,
    policy: QueuePolicy = QueuePolicy.REPLACEMENT,
    packets: int = 1_000_000,
    seed: int = 0,
    warmup_fraction: float | None = None,
    trace_dump: Path | None = None,
    report_path: Path | None = None,
) -> MomentReport:
    """Simulate one point and build its full moment report.

    Args:
        params: System parameters
        policy: Queue policy
        packets: Computed packets to simulate
        seed: Master seed
        warmup_fraction: Override of the settings warmup fraction
        trace_dump: Write every record to this CSV
        report_path: Write the report as JSON here

    Returns:
        MomentReport with direct and assembled average ages
    """
    fraction = warmup_fraction if warmup_fraction is not None else get_settings().warmup_fraction
    config = SimConfig.build(
        params=params,
        policy=policy,
        target_computed_packets=packets,
        warmup_computed_packets=int(packets * fraction),
        seed=seed,
    )
    if report_path is not None:
        _open_output(report_path).close()
    trace = run_simulation(config)
    if trace_dump is not None:
        write_trace_dump(trace, trace_dump)
    report = build_moment_report(trace)
    if report_path is not None:
        try:
            report_path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write report to {report_path}: {e}") from e
    return report


def check_tolerance(report: MomentReport, threshold: float | None = None) -> None:
    """Fail when any closed-form pairing misses by more than the threshold.

    Raises:
        ToleranceExceededError: Listing the offending quantities
    """
    threshold = threshold if threshold is not None else get_settings().tolerance_threshold
    failures = report.failures(threshold)
    if failures:
        worst = ", ".join(f"{name}={err:.3%}" for name, err in sorted(failures.items()))
        raise ToleranceExceededError(f"relative error above {threshold:.3%}: {worst}", failures=failures)


def run_single(
    params: SystemParams,
    policy: QueuePolicy = QueuePolicy.REPLACEMENT,
    packets: int = 1_000_000,
    seed: int = 0,
    threshold: float | None = None,
    **kwargs,
) -> MomentReport:
    """simulate_single followed by check_tolerance."""
    report = simulate_single(params, policy, packets, seed, **kwargs)
    check_tolerance(report, threshold)
    return report


# ============================================================================
# Figure data
# ============================================================================


def default_figure_spec(**overrides) -> SweepSpec:
    """Both policies over rho in [0.1, 3] at mu = 1."""
    data = {
        "rho_values": parse_rho_grid(DEFAULT_FIGURE_GRID),
        "policies": [QueuePolicy.REPLACEMENT, QueuePolicy.FCFS],
        "output_path": Path("figure.csv"),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec.build(**data)


def figure_table(rows: Iterable[SweepRow], mu: float) -> list[dict[str, float | None]]:
    """Pivot sweep rows into one line per rho with a column per curve."""
    table: dict[float, dict[str, float | None]] = {}
    asymptote = analytics.avg_age_min(mu)
    for row in rows:
        line = table.setdefault(
            row.rho,
            {"rho": row.rho, "replacement_analytic": None, "replacement_sim": None, "fcfs_sim": None, "asymptote": asymptote},
        )
        if row.policy is QueuePolicy.REPLACEMENT:
            line["replacement_analytic"] = row.analytic_avg_age
            line["replacement_sim"] = row.sim_avg_age
        else:
            line["fcfs_sim"] = row.sim_avg_age
    return list(table.values())


def emit_figure_data(spec: SweepSpec | None = None) -> tuple[Path, Path]:
    """Simulate both policies over a rho grid and write plot-ready data.

    Writes spec.output_path with columns rho, replacement_analytic,
    replacement_sim, fcfs_sim, asymptote, and a plain-text plotting stub next
    to it.

    Returns:
        (data path, stub path)
    """
    spec = spec or default_figure_spec()
    _open_output(spec.output_path).close()
    lines = figure_table(collect_rows(spec), spec.mu)

    path = spec.output_path
    try:
        with _open_output(path) as f:
            if spec.timestamp:
                f.write(_timestamp_line())
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(FIGURE_COLUMNS)
            for line in lines:
                writer.writerow([format_real(line[c]) for c in FIGURE_COLUMNS])
        stub = path.with_name(f"{path.stem}_plot.txt")
        finite = [v for line in lines for v in (line["replacement_analytic"], line["replacement_sim"]) if v]
        y_max = 2.0 * max(finite) if finite else 10.0
        stub.write_text(PLOT_SCRIPT_STUB.format(data_name=path.name, stem=path.stem, y_max=f"{y_max:.3g}"), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write figure data to {path}: {e}") from e
    logger.info(f"Wrote figure data for {len(lines)} rho values to {path}")
    return path, stub
