"""aoilab - Age-of-information lab for a two-stage status-update pipeline.

A source sends fresh updates over a channel (exponential, rate lambda) to an
edge server that computes them (exponential, rate mu). The source follows
zero-wait, and the server keeps at most one waiting packet, replacing it on
every new arrival. aoilab gives the closed-form average age of this system,
an event-driven simulator that checks it, and the FCFS baseline for comparison.

Quick Start:
    >>> from aoilab import SimConfig, SystemParams, run_simulation, integrate_age
    >>> from aoilab import analytics
    >>>
    >>> params = SystemParams.from_rho(1.0, mu=1.0)
    >>> analytics.avg_age_replacement(params)
    3.6041666666666665
    >>>
    >>> # Simulate and compare
    >>> trace = run_simulation(SimConfig.build(params=params, target_computed_packets=100_000, seed=42))
    >>> integrate_age(trace)
    >>>
    >>> # Every moment with a 95% confidence interval
    >>> from aoilab import build_moment_report
    >>> report = build_moment_report(trace)
    >>> report["mean_y"].relative_error

Main Components:
    - analytics: Closed-form densities, moments and the average age
    - run_simulation: Replacement and FCFS simulator producing a SimulationTrace
    - integrate_age: Exact time-average of the sawtooth age path
    - build_moment_report / compare_density: Estimates paired with closed forms
    - run_sweep / run_single / emit_figure_data: Batch drivers behind the CLI
"""

from aoilab import analytics
from aoilab.age import integrate_age, peak_ages
from aoilab.estimators import batch_means_ci, build_moment_report, compare_density
from aoilab.logging import get_logger
from aoilab.models import (
    MomentReport,
    QueuePolicy,
    SimConfig,
    SimulationTrace,
    SweepSpec,
    SystemParams,
    make_params,
)
from aoilab.simulator import run_simulation, verify_trace
from aoilab.sweep import emit_figure_data, run_single, run_sweep

__all__ = [
    "analytics",
    "SystemParams",
    "make_params",
    "QueuePolicy",
    "SimConfig",
    "SimulationTrace",
    "MomentReport",
    "SweepSpec",
    "run_simulation",
    "verify_trace",
    "integrate_age",
    "peak_ages",
    "batch_means_ci",
    "build_moment_report",
    "compare_density",
    "run_sweep",
    "run_single",
    "emit_figure_data",
    "get_logger",
]

__version__ = "0.1.0"
