"""Delimiter-separated dump of computed-packet records."""

import csv
import math
from pathlib import Path

import numpy as np

from aoilab.exceptions import OutputError, ParameterError
from aoilab.logging import get_logger
from aoilab.models.trace import RECORD_DTYPE, SimulationTrace

logger = get_logger(__name__)

TRACE_COLUMNS = ("k", "gen_time", "transmit_done", "compute_done", "x", "y", "z", "w", "s")


def format_real(value: float | None) -> str:
    """17 significant digits; NaN and None become an empty field."""
    if value is None or math.isnan(value):
        return ""
    return f"{value:.17g}"


def _parse_real(text: str) -> float:
    return math.nan if text == "" else float(text)


def write_trace_dump(trace: SimulationTrace, path: Path, include_warmup: bool = True) -> Path:
    """Write every record of a trace to a CSV file.

    Args:
        trace: Simulator output
        path: Destination file
        include_warmup: Also write the warmup records

    Returns:
        The written path

    Raises:
        OutputError: If the file cannot be written
    """
    data = trace.data if include_warmup else trace.data[~trace.data["warmup"]]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for row in data:
                writer.writerow(
                    [str(int(row["k"]))] + [format_real(float(row[name])) for name in TRACE_COLUMNS[1:]]
                )
    except OSError as e:
        raise OutputError(f"Cannot write trace dump to {path}: {e}") from e
    logger.info(f"Wrote {len(data)} records to {path}")
    return path


def read_trace_dump(path: Path) -> np.ndarray:
    """Read a trace dump back into a record array.

    Derived columns (t_sys) are recomputed; the warmup flag is not stored and
    comes back False.

    Raises:
        OutputError: If the file cannot be read
        ParameterError: If the header does not match the dump format
    """
    try:
        with path.open(newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = tuple(next(reader, ()))
            rows = list(reader)
    except OSError as e:
        raise OutputError(f"Cannot read trace dump {path}: {e}") from e
    if header != TRACE_COLUMNS:
        raise ParameterError(f"Unexpected trace dump header in {path}: {header}", field="trace_dump")

    data = np.zeros(len(rows), dtype=RECORD_DTYPE)
    for i, row in enumerate(rows):
        data["k"][i] = int(row[0])
        for name, text in zip(TRACE_COLUMNS[1:], row[1:], strict=True):
            data[name][i] = _parse_real(text)
    data["t_sys"] = data["w"] + data["s"]
    return data
