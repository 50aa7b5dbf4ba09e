"""Event-driven simulation of the transmission and computing stages.

The source follows zero-wait: a new packet starts transmitting the instant the
previous one reaches the edge server, so arrivals at the server form a renewal
process driven by the transmission durations alone. The server is
non-preemptive; the queue policy only decides what happens to waiting packets.
"""

import math
import time
from collections import deque
from typing import NamedTuple, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from aoilab.exceptions import InsufficientDataError, ParameterError, TraceInvariantError
from aoilab.logging import get_logger
from aoilab.models.trace import (
    RECORD_DTYPE,
    TRACE_TOLERANCE,
    QueuePolicy,
    SimConfig,
    SimulationTrace,
    TransmissionEvent,
)
from aoilab.sampling import DurationSampler, SequenceSampler, exponential_samplers

logger = get_logger(__name__)


class Packet(NamedTuple):
    """A packet that reached the edge server.

    x and gap are kept as sums of sampled durations, never as differences of
    absolute timestamps, so they stay exact on long horizons.
    """

    gen_time: float
    arrival_time: float
    log_index: int
    x: float
    # Time since the previous packet that can still be computed
    gap: float


class ReplacementBuffer:
    """One-slot waiting room; a new arrival displaces the waiting packet."""

    def __init__(self) -> None:
        self._slot: Packet | None = None

    def push(self, packet: Packet) -> Packet | None:
        """Store a packet, returning the one it displaced.

        The newcomer inherits the displaced packet's gap, so its gap still
        reaches back to the last packet that will be computed before it.
        """
        displaced = self._slot
        if displaced is not None:
            packet = packet._replace(gap=displaced.gap + packet.gap)
        self._slot = packet
        return displaced

    def pop(self) -> Packet | None:
        packet = self._slot
        self._slot = None
        return packet

    def __len__(self) -> int:
        return 0 if self._slot is None else 1


class FcfsQueue:
    """Unbounded arrival-order queue; nothing is ever displaced."""

    def __init__(self) -> None:
        self._queue: deque[Packet] = deque()

    def push(self, packet: Packet) -> Packet | None:
        self._queue.append(packet)
        return None

    def pop(self) -> Packet | None:
        return self._queue.popleft() if self._queue else None

    def __len__(self) -> int:
        return len(self._queue)


def _make_queue(policy: QueuePolicy) -> ReplacementBuffer | FcfsQueue:
    if policy is QueuePolicy.REPLACEMENT:
        return ReplacementBuffer()
    return FcfsQueue()


def _make_samplers(config: SimConfig) -> tuple[DurationSampler, DurationSampler]:
    override = config.sampler_override
    if override is not None:
        return (
            SequenceSampler(override.transmission, "transmission"),
            SequenceSampler(override.service, "service"),
        )
    return exponential_samplers(config.params.lambda_, config.params.mu, config.seed)


def _next_wait(residual: float | None, gap: float) -> float:
    """Waiting time from the predecessor's w + s and the arrival gap, floored at 0."""
    if residual is None:
        return 0.0
    return max(0.0, residual - gap)


def run_simulation(config: SimConfig) -> SimulationTrace:
    """Simulate until the configured number of packets finish computing.

    When a service completion and an arrival coincide, the completion is
    processed first, so the arriving packet finds the server free.

    Args:
        config: Run configuration

    Returns:
        Trace with exactly target_computed_packets records, warmup records flagged

    Raises:
        ParameterError: If the warmup leaves no usable records
        SamplerExhaustedError: If a deterministic override runs out
    """
    target = config.target_computed_packets
    warmup = config.warmup_count
    if warmup >= target:
        raise ParameterError(
            f"warmup ({warmup}) must be smaller than target_computed_packets ({target})",
            field="warmup_computed_packets",
        )
    logger.debug(
        f"Simulating {config.policy} at lambda={config.params.lambda_}, mu={config.params.mu}, "
        f"target={target}, warmup={warmup}, seed={config.seed}"
    )
    started = time.perf_counter()

    tx, svc = _make_samplers(config)
    queue = _make_queue(config.policy)
    record_log = config.record_transmissions
    # [gen_time, arrival_time, disposition, k]
    log: list[list] = []

    gens: list[float] = []
    arrivals: list[float] = []
    xs: list[float] = []
    gaps: list[float] = []
    waits: list[float] = []
    services: list[float] = []
    dones: list[float] = []

    # Packet currently in the channel
    tx_gen = 0.0
    tx_x = tx.next()
    tx_arrival = tx_gen + tx_x
    generated = 1
    if record_log:
        log.append([tx_gen, tx_arrival, "in_flight_at_end", None])

    serving: Packet | None = None
    serving_wait = 0.0
    serving_service = 0.0
    # w + s of the packet in service, None before the first service starts
    residual: float | None = None
    completion = math.inf
    discarded = 0

    while True:
        if completion <= tx_arrival:
            # Service completion
            gens.append(serving.gen_time)
            arrivals.append(serving.arrival_time)
            xs.append(serving.x)
            gaps.append(serving.gap)
            waits.append(serving_wait)
            services.append(serving_service)
            dones.append(completion)
            if serving.log_index >= 0:
                log[serving.log_index][2] = "computed"
                log[serving.log_index][3] = len(dones)
            if len(dones) == target:
                break
            serving = queue.pop()
            if serving is None:
                completion = math.inf
                continue
        else:
            # Arrival at the edge server; the source immediately starts the next packet
            packet = Packet(tx_gen, tx_arrival, len(log) - 1 if record_log else -1, tx_x, tx_x)
            tx_gen = tx_arrival
            tx_x = tx.next()
            tx_arrival = tx_gen + tx_x
            generated += 1
            if record_log:
                log.append([tx_gen, tx_arrival, "in_flight_at_end", None])

            if serving is not None:
                displaced = queue.push(packet)
                if displaced is not None:
                    discarded += 1
                    if record_log:
                        log[displaced.log_index][2] = "replaced"
                continue
            serving = packet

        # Service start
        serving_wait = _next_wait(residual, serving.gap)
        serving_service = svc.next()
        residual = serving_wait + serving_service
        completion = serving.arrival_time + residual

    data = _assemble_records(gens, arrivals, xs, gaps, waits, services, dones, warmup)
    transmissions = None
    if record_log:
        transmissions = tuple(
            TransmissionEvent(gen_time=g, arrival_time=a, disposition=d, computed_index=k) for g, a, d, k in log
        )

    trace = SimulationTrace(
        params=config.params,
        policy=config.policy,
        seed=config.seed,
        data=data,
        discarded_count=discarded,
        generated_count=generated,
        warmup_count=warmup,
        total_time=dones[-1],
        transmissions=transmissions,
    )
    logger.debug(
        f"Simulation finished: {target} computed, {discarded} discarded, {generated} generated, "
        f"horizon={trace.total_time:.6g}, elapsed={time.perf_counter() - started:.2f}s"
    )
    return trace


def _assemble_records(
    gens: list[float],
    arrivals: list[float],
    xs: list[float],
    gaps: list[float],
    waits: list[float],
    services: list[float],
    dones: list[float],
    warmup: int,
) -> np.ndarray:
    n = len(dones)
    data = np.zeros(n, dtype=RECORD_DTYPE)
    data["k"] = np.arange(1, n + 1)
    data["gen_time"] = gens
    data["transmit_done"] = arrivals
    data["compute_done"] = dones
    data["w"] = waits
    data["s"] = services
    data["t_sys"] = data["w"] + data["s"]
    data["x"] = xs
    data["y"][0] = np.nan
    data["z"][0] = np.nan
    data["y"][1:] = gaps[1:]
    data["z"][1:] = np.diff(data["compute_done"])
    data["warmup"][:warmup] = True
    return data


class TraceMoments(BaseModel):
    """Per-packet sequences aligned for moment estimation.

    x, w, s and t_sys cover every post-warmup record. The paired sequences
    y, z, x_prev, ty and wplus_y start at the second post-warmup record, so
    x_prev[i] is X_{k-1} for z[i] = Z_k and ty[i] = T_k Y_k.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    w: np.ndarray
    s: np.ndarray
    t_sys: np.ndarray
    y: np.ndarray
    z: np.ndarray
    x_prev: np.ndarray
    ty: np.ndarray
    wplus_y: np.ndarray

    @model_validator(mode="after")
    def _aligned(self) -> Self:
        n = len(self.x)
        if any(len(a) != n for a in (self.w, self.s, self.t_sys)):
            raise ValueError("per-record sequences must share a length")
        if any(len(a) != n - 1 for a in (self.y, self.z, self.x_prev, self.ty, self.wplus_y)):
            raise ValueError("paired sequences must have one fewer entry than records")
        return self

    @property
    def y_sq(self) -> np.ndarray:
        return self.y * self.y


def _require_records(trace: SimulationTrace, minimum: int = 2) -> None:
    if trace.post_warmup_count < minimum:
        raise InsufficientDataError(
            f"Need at least {minimum} post-warmup records, trace has {trace.post_warmup_count}"
        )


def extract_moments(trace: SimulationTrace) -> TraceMoments:
    """Split a trace into the sequences behind each moment of the average age.

    Raises:
        InsufficientDataError: With fewer than 2 post-warmup records
    """
    _require_records(trace)
    x = np.asarray(trace.column("x"))
    w = np.asarray(trace.column("w"))
    s = np.asarray(trace.column("s"))
    t_sys = np.asarray(trace.column("t_sys"))
    y = np.asarray(trace.column("y"))[1:]
    z = np.asarray(trace.column("z"))[1:]
    residual = np.maximum(w[:-1] + s[:-1] - y, 0.0)
    return TraceMoments(
        x=x,
        w=w,
        s=s,
        t_sys=t_sys,
        y=y,
        z=z,
        x_prev=x[:-1],
        ty=t_sys[1:] * y,
        wplus_y=residual * y,
    )


def verify_trace(trace: SimulationTrace, tolerance: float = TRACE_TOLERANCE) -> None:
    """Check the record identities every simulator trace must satisfy.

    Args:
        trace: Trace to check
        tolerance: Absolute tolerance for the waiting-time recursion

    Raises:
        TraceInvariantError: Naming the first violated identity
    """
    d = trace.data
    if not np.all(d["gen_time"] < d["transmit_done"]) or not np.all(d["transmit_done"] < d["compute_done"]):
        raise TraceInvariantError("expected gen_time < transmit_done < compute_done on every record")
    if not np.array_equal(d["t_sys"], d["w"] + d["s"]):
        raise TraceInvariantError("t_sys must equal w + s")
    if not np.array_equal(d["compute_done"], d["transmit_done"] + d["t_sys"]):
        raise TraceInvariantError("compute_done must equal transmit_done + t_sys")
    if len(d) < 2:
        return
    if not np.all(np.diff(d["compute_done"]) > 0.0):
        raise TraceInvariantError("records must be strictly ordered by compute_done")
    if not np.all(np.diff(d["gen_time"]) > 0.0):
        raise TraceInvariantError("computed packets must be delivered in generation order")
    if np.any(d["w"][1:] > d["t_sys"][:-1] + tolerance):
        raise TraceInvariantError("a packet waited longer than its predecessor's system time")
    expected = np.maximum(d["w"][:-1] + d["s"][:-1] - d["y"][1:], 0.0)
    gap = np.abs(d["w"][1:] - expected)
    worst = int(np.argmax(gap))
    if gap[worst] > tolerance:
        raise TraceInvariantError(
            f"waiting-time recursion violated at k={worst + 2}: |{d['w'][worst + 1]!r} - {expected[worst]!r}| > {tolerance}"
        )
