"""Pytest configuration for aoilab tests."""

import pytest

from aoilab.config import reload_settings
from aoilab.models import QueuePolicy, SamplerOverride, SimConfig, SystemParams
from aoilab.simulator import run_simulation

# Transmissions of 1.0 and services [2.5, 0.5]: packet 1 is replaced at t=3,
# packet 2 waits 0.5 and finishes at t=4
HAND_TRANSMISSIONS = (1.0,) * 10
HAND_SERVICES = (2.5, 0.5, 1.0, 1.0)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Reload settings around every test so env patches do not leak."""
    reload_settings()
    yield
    reload_settings()


@pytest.fixture
def unit_params():
    """lambda = mu = 1."""
    return SystemParams.from_rho(1.0, mu=1.0)


def hand_config(policy: QueuePolicy = QueuePolicy.REPLACEMENT, target: int = 2) -> SimConfig:
    return SimConfig.build(
        params=SystemParams.from_rho(1.0),
        policy=policy,
        target_computed_packets=target,
        warmup_computed_packets=0,
        sampler_override=SamplerOverride(transmission=HAND_TRANSMISSIONS, service=HAND_SERVICES),
        record_transmissions=True,
    )


@pytest.fixture
def hand_trace():
    """Deterministic two-record replacement trace."""
    return run_simulation(hand_config())


@pytest.fixture
def fcfs_hand_trace():
    """Same durations under FCFS."""
    return run_simulation(hand_config(QueuePolicy.FCFS))


@pytest.fixture(scope="session")
def medium_trace():
    """Seeded replacement trace at rho = 1 with 50k computed packets."""
    config = SimConfig.build(
        params=SystemParams.from_rho(1.0),
        target_computed_packets=50_000,
        warmup_computed_packets=500,
        seed=7,
    )
    return run_simulation(config)


@pytest.fixture(scope="session")
def medium_fcfs_trace():
    """Seeded FCFS trace at rho = 0.5."""
    config = SimConfig.build(
        params=SystemParams.from_rho(0.5),
        policy=QueuePolicy.FCFS,
        target_computed_packets=20_000,
        warmup_computed_packets=200,
        seed=7,
    )
    return run_simulation(config)
