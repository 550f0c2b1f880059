"""Shared fixtures.

The large weak-coherent run is session-scoped: several tests validate
different observables against the same 1e8-pulse simulation.
"""

import math

import pytest

from driftqkd import ChannelModel, SimulationConfig, Source, simulate

BASELINE_ETA_B = 0.35
BASELINE_PD = 1e-6
BASELINE_CHANNEL = ChannelModel(p=0.94, delta=math.pi / 8)


@pytest.fixture(scope="session")
def baseline_tally_100m():
    """1e8 weak-coherent pulses at 0 dB, equal intensity mixing."""
    config = SimulationConfig(
        pulses=100_000_000,
        source=Source.weak_coherent(weights=(1 / 3, 1 / 3, 1 / 3)),
        channel=BASELINE_CHANNEL,
        eta_b=BASELINE_ETA_B,
        p_d=BASELINE_PD,
        loss_db=0.0,
        seed=20260809,
    )
    return simulate(config)
