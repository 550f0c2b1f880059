"""Monte-Carlo protocol simulator used as the independent validation oracle.

Each pulse is simulated from first principles: intensity class, Poisson
photon number, per-photon loss, frame deviation redrawn per pulse, channel
depolarization, threshold detection with dark counts, and uniform squashing
when a signal outcome and a dark count conflict.  Tallies are accumulated in
fixed-size blocks, each with its own PRNG substream spawned from the master
seed, so results are reproducible and blocks can be merged in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Mapping

import numpy as np

from .core_math import AXES, ChannelModel
from .decoy import ObservedStatistics

BLOCK_SIZE = 1_000_000

_OUTCOME_NO_CLICK = 2
_OUTCOME_NAMES = ("0", "1", "no_click")

UNIFORM_BASES = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


@dataclass(frozen=True)
class Source:
    """Pulse source: intensity labels, mean photon numbers and mixing ratios.

    ``single_photon()`` emits exactly one photon per pulse; ``weak_coherent``
    interleaves signal, decoy and vacuum pulses with the given probabilities.
    """

    kind: str
    labels: tuple[str, ...]
    intensities: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("single_photon", "weak_coherent"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not (len(self.labels) == len(self.intensities) == len(self.weights)):
            raise ValueError("labels, intensities and weights must have equal length")
        if any(w < 0.0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"mixing ratios must be >= 0 and sum to 1, got {self.weights!r}")

    @classmethod
    def single_photon(cls) -> "Source":
        return cls("single_photon", ("single",), (1.0,), (1.0,))

    @classmethod
    def weak_coherent(
        cls,
        mu: float = 0.5,
        nu: float = 0.05,
        weights: tuple[float, float, float] = (0.7, 0.2, 0.1),
    ) -> "Source":
        if not mu > nu > 0.0:
            raise ValueError(f"need mu > nu > 0, got mu={mu!r}, nu={nu!r}")
        return cls("weak_coherent", ("mu", "nu", "vacuum"), (mu, nu, 0.0), tuple(weights))


@dataclass(frozen=True)
class SimulationConfig:
    """Everything that determines one simulation run; the seed fully
    determines the output."""

    pulses: int
    source: Source
    channel: ChannelModel
    eta_b: float
    p_d: float
    loss_db: float = 0.0
    seed: int = 0
    basis_weights_alice: tuple[float, float, float] = UNIFORM_BASES
    basis_weights_bob: tuple[float, float, float] = UNIFORM_BASES

    def __post_init__(self) -> None:
        if self.pulses < 1:
            raise ValueError(f"pulse count must be >= 1, got {self.pulses!r}")
        if not 0.0 < self.eta_b <= 1.0:
            raise ValueError(f"detection efficiency must be in (0, 1], got {self.eta_b!r}")
        if not 0.0 <= self.p_d < 1.0:
            raise ValueError(f"dark count probability must be in [0, 1), got {self.p_d!r}")
        if self.loss_db < 0.0:
            raise ValueError(f"loss must be >= 0 dB, got {self.loss_db!r}")
        for weights in (self.basis_weights_alice, self.basis_weights_bob):
            if len(weights) != 3 or any(w < 0.0 for w in weights):
                raise ValueError(f"need three non-negative basis weights, got {weights!r}")
            if abs(sum(weights) - 1.0) > 1e-9:
                raise ValueError(f"basis weights must sum to 1, got {weights!r}")

    @property
    def eta(self) -> float:
        return self.eta_b * 10.0 ** (-self.loss_db / 10.0)


@dataclass
class TallyTable:
    """Raw event counts, indexed [intensity, basis_a, basis_b, bit_a, outcome]
    with outcome in (0, 1, no_click).  Counts sum to the pulse count."""

    counts: np.ndarray
    labels: tuple[str, ...]
    intensities: tuple[float, ...]
    pulses: int

    def merge(self, other: "TallyTable") -> "TallyTable":
        if self.labels != other.labels:
            raise ValueError("cannot merge tallies with different intensity classes")
        return TallyTable(
            counts=self.counts + other.counts,
            labels=self.labels,
            intensities=self.intensities,
            pulses=self.pulses + other.pulses,
        )

    def rows(self) -> list[tuple[str, str, str, int, str, int]]:
        """All cells as (intensity, basis_a, basis_b, bit_a, outcome_b, count)."""
        out = []
        for k, label in enumerate(self.labels):
            for ia, axis_a in enumerate(AXES):
                for ib, axis_b in enumerate(AXES):
                    for bit in (0, 1):
                        for outcome in range(3):
                            out.append(
                                (
                                    label,
                                    axis_a,
                                    axis_b,
                                    bit,
                                    _OUTCOME_NAMES[outcome],
                                    int(self.counts[k, ia, ib, bit, outcome]),
                                )
                            )
        return out

    def write_csv(self, stream: IO[str]) -> None:
        """Export every cell as intensity,basis_a,basis_b,bit_a,outcome_b,count."""
        stream.write(tally_rows_to_csv(self.rows()))


def tally_rows_to_csv(rows: list[tuple[str, str, str, int, str, int]]) -> str:
    lines = ["intensity,basis_a,basis_b,bit_a,outcome_b,count"]
    lines.extend(",".join(str(field) for field in row) for row in rows)
    return "\n".join(lines) + "\n"


def _simulate_block(rng: np.random.Generator, n: int, config: SimulationConfig) -> np.ndarray:
    src = config.source
    eta = config.eta
    chan = config.channel

    if len(src.labels) == 1:
        cls = np.zeros(n, dtype=np.int64)
    else:
        cls = np.searchsorted(np.cumsum(src.weights), rng.random(n), side="right")
    if src.kind == "single_photon":
        photons = np.ones(n, dtype=np.int64)
    else:
        photons = np.zeros(n, dtype=np.int64)
        for k, intensity in enumerate(src.intensities):
            idx = np.flatnonzero(cls == k)
            if idx.size and intensity > 0.0:
                photons[idx] = rng.poisson(intensity, idx.size)

    detected = rng.random(n) < 1.0 - (1.0 - eta) ** photons
    dark = rng.random(n) < config.p_d

    basis_a = np.searchsorted(np.cumsum(config.basis_weights_alice), rng.random(n), side="right")
    basis_b = np.searchsorted(np.cumsum(config.basis_weights_bob), rng.random(n), side="right")
    bit_a = rng.integers(0, 2, n)
    theta = chan.theta + (2.0 * rng.random(n) - 1.0) * chan.delta

    outcome = np.full(n, _OUTCOME_NO_CLICK, dtype=np.int64)

    signal = np.flatnonzero(detected)
    if signal.size:
        ia, ib = basis_a[signal], basis_b[signal]
        phi = 2.0 * theta[signal]
        corr = np.zeros(signal.size)
        zz = (ia == 2) & (ib == 2)
        corr[zz] = 1.0
        same_linear = ((ia == 0) & (ib == 0)) | ((ia == 1) & (ib == 1))
        corr[same_linear] = np.cos(phi[same_linear])
        xy = (ia == 0) & (ib == 1)
        corr[xy] = np.sin(phi[xy])
        yx = (ia == 1) & (ib == 0)
        corr[yx] = -np.sin(phi[yx])
        # depolarized pulses carry the maximally mixed state: zero correlation
        corr[rng.random(signal.size) < 1.0 - chan.p] = 0.0
        error = rng.random(signal.size) < (1.0 - corr) / 2.0
        outcome[signal] = bit_a[signal] ^ error

    dark_idx = np.flatnonzero(dark)
    if dark_idx.size:
        dark_bit = rng.integers(0, 2, dark_idx.size)
        recorded = outcome[dark_idx]
        no_signal = recorded == _OUTCOME_NO_CLICK
        recorded[no_signal] = dark_bit[no_signal]
        conflict = ~no_signal & (recorded != dark_bit)
        recorded[conflict] = rng.integers(0, 2, int(conflict.sum()))
        outcome[dark_idx] = recorded

    flat = (((cls * 3 + basis_a) * 3 + basis_b) * 2 + bit_a) * 3 + outcome
    return np.bincount(flat, minlength=len(src.labels) * 3 * 3 * 2 * 3)


def simulate(config: SimulationConfig) -> TallyTable:
    """Run the full simulation and return the accumulated tallies."""
    n_classes = len(config.source.labels)
    totals = np.zeros(n_classes * 3 * 3 * 2 * 3, dtype=np.int64)
    n_blocks = (config.pulses + BLOCK_SIZE - 1) // BLOCK_SIZE
    streams = np.random.SeedSequence(config.seed).spawn(n_blocks)
    remaining = config.pulses
    for block, stream in enumerate(streams):
        n = min(BLOCK_SIZE, remaining)
        remaining -= n
        rng = np.random.Generator(np.random.Philox(stream))
        totals += _simulate_block(rng, n, config)
    return TallyTable(
        counts=totals.reshape(n_classes, 3, 3, 2, 3),
        labels=config.source.labels,
        intensities=config.source.intensities,
        pulses=config.pulses,
    )


@dataclass(frozen=True)
class ObservableEstimates:
    """Point estimates with binomial standard errors, per intensity class.

    ``correlators`` holds 1 - 2*QBER per basis pair; ``c_values`` the
    empirical X/Y correlation strength.  ``insufficient`` is set when any
    basis-pair cell has fewer than 100 detections.
    """

    gains: Mapping[str, float]
    gain_se: Mapping[str, float]
    qbers: Mapping[str, Mapping[str, float]]
    qber_se: Mapping[str, Mapping[str, float]]
    correlators: Mapping[str, Mapping[str, float]]
    c_values: Mapping[str, float]
    c_se: Mapping[str, float]
    insufficient: bool

    def to_observed_statistics(self) -> ObservedStatistics:
        return ObservedStatistics(gains=dict(self.gains), qbers={k: dict(v) for k, v in self.qbers.items()})


def _binomial_se(p: float, n: float) -> float:
    if n <= 0:
        return float("inf")
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def estimate_observables(tally: TallyTable) -> ObservableEstimates:
    """Empirical gains, QBERs, correlators and correlation strength.

    QBERs are conditioned on detections in each (basis_a, basis_b) cell; the
    correlator estimate is 1 - 2*QBER and the correlation strength sums the
    four squared X/Y-sector correlators.  BB84 sifted averages pool the two
    contributing cells.
    """
    counts = tally.counts
    gains: dict[str, float] = {}
    gain_se: dict[str, float] = {}
    qbers: dict[str, dict[str, float]] = {}
    qber_se: dict[str, dict[str, float]] = {}
    correlators: dict[str, dict[str, float]] = {}
    c_values: dict[str, float] = {}
    c_se: dict[str, float] = {}
    insufficient = False

    for k, label in enumerate(tally.labels):
        sent = int(counts[k].sum())
        clicks = int(counts[k, :, :, :, :2].sum())
        gain = clicks / sent if sent else 0.0
        gains[label] = gain
        gain_se[label] = _binomial_se(gain, sent)

        pair_qber: dict[str, float] = {}
        pair_se: dict[str, float] = {}
        errors_by_cell: dict[str, tuple[int, int]] = {}
        for ia, axis_a in enumerate(AXES):
            for ib, axis_b in enumerate(AXES):
                cell = counts[k, ia, ib]
                cell_clicks = int(cell[:, :2].sum())
                errors = int(cell[0, 1] + cell[1, 0])
                errors_by_cell[axis_a + axis_b] = (errors, cell_clicks)
                if cell_clicks < 100:
                    insufficient = True
                if cell_clicks > 0:
                    q = errors / cell_clicks
                    pair_qber[axis_a + axis_b] = q
                    pair_se[axis_a + axis_b] = _binomial_se(q, cell_clicks)
        for avg_pair, cells in (("XZ_avg", ("XX", "ZZ")), ("XY_avg", ("XX", "YY"))):
            pooled_errors = sum(errors_by_cell[c][0] for c in cells)
            pooled_clicks = sum(errors_by_cell[c][1] for c in cells)
            if pooled_clicks > 0:
                q = pooled_errors / pooled_clicks
                pair_qber[avg_pair] = q
                pair_se[avg_pair] = _binomial_se(q, pooled_clicks)
        qbers[label] = pair_qber
        qber_se[label] = pair_se

        corr = {
            pair: 1.0 - 2.0 * pair_qber[pair]
            for pair in ("XX", "XY", "YX", "YY", "ZZ")
            if pair in pair_qber
        }
        correlators[label] = corr
        xy_pairs = [p for p in ("XX", "XY", "YX", "YY") if p in corr]
        if len(xy_pairs) == 4:
            c_values[label] = sum(corr[p] ** 2 for p in xy_pairs)
            c_se[label] = math.sqrt(
                sum((4.0 * corr[p] * pair_se[p]) ** 2 for p in xy_pairs)
            )

    return ObservableEstimates(
        gains=gains,
        gain_se=gain_se,
        qbers=qbers,
        qber_se=qber_se,
        correlators=correlators,
        c_values=c_values,
        c_se=c_se,
        insufficient=insufficient,
    )
