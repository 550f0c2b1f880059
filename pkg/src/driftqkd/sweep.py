"""Parameter sweeps over (q_zz, delta, loss) and zero-crossing solving."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping

import math

import numpy as np

from .core_math import ChannelModel
from .decoy import DecoyParams, analytic_statistics, rate_bb84_decoy, rate_rfi_decoy
from .single_photon import (
    PROTOCOL_BB84_XY,
    PROTOCOL_BB84_XZ,
    PROTOCOL_RFI,
    PROTOCOLS,
    RateResult,
    rate_bb84,
    rate_rfi,
)

VARIABLES = ("q_zz", "delta", "loss_db")
MODES = ("ideal", "decoy")

DEFAULT_RANGES: dict[str, tuple[float, float]] = {
    "q_zz": (0.0, 0.25),
    "delta": (0.0, math.pi / 2),
    "loss_db": (0.0, 60.0),
}
DEFAULT_POINTS = 601


class NoBracketError(ValueError):
    """The rate does not change sign over the requested bracket."""


class MonotonicityError(ValueError):
    """The rate is not monotone over the bracket; a bisection root would be
    unreliable."""


def evaluate_rate(
    protocol: str,
    mode: str,
    channel: ChannelModel,
    decoy: DecoyParams | None = None,
) -> RateResult:
    """Evaluate one protocol rate in either ideal or decoy mode."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "ideal":
        if protocol == PROTOCOL_RFI:
            return rate_rfi(channel.q_zz, channel.delta)
        return rate_bb84(channel.q_zz, channel.delta, protocol.removeprefix("BB84_"))
    if decoy is None:
        raise ValueError("decoy mode requires decoy parameters")
    stats = analytic_statistics(decoy, channel)
    if protocol == PROTOCOL_RFI:
        return rate_rfi_decoy(decoy, stats)
    return rate_bb84_decoy(decoy, stats, protocol.removeprefix("BB84_"))


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a variable, a grid, and everything held fixed."""

    variable: str
    start: float
    stop: float
    points: int = DEFAULT_POINTS
    mode: str = "ideal"
    protocols: tuple[str, ...] = PROTOCOLS
    channel: ChannelModel = ChannelModel(p=1.0)
    decoy: DecoyParams | None = None

    def __post_init__(self) -> None:
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}, got {self.variable!r}")
        if not self.start < self.stop:
            raise ValueError(f"need start < stop, got [{self.start!r}, {self.stop!r}]")
        if self.points < 2:
            raise ValueError(f"need at least 2 grid points, got {self.points!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.protocols:
            raise ValueError("at least one protocol required")
        for protocol in self.protocols:
            if protocol not in PROTOCOLS:
                raise ValueError(f"unknown protocol {protocol!r}")
        if self.mode == "decoy" and self.decoy is None:
            raise ValueError("decoy mode requires decoy parameters")
        if self.variable == "loss_db" and self.mode != "decoy":
            raise ValueError("loss sweeps only apply to decoy mode")


@dataclass(frozen=True)
class SweepRecord:
    """Rates at one grid point; ``raw`` keeps the sign, ``clamped`` floors
    at zero for output."""

    variable: str
    value: float
    raw: Mapping[str, float]

    @property
    def clamped(self) -> dict[str, float]:
        return {protocol: max(rate, 0.0) for protocol, rate in self.raw.items()}


def _configure(spec: SweepSpec, value: float) -> tuple[ChannelModel, DecoyParams | None]:
    channel, decoy = spec.channel, spec.decoy
    if spec.variable == "q_zz":
        channel = ChannelModel.from_qber(value, theta=channel.theta, delta=channel.delta)
    elif spec.variable == "delta":
        channel = replace(channel, delta=value)
    else:
        decoy = replace(decoy, loss_db=value)
    return channel, decoy


def run_sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Evaluate the selected protocols on a uniform grid; deterministic."""
    grid = np.linspace(spec.start, spec.stop, spec.points)
    records: list[SweepRecord] = []
    for value in grid:
        value = float(value)
        try:
            channel, decoy = _configure(spec, value)
            raw = {
                protocol: evaluate_rate(protocol, spec.mode, channel, decoy).rate
                for protocol in spec.protocols
            }
        except ValueError as exc:
            raise ValueError(f"sweep point {spec.variable}={value!r}: {exc}") from exc
        records.append(SweepRecord(variable=spec.variable, value=value, raw=raw))
    return records


def find_threshold(
    rate_fn: Callable[[float], float],
    lower: float,
    upper: float,
    tol: float = 1e-6,
    monotone_scan: int = 0,
) -> float:
    """Bisect the zero crossing of a decreasing rate function.

    Requires ``rate_fn(lower) > 0 > rate_fn(upper)``.  With
    ``monotone_scan > 0`` the bracket is first scanned on that many points;
    a profile that rises before its zero crossing, or that returns above
    zero after it, aborts with ``MonotonicityError`` instead of risking a
    wrong root.  (Decoy rates may creep back toward zero from below deep in
    the no-key tail; that does not endanger the root and is allowed.)  The
    tolerance applies to the variable.
    """
    if not lower < upper:
        raise ValueError(f"need lower < upper, got [{lower!r}, {upper!r}]")
    f_lo, f_hi = rate_fn(lower), rate_fn(upper)
    if not (f_lo > 0.0 > f_hi):
        raise NoBracketError(
            f"no sign change over [{lower!r}, {upper!r}]: rate({lower!r})={f_lo!r}, "
            f"rate({upper!r})={f_hi!r}"
        )
    if monotone_scan > 2:
        values = [rate_fn(x) for x in np.linspace(lower, upper, monotone_scan)]
        crossed = False
        for left, right in zip(values, values[1:]):
            if not crossed:
                if right > left + 1e-12:
                    raise MonotonicityError(
                        f"rate rises before its zero crossing over [{lower!r}, {upper!r}]"
                    )
                crossed = right < 0.0
            elif right > 0.0:
                raise MonotonicityError(
                    f"rate has multiple zero crossings over [{lower!r}, {upper!r}]"
                )
    while upper - lower > tol:
        mid = 0.5 * (lower + upper)
        if rate_fn(mid) > 0.0:
            lower = mid
        else:
            upper = mid
    return 0.5 * (lower + upper)


def threshold_rate_fn(
    protocol: str,
    mode: str,
    vary: str,
    channel: ChannelModel,
    decoy: DecoyParams | None = None,
) -> Callable[[float], float]:
    """Rate as a function of one scalar, for threshold solving."""
    if vary not in VARIABLES:
        raise ValueError(f"vary must be one of {VARIABLES}, got {vary!r}")
    if vary == "loss_db" and mode != "decoy":
        raise ValueError("loss thresholds only apply to decoy mode")
    if mode == "decoy" and decoy is None:
        raise ValueError("decoy mode requires decoy parameters")

    def rate_at(value: float) -> float:
        if vary == "q_zz":
            chan = ChannelModel.from_qber(value, theta=channel.theta, delta=channel.delta)
            dec = decoy
        elif vary == "delta":
            chan = replace(channel, delta=value)
            dec = decoy
        else:
            chan = channel
            dec = replace(decoy, loss_db=value)
        return evaluate_rate(protocol, mode, chan, dec).rate

    return rate_at
