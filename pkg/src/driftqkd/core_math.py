"""Scalar building blocks: binary entropy, polarization-frame correlators,
the depolarizing channel model, and uniform drift averaging.

Angle convention: a physical polarization rotation by ``theta`` rotates the
linear-polarization (X/Y) sector of the Bloch vector by ``2*theta``.  All
public functions take the physical angles ``theta`` and ``delta``; same-axis
linear correlators therefore go as ``cos(2*theta)`` and their uniform average
over ``theta in [-delta, delta]`` carries the factor ``sin(2*delta)/(2*delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

AXES = ("X", "Y", "Z")

# Inputs this close to 0 or 1 are snapped to the boundary: downstream key-rate
# formulas produce tiny negative entropy arguments through cancellation.
_BOUNDARY_EPS = 1e-12


def binary_entropy(x: float) -> float:
    """Shannon entropy of a bit, ``-x log2 x - (1-x) log2 (1-x)``, in bits.

    Defined on [0, 1] with the limit value 0 at both endpoints.  Raises
    ``ValueError`` outside the (slightly widened) domain.
    """
    if not -_BOUNDARY_EPS <= x <= 1.0 + _BOUNDARY_EPS:
        raise ValueError(f"binary_entropy argument {x!r} outside [0, 1]")
    if x <= _BOUNDARY_EPS or x >= 1.0 - _BOUNDARY_EPS:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def drift_factor(delta: float) -> float:
    """Attenuation ``sin(2*delta)/(2*delta)`` of linear correlators under a
    uniform frame drift over ``[-delta, delta]``.

    Continuous at 0 (value 1) and strictly decreasing on [0, pi/2].
    """
    if delta < 0.0:
        raise ValueError(f"drift half-range must be >= 0, got {delta!r}")
    if delta == 0.0:
        return 1.0
    return math.sin(2.0 * delta) / (2.0 * delta)


@dataclass(frozen=True)
class ChannelModel:
    """Depolarizing channel plus frame geometry.

    p       survival probability of the depolarizing channel; the Z-basis
            error rate is (1 - p) / 2
    theta   fixed frame deviation in radians (used with delta = 0)
    delta   drift half-range in radians (drift is centered on theta, which is
            0 in all closed-form drift expressions)
    """

    p: float
    theta: float = 0.0
    delta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"survival probability must be in [0, 1], got {self.p!r}")
        if not 0.0 <= self.delta <= math.pi / 2:
            raise ValueError(f"drift half-range must be in [0, pi/2], got {self.delta!r}")

    @property
    def q_zz(self) -> float:
        """Z-basis error rate (1 - p) / 2, always in [0, 1/2]."""
        return (1.0 - self.p) / 2.0

    @classmethod
    def from_qber(cls, q_zz: float, theta: float = 0.0, delta: float = 0.0) -> "ChannelModel":
        if not 0.0 <= q_zz <= 0.5:
            raise ValueError(f"Z-basis QBER must be in [0, 1/2], got {q_zz!r}")
        return cls(p=1.0 - 2.0 * q_zz, theta=theta, delta=delta)


def _check_axis(axis: str) -> None:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def correlator_fixed(model: ChannelModel, f: str, g: str) -> float:
    """Correlator <F_A G_B> at the fixed deviation ``model.theta``.

    Z pairs with anything but Z give 0; <Z_A Z_B> = p regardless of theta.
    The drift half-range is ignored here.
    """
    _check_axis(f)
    _check_axis(g)
    if f == "Z" or g == "Z":
        return model.p if f == g else 0.0
    phi = 2.0 * model.theta
    if f == g:
        return model.p * math.cos(phi)
    s = model.p * math.sin(phi)
    return s if (f, g) == ("X", "Y") else -s


def correlator_drift_averaged(model: ChannelModel, f: str, g: str) -> float:
    """Correlator <F_A G_B> averaged over theta uniform on [-delta, delta].

    Same-axis linear correlators shrink by ``drift_factor(delta)``; the
    cross correlators XY and YX average to 0 (odd integrand); ZZ stays p.
    """
    _check_axis(f)
    _check_axis(g)
    if f == "Z" or g == "Z":
        return model.p if f == g else 0.0
    if f == g:
        return model.p * drift_factor(model.delta)
    return 0.0


@dataclass(frozen=True)
class CorrelatorSet:
    """All nine <F_A G_B> values for one channel configuration."""

    values: Mapping[tuple[str, str], float]

    def value(self, f: str, g: str) -> float:
        _check_axis(f)
        _check_axis(g)
        return self.values[(f, g)]

    def quantity_c(self) -> float:
        """Sum of the four squared X/Y-sector correlators (max value 2)."""
        return sum(self.values[(f, g)] ** 2 for f in "XY" for g in "XY")


def correlator_set(model: ChannelModel, averaged: bool = False) -> CorrelatorSet:
    """Assemble the full correlator table, fixed-deviation or drift-averaged."""
    fn = correlator_drift_averaged if averaged else correlator_fixed
    return CorrelatorSet({(f, g): fn(model, f, g) for f in AXES for g in AXES})
