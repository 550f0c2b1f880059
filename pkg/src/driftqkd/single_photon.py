"""Ideal (single-photon source) secret-key-rate bounds for RFI-QKD and for
BB84 run on either the {X,Z} or the {X,Y} basis pair, under frame drift.

Rates are returned unclamped; callers clamp at zero for display so that
zero-crossing solvers keep the sign information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_math import (
    ChannelModel,
    binary_entropy,
    correlator_set,
    drift_factor,
)

PROTOCOL_RFI = "RFI"
PROTOCOL_BB84_XZ = "BB84_XZ"
PROTOCOL_BB84_XY = "BB84_XY"
PROTOCOLS = (PROTOCOL_RFI, PROTOCOL_BB84_XZ, PROTOCOL_BB84_XY)

BASIS_PAIRS = ("XZ", "XY")

# Observed basis-pair labels used by the decoy layer; the *_avg entries are
# the per-protocol sifted averages for BB84.
OBSERVED_PAIRS = ("XX", "XY", "YX", "YY", "ZZ", "XZ_avg", "XY_avg")

_RADICAND_TOL = 1e-9


class RadicandError(ValueError):
    """Eavesdropper-bound radicand is negative beyond floating-point noise."""


@dataclass(frozen=True)
class RateResult:
    """One key-rate evaluation with its intermediate quantities.

    ``rate`` is the unclamped secret fraction per sifted signal pulse (per
    sent pulse in decoy mode) and may be negative; ``clamped`` floors it at 0.
    ``breakdown`` marks decoy estimation failures (rate is -inf then).
    """

    protocol: str
    rate: float
    qber: float
    i_e: float
    c: float | None = None
    u: float | None = None
    v: float | None = None
    y1_lower: float | None = None
    q1_upper: float | None = None
    breakdown: bool = False

    @property
    def clamped(self) -> float:
        return max(self.rate, 0.0)


def _check_qber(q_zz: float) -> None:
    if not 0.0 <= q_zz <= 0.5:
        raise ValueError(f"Z-basis QBER must be in [0, 1/2], got {q_zz!r}")


def quantity_c(q_zz: float, delta: float) -> float:
    """X/Y correlation strength C as a function of the Z-basis QBER and the
    drift half-range: ``2 (1 - 2 q_zz)^2 (sin 2d / 2d)^2``, in [0, 2]."""
    _check_qber(q_zz)
    return 2.0 * (1.0 - 2.0 * q_zz) ** 2 * drift_factor(delta) ** 2


def _eve_terms(qber: float, c: float) -> tuple[float, float, float]:
    """Shared eavesdropper bound: returns (information, u, v).

    Accepts any error rate in [0, 1] (decoy upper bounds may exceed 1/2).
    Limits: at qber = 0 the v-term has zero weight and v is taken as 0; a
    radicand that is negative beyond floating-point noise raises.
    """
    comp = 1.0 - qber
    if comp <= 0.0:
        u = 1.0 if c > 0.0 else 0.0
    else:
        u = min(math.sqrt(c / 2.0) / comp, 1.0)
    radicand = c / 2.0 - comp * comp * u * u
    if radicand < -_RADICAND_TOL:
        raise RadicandError(f"negative radicand {radicand!r} in eavesdropper bound")
    radicand = max(radicand, 0.0)
    v = 0.0 if qber == 0.0 else min(math.sqrt(radicand) / qber, 1.0)
    info = comp * binary_entropy((1.0 + u) / 2.0) + qber * binary_entropy((1.0 + v) / 2.0)
    return info, u, v


def eve_information(q_zz: float, c: float) -> float:
    """Upper bound on the eavesdropper's information, in bits, from the
    Z-basis QBER and the correlation strength C."""
    _check_qber(q_zz)
    if not 0.0 <= c <= 2.0 + _RADICAND_TOL:
        raise ValueError(f"correlation strength must be in [0, 2], got {c!r}")
    return _eve_terms(q_zz, c)[0]


def rate_rfi(q_zz: float, delta: float) -> RateResult:
    """RFI key-rate lower bound ``1 - H[q_zz] - I_E`` under drift."""
    c = quantity_c(q_zz, delta)
    info, u, v = _eve_terms(q_zz, c)
    rate = 1.0 - binary_entropy(q_zz) - info
    return RateResult(PROTOCOL_RFI, rate, qber=q_zz, i_e=info, c=c, u=u, v=v)


def rate_rfi_fixed_deviation(q_zz: float, theta: float) -> RateResult:
    """RFI key rate at a fixed frame deviation, with C assembled from the
    fixed-angle correlators.  Equals ``rate_rfi(q_zz, 0)`` for every theta."""
    _check_qber(q_zz)
    model = ChannelModel(p=1.0 - 2.0 * q_zz, theta=theta)
    c = correlator_set(model).quantity_c()
    info, u, v = _eve_terms(q_zz, c)
    rate = 1.0 - binary_entropy(q_zz) - info
    return RateResult(PROTOCOL_RFI, rate, qber=q_zz, i_e=info, c=c, u=u, v=v)


def _check_pair(basis_pair: str) -> None:
    if basis_pair not in BASIS_PAIRS:
        raise ValueError(f"basis pair must be one of {BASIS_PAIRS}, got {basis_pair!r}")


def qber_bb84(q_zz: float, delta: float, basis_pair: str) -> float:
    """Drift-averaged overall QBER for BB84 on the given basis pair."""
    _check_qber(q_zz)
    _check_pair(basis_pair)
    f = drift_factor(delta)
    if basis_pair == "XY":
        return 0.5 - (1.0 - 2.0 * q_zz) * f / 2.0
    return (1.0 + 2.0 * q_zz) / 4.0 - (1.0 - 2.0 * q_zz) * f / 4.0


def rate_bb84(q_zz: float, delta: float, basis_pair: str) -> RateResult:
    """BB84 key-rate lower bound ``1 - 2 H[qber]`` under drift."""
    q = qber_bb84(q_zz, delta, basis_pair)
    h = binary_entropy(q)
    return RateResult(f"BB84_{basis_pair}", 1.0 - 2.0 * h, qber=q, i_e=h)


def misalignment_table(q_zz: float, delta: float) -> dict[str, float]:
    """Drift-averaged error probabilities per observed basis pair.

    These are the misalignment errors fed to the detection layer: ZZ keeps
    the intrinsic channel error, the same-axis linear pairs shrink with the
    drift factor, and the cross pairs average to exactly 1/2.
    """
    _check_qber(q_zz)
    e_xx = 0.5 - (1.0 - 2.0 * q_zz) * drift_factor(delta) / 2.0
    return {
        "ZZ": q_zz,
        "XX": e_xx,
        "YY": e_xx,
        "XY": 0.5,
        "YX": 0.5,
        "XZ_avg": qber_bb84(q_zz, delta, "XZ"),
        "XY_avg": qber_bb84(q_zz, delta, "XY"),
    }
