"""Two-decoy-state estimation and decoy key rates for weak-coherent sources.

The source interleaves signal (mu), decoy (nu) and vacuum pulses.  From the
observed gains and QBERs this module bounds the single-photon yield, the
single-photon QBERs and the single-photon X/Y correlation strength, and
evaluates the resulting key-rate lower bounds.

Detector model: an n-photon pulse is detected with probability
``1 - (1 - eta)^n`` (eta = eta_b * 10^(-L/10)), a dark count fires with
probability p_d, so the n-photon yield is ``1 - (1 - eta)^n + p_d`` and the
n-photon error rate is ``(e * (1 - (1 - eta)^n) + p_d / 2) / yield``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .core_math import ChannelModel, binary_entropy
from .single_photon import (
    PROTOCOL_RFI,
    RadicandError,
    RateResult,
    _check_pair,
    _eve_terms,
    misalignment_table,
)

# full-precision values of the 1.70711 / 0.70711 constants in the
# correlation-strength estimator
_HALF_SQRT2 = math.sqrt(2.0) / 2.0
_ONE_PLUS_HALF_SQRT2 = 1.0 + _HALF_SQRT2

GAIN_LABELS = ("mu", "nu", "vacuum")


class EstimationBreakdown(RuntimeError):
    """Single-photon estimation failed (no key at this operating point)."""


@dataclass(frozen=True)
class DecoyParams:
    """Source intensities plus detector and channel parameters.

    mu, nu      signal and decoy mean photon numbers, mu > nu > 0
    y0          observed vacuum gain used by the estimators
    p_d         dark count probability per pulse
    eta_b       receiver detection efficiency
    loss_db     channel loss in dB
    """

    mu: float = 0.5
    nu: float = 0.05
    y0: float = 1e-6
    p_d: float = 1e-6
    eta_b: float = 0.35
    loss_db: float = 0.0

    def __post_init__(self) -> None:
        if not self.mu > self.nu > 0.0:
            raise ValueError(f"need mu > nu > 0, got mu={self.mu!r}, nu={self.nu!r}")
        if not 0.0 <= self.y0 < 1.0:
            raise ValueError(f"vacuum gain must be in [0, 1), got {self.y0!r}")
        if not 0.0 <= self.p_d < 1.0:
            raise ValueError(f"dark count probability must be in [0, 1), got {self.p_d!r}")
        if not 0.0 < self.eta_b <= 1.0:
            raise ValueError(f"detection efficiency must be in (0, 1], got {self.eta_b!r}")
        if self.loss_db < 0.0:
            raise ValueError(f"loss must be >= 0 dB, got {self.loss_db!r}")

    @property
    def eta(self) -> float:
        """Overall transmission-and-detection efficiency."""
        return self.eta_b * 10.0 ** (-self.loss_db / 10.0)


@dataclass(frozen=True)
class ObservedStatistics:
    """Gains and per-basis-pair QBERs as seen by the receiver.

    ``gains`` is keyed by intensity label ("mu", "nu", "vacuum"); ``qbers``
    maps an intensity label to a pair -> QBER table (pairs as in
    ``single_photon.OBSERVED_PAIRS``).  Values may be analytic or
    Monte-Carlo estimates.
    """

    gains: Mapping[str, float]
    qbers: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def gain(self, label: str) -> float:
        if label not in self.gains:
            raise ValueError(f"missing gain for intensity {label!r}")
        return self.gains[label]

    def qber(self, label: str, pair: str) -> float:
        try:
            return self.qbers[label][pair]
        except KeyError:
            raise ValueError(f"missing QBER for intensity {label!r}, pair {pair!r}") from None


@dataclass(frozen=True)
class SinglePhotonBounds:
    """Decoy-estimated bounds on the single-photon quantities."""

    y1_lower: float
    q1_upper: Mapping[str, float]
    q1_lower: Mapping[str, float]
    c1_lower: float


def overall_gain(params: DecoyParams, intensity: float) -> float:
    """Detection probability of a pulse with the given mean photon number:
    ``1 - exp(-eta * intensity) + p_d``.

    Evaluated through expm1 so high-loss gains keep full relative precision.
    """
    if intensity < 0.0:
        raise ValueError(f"mean photon number must be >= 0, got {intensity!r}")
    return -math.expm1(-params.eta * intensity) + params.p_d


def observed_qber(params: DecoyParams, intensity: float, e_ij: float) -> float:
    """Observed QBER at one intensity for misalignment error ``e_ij``.

    Closed form of the Poisson sum over photon numbers:
    ``(e_ij (1 - exp(-eta I)) + p_d / 2) / gain``.
    """
    if not 0.0 <= e_ij <= 0.5:
        raise ValueError(f"misalignment error must be in [0, 1/2], got {e_ij!r}")
    gain = overall_gain(params, intensity)
    if gain <= 0.0:
        raise ValueError("no detections at this intensity (zero gain)")
    return (-e_ij * math.expm1(-params.eta * intensity) + params.p_d / 2.0) / gain


def analytic_statistics(params: DecoyParams, channel: ChannelModel) -> ObservedStatistics:
    """Expected observed statistics for the depolarizing channel under drift.

    The vacuum gain is taken from ``params.y0`` (the value the estimators
    use); the signal and decoy gains follow the detector model.
    """
    errors = misalignment_table(channel.q_zz, channel.delta)
    gains = {
        "mu": overall_gain(params, params.mu),
        "nu": overall_gain(params, params.nu),
        "vacuum": params.y0,
    }
    qbers = {
        label: {pair: observed_qber(params, intensity, e) for pair, e in errors.items()}
        for label, intensity in (("mu", params.mu), ("nu", params.nu))
    }
    return ObservedStatistics(gains=gains, qbers=qbers)


def y1_lower_bound(params: DecoyParams, stats: ObservedStatistics) -> float:
    """Lower bound on the single-photon yield from the two-decoy estimator,
    clamped below at 0."""
    mu, nu = params.mu, params.nu
    y_mu, y_nu, y_vac = stats.gain("mu"), stats.gain("nu"), stats.gain("vacuum")
    denominator = mu * (mu * nu - nu * nu)
    if denominator <= 0.0:
        raise EstimationBreakdown(f"decoy estimator needs mu > nu > 0 (denominator {denominator!r})")
    numerator = (
        mu * mu * y_nu * math.exp(nu)
        - nu * nu * y_mu * math.exp(mu)
        - (mu * mu - nu * nu) * y_vac
    )
    return max(numerator / denominator, 0.0)


def q1_bounds(
    params: DecoyParams,
    stats: ObservedStatistics,
    pair: str,
    y1_lower: float | None = None,
) -> tuple[float, float]:
    """(upper, lower) bounds on the single-photon QBER for one basis pair,
    both clamped to [0, 1].

    Raises ``EstimationBreakdown`` when the single-photon yield bound is 0.
    """
    y1l = y1_lower_bound(params, stats) if y1_lower is None else y1_lower
    if y1l <= 0.0:
        raise EstimationBreakdown("single-photon yield bound is zero")
    mu = params.mu
    y_mu, y_vac = stats.gain("mu"), stats.gain("vacuum")
    q_mu = stats.qber("mu", pair)
    scale = mu * y1l * math.exp(-mu)
    vacuum_term = 0.5 * y_vac * math.exp(-mu)
    upper = (q_mu * y_mu - vacuum_term) / scale
    lower = 1.0 - ((1.0 - q_mu) * y_mu - vacuum_term) / scale
    clamp = lambda x: min(max(x, 0.0), 1.0)
    return clamp(upper), clamp(lower)


def c1_lower_bound(
    params: DecoyParams,
    stats: ObservedStatistics,
    y1_lower: float | None = None,
) -> float:
    """Lower bound on the single-photon X/Y correlation strength, in [0, 2].

    Combines, per axis row, the anti-correlation certificate built from the
    single-photon QBER lower bounds with the diagonal-projection certificate
    built from the row's observed error sum.  The projection route is
    conservative when the cross-basis correlators vanish (symmetric drift):
    it then certifies at most half of the true row contribution.
    """
    y1l = y1_lower_bound(params, stats) if y1_lower is None else y1_lower
    if y1l <= 0.0:
        raise EstimationBreakdown("single-photon yield bound is zero")
    mu = params.mu
    y_mu, y_vac = stats.gain("mu"), stats.gain("vacuum")
    vacuum_term = _HALF_SQRT2 * y_vac * math.exp(-mu)

    total = 0.0
    for row in ("X", "Y"):
        anti = 0.0
        row_qber_sum = 0.0
        for col in ("X", "Y"):
            pair = row + col
            _, q1_low = q1_bounds(params, stats, pair, y1_lower=y1l)
            anti += (1.0 - 2.0 * max(0.5, q1_low)) ** 2
            row_qber_sum += stats.qber("mu", pair)
        projection = (
            (_ONE_PLUS_HALF_SQRT2 - row_qber_sum) * y_mu - vacuum_term
        ) / (mu * y1l) - _HALF_SQRT2
        total += max(anti, 2.0 * projection * projection)
    return min(max(total, 0.0), 2.0)


def single_photon_bounds(params: DecoyParams, stats: ObservedStatistics) -> SinglePhotonBounds:
    """Evaluate every decoy bound once, sharing the yield bound."""
    y1l = y1_lower_bound(params, stats)
    if y1l <= 0.0:
        raise EstimationBreakdown("single-photon yield bound is zero")
    q1_upper: dict[str, float] = {}
    q1_lower: dict[str, float] = {}
    for pair in stats.qbers["mu"]:
        up, lo = q1_bounds(params, stats, pair, y1_lower=y1l)
        q1_upper[pair] = up
        q1_lower[pair] = lo
    c1 = c1_lower_bound(params, stats, y1_lower=y1l)
    return SinglePhotonBounds(y1_lower=y1l, q1_upper=q1_upper, q1_lower=q1_lower, c1_lower=c1)


def _no_key(protocol: str, qber: float) -> RateResult:
    return RateResult(
        protocol,
        float("-inf"),
        qber=qber,
        i_e=1.0,
        breakdown=True,
    )


def rate_rfi_decoy(params: DecoyParams, stats: ObservedStatistics) -> RateResult:
    """Decoy RFI key-rate lower bound per sent pulse (unclamped).

    On estimation breakdown the rate is the -inf sentinel, never an
    exception, so sweeps stay total.
    """
    q_zz_mu = stats.qber("mu", "ZZ")
    try:
        y1l = y1_lower_bound(params, stats)
        if y1l <= 0.0:
            raise EstimationBreakdown("single-photon yield bound is zero")
        q1_up, _ = q1_bounds(params, stats, "ZZ", y1_lower=y1l)
        c1 = c1_lower_bound(params, stats, y1_lower=y1l)
        info, u, v = _eve_terms(q1_up, c1)
    except (EstimationBreakdown, RadicandError):
        return _no_key(PROTOCOL_RFI, q_zz_mu)
    mu = params.mu
    rate = -stats.gain("mu") * binary_entropy(q_zz_mu) + mu * y1l * math.exp(-mu) * (1.0 - info)
    return RateResult(
        PROTOCOL_RFI,
        rate,
        qber=q_zz_mu,
        i_e=info,
        c=c1,
        u=u,
        v=v,
        y1_lower=y1l,
        q1_upper=q1_up,
    )


def rate_bb84_decoy(params: DecoyParams, stats: ObservedStatistics, basis_pair: str) -> RateResult:
    """Decoy BB84 key-rate lower bound per sent pulse for one basis pair."""
    _check_pair(basis_pair)
    pair = basis_pair + "_avg"
    q_bar_mu = stats.qber("mu", pair)
    try:
        y1l = y1_lower_bound(params, stats)
        if y1l <= 0.0:
            raise EstimationBreakdown("single-photon yield bound is zero")
        q1_up, _ = q1_bounds(params, stats, pair, y1_lower=y1l)
    except EstimationBreakdown:
        return _no_key(f"BB84_{basis_pair}", q_bar_mu)
    mu = params.mu
    info = binary_entropy(q1_up)
    rate = -stats.gain("mu") * binary_entropy(q_bar_mu) + mu * y1l * math.exp(-mu) * (1.0 - info)
    return RateResult(
        f"BB84_{basis_pair}",
        rate,
        qber=q_bar_mu,
        i_e=info,
        y1_lower=y1l,
        q1_upper=q1_up,
    )


# Channel-model ground truth for the single-photon quantities; used to
# validate the decoy bounds against an independent route.

def exact_single_photon_yield(params: DecoyParams) -> float:
    return params.eta + params.p_d


def exact_single_photon_qber(params: DecoyParams, e_ij: float) -> float:
    if not 0.0 <= e_ij <= 0.5:
        raise ValueError(f"misalignment error must be in [0, 1/2], got {e_ij!r}")
    return (e_ij * params.eta + params.p_d / 2.0) / exact_single_photon_yield(params)


def exact_single_photon_c(params: DecoyParams, channel: ChannelModel) -> float:
    errors = misalignment_table(channel.q_zz, channel.delta)
    return sum(
        (1.0 - 2.0 * exact_single_photon_qber(params, errors[row + col])) ** 2
        for row in "XY"
        for col in "XY"
    )
