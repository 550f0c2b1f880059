"""Ideal single-photon key rates: frozen oracles, assembly cross-checks,
structural invariants, and one Monte-Carlo recomputation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftqkd import (
    ChannelModel,
    SimulationConfig,
    Source,
    binary_entropy,
    correlator_drift_averaged,
    correlator_set,
    estimate_observables,
    eve_information,
    misalignment_table,
    qber_bb84,
    quantity_c,
    rate_bb84,
    rate_rfi,
    rate_rfi_fixed_deviation,
    simulate,
)

PI = math.pi

# Frozen 30-digit roots (mpmath):
#   two-basis entropy threshold 1 - 2 H[q] = 0
BB84_THRESHOLD = 0.11002786443835955
#   drift half-range at which the {X,Y} QBER reaches that threshold for q_zz=0
DELTA_STAR = 0.5952879495884835


def _bisect(fn, lo, hi, tol=1e-12):
    """Test-local bisection, independent of the package solver."""
    flo = fn(lo)
    assert flo * fn(hi) < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) * flo > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# quantity C
# ---------------------------------------------------------------------------

def test_c_noiseless_static():
    assert quantity_c(0.0, 0.0) == 2.0


def test_c_fully_depolarized():
    for delta in (0.0, 0.3, PI / 2):
        assert quantity_c(0.5, delta) == 0.0


def test_c_matches_correlator_assembly():
    """Brute-force C from the four drift-averaged correlators."""
    model = ChannelModel(p=0.94, delta=PI / 7)
    assembled = sum(
        correlator_drift_averaged(model, f, g) ** 2 for f in "XY" for g in "XY"
    )
    assert quantity_c(0.03, PI / 7) == pytest.approx(assembled, abs=1e-12)
    # frozen from the closed form at 30 digits
    assert quantity_c(0.03, PI / 7) == pytest.approx(1.3407516961648416, abs=1e-14)


def test_c_domain_errors():
    with pytest.raises(ValueError):
        quantity_c(0.6, 0.0)
    with pytest.raises(ValueError):
        quantity_c(0.1, -0.2)


# ---------------------------------------------------------------------------
# eavesdropper information
# ---------------------------------------------------------------------------

def test_eve_zero_error_full_correlation():
    assert eve_information(0.0, 2.0) == 0.0


def test_eve_no_correlation_gives_full_bit():
    for q in (0.0, 0.1, 0.3, 0.5):
        assert eve_information(q, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_eve_domain():
    with pytest.raises(ValueError):
        eve_information(0.7, 1.0)
    with pytest.raises(ValueError):
        eve_information(0.1, 2.5)


# ---------------------------------------------------------------------------
# RFI rate
# ---------------------------------------------------------------------------

def test_rfi_perfect_channel():
    result = rate_rfi(0.0, 0.0)
    assert result.rate == 1.0
    assert result.c == 2.0


def test_rfi_zero_crossing_near_126_permille():
    # the rate changes sign within +-1e-2 of q_zz = 0.126
    assert rate_rfi(0.126, 0.0).rate == pytest.approx(0.0, abs=1e-2)
    root = _bisect(lambda q: rate_rfi(q, 0.0).rate, 0.05, 0.2)
    assert root == pytest.approx(0.12619308327682118, abs=1e-9)


def test_rfi_monte_carlo_recomputation():
    """rate_rfi(0.03, pi/8) equals the rate recomputed from the MC estimate
    of the correlation strength, within 3 propagated sigma (1e7 samples)."""
    config = SimulationConfig(
        pulses=10_000_000,
        source=Source.single_photon(),
        channel=ChannelModel(p=0.94, delta=PI / 8),
        eta_b=1.0,
        p_d=0.0,
        loss_db=0.0,
        seed=424242,
    )
    estimates = estimate_observables(simulate(config))
    c_hat = estimates.c_values["single"]
    c_sigma = estimates.c_se["single"]
    analytic = rate_rfi(0.03, PI / 8)
    recomputed = 1.0 - binary_entropy(0.03) - eve_information(0.03, min(c_hat, 2.0))
    slope = (
        eve_information(0.03, analytic.c + 1e-6) - eve_information(0.03, analytic.c - 1e-6)
    ) / 2e-6
    tolerance = 3.0 * abs(slope) * c_sigma
    assert recomputed == pytest.approx(analytic.rate, abs=tolerance)


def test_rfi_theta_independence():
    """Fixed-deviation C and rate match the drift-free values for every
    rotation angle, to 1e-12."""
    for q_zz in (0.0, 0.03, 0.1):
        reference = rate_rfi(q_zz, 0.0)
        for theta in np.linspace(0.0, PI, 25):
            fixed = rate_rfi_fixed_deviation(q_zz, float(theta))
            assert fixed.c == pytest.approx(reference.c, abs=1e-12)
            assert fixed.rate == pytest.approx(reference.rate, abs=1e-12)


# ---------------------------------------------------------------------------
# BB84 QBER and rate
# ---------------------------------------------------------------------------

def test_bb84_qber_static_noiseless():
    assert qber_bb84(0.0, 0.0, "XY") == 0.0
    assert qber_bb84(0.0, 0.0, "XZ") == 0.0


def test_bb84_qber_static_equals_channel_error():
    for q in (0.01, 0.03, 0.11):
        assert qber_bb84(q, 0.0, "XZ") == pytest.approx(q, abs=1e-15)
        assert qber_bb84(q, 0.0, "XY") == pytest.approx(q, abs=1e-15)


def test_bb84_qber_xz_matches_correlator_assembly():
    model = ChannelModel(p=0.94, delta=PI / 7)
    q_xx = (1.0 - correlator_drift_averaged(model, "X", "X")) / 2.0
    assert qber_bb84(0.03, PI / 7, "XZ") == pytest.approx((q_xx + 0.03) / 2.0, abs=1e-15)


def test_bb84_qber_domain():
    with pytest.raises(ValueError):
        qber_bb84(0.03, 0.0, "YZ")


def test_bb84_perfect_channel():
    assert rate_bb84(0.0, 0.0, "XZ").rate == 1.0


def test_bb84_zero_crossing_near_11_percent():
    assert rate_bb84(0.11, 0.0, "XZ").rate == pytest.approx(0.0, abs=1e-2)
    root = _bisect(lambda q: rate_bb84(q, 0.0, "XZ").rate, 0.05, 0.2)
    assert root == pytest.approx(BB84_THRESHOLD, abs=1e-9)


def test_bb84_rate_zero_at_drift_threshold():
    """With a clean channel, the {X,Y} rate crosses zero at the drift
    half-range where the averaged QBER hits the entropy threshold."""
    # independent check of the frozen root: solve sin(2d)/(2d) = 1 - 2 q*
    target = 1.0 - 2.0 * BB84_THRESHOLD
    delta_star = _bisect(lambda d: math.sin(2 * d) / (2 * d) - target, 0.3, 1.0)
    assert delta_star == pytest.approx(DELTA_STAR, abs=1e-9)
    assert qber_bb84(0.0, DELTA_STAR, "XY") == pytest.approx(BB84_THRESHOLD, abs=1e-12)
    assert rate_bb84(0.0, DELTA_STAR, "XY").rate == pytest.approx(0.0, abs=1e-9)


def test_bb84_basis_pairs_coincide_at_zero_drift():
    for q in np.linspace(0.0, 0.5, 26):
        xz = rate_bb84(float(q), 0.0, "XZ").rate
        xy = rate_bb84(float(q), 0.0, "XY").rate
        assert xz == pytest.approx(xy, abs=1e-12)


# ---------------------------------------------------------------------------
# structural invariants
# ---------------------------------------------------------------------------

def test_ordering_rfi_above_xz_above_xy():
    for q in np.linspace(0.0, 0.10, 11):
        for delta in np.linspace(0.0, PI / 7, 8):
            r = rate_rfi(float(q), float(delta)).rate
            xz = rate_bb84(float(q), float(delta), "XZ").rate
            xy = rate_bb84(float(q), float(delta), "XY").rate
            assert r >= xz - 1e-12
            assert xz >= xy - 1e-12


def test_rates_non_increasing_in_qber():
    for delta in (0.0, PI / 8, PI / 7):
        grid = np.linspace(0.0, 0.25, 60)
        for fn in (
            lambda q: rate_rfi(q, delta).rate,
            lambda q: rate_bb84(q, delta, "XZ").rate,
            lambda q: rate_bb84(q, delta, "XY").rate,
        ):
            values = [fn(float(q)) for q in grid]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_rates_non_increasing_in_drift():
    for q in (0.0, 0.03, 0.08):
        grid = np.linspace(0.0, PI / 2, 60)
        for fn in (
            lambda d: rate_rfi(q, d).rate,
            lambda d: rate_bb84(q, d, "XZ").rate,
            lambda d: rate_bb84(q, d, "XY").rate,
        ):
            values = [fn(float(d)) for d in grid]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


@settings(deadline=None)
@given(
    q=st.floats(min_value=0.0, max_value=0.5),
    delta=st.floats(min_value=0.0, max_value=PI / 2),
)
def test_rate_bounds_and_c_range(q, delta):
    assert rate_rfi(q, delta).rate <= 1.0
    assert 0.0 <= quantity_c(q, delta) <= 2.0
    assert rate_bb84(q, delta, "XZ").rate <= 1.0


def test_misalignment_table_consistency():
    table = misalignment_table(0.03, PI / 7)
    assert table["ZZ"] == 0.03
    assert table["XY"] == 0.5 and table["YX"] == 0.5
    assert table["XX"] == table["YY"]
    assert table["XZ_avg"] == qber_bb84(0.03, PI / 7, "XZ")
    assert table["XY_avg"] == pytest.approx(table["XX"], abs=1e-15)
