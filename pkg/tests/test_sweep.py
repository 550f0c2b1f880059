"""Sweep driver and threshold solver."""

import math

import numpy as np
import pytest

from driftqkd import (
    ChannelModel,
    DecoyParams,
    MonotonicityError,
    NoBracketError,
    SweepSpec,
    evaluate_rate,
    find_threshold,
    run_sweep,
    threshold_rate_fn,
)

PI = math.pi


def test_delta_sweep_starts_at_unit_rate():
    spec = SweepSpec(variable="delta", start=0.0, stop=PI / 2, points=5,
                     channel=ChannelModel(p=1.0))
    records = run_sweep(spec)
    assert len(records) == 5
    assert records[0].raw["RFI"] == 1.0
    assert [r.value for r in records] == sorted(r.value for r in records)


def test_clamped_floors_at_zero():
    spec = SweepSpec(variable="q_zz", start=0.0, stop=0.25, points=6)
    for record in run_sweep(spec):
        for protocol, raw in record.raw.items():
            assert record.clamped[protocol] == max(raw, 0.0)


def test_decoy_loss_sweep_runs():
    spec = SweepSpec(variable="loss_db", start=0.0, stop=40.0, points=9,
                     mode="decoy", channel=ChannelModel(p=0.94, delta=PI / 8),
                     decoy=DecoyParams())
    records = run_sweep(spec)
    assert records[0].raw["BB84_XZ"] > 0.0
    assert records[-1].raw["BB84_XZ"] < records[0].raw["BB84_XZ"]


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(variable="loss_db", start=0.0, stop=10.0, mode="ideal")
    with pytest.raises(ValueError):
        SweepSpec(variable="q_zz", start=0.2, stop=0.1)
    with pytest.raises(ValueError):
        SweepSpec(variable="q_zz", start=0.0, stop=0.1, points=1)
    with pytest.raises(ValueError):
        SweepSpec(variable="q_zz", start=0.0, stop=0.1, mode="decoy", decoy=None)
    with pytest.raises(ValueError):
        SweepSpec(variable="q_zz", start=0.0, stop=0.1, protocols=("E91",))


def test_sweep_error_names_grid_point():
    spec = SweepSpec(variable="q_zz", start=0.4, stop=0.6, points=3)
    with pytest.raises(ValueError, match="sweep point q_zz=0.6"):
        run_sweep(spec)


def test_evaluate_rate_dispatch():
    channel = ChannelModel(p=1.0)
    assert evaluate_rate("RFI", "ideal", channel).rate == 1.0
    decoy = evaluate_rate("BB84_XZ", "decoy", channel, DecoyParams())
    assert decoy.rate > 0.0
    with pytest.raises(ValueError):
        evaluate_rate("RFI", "decoy", channel, None)
    with pytest.raises(ValueError):
        evaluate_rate("B92", "ideal", channel)


# ---------------------------------------------------------------------------
# threshold solving
# ---------------------------------------------------------------------------

def test_threshold_rfi_qber():
    fn = threshold_rate_fn("RFI", "ideal", "q_zz", ChannelModel(p=1.0))
    root = find_threshold(fn, 0.0, 0.25)
    assert root == pytest.approx(0.126, abs=2e-3)


def test_threshold_bb84_qber():
    fn = threshold_rate_fn("BB84_XZ", "ideal", "q_zz", ChannelModel(p=1.0))
    root = find_threshold(fn, 0.0, 0.25)
    assert root == pytest.approx(0.110, abs=2e-3)


def test_threshold_independent_of_scan_setting():
    fn = threshold_rate_fn("RFI", "ideal", "q_zz", ChannelModel(p=1.0))
    assert find_threshold(fn, 0.0, 0.25) == find_threshold(fn, 0.0, 0.25, monotone_scan=33)


def test_threshold_tolerance():
    fn = threshold_rate_fn("BB84_XY", "ideal", "q_zz", ChannelModel(p=1.0))
    root = find_threshold(fn, 0.0, 0.25, tol=1e-6)
    assert abs(fn(root)) < 1e-4
    assert find_threshold(fn, 0.0, 0.25, tol=1e-9) == pytest.approx(root, abs=1e-6)


def test_no_bracket_raises():
    fn = threshold_rate_fn("RFI", "ideal", "q_zz", ChannelModel(p=1.0))
    with pytest.raises(NoBracketError):
        find_threshold(fn, 0.0, 0.05)
    with pytest.raises(NoBracketError):
        find_threshold(fn, 0.2, 0.25)


def test_monotone_guard_rejects_wiggles():
    with pytest.raises(MonotonicityError):
        find_threshold(lambda x: math.sin(3 * x) + 0.5 - x, 0.0, 4.0, monotone_scan=64)


def test_decoy_max_loss_thresholds_comparable_without_drift():
    """At p=1 and no drift the three protocols tolerate similar losses: max
    tolerable losses within 10% of one another."""
    channel = ChannelModel(p=1.0)
    roots = {}
    for protocol in ("RFI", "BB84_XZ", "BB84_XY"):
        fn = threshold_rate_fn(protocol, "decoy", "loss_db", channel, DecoyParams())
        roots[protocol] = find_threshold(fn, 0.0, 60.0)
    reference = roots["BB84_XZ"]
    for value in roots.values():
        assert abs(1.0 - value / reference) <= 0.10


def test_xy_collapses_fastest_under_drift():
    channel = ChannelModel(p=1.0, delta=PI / 7)
    for loss in np.linspace(0.0, 20.0, 5):
        decoy = DecoyParams(loss_db=float(loss))
        xy = evaluate_rate("BB84_XY", "decoy", channel, decoy).rate
        xz = evaluate_rate("BB84_XZ", "decoy", channel, decoy).rate
        rfi = evaluate_rate("RFI", "decoy", channel, decoy).rate
        assert xy < xz
        assert xy < rfi
