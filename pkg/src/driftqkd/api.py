"""In-process implementations of the service contract.

The FastAPI handlers and the CLI's local backend both call these, so both
paths produce identical results for identical requests.
"""

from __future__ import annotations

import math

from . import mc, sweep
from .schemas import (
    CORE_TO_WIRE,
    WIRE_PROTOCOLS,
    RateRequest,
    RateResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRecordModel,
    SweepRequest,
    SweepResponse,
    ThresholdRequest,
    ThresholdResponse,
)
from .single_photon import RateResult
from .sweep import DEFAULT_RANGES, SweepRecord, SweepSpec

_THRESHOLD_SCAN_POINTS = 33


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _rate_response(result: RateResult, mode: str) -> RateResponse:
    return RateResponse(
        protocol=CORE_TO_WIRE[result.protocol],
        mode=mode,
        rate=_finite_or_none(result.rate),
        clamped_rate=result.clamped,
        qber=result.qber,
        i_e=result.i_e,
        c=result.c,
        u=result.u,
        v=result.v,
        y1_lower=result.y1_lower,
        q1_upper=result.q1_upper,
        breakdown=result.breakdown,
    )


def compute_rate(request: RateRequest) -> RateResponse:
    result = sweep.evaluate_rate(
        WIRE_PROTOCOLS[request.protocol],
        request.mode,
        request.channel.to_model(),
        request.decoy.to_params() if request.decoy else None,
    )
    return _rate_response(result, request.mode)


def compute_sweep(request: SweepRequest) -> SweepResponse:
    spec = SweepSpec(
        variable=request.variable,
        start=request.start,
        stop=request.stop,
        points=request.points,
        mode=request.mode,
        protocols=tuple(WIRE_PROTOCOLS[p] for p in request.protocols),
        channel=request.channel.to_model(),
        decoy=request.decoy.to_params() if request.decoy else None,
    )
    records = sweep.run_sweep(spec)
    return SweepResponse(
        variable=request.variable,
        records=[
            SweepRecordModel(
                value=record.value,
                raw={CORE_TO_WIRE[k]: _finite_or_none(v) for k, v in record.raw.items()},
                clamped={CORE_TO_WIRE[k]: v for k, v in record.clamped.items()},
            )
            for record in records
        ],
    )


def sweep_records_from_response(response: SweepResponse) -> list[SweepRecord]:
    """Rebuild core sweep records (e.g. for serialization on the CLI side)."""
    return [
        SweepRecord(
            variable=response.variable,
            value=record.value,
            raw={
                WIRE_PROTOCOLS[p]: (float("-inf") if v is None else v)
                for p, v in record.raw.items()
            },
        )
        for record in response.records
    ]


def solve_threshold(request: ThresholdRequest) -> ThresholdResponse:
    default_lower, default_upper = DEFAULT_RANGES[request.vary]
    lower = request.lower if request.lower is not None else default_lower
    upper = request.upper if request.upper is not None else default_upper
    rate_fn = sweep.threshold_rate_fn(
        WIRE_PROTOCOLS[request.protocol],
        request.mode,
        request.vary,
        request.channel.to_model(),
        request.decoy.to_params() if request.decoy else None,
    )
    root = sweep.find_threshold(
        rate_fn, lower, upper, monotone_scan=_THRESHOLD_SCAN_POINTS
    )
    return ThresholdResponse(vary=request.vary, root=root, lower=lower, upper=upper)


def run_simulation(request: SimulateRequest) -> SimulateResponse:
    tally = mc.simulate(request.to_config())
    estimates = mc.estimate_observables(tally)
    return SimulateResponse(
        pulses=request.pulses,
        seed=request.seed,
        gains=dict(estimates.gains),
        gain_se=dict(estimates.gain_se),
        qbers={k: dict(v) for k, v in estimates.qbers.items()},
        qber_se={k: dict(v) for k, v in estimates.qber_se.items()},
        correlators={k: dict(v) for k, v in estimates.correlators.items()},
        c_values=dict(estimates.c_values),
        c_se=dict(estimates.c_se),
        insufficient=estimates.insufficient,
        tally=tally.rows(),
    )
