"""FastAPI service wrapping the key-rate toolkit."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, api
from .schemas import (
    RateRequest,
    RateResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
    ThresholdRequest,
    ThresholdResponse,
)
from .sweep import MonotonicityError, NoBracketError

app = FastAPI(
    title="driftqkd",
    version=__version__,
    description=(
        "Secret-key-rate analysis for RFI-QKD and BB84 under reference-frame "
        "drift: single-point rates, sweeps, threshold solving and Monte-Carlo "
        "validation runs."
    ),
)


@app.exception_handler(NoBracketError)
@app.exception_handler(MonotonicityError)
def _numerical_breakdown(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=409, content={"detail": str(exc), "error": "numerical"})


@app.exception_handler(ValueError)
def _validation_error(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=422, content={"detail": str(exc), "error": "validation"})


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok", "version": __version__}


@app.post("/rate", response_model=RateResponse)
def rate(request: RateRequest) -> RateResponse:
    return api.compute_rate(request)


@app.post("/sweep", response_model=SweepResponse)
def sweep(request: SweepRequest) -> SweepResponse:
    return api.compute_sweep(request)


@app.post("/threshold", response_model=ThresholdResponse)
def threshold(request: ThresholdRequest) -> ThresholdResponse:
    return api.solve_threshold(request)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest) -> SimulateResponse:
    return api.run_simulation(request)
