"""Command-line frontend.

The CLI is a thin client of the service contract: it marshals flags (and an
optional JSON config file, flags winning) into the request models and sends
them either to the in-process handlers or, with ``--server URL``, to a
running service.  Results are identical either way.

Exit codes: 0 success, 2 validation error, 3 numerical breakdown
(no zero crossing / non-monotone rate), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import httpx
from pydantic import ValidationError

from . import api
from .mc import tally_rows_to_csv
from .schemas import (
    ChannelSpec,
    DecoySpec,
    RateRequest,
    RateResponse,
    SimulateRequest,
    SimulateResponse,
    SourceSpec,
    SweepRequest,
    SweepResponse,
    ThresholdRequest,
    ThresholdResponse,
)
from .serialize import FORMATS, format_number, render_records
from .sweep import DEFAULT_RANGES, MonotonicityError, NoBracketError

OUTPUT_DIR_ENV = "DRIFTQKD_OUTPUT_DIR"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_PROTOCOL_CHOICES = ("rfi", "bb84-xz", "bb84-xy")
_VARY_CHOICES = {"qzz": "q_zz", "delta": "delta", "loss": "loss_db"}

_FIGURE_DELTAS = (("0", 0.0), ("pi_8", math.pi / 8), ("pi_7", math.pi / 7))
_FIGURE_PRESETS = {
    "2": {"mode": "ideal", "variable": "q_zz", "qzz": None},
    "3a": {"mode": "decoy", "variable": "loss_db", "qzz": 0.0},
    "3b": {"mode": "decoy", "variable": "loss_db", "qzz": 0.03},
}


class ConfigError(ValueError):
    pass


class LocalBackend:
    """Runs requests in-process."""

    def rate(self, request: RateRequest) -> RateResponse:
        return api.compute_rate(request)

    def sweep(self, request: SweepRequest) -> SweepResponse:
        return api.compute_sweep(request)

    def threshold(self, request: ThresholdRequest) -> ThresholdResponse:
        return api.solve_threshold(request)

    def simulate(self, request: SimulateRequest) -> SimulateResponse:
        return api.run_simulation(request)


class HttpBackend:
    """Sends requests to a running service."""

    def __init__(self, base_url: str, client: httpx.Client | None = None) -> None:
        self._client = client or httpx.Client(base_url=base_url, timeout=600.0)

    def _post(self, path: str, request, response_model):
        response = self._client.post(path, json=request.model_dump(mode="json"))
        if response.status_code == 409:
            raise NoBracketError(response.json().get("detail", "numerical breakdown"))
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ConfigError(f"server rejected request ({response.status_code}): {detail}")
        return response_model.model_validate(response.json())

    def rate(self, request: RateRequest) -> RateResponse:
        return self._post("/rate", request, RateResponse)

    def sweep(self, request: SweepRequest) -> SweepResponse:
        return self._post("/sweep", request, SweepResponse)

    def threshold(self, request: ThresholdRequest) -> ThresholdResponse:
        return self._post("/threshold", request, ThresholdResponse)

    def simulate(self, request: SimulateRequest) -> SimulateResponse:
        return self._post("/simulate", request, SimulateResponse)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftqkd",
        description="Key-rate analysis for RFI-QKD and BB84 under frame drift.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--server", help="base URL of a running service; default: in-process")
        p.add_argument("--degrees", action="store_true", default=None,
                       help="interpret angle inputs as degrees")

    def add_channel(p: argparse.ArgumentParser) -> None:
        p.add_argument("--qzz", type=float, help="Z-basis QBER (default 0)")
        p.add_argument("--theta", type=float, help="fixed frame deviation (default 0)")
        p.add_argument("--delta", type=float, help="drift half-range (default 0)")

    def add_decoy(p: argparse.ArgumentParser) -> None:
        p.add_argument("--mu", type=float, help="signal intensity (default 0.5)")
        p.add_argument("--nu", type=float, help="decoy intensity (default 0.05)")
        p.add_argument("--y0", type=float, help="vacuum gain (default 1e-6)")
        p.add_argument("--pd", type=float, help="dark count probability (default 1e-6)")
        p.add_argument("--eta-b", type=float, dest="eta_b",
                       help="receiver detection efficiency (default 0.35)")
        p.add_argument("--loss-db", type=float, dest="loss_db", help="channel loss in dB (default 0)")

    p_rate = sub.add_parser("rate", help="single-point key rate")
    p_rate.add_argument("--protocol", choices=_PROTOCOL_CHOICES)
    p_rate.add_argument("--mode", choices=("ideal", "decoy"))
    p_rate.add_argument("--json", action="store_true", default=None,
                        help="print the full response as JSON")
    add_channel(p_rate)
    add_decoy(p_rate)
    add_common(p_rate)

    p_sweep = sub.add_parser("sweep", help="rate sweep over one variable")
    p_sweep.add_argument("--variable", choices=tuple(_VARY_CHOICES))
    p_sweep.add_argument("--start", type=float)
    p_sweep.add_argument("--stop", type=float)
    p_sweep.add_argument("--points", type=int)
    p_sweep.add_argument("--protocols", help="comma-separated subset of rfi,bb84-xz,bb84-xy")
    p_sweep.add_argument("--mode", choices=("ideal", "decoy"))
    p_sweep.add_argument("--format", choices=FORMATS)
    p_sweep.add_argument("--output", "-o", help="output file (default: stdout)")
    add_channel(p_sweep)
    add_decoy(p_sweep)
    add_common(p_sweep)

    p_thresh = sub.add_parser("threshold", help="zero crossing of a rate")
    p_thresh.add_argument("--protocol", choices=_PROTOCOL_CHOICES)
    p_thresh.add_argument("--vary", choices=tuple(_VARY_CHOICES))
    p_thresh.add_argument("--lower", type=float, help="bracket lower end")
    p_thresh.add_argument("--upper", type=float, help="bracket upper end")
    p_thresh.add_argument("--mode", choices=("ideal", "decoy"))
    add_channel(p_thresh)
    add_decoy(p_thresh)
    add_common(p_thresh)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo validation run")
    p_sim.add_argument("--pulses", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--source", choices=("single-photon", "weak-coherent"))
    p_sim.add_argument("--weights", help="signal,decoy,vacuum mixing ratios (weak-coherent)")
    p_sim.add_argument("--tally-out", dest="tally_out", help="write the raw tally as CSV")
    add_channel(p_sim)
    add_decoy(p_sim)
    add_common(p_sim)

    p_repro = sub.add_parser("reproduce", help="figure-reproduction presets")
    p_repro.add_argument("--figure", choices=tuple(_FIGURE_PRESETS))
    p_repro.add_argument("--format", choices=FORMATS)
    p_repro.add_argument("--out-dir", dest="out_dir",
                         help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    add_common(p_repro)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


_DEFAULTS: dict[str, dict[str, object]] = {
    "rate": {"protocol": "rfi", "mode": "ideal", "json": False},
    "sweep": {"mode": "ideal", "points": 601, "format": "csv",
              "protocols": "rfi,bb84-xz,bb84-xy"},
    "threshold": {"protocol": "rfi", "vary": "qzz", "mode": "ideal"},
    "simulate": {"pulses": 1_000_000, "seed": 0, "source": "weak-coherent",
                 "weights": "0.7,0.2,0.1"},
    "reproduce": {"figure": "3b", "format": "csv"},
}

_CHANNEL_DEFAULTS = {"qzz": 0.0, "theta": 0.0, "delta": 0.0}
_DECOY_DEFAULTS = {"mu": 0.5, "nu": 0.05, "y0": 1e-6, "pd": 1e-6, "eta_b": 0.35, "loss_db": 0.0}

_CONTROL_KEYS = {"command", "config", "server"}


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset options from the JSON config file; unknown keys rejected."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as stream:
            loaded = json.load(stream)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ConfigError("config file must contain a JSON object")
    allowed = set(vars(args)) - _CONTROL_KEYS
    unknown = sorted(set(loaded) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in loaded.items():
        if getattr(args, key) is None:
            setattr(args, key, value)


def _apply_defaults(args: argparse.Namespace) -> None:
    defaults: dict[str, object] = dict(_DEFAULTS.get(args.command, {}))
    if hasattr(args, "qzz"):
        defaults.update(_CHANNEL_DEFAULTS)
    if hasattr(args, "mu"):
        defaults.update(_DECOY_DEFAULTS)
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    if getattr(args, "degrees", None) is None:
        args.degrees = False


def _convert_angles(args: argparse.Namespace) -> None:
    if not args.degrees:
        return
    scale = math.pi / 180.0
    for field in ("theta", "delta"):
        if getattr(args, field, None) is not None:
            setattr(args, field, getattr(args, field) * scale)
    swept = getattr(args, "variable", None) or _VARY_CHOICES.get(getattr(args, "vary", ""), "")
    if swept == "delta" or getattr(args, "variable", None) == "delta":
        for field in ("start", "stop", "lower", "upper"):
            if getattr(args, field, None) is not None:
                setattr(args, field, getattr(args, field) * scale)


def _channel_spec(args: argparse.Namespace) -> ChannelSpec:
    return ChannelSpec(q_zz=args.qzz, theta=args.theta, delta=args.delta)


def _decoy_spec(args: argparse.Namespace) -> DecoySpec:
    return DecoySpec(mu=args.mu, nu=args.nu, y0=args.y0, p_d=args.pd,
                     eta_b=args.eta_b, loss_db=args.loss_db)


def _resolve_output(path: str, out_dir: str | None = None) -> Path:
    """Bare filenames land in --out-dir, else in $DRIFTQKD_OUTPUT_DIR, else cwd."""
    candidate = Path(path)
    if candidate.parent == Path("."):
        base = out_dir or os.environ.get(OUTPUT_DIR_ENV)
        if base:
            return Path(base) / candidate
    return candidate


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _backend(args: argparse.Namespace):
    if getattr(args, "server", None):
        return HttpBackend(args.server)
    return LocalBackend()


def _cmd_rate(args: argparse.Namespace) -> int:
    request = RateRequest(
        protocol=args.protocol,
        mode=args.mode,
        channel=_channel_spec(args),
        decoy=_decoy_spec(args) if args.mode == "decoy" else None,
    )
    response = _backend(args).rate(request)
    if args.json:
        print(response.model_dump_json(indent=2))
    else:
        raw = response.rate if response.rate is not None else float("-inf")
        print(format_number(raw))
    return EXIT_OK


def _parse_protocols(raw: str) -> list[str]:
    protocols = [item.strip() for item in raw.split(",") if item.strip()]
    for protocol in protocols:
        if protocol not in _PROTOCOL_CHOICES:
            raise ConfigError(f"unknown protocol {protocol!r}")
    if not protocols:
        raise ConfigError("no protocols selected")
    return protocols


def _cmd_sweep(args: argparse.Namespace) -> int:
    variable = _VARY_CHOICES[args.variable] if args.variable in _VARY_CHOICES else args.variable
    if variable not in DEFAULT_RANGES:
        raise ConfigError(f"unknown sweep variable {args.variable!r}")
    default_start, default_stop = DEFAULT_RANGES[variable]
    request = SweepRequest(
        variable=variable,
        start=args.start if args.start is not None else default_start,
        stop=args.stop if args.stop is not None else default_stop,
        points=args.points,
        mode=args.mode,
        protocols=_parse_protocols(args.protocols),
        channel=_channel_spec(args),
        decoy=_decoy_spec(args) if args.mode == "decoy" else None,
    )
    response = _backend(args).sweep(request)
    text = render_records(api.sweep_records_from_response(response), args.format)
    if args.output:
        _write_text(_resolve_output(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_threshold(args: argparse.Namespace) -> int:
    request = ThresholdRequest(
        protocol=args.protocol,
        vary=_VARY_CHOICES[args.vary],
        mode=args.mode,
        lower=args.lower,
        upper=args.upper,
        channel=_channel_spec(args),
        decoy=_decoy_spec(args) if args.mode == "decoy" else None,
    )
    response = _backend(args).threshold(request)
    print(format_number(response.root))
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    weights = tuple(float(w) for w in str(args.weights).split(","))
    if len(weights) != 3:
        raise ConfigError(f"need three mixing ratios, got {args.weights!r}")
    source = SourceSpec(
        kind=args.source.replace("-", "_"),
        mu=args.mu,
        nu=args.nu,
        weights=weights,  # type: ignore[arg-type]
    )
    request = SimulateRequest(
        pulses=args.pulses,
        seed=args.seed,
        source=source,
        channel=_channel_spec(args),
        eta_b=args.eta_b,
        p_d=args.pd,
        loss_db=args.loss_db,
    )
    response = _backend(args).simulate(request)
    if args.tally_out:
        _write_text(_resolve_output(args.tally_out), tally_rows_to_csv(response.tally))
    summary = response.model_dump()
    summary.pop("tally")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_reproduce(args: argparse.Namespace) -> int:
    preset = _FIGURE_PRESETS[str(args.figure)]
    backend = _backend(args)
    out_dir = args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    variable = preset["variable"]
    default_start, default_stop = DEFAULT_RANGES[variable]
    for label, delta in _FIGURE_DELTAS:
        channel = ChannelSpec(q_zz=preset["qzz"] or 0.0, delta=delta)
        request = SweepRequest(
            variable=variable,
            start=default_start,
            stop=default_stop,
            points=601,
            mode=preset["mode"],
            protocols=list(_PROTOCOL_CHOICES),
            channel=channel,
            decoy=DecoySpec() if preset["mode"] == "decoy" else None,
        )
        response = backend.sweep(request)
        text = render_records(api.sweep_records_from_response(response), args.format)
        path = Path(out_dir) / f"fig{args.figure}_delta_{label}.{args.format}"
        _write_text(path, text)
        print(path)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "rate": _cmd_rate,
    "sweep": _cmd_sweep,
    "threshold": _cmd_threshold,
    "simulate": _cmd_simulate,
    "reproduce": _cmd_reproduce,
    "serve": _cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command != "serve":
            _merge_config(args)
            _apply_defaults(args)
            _convert_angles(args)
        return _COMMANDS[args.command](args)
    except (ConfigError, ValidationError, ValueError) as exc:
        if isinstance(exc, (NoBracketError, MonotonicityError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
