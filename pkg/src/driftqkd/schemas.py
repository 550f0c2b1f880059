"""Pydantic request/response models shared by the HTTP service and the CLI."""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .core_math import ChannelModel
from .decoy import DecoyParams
from .mc import Source, UNIFORM_BASES, SimulationConfig

WIRE_PROTOCOLS = {"rfi": "RFI", "bb84-xz": "BB84_XZ", "bb84-xy": "BB84_XY"}
CORE_TO_WIRE = {core: wire for wire, core in WIRE_PROTOCOLS.items()}

ProtocolName = Literal["rfi", "bb84-xz", "bb84-xy"]
ModeName = Literal["ideal", "decoy"]
VariableName = Literal["q_zz", "delta", "loss_db"]


class ChannelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q_zz: float = Field(0.0, ge=0.0, le=0.5, description="Z-basis QBER")
    theta: float = Field(0.0, description="fixed frame deviation, radians")
    delta: float = Field(0.0, ge=0.0, le=math.pi / 2, description="drift half-range, radians")

    def to_model(self) -> ChannelModel:
        return ChannelModel.from_qber(self.q_zz, theta=self.theta, delta=self.delta)


class DecoySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mu: float = Field(0.5, gt=0.0)
    nu: float = Field(0.05, gt=0.0)
    y0: float = Field(1e-6, ge=0.0, lt=1.0)
    p_d: float = Field(1e-6, ge=0.0, lt=1.0)
    eta_b: float = Field(0.35, gt=0.0, le=1.0)
    loss_db: float = Field(0.0, ge=0.0)

    @model_validator(mode="after")
    def _ordered_intensities(self) -> "DecoySpec":
        if not self.mu > self.nu:
            raise ValueError("signal intensity mu must exceed decoy intensity nu")
        return self

    def to_params(self) -> DecoyParams:
        return DecoyParams(
            mu=self.mu,
            nu=self.nu,
            y0=self.y0,
            p_d=self.p_d,
            eta_b=self.eta_b,
            loss_db=self.loss_db,
        )


class RateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    protocol: ProtocolName
    mode: ModeName = "ideal"
    channel: ChannelSpec = ChannelSpec()
    decoy: Optional[DecoySpec] = None

    @model_validator(mode="after")
    def _fill_decoy(self) -> "RateRequest":
        if self.mode == "decoy" and self.decoy is None:
            self.decoy = DecoySpec()
        return self


class RateResponse(BaseModel):
    protocol: ProtocolName
    mode: ModeName
    rate: Optional[float] = Field(None, description="unclamped rate; null on breakdown")
    clamped_rate: float
    qber: float
    i_e: float
    c: Optional[float] = None
    u: Optional[float] = None
    v: Optional[float] = None
    y1_lower: Optional[float] = None
    q1_upper: Optional[float] = None
    breakdown: bool = False


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variable: VariableName
    start: float
    stop: float
    points: int = Field(601, ge=2, le=1_000_001)
    mode: ModeName = "ideal"
    protocols: list[ProtocolName] = ["rfi", "bb84-xz", "bb84-xy"]
    channel: ChannelSpec = ChannelSpec()
    decoy: Optional[DecoySpec] = None

    @model_validator(mode="after")
    def _fill_decoy(self) -> "SweepRequest":
        if self.mode == "decoy" and self.decoy is None:
            self.decoy = DecoySpec()
        return self


class SweepRecordModel(BaseModel):
    value: float
    raw: dict[ProtocolName, Optional[float]]
    clamped: dict[ProtocolName, float]


class SweepResponse(BaseModel):
    variable: VariableName
    records: list[SweepRecordModel]


class ThresholdRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    protocol: ProtocolName
    vary: VariableName
    mode: ModeName = "ideal"
    lower: Optional[float] = None
    upper: Optional[float] = None
    channel: ChannelSpec = ChannelSpec()
    decoy: Optional[DecoySpec] = None

    @model_validator(mode="after")
    def _fill_decoy(self) -> "ThresholdRequest":
        if self.mode == "decoy" and self.decoy is None:
            self.decoy = DecoySpec()
        return self


class ThresholdResponse(BaseModel):
    vary: VariableName
    root: float
    lower: float
    upper: float


class SourceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["single_photon", "weak_coherent"] = "weak_coherent"
    mu: float = Field(0.5, gt=0.0)
    nu: float = Field(0.05, gt=0.0)
    weights: tuple[float, float, float] = (0.7, 0.2, 0.1)

    def to_source(self) -> Source:
        if self.kind == "single_photon":
            return Source.single_photon()
        return Source.weak_coherent(mu=self.mu, nu=self.nu, weights=self.weights)


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pulses: int = Field(ge=1, le=10_000_000_000)
    seed: int = 0
    source: SourceSpec = SourceSpec()
    channel: ChannelSpec = ChannelSpec()
    eta_b: float = Field(0.35, gt=0.0, le=1.0)
    p_d: float = Field(1e-6, ge=0.0, lt=1.0)
    loss_db: float = Field(0.0, ge=0.0)
    basis_weights_alice: tuple[float, float, float] = UNIFORM_BASES
    basis_weights_bob: tuple[float, float, float] = UNIFORM_BASES

    def to_config(self) -> SimulationConfig:
        return SimulationConfig(
            pulses=self.pulses,
            source=self.source.to_source(),
            channel=self.channel.to_model(),
            eta_b=self.eta_b,
            p_d=self.p_d,
            loss_db=self.loss_db,
            seed=self.seed,
            basis_weights_alice=self.basis_weights_alice,
            basis_weights_bob=self.basis_weights_bob,
        )


class SimulateResponse(BaseModel):
    pulses: int
    seed: int
    gains: dict[str, float]
    gain_se: dict[str, float]
    qbers: dict[str, dict[str, float]]
    qber_se: dict[str, dict[str, float]]
    correlators: dict[str, dict[str, float]]
    c_values: dict[str, float]
    c_se: dict[str, float]
    insufficient: bool
    tally: list[tuple[str, str, str, int, str, int]] = []
