"""Request/response bodies for the HTTP surface.

The config payloads mirror the on-disk TOML structure one-to-one, so a
file parsed by the CLI and a JSON body posted directly go through the
same builders.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class SimulateRequest(BaseModel):
    config: dict
    seed: int | None = None
    trial_log: bool = False


class SimulateResponse(BaseModel):
    columns: list[str]
    rows: list[dict]
    csv: str
    trial_csv: str | None = None


class RegionRequest(BaseModel):
    problem: dict
    mode: str = "rit"
    example: str | None = None
    eliminate: bool = False
    point: dict[str, float] | None = None


class RegionResponse(BaseModel):
    mode: str
    system: str | None = None
    member: bool | None = None
    slacks: list[float] | None = None
    rows: list[str] | None = None


class VerifyRequest(BaseModel):
    scope: str = "all"


class VerifyResponse(BaseModel):
    scope: str
    failures: int
    reports: list[dict]
    csv: str


class SpectrumRequest(BaseModel):
    config: dict
    seed: int | None = None


class SpectrumResponse(BaseModel):
    kind: str
    value: float
    epsilon: float
    n_list: list[int]
    exact: bool
    samples_per_n: int
    trajectory: dict[str, float] = Field(default_factory=dict)
    support_values: list[float] | None = None
    support_probs: list[float] | None = None


class HealthResponse(BaseModel):
    status: str
    version: str
