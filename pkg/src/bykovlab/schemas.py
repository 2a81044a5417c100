"""Pydantic request/response models for the service API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class Artifact(BaseModel):
    """A named text artifact, written verbatim by clients."""

    name: str
    text: str


class BaseRequest(BaseModel):
    config_text: str = Field(..., description="flat key = value configuration")
    lambda_override: Optional[float] = None
    seed_override: Optional[int] = None


class CheckItem(BaseModel):
    name: str
    ok: bool
    detail: str


class ValidateResponse(BaseModel):
    passed: bool
    stability_criterion: bool
    disjoint_intervals_regime: bool
    checks: list[CheckItem]
    artifacts: list[Artifact]


class CurvesRequest(BaseRequest):
    samples: int = 512


class CurvesResponse(BaseModel):
    artifacts: list[Artifact]


class OrbitRequest(BaseRequest):
    x: float
    y: float
    k: int = 10


class OrbitResponse(BaseModel):
    statuses: list[str]
    artifacts: list[Artifact]


class HorseshoeRequest(BaseRequest):
    n_range: list[int] = [0, 1]
    tau: float = 0.05
    cone_slope: float = 1.0
    grid: int = 50


class RectangleModel(BaseModel):
    label: str
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float


class HorseshoeResponse(BaseModel):
    labels: list[str]
    matrix: list[list[int]]
    rectangles: list[RectangleModel]
    cone_mu: float
    cone_passed: bool
    cone_checked_points: int
    artifacts: list[Artifact]


class EscapeRequest(BaseRequest):
    n_range: list[int] = [0, 1]
    tau: float = 0.05
    samples: int = 10000
    horizon: int = 12
    tube_halfwidth: float = 1.2
    tube_height: Optional[float] = None
    rect: Optional[list[float]] = Field(
        None, description="explicit draw region [x_lo, x_hi, y_lo, y_hi]"
    )


class EscapeResponse(BaseModel):
    fractions: list[float]
    decay_rate: Optional[float]
    rate_ci: Optional[tuple[float, float]]
    artifacts: list[Artifact]


class TangencyRequest(BaseRequest):
    lambda_hi: float
    lambda_lo: float


class TangencyRecordModel(BaseModel):
    lam_star: float
    bracket_lo: float
    bracket_hi: float
    touch_x: float
    touch_y: float
    value_residual: float
    slope_residual: float
    winding: int


class TangencyResponse(BaseModel):
    records: list[TangencyRecordModel]
    artifacts: list[Artifact]


class SinksRequest(BaseRequest):
    lambda_hi: float
    lambda_lo: float
    record_index: int = 0
    period_max: int = 3


class PeriodicOrbitModel(BaseModel):
    x: float
    y: float
    period: int
    lam: float
    moduli: tuple[float, float]
    stability: str


class SinksResponse(BaseModel):
    orbits: list[PeriodicOrbitModel]
    artifacts: list[Artifact]


class ItineraryRequest(BaseRequest):
    word: str = Field(..., description="comma-separated tokens like 1+,2+,1-")


class ItineraryResponse(BaseModel):
    matched: int
    exact: bool
    point_x: float
    point_y: float
    artifacts: list[Artifact]


class HealthResponse(BaseModel):
    status: str
    version: str
