"""Pydantic request/response schemas of the experiment service."""

from pydantic import BaseModel

from ..models import (CountRequest, CountResult, CurveRow, ExperimentResult,
                      FresnelSweepConfig, GeometryParams, JitterSweepConfig,
                      PitDepthSweepConfig, ProfileConfig, ProfileResult,
                      TerSweepConfig)


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorResponse(BaseModel):
    error: str
    detail: str


__all__ = [
    "CountRequest", "CountResult", "CurveRow", "ErrorResponse",
    "ExperimentResult", "FresnelSweepConfig", "GeometryParams",
    "HealthResponse", "JitterSweepConfig", "PitDepthSweepConfig",
    "ProfileConfig", "ProfileResult", "TerSweepConfig",
]
