"""FastAPI application wrapping the experiment runners.

Configuration problems (bad geometry, degenerate depth, oversized requests)
map to HTTP 400; computation failures (far-field violations, quadrature
stalls) map to HTTP 500. Request schema violations are FastAPI's usual 422.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, experiments
from ..errors import DiffreadError, FarFieldViolation, QuadratureNonConvergence
from .schemas import (CountRequest, CountResult, ExperimentResult,
                      FresnelSweepConfig, HealthResponse, JitterSweepConfig,
                      PitDepthSweepConfig, ProfileConfig, ProfileResult,
                      TerSweepConfig)

_RUNTIME_ERRORS = (FarFieldViolation, QuadratureNonConvergence)


def create_app() -> FastAPI:
    app = FastAPI(title="diffread", version=__version__)

    @app.exception_handler(DiffreadError)
    async def _domain_error(request: Request, exc: DiffreadError):
        status = 500 if isinstance(exc, _RUNTIME_ERRORS) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/patterns/count", response_model=CountResult)
    def count(req: CountRequest):
        return experiments.run_count(req)

    @app.post("/experiments/ter", response_model=ExperimentResult)
    def ter(cfg: TerSweepConfig):
        return experiments.run_ter_sweep(cfg)

    @app.post("/experiments/jitter", response_model=ExperimentResult)
    def jitter(cfg: JitterSweepConfig):
        return experiments.run_jitter_experiment(cfg)

    @app.post("/experiments/pitdepth", response_model=ExperimentResult)
    def pitdepth(cfg: PitDepthSweepConfig):
        return experiments.run_pit_depth_sweep(cfg)

    @app.post("/experiments/fresnel", response_model=ExperimentResult)
    def fresnel(cfg: FresnelSweepConfig):
        return experiments.run_fresnel_sweep(cfg)

    @app.post("/profile", response_model=ProfileResult)
    def profile(cfg: ProfileConfig):
        return experiments.emit_diffraction_profile(cfg)

    return app
