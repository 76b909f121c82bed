"""Service layer: typed requests and responses around the harness.

The FastAPI app and the CLI share the same do_* functions; the CLI calls them
in process while `pricing-lab serve` exposes them over HTTP. All request
models reject unknown fields so config typos fail loudly instead of silently
falling back to defaults.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .errors import DegenerateFitError, InvalidSpecError
from .harness import (
    RunConfig,
    fit_power_law,
    load_traces,
    report,
    run_episode,
    run_key,
    sweep,
)


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    algo: str
    noise: str = "uniform"
    d: int = 5
    horizon: int = 8000
    seed: int = 0
    master_seed: int = 12345
    delta_mult: float = 0.35
    c_ucb: float = 0.5
    k_theta: int = 256
    k_f: int = 64
    k_policy: int = 2048
    fixed_price: float | None = None
    custom_noise: dict | None = None
    log_realized: bool = False


class RunResponse(BaseModel):
    key: str
    config: dict
    checkpoints: list[tuple[int, float]]
    metadata: dict
    final_regret: float


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    out: str = Field(description="output directory for fragments, manifest, traces.csv")
    algos: list[str] = ["cmrup"]
    noises: list[str] = ["uniform"]
    horizons: list[int] = [8000]
    seeds: int = 10
    d: int = 5
    master_seed: int = 12345
    delta_mult: float = 0.35
    c_ucb: float = 0.5
    k_theta: int = 256
    k_f: int = 64
    k_policy: int = 2048
    fixed_price: float | None = None
    custom_noise: dict | None = None
    workers: int = 1


class SweepResponse(BaseModel):
    manifest: dict
    traces_csv: str
    n_runs: int


class FitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    points: list[tuple[float, float]] = Field(description="(horizon, mean final regret) pairs")


class FitResponse(BaseModel):
    alpha: float
    c_coef: float
    stderr: float
    n_points: int


class ReportRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    traces_csv: str
    out: str


class ReportResponse(BaseModel):
    summary: list[dict]
    fits: dict[str, dict | None]
    summary_csv: str
    figure_input_csv: str


def do_run(req: RunRequest) -> RunResponse:
    cfg = RunConfig(**req.model_dump())
    trace = run_episode(cfg)
    return RunResponse(
        key=run_key(cfg),
        config=cfg.to_dict(),
        checkpoints=trace.checkpoints,
        metadata=trace.metadata,
        final_regret=trace.final_regret,
    )


def do_sweep(req: SweepRequest) -> SweepResponse:
    spec = req.model_dump(exclude={"out", "workers"})
    manifest = sweep(spec, req.out, workers=req.workers)
    return SweepResponse(
        manifest=manifest,
        traces_csv=str(req.out) + "/" + manifest["traces_csv"],
        n_runs=len(manifest["runs"]),
    )


def do_fit(req: FitRequest) -> FitResponse:
    fit = fit_power_law(req.points)
    return FitResponse(alpha=fit.alpha, c_coef=fit.c_coef, stderr=fit.stderr, n_points=fit.n_points)


def do_report(req: ReportRequest) -> ReportResponse:
    rows = load_traces(req.traces_csv)
    result = report(rows, req.out)
    return ReportResponse(**result)


def create_app() -> FastAPI:
    app = FastAPI(title="pricing-lab", version=__version__)

    def guarded(fn, req):
        try:
            return fn(req)
        except (InvalidSpecError, DegenerateFitError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        return guarded(do_run, req)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_endpoint(req: SweepRequest) -> SweepResponse:
        return guarded(do_sweep, req)

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest) -> FitResponse:
        return guarded(do_fit, req)

    @app.post("/report", response_model=ReportResponse)
    def report_endpoint(req: ReportRequest) -> ReportResponse:
        return guarded(do_report, req)

    return app


app = create_app()
