"""FastAPI service exposing the toolkit over HTTP.

Every endpoint is a thin wrapper over the core library; requests and
responses are pydantic models with unknown fields rejected. Library errors
map onto stable status codes: InputError 422, CapacityError 413,
InternalConsistencyError 500.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .analysis import ClassMeans, blind_spot_scan, envelope, theta_star
from .decode import (
    evaluate_accuracy,
    law_table,
    ml_decode,
    per_position_decode,
    position_mean_matrix,
)
from .errors import CapacityError, InputError, InternalConsistencyError
from .laws import (
    DEFAULT_ORDER,
    GateSequence,
    ObservationLaw,
    ShotHistogram,
    StepOrder,
    exact_law,
    sample_histogram,
)
from .qcore import GateLabel
from .render import RenderSpec, render_heatmap
from .sweep import SweepConfig, parse_results_csv, results_to_csv, run_sweep

app = FastAPI(
    title="probeleak",
    version=__version__,
    description="Exact observation laws, finite-shot sampling, decoding, "
    "and accuracy landscapes for sequential probe side-channels.",
)


@app.exception_handler(InputError)
async def _input_error(request: Request, exc: InputError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(CapacityError)
async def _capacity_error(request: Request, exc: CapacityError):
    return JSONResponse(status_code=413, content={"detail": str(exc)})


@app.exception_handler(InternalConsistencyError)
async def _consistency_error(request: Request, exc: InternalConsistencyError):
    return JSONResponse(status_code=500, content={"detail": str(exc)})


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


def _parse_order(tag: str) -> StepOrder:
    try:
        return StepOrder(tag)
    except ValueError:
        raise InputError(f"unknown step order {tag!r}") from None


class LawRequest(StrictModel):
    seq: str
    theta: float
    lam: float = Field(0.0, alias="lambda", ge=0.0, le=1.0)
    order: str = DEFAULT_ORDER.value


class LawResponse(StrictModel):
    depth: int
    convention: str
    probs: list[float]


class SampleRequest(LawRequest):
    shots: int = Field(ge=1)
    seed: int = Field(ge=0)


class HistogramResponse(StrictModel):
    depth: int
    convention: str
    counts: list[int]
    shots: int
    seed: int | None


class HistogramPayload(StrictModel):
    depth: int
    counts: list[int]
    shots: int
    convention: str = "y1-msb"
    seed: int | None = None
    kind: str = "histogram"


class DecodeRequest(StrictModel):
    histogram: HistogramPayload
    theta: float
    lam: float = Field(0.0, alias="lambda", ge=0.0, le=1.0)
    decoder: str = "ml"
    order: str = DEFAULT_ORDER.value


class DecodeResponse(StrictModel):
    sequence: str
    log_likelihood: float | None
    runner_up_margin: float | None  # null when all competitors were eliminated


class PredictorRequest(StrictModel):
    depth: int


class PredictorResponse(StrictModel):
    depth: int
    theta_star: float
    mirror: float


class EnvelopeRequest(StrictModel):
    depth: int
    theta_min: float = 0.0
    theta_max: float = 2 * math.pi
    points: int = Field(256, ge=2)


class EnvelopeResponse(StrictModel):
    depth: int
    thetas: list[float]
    values: list[float]


class BlindspotRequest(StrictModel):
    window: tuple[float, float]
    grid_points: int = 4096
    depth: int = 2
    lam: float = Field(0.0, alias="lambda", ge=0.0, le=1.0)
    include_curve: bool = False


class BlindspotResponse(StrictModel):
    angles: list[float]
    min_separation: float
    thetas: list[float] | None = None
    values: list[float] | None = None


class AccuracyRequest(StrictModel):
    depth: int
    theta: float
    lam: float = Field(0.0, alias="lambda", ge=0.0, le=1.0)
    shots: int = Field(ge=1)
    trials: int = Field(ge=1)
    seed: int = Field(ge=0)
    decoder: str = "ml"
    order: str = DEFAULT_ORDER.value


class AccuracyResponse(StrictModel):
    strict_accuracy: float
    per_position_accuracy: list[float]
    trials: int
    wilson_halfwidth: float


class SweepRequest(StrictModel):
    config: dict


class SweepResponse(StrictModel):
    csv: str
    n_cells: int


class RenderRequest(StrictModel):
    csv: str
    cmap: str = "viridis"
    vmin: float = 0.0
    vmax: float = 1.0
    overlay_angles: list[float] | None = None  # None: predictor lines for the depth


@app.get("/")
def root():
    return {"service": "probeleak", "version": __version__}


@app.post("/law", response_model=LawResponse)
def law_endpoint(req: LawRequest):
    seq = GateSequence.from_string(req.seq)
    law = exact_law(seq, req.theta, req.lam, _parse_order(req.order))
    return LawResponse(depth=law.depth, convention="y1-msb", probs=law.probs.tolist())


@app.post("/sample", response_model=HistogramResponse)
def sample_endpoint(req: SampleRequest):
    seq = GateSequence.from_string(req.seq)
    law = exact_law(seq, req.theta, req.lam, _parse_order(req.order))
    hist = sample_histogram(law, req.shots, req.seed)
    return HistogramResponse(
        depth=hist.depth, convention="y1-msb",
        counts=hist.counts.tolist(), shots=hist.shots, seed=req.seed,
    )


@app.post("/decode", response_model=DecodeResponse)
def decode_endpoint(req: DecodeRequest):
    hist = ShotHistogram.from_dict(req.histogram.model_dump())
    order = _parse_order(req.order)
    table = law_table(hist.depth, req.theta, req.lam, order)
    if req.decoder == "ml":
        return DecodeResponse(**ml_decode(hist, table).to_dict())
    if req.decoder != "perpos":
        raise InputError(f"unknown decoder {req.decoder!r}; expected 'ml' or 'perpos'")
    matrix = position_mean_matrix(table)
    means = [
        ClassMeans(t + 1, hist.depth,
                   {g: ObservationLaw(hist.depth, matrix[t, g.value]) for g in GateLabel})
        for t in range(hist.depth)
    ]
    seq = per_position_decode(hist, means)
    return DecodeResponse(sequence=str(seq), log_likelihood=None, runner_up_margin=None)


@app.post("/predictor", response_model=PredictorResponse)
def predictor_endpoint(req: PredictorRequest):
    value = theta_star(req.depth)
    return PredictorResponse(depth=req.depth, theta_star=value, mirror=2 * math.pi - value)


@app.post("/envelope", response_model=EnvelopeResponse)
def envelope_endpoint(req: EnvelopeRequest):
    curve = envelope(req.depth, np.linspace(req.theta_min, req.theta_max, req.points))
    return EnvelopeResponse(
        depth=curve.depth, thetas=curve.thetas.tolist(), values=curve.values.tolist()
    )


@app.post("/blindspots", response_model=BlindspotResponse)
def blindspots_endpoint(req: BlindspotRequest):
    scan = blind_spot_scan(req.window, req.grid_points, depth=req.depth, lam=req.lam)
    return BlindspotResponse(
        angles=list(scan.angles),
        min_separation=float(scan.values.min()),
        thetas=scan.thetas.tolist() if req.include_curve else None,
        values=scan.values.tolist() if req.include_curve else None,
    )


@app.post("/accuracy", response_model=AccuracyResponse)
def accuracy_endpoint(req: AccuracyRequest):
    report = evaluate_accuracy(
        req.depth, req.theta, req.lam, req.shots, req.trials, req.seed,
        decoder=req.decoder, order=_parse_order(req.order),
    )
    return AccuracyResponse(**report.to_dict())


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(req: SweepRequest):
    config = SweepConfig.from_dict(req.config)
    results = run_sweep(config)
    return SweepResponse(csv=results_to_csv(results), n_cells=len(results))


@app.post("/render")
def render_endpoint(req: RenderRequest):
    results = parse_results_csv(req.csv)
    if req.overlay_angles is None:
        star = theta_star(results[0].depth)
        overlays = (star, 2 * math.pi - star)
    else:
        overlays = tuple(req.overlay_angles)
    spec = RenderSpec(cmap=req.cmap, vmin=req.vmin, vmax=req.vmax, overlay_angles=overlays)
    svg = render_heatmap(spec, results)
    return Response(content=svg, media_type="image/svg+xml")
