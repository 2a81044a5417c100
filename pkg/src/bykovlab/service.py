"""FastAPI service wrapping the core package.

Every endpoint accepts the flat text configuration plus operation
parameters and returns structured results together with the fully rendered
text artifacts; clients (the CLI included) write the artifacts verbatim, so
replays are byte-identical.  Domain failures map to HTTP 422, malformed
requests to 400.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from . import __version__, reports
from .errors import BykovError, ConfigError, RealizationFailed
from .horseshoe import (
    build_horseshoe,
    cone_hyperbolicity,
    escape_experiment,
    parse_word,
    realize_itinerary,
)
from .model import ModelConfig, SectionId, SectionPoint, parse_config, validate
from .returnmap import iterate
from .tangency import find_periodic_sinks, find_tangencies
from . import schemas as sc

app = FastAPI(title="bykovlab service", version=__version__)


def _resolve(req: sc.BaseRequest) -> ModelConfig:
    try:
        config = parse_config(req.config_text)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=f"config: {exc}") from exc
    if req.lambda_override is not None:
        config = config.with_lambda(req.lambda_override)
    if req.seed_override is not None:
        config = config.with_seed(req.seed_override)
    return config


def _domain(exc: BykovError) -> HTTPException:
    return HTTPException(
        status_code=422, detail=f"{type(exc).__name__}: {exc}"
    )


@app.get("/v1/health", response_model=sc.HealthResponse)
def health() -> sc.HealthResponse:
    return sc.HealthResponse(status="ok", version=__version__)


@app.post("/v1/validate", response_model=sc.ValidateResponse)
def validate_endpoint(req: sc.BaseRequest) -> sc.ValidateResponse:
    config = _resolve(req)
    report = validate(config)
    artifact = sc.Artifact(
        name="validation.txt", text=reports.render_validation(config, report)
    )
    return sc.ValidateResponse(
        passed=report.passed,
        stability_criterion=report.stability_criterion,
        disjoint_intervals_regime=report.disjoint_intervals_regime,
        checks=[
            sc.CheckItem(name=c.name, ok=c.ok, detail=c.detail) for c in report.checks
        ],
        artifacts=[artifact],
    )


@app.post("/v1/curves", response_model=sc.CurvesResponse)
def curves_endpoint(req: sc.CurvesRequest) -> sc.CurvesResponse:
    config = _resolve(req)
    if req.samples < 8:
        raise HTTPException(status_code=400, detail="samples must be >= 8")
    artifacts = [
        sc.Artifact(
            name="g_curve.csv",
            text=reports.render_function_curve(config, "g", req.samples),
        ),
        sc.Artifact(
            name="h_curve.csv",
            text=reports.render_function_curve(config, "h", req.samples),
        ),
        sc.Artifact(
            name="h_return.csv",
            text=reports.render_h_return_curve(config, max(req.samples, 1024)),
        ),
        sc.Artifact(name="fold_point.csv", text=reports.render_fold_point(config)),
    ]
    return sc.CurvesResponse(artifacts=artifacts)


@app.post("/v1/orbit", response_model=sc.OrbitResponse)
def orbit_endpoint(req: sc.OrbitRequest) -> sc.OrbitResponse:
    config = _resolve(req)
    if req.k < 1:
        raise HTTPException(status_code=400, detail="k must be >= 1")
    start = SectionPoint(
        SectionId.IN_V, a=req.x, b=req.y, sheet=1 if req.y >= 0 else -1
    )
    try:
        outcomes = iterate(start, config, req.k)
    except BykovError as exc:
        raise _domain(exc) from exc
    artifact = sc.Artifact(
        name="orbit.csv", text=reports.render_orbit(config, start, outcomes)
    )
    return sc.OrbitResponse(
        statuses=[o.status for o in outcomes], artifacts=[artifact]
    )


@app.post("/v1/horseshoe", response_model=sc.HorseshoeResponse)
def horseshoe_endpoint(req: sc.HorseshoeRequest) -> sc.HorseshoeResponse:
    config = _resolve(req)
    try:
        rects, matrix = build_horseshoe(req.n_range, req.tau, config)
        cone = cone_hyperbolicity(rects, req.cone_slope, req.grid, config)
    except BykovError as exc:
        raise _domain(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    artifacts = [
        sc.Artifact(
            name="transition_matrix.txt",
            text=reports.render_transition_matrix(config, rects, matrix),
        ),
        sc.Artifact(
            name="cone_report.txt", text=reports.render_cone_report(config, cone)
        ),
    ]
    return sc.HorseshoeResponse(
        labels=list(matrix.labels),
        matrix=[[int(v) for v in row] for row in matrix.entries],
        rectangles=[
            sc.RectangleModel(
                label=r.label, x_lo=r.x_lo, x_hi=r.x_hi, y_lo=r.y_lo, y_hi=r.y_hi
            )
            for r in rects
        ],
        cone_mu=cone.mu if not math.isnan(cone.mu) else -1.0,
        cone_passed=cone.passed,
        cone_checked_points=cone.checked_points,
        artifacts=artifacts,
    )


@app.post("/v1/escape", response_model=sc.EscapeResponse)
def escape_endpoint(req: sc.EscapeRequest) -> sc.EscapeResponse:
    config = _resolve(req)
    try:
        if req.rect is not None:
            if len(req.rect) != 4:
                raise HTTPException(
                    status_code=400, detail="rect needs [x_lo, x_hi, y_lo, y_hi]"
                )
            from .horseshoe import Rectangle

            rects = [Rectangle(*req.rect, label="draw")]
        else:
            rects, _ = build_horseshoe(req.n_range, req.tau, config)
        curve = escape_experiment(
            rects,
            req.samples,
            req.horizon,
            config,
            tube_halfwidth=req.tube_halfwidth,
            tube_height=req.tube_height,
        )
    except BykovError as exc:
        raise _domain(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    artifact = sc.Artifact(
        name="survival.csv", text=reports.render_survival(config, curve)
    )
    rate = None if math.isnan(curve.decay_rate) else curve.decay_rate
    ci = None if math.isnan(curve.decay_rate) else curve.rate_ci
    return sc.EscapeResponse(
        fractions=list(curve.fractions), decay_rate=rate, rate_ci=ci, artifacts=[artifact]
    )


@app.post("/v1/tangency", response_model=sc.TangencyResponse)
def tangency_endpoint(req: sc.TangencyRequest) -> sc.TangencyResponse:
    config = _resolve(req)
    try:
        records = find_tangencies(req.lambda_hi, req.lambda_lo, config)
    except BykovError as exc:
        raise _domain(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    artifact = sc.Artifact(
        name="tangency_table.txt", text=reports.render_tangency_table(config, records)
    )
    return sc.TangencyResponse(
        records=[
            sc.TangencyRecordModel(
                lam_star=r.lam_star,
                bracket_lo=r.bracket[0],
                bracket_hi=r.bracket[1],
                touch_x=r.touch_point[0],
                touch_y=r.touch_point[1],
                value_residual=r.value_residual,
                slope_residual=r.slope_residual,
                winding=r.winding,
            )
            for r in records
        ],
        artifacts=[artifact],
    )


@app.post("/v1/sinks", response_model=sc.SinksResponse)
def sinks_endpoint(req: sc.SinksRequest) -> sc.SinksResponse:
    config = _resolve(req)
    try:
        records = find_tangencies(req.lambda_hi, req.lambda_lo, config)
        if not records:
            raise HTTPException(status_code=422, detail="no tangency records in range")
        if not (0 <= req.record_index < len(records)):
            raise HTTPException(
                status_code=400,
                detail=f"record_index out of range (found {len(records)} records)",
            )
        orbits = find_periodic_sinks(records[req.record_index], req.period_max, config)
    except BykovError as exc:
        raise _domain(exc) from exc
    artifact = sc.Artifact(
        name="sinks_table.txt", text=reports.render_sinks_table(config, orbits)
    )
    return sc.SinksResponse(
        orbits=[
            sc.PeriodicOrbitModel(
                x=o.point.wrapped,
                y=o.point.b,
                period=o.period,
                lam=o.lam,
                moduli=o.moduli,
                stability=o.stability,
            )
            for o in orbits
        ],
        artifacts=[artifact],
    )


@app.post("/v1/itinerary", response_model=sc.ItineraryResponse)
def itinerary_endpoint(req: sc.ItineraryRequest) -> sc.ItineraryResponse:
    config = _resolve(req)
    try:
        word = parse_word(req.word)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    try:
        result = realize_itinerary(word, config)
    except RealizationFailed as exc:
        raise HTTPException(
            status_code=422,
            detail=f"RealizationFailed after {exc.realized_prefix} symbols",
        ) from exc
    except BykovError as exc:
        raise _domain(exc) from exc
    artifact = sc.Artifact(
        name="itinerary.txt", text=reports.render_itinerary(config, result)
    )
    return sc.ItineraryResponse(
        matched=result.matched,
        exact=result.exact,
        point_x=result.point.a,
        point_y=result.point.b,
        artifacts=[artifact],
    )
