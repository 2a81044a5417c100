"""Deterministic text artifacts: CSV files and structured tables.

Every artifact begins with a comment header embedding the fully resolved
configuration, and every float is printed with 17 significant digits so a
replay with the same configuration is byte-identical.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DegenerateUnfolding
from .horseshoe import (
    MultipulseScan,
    Rectangle,
    SurvivalCurve,
    TransitionMatrix,
    RealizedItinerary,
)
from .model import ModelConfig, SectionId, SectionPoint, ValidationReport, fmt
from .returnmap import ReturnOutcome, eta
from .tangency import PeriodicOrbit, TangencyRecord, fold_point


def config_header(config: ModelConfig) -> list[str]:
    lines = ["# bykovlab artifact; resolved configuration:"]
    lines.extend(f"# {key} = {val}" for key, val in config.resolved_items())
    return lines


def _artifact(config: ModelConfig, body: list[str]) -> str:
    return "\n".join(config_header(config) + body) + "\n"


def render_validation(config: ModelConfig, report: ValidationReport) -> str:
    body = []
    for c in report.checks:
        body.append(f"{'PASS' if c.ok else 'FAIL'} {c.name} [{c.detail}]")
    body.append(f"stability_criterion = {str(report.stability_criterion).lower()}")
    body.append(
        f"disjoint_intervals_regime = {str(report.disjoint_intervals_regime).lower()}"
    )
    body.append(f"result = {'PASS' if report.passed else 'FAIL'}")
    return _artifact(config, body)


def render_function_curve(
    config: ModelConfig, which: str, samples: int = 512
) -> str:
    """CSV sample of g (on Out(w)) or h (on In(v)) over one period."""
    u = config.unfolding
    f = u.g if which == "g" else u.h
    body = ["x,height"]
    for x in np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False):
        body.append(f"{fmt(x)},{fmt(f(float(x)))}")
    return _artifact(config, body)


def render_h_return_curve(config: ModelConfig, samples: int = 2048) -> str:
    """CSV of the first-hit image of the upper h-curve on Out(w)."""
    u = config.unfolding
    body = ["s,x_unwrapped,height"]
    if u.lam > 0.0:
        margin = math.asin(
            min(1.0, 10.0 * config.numeric.y_floor / u.lam)
        ) if u.lam > 10.0 * config.numeric.y_floor else 0.5 * math.pi
        lo = u.pv1 + math.pi + margin
        hi = u.pv1 + 2.0 * math.pi - margin
        for s in np.linspace(lo, hi, samples):
            h = u.h(float(s))
            if h < config.numeric.y_floor:
                continue
            q = eta(SectionPoint(SectionId.IN_V, a=float(s), b=h), config)
            body.append(f"{fmt(s)},{fmt(q.a)},{fmt(q.b)}")
    else:
        body.append("# degenerate unfolding (lambda = 0): curve lies on the manifold")
    return _artifact(config, body)


def render_fold_point(config: ModelConfig) -> str:
    body = ["x_unwrapped,height"]
    try:
        p = fold_point(config.unfolding.lam, config)
        body.append(f"{fmt(p.a)},{fmt(p.b)}")
    except DegenerateUnfolding:
        body.append("# degenerate unfolding (lambda = 0): no fold")
    return _artifact(config, body)


def render_orbit(
    config: ModelConfig, start: SectionPoint, outcomes: Sequence[ReturnOutcome]
) -> str:
    body = ["step,x_unwrapped,y,sheet,symbol,winding,status"]
    body.append(f"0,{fmt(start.a)},{fmt(start.b)},{start.sheet},,,start")
    p = start
    for k, out in enumerate(outcomes, start=1):
        if out.returned:
            p = out.next
            sym = f"{out.symbol[0]}{'+' if out.symbol[1] > 0 else '-'}"
            body.append(
                f"{k},{fmt(p.a)},{fmt(p.b)},{p.sheet},{sym},{out.winding},{out.status}"
            )
        else:
            body.append(f"{k},,,,,{out.winding},{out.status}")
    return _artifact(config, body)


def render_transition_matrix(
    config: ModelConfig, rects: Sequence[Rectangle], matrix: TransitionMatrix
) -> str:
    body = ["# rectangles:"]
    for r in rects:
        body.append(
            f"# {r.label}: x in [{fmt(r.x_lo)}, {fmt(r.x_hi)}], "
            f"y in [{fmt(r.y_lo)}, {fmt(r.y_hi)}]"
        )
    body.append("# transition matrix (row = source, column = target):")
    body.extend(matrix.as_lines())
    body.append("# crossing certificates:")
    for c in matrix.certificates:
        if c.crosses:
            body.append(
                f"# {c.source}->{c.target}: full crossing on {c.fibers_checked} fibers, "
                f"clearance below {fmt(c.undershoot)}, above {fmt(c.overshoot)}"
            )
        else:
            body.append(
                f"# {c.source}->{c.target}: separated by {fmt(c.separation)} "
                f"on {c.fibers_checked} fibers"
            )
    return _artifact(config, body)


def render_cone_report(config: ModelConfig, report) -> str:
    body = [
        f"valid_input = {str(report.valid_input).lower()}",
        f"checked_points = {report.checked_points}",
        f"mu = {fmt(report.mu) if not math.isnan(report.mu) else 'nan'}",
        f"image_halfangle = {fmt(report.image_halfangle) if not math.isnan(report.image_halfangle) else 'nan'}",
        f"passed = {str(report.passed).lower()}",
    ]
    if report.note:
        body.append(f"note = {report.note}")
    return _artifact(config, body)


def render_survival(config: ModelConfig, curve: SurvivalCurve) -> str:
    body = ["returns,survival"]
    for j, frac in enumerate(curve.fractions):
        body.append(f"{j},{fmt(frac)}")
    body.append(f"# samples = {curve.n_samples}, seed = {curve.seed}")
    if not math.isnan(curve.decay_rate):
        body.append(
            f"# geometric decay rate = {fmt(curve.decay_rate)}, "
            f"ci95 = [{fmt(curve.rate_ci[0])}, {fmt(curve.rate_ci[1])}]"
        )
    else:
        body.append("# geometric decay rate = nan (too few positive points)")
    return _artifact(config, body)


def render_tangency_table(
    config: ModelConfig, records: Sequence[TangencyRecord]
) -> str:
    body = [
        "# lam_star bracket_lo bracket_hi touch_x touch_y value_residual slope_residual winding"
    ]
    for r in records:
        body.append(
            " ".join(
                [
                    fmt(r.lam_star),
                    fmt(r.bracket[0]),
                    fmt(r.bracket[1]),
                    fmt(r.touch_point[0]),
                    fmt(r.touch_point[1]),
                    fmt(r.value_residual),
                    fmt(r.slope_residual),
                    str(r.winding),
                ]
            )
        )
    return _artifact(config, body)


def render_sinks_table(config: ModelConfig, orbits: Sequence[PeriodicOrbit]) -> str:
    body = ["# x y period mult1_re mult1_im mult2_re mult2_im tag lambda"]
    for o in orbits:
        m1, m2 = o.multipliers
        body.append(
            " ".join(
                [
                    fmt(o.point.wrapped),
                    fmt(o.point.b),
                    str(o.period),
                    fmt(m1.real),
                    fmt(m1.imag),
                    fmt(m2.real),
                    fmt(m2.imag),
                    o.stability,
                    fmt(o.lam),
                ]
            )
        )
    return _artifact(config, body)


def render_itinerary(config: ModelConfig, result: RealizedItinerary) -> str:
    from .horseshoe import format_symbol

    body = [
        "word = " + ",".join(format_symbol(sym) for sym in result.word),
        f"point = ({fmt(result.point.a)}, {fmt(result.point.b)})",
    ]
    body.extend(result.transcript())
    return _artifact(config, body)


def render_multipulse(config: ModelConfig, scan: MultipulseScan) -> str:
    body = ["# s h winding pulse residual"]
    for c in scan.connections:
        body.append(
            f"{fmt(c.s)} {fmt(c.point.b)} {c.winding} {c.pulse} {fmt(c.residual)}"
        )
    if scan.tangency_suspected:
        body.append(
            "# tangency suspected at s = "
            + ", ".join(fmt(s) for s in scan.tangency_suspected)
        )
    return _artifact(config, body)
