"""Linearized passage maps through the saddle neighbourhoods, with exact
Jacobians, and finite-sample curve classifiers (segment / spiral / helix).

Jacobian layout convention: rows follow the target section's printed
coordinate order and columns the source section's, i.e. d_phi_v maps
(dx, dy) to (dr, dphi) and d_phi_w maps (dr, dphi) to (dx, dy).  With this
convention the chain rule composes the passage and transition maps directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import OnStableManifold, TooFewSamples
from .model import SaddleParameters, SectionId, SectionPoint, TWO_PI


def _require(point: SectionPoint, section: SectionId) -> None:
    if point.section is not section:
        raise ValueError(f"expected a point on {section.value}, got {point.section.value}")


def phi_v(p: SectionPoint, params: SaddleParameters, y_floor: float = 1e-14) -> SectionPoint:
    """Passage In(v) -> Out(v): (x, y) -> (r, phi) = (|y|^delta_v, x - ln|y|/E_v).

    The sheet of the outgoing disc point is sign(y).
    """
    _require(p, SectionId.IN_V)
    y = p.b
    if abs(y) < y_floor:
        raise OnStableManifold(f"|y|={abs(y):.3e} below y_floor={y_floor:.3e} on In(v)")
    r = abs(y) ** params.delta_v
    phi = p.a - math.log(abs(y)) / params.e_v
    return SectionPoint(SectionId.OUT_V, a=phi, b=r, sheet=1 if y > 0 else -1)


def phi_w(p: SectionPoint, params: SaddleParameters, y_floor: float = 1e-14) -> SectionPoint:
    """Passage In(w) -> Out(w): (r, phi) -> (x, y) = (phi - ln r/E_w, r^delta_w).

    The sheet sign is transferred to sign(y) on the cylinder wall.
    """
    _require(p, SectionId.IN_W)
    r = p.b
    if r < y_floor:
        raise OnStableManifold(f"r={r:.3e} below y_floor={y_floor:.3e} on In(w)")
    x = p.a - math.log(r) / params.e_w
    y = r ** params.delta_w
    return SectionPoint(SectionId.OUT_W, a=x, b=p.sheet * y, sheet=p.sheet)


def d_phi_v(p: SectionPoint, params: SaddleParameters, y_floor: float = 1e-14) -> np.ndarray:
    """Jacobian of phi_v, rows (r, phi), columns (x, y)."""
    _require(p, SectionId.IN_V)
    y = p.b
    if abs(y) < y_floor:
        raise OnStableManifold("Jacobian of phi_v on the stable manifold")
    sign = 1.0 if y > 0 else -1.0
    return np.array(
        [
            [0.0, params.delta_v * abs(y) ** (params.delta_v - 1.0) * sign],
            [1.0, -1.0 / (params.e_v * y)],
        ]
    )


def d_phi_w(p: SectionPoint, params: SaddleParameters, y_floor: float = 1e-14) -> np.ndarray:
    """Jacobian of phi_w, rows (x, y), columns (r, phi)."""
    _require(p, SectionId.IN_W)
    r = p.b
    if r < y_floor:
        raise OnStableManifold("Jacobian of phi_w on the stable manifold")
    return np.array(
        [
            [-1.0 / (params.e_w * r), 1.0],
            [p.sheet * params.delta_w * r ** (params.delta_w - 1.0), 0.0],
        ]
    )


@dataclass
class CurveSample:
    """An ordered, refinable sample of a curve on a single section.

    ``params`` are the curve parameters of the points; when ``func`` is
    given, consumers may densify the sample on demand by evaluating it at
    intermediate parameter values.
    """

    points: list[SectionPoint]
    params: Optional[list[float]] = None
    func: Optional[Callable[[float], SectionPoint]] = None
    kind: str = "unclassified"

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("a curve sample needs at least 2 points")
        sections = {p.section for p in self.points}
        if len(sections) != 1:
            raise ValueError("all points of a curve sample must lie on one section")
        if self.params is not None and len(self.params) != len(self.points):
            raise ValueError("params and points must have equal length")

    @property
    def section(self) -> SectionId:
        return self.points[0].section

    @classmethod
    def from_function(
        cls, func: Callable[[float], SectionPoint], s_values: Sequence[float]
    ) -> "CurveSample":
        svals = list(map(float, s_values))
        return cls(points=[func(s) for s in svals], params=svals, func=func)


def _strictly_monotone(values: np.ndarray) -> bool:
    d = np.diff(values)
    return bool(np.all(d > 0.0) or np.all(d < 0.0))


def classify_curve(curve: CurveSample, min_samples: int = 8) -> str:
    """Tag a sampled curve as segment, spiral, helix, or unclassified.

    Finite surrogate for the asymptotic definitions: a spiral/helix needs a
    monotone unwrapped angle spanning at least 4*pi (with a monotone second
    coordinate); a segment needs both coordinates strictly monotone with an
    angle span below one turn.
    """
    if len(curve.points) < min_samples:
        raise TooFewSamples(f"need >= {min_samples} samples, got {len(curve.points)}")
    a = np.array([p.a for p in curve.points])
    b = np.array([p.b for p in curve.points])
    span = abs(a[-1] - a[0])
    angle_mono = _strictly_monotone(a)
    b_mono = _strictly_monotone(b)
    if angle_mono and b_mono and span >= 2.0 * TWO_PI:
        return "spiral" if not curve.section.is_cylinder else "helix"
    if angle_mono and b_mono and span < TWO_PI:
        return "segment"
    return "unclassified"


def curve_to_csv_rows(curve: CurveSample) -> list[str]:
    """Rows for the curve CSV interface (section, a_unwrapped, b, sheet)."""
    from .model import fmt

    rows = ["section,a_unwrapped,b,sheet"]
    for p in curve.points:
        rows.append(f"{p.section.value},{fmt(p.a)},{fmt(p.b)},{p.sheet}")
    return rows
