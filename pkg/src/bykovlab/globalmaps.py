"""Global transition maps between the saddle neighbourhoods.

Psi_vw : Out(v) -> In(w) is the identity on (r, phi) up to an optional
uniform gain (default 1), preserving the sheet.  Psi_wv : Out(w) -> In(v)
is a rigid rotation by the angular offset composed with the vertical shear
y -> y - g(x); it maps the curve y = g(x) onto the stable manifold y = 0
and the circle y = 0 onto the curve y = h(x).
"""

from __future__ import annotations

import numpy as np

from .model import SectionId, SectionPoint, UnfoldingModel


def psi_vw(p: SectionPoint, gain: float = 1.0) -> SectionPoint:
    """Transition Out(v) -> In(w); identity at gain 1, sheet preserved."""
    if p.section is not SectionId.OUT_V:
        raise ValueError(f"expected a point on OutV, got {p.section.value}")
    return SectionPoint(SectionId.IN_W, a=p.a, b=gain * p.b, sheet=p.sheet)


def psi_wv(p: SectionPoint, model: UnfoldingModel) -> SectionPoint:
    """Transition Out(w) -> In(v): (x, y) -> (x + delta, y - g(x)).

    The angle is carried unwrapped (the rotation lifts to a translation).
    The sheet of the arrival point is the sign of the new height.
    """
    if p.section is not SectionId.OUT_W:
        raise ValueError(f"expected a point on OutW, got {p.section.value}")
    y_new = p.b - model.g(p.a)
    sheet = 1 if y_new > 0 else (-1 if y_new < 0 else p.sheet)
    return SectionPoint(SectionId.IN_V, a=p.a + model.delta, b=y_new, sheet=sheet)


def d_psi_wv(p: SectionPoint, model: UnfoldingModel) -> np.ndarray:
    """Jacobian of psi_wv: a unit-determinant shear [[1, 0], [-g'(x), 1]]."""
    return np.array([[1.0, 0.0], [-model.g_prime(p.a), 1.0]])
