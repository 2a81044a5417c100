"""First-hit and first-return maps with escape accounting.

The first hit eta = Phi_w o Psi_vw o Phi_v : In(v) -> Out(w) has the closed
form (x - K ln|y|, sign(y) |y|^delta) at unit transition gain; the first
return is zeta = Psi_wv o eta : In(v) -> In(v).  Both preserve the unwrapped
angle lift, which records the winding inside the w-neighbourhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import OnStableManifold
from .globalmaps import d_psi_wv, psi_vw, psi_wv
from .localmaps import d_phi_v, d_phi_w, phi_v, phi_w
from .model import ModelConfig, SectionId, SectionPoint, TWO_PI, circdist


def eta(p: SectionPoint, config: ModelConfig) -> SectionPoint:
    """Closed-form first hit In(v) -> Out(w); equals phi_w(psi_vw(phi_v(p)))."""
    if p.section is not SectionId.IN_V:
        raise ValueError(f"expected a point on InV, got {p.section.value}")
    s, y_floor = config.saddles, config.numeric.y_floor
    y = p.b
    if abs(y) < y_floor:
        raise OnStableManifold(f"|y|={abs(y):.3e} below y_floor on In(v)")
    gain = config.psi_gain
    x_out = p.a - s.k * math.log(abs(y)) - math.log(gain) / s.e_w
    y_out = math.copysign(gain**s.delta_w * abs(y) ** s.delta, y)
    return SectionPoint(SectionId.OUT_W, a=x_out, b=y_out, sheet=1 if y > 0 else -1)


def eta_composed(p: SectionPoint, config: ModelConfig) -> SectionPoint:
    """The three-map composition, kept independent of the closed form."""
    y_floor = config.numeric.y_floor
    q = phi_v(p, config.saddles, y_floor)
    q = psi_vw(q, config.psi_gain)
    return phi_w(q, config.saddles, y_floor)


def d_eta(p: SectionPoint, config: ModelConfig) -> np.ndarray:
    """Jacobian of eta, rows and columns in (x, y) order."""
    s, y_floor = config.saddles, config.numeric.y_floor
    y = p.b
    if abs(y) < y_floor:
        raise OnStableManifold("Jacobian of eta on the stable manifold")
    stretch = config.psi_gain**s.delta_w * s.delta * abs(y) ** (s.delta - 1.0)
    return np.array([[1.0, -s.k / y], [0.0, stretch]])


def d_eta_composed(p: SectionPoint, config: ModelConfig) -> np.ndarray:
    """Chain-rule Jacobian through the three maps (cross-check path)."""
    y_floor = config.numeric.y_floor
    q1 = phi_v(p, config.saddles, y_floor)
    q2 = psi_vw(q1, config.psi_gain)
    j1 = d_phi_v(p, config.saddles, y_floor)
    j2 = np.array([[config.psi_gain, 0.0], [0.0, 1.0]])  # (r, phi) scaling
    j3 = d_phi_w(q2, config.saddles, y_floor)
    return j3 @ j2 @ j1


@dataclass(frozen=True)
class ReturnOutcome:
    """Result of one application of the first-return map."""

    status: str  # Returned | Escaped | OnStableManifold
    next: Optional[SectionPoint] = None
    symbol: Optional[tuple[int, int]] = None  # (connection 1|2, sheet +-1)
    winding: int = 0
    out_point: Optional[SectionPoint] = None  # crossing of Out(w), when reached

    @property
    def returned(self) -> bool:
        return self.status == "Returned"


def _symbol_of(xi_wrapped: float, model) -> int:
    """Nearest-connection symbol: 1 near Pw1, 2 near Pw2; ties go to 1."""
    d1 = circdist(xi_wrapped, model.pw1)
    d2 = circdist(xi_wrapped, model.pw2)
    return 1 if d1 <= d2 else 2


def zeta(p: SectionPoint, config: ModelConfig) -> ReturnOutcome:
    """One first return.  Escape and stable-manifold hits are statuses."""
    y = p.b
    if abs(y) < config.numeric.y_floor:
        return ReturnOutcome(status="OnStableManifold")
    q = eta(p, config)
    nxt = psi_wv(q, config.unfolding)
    winding = int(math.floor((q.a - p.a) / TWO_PI))
    if abs(nxt.b) > config.numeric.y_max:
        return ReturnOutcome(status="Escaped", winding=winding, out_point=q)
    symbol = (_symbol_of(q.wrapped, config.unfolding), 1 if y > 0 else -1)
    return ReturnOutcome(
        status="Returned", next=nxt, symbol=symbol, winding=winding, out_point=q
    )


def d_zeta(p: SectionPoint, config: ModelConfig) -> np.ndarray:
    """Analytic Jacobian of the first return (shear times eta stretch)."""
    q = eta(p, config)
    return d_psi_wv(q, config.unfolding) @ d_eta(p, config)


def iterate(p: SectionPoint, config: ModelConfig, k: int) -> list[ReturnOutcome]:
    """Deterministic orbit of up to k returns, halted at the first
    non-Returned outcome (which is included in the record)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    outcomes: list[ReturnOutcome] = []
    current = p
    for _ in range(k):
        out = zeta(current, config)
        outcomes.append(out)
        if not out.returned:
            break
        current = out.next
    return outcomes


def symbols_of(outcomes: list[ReturnOutcome]) -> list[tuple[int, int]]:
    return [o.symbol for o in outcomes if o.returned]


def zeta_arrays(
    x: np.ndarray, y: np.ndarray, config: ModelConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized zeta for Monte-Carlo work.

    Returns (x_next, y_next, xi_wrapped, alive) where alive is False for
    points on the stable manifold or escaping above y_max; dead entries
    hold NaN coordinates.
    """
    s, n, u = config.saddles, config.numeric, config.unfolding
    gain = config.psi_gain
    absy = np.abs(y)
    alive = absy >= n.y_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x - s.k * np.log(absy) - math.log(gain) / s.e_w
        y_out = np.sign(y) * gain**s.delta_w * absy**s.delta
        x_next = xi + u.delta
        y_next = y_out - u.lam * np.sin(xi - u.pw1)
    alive &= np.where(np.isfinite(y_next), np.abs(y_next) <= n.y_max, False)
    x_next = np.where(alive, x_next, np.nan)
    y_next = np.where(alive, y_next, np.nan)
    return x_next, y_next, np.where(alive, np.mod(xi, TWO_PI), np.nan), alive
