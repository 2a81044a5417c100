"""Locating the heteroclinic-tangency parameter ladder and the attracting
periodic orbits born near each tangency.

The return image of the upper unstable-manifold curve is a double helix with
a fold at eta(x_*, lam) = (x_* - K ln lam, lam^delta).  As lam decreases the
fold angle advances; each time it sweeps past the positive lobe of g the
fold-local minimum of the post-return height changes sign, which brackets
one tangency parameter per winding.  Consecutive tangency parameters scale
by e^(-2 pi / K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateUnfolding
from .horseshoe import Rectangle, cone_hyperbolicity
from .model import ModelConfig, SectionId, SectionPoint, TWO_PI, wrap
from .returnmap import d_zeta, zeta


def _gain_shift(config: ModelConfig) -> float:
    return math.log(config.psi_gain) / config.saddles.e_w


def _x_star_lift(config: ModelConfig) -> float:
    """Lifted angle of the maximum of the h-curve (fold preimage)."""
    return config.unfolding.pv1 + 1.5 * math.pi


def fold_point(lam: float, config: ModelConfig) -> SectionPoint:
    """The fold of the projected double helix on Out(w), with unwrapped angle."""
    if lam <= 0.0:
        raise DegenerateUnfolding("fold_point needs lambda > 0")
    s = config.saddles
    x = _x_star_lift(config) - s.k * math.log(lam) - _gain_shift(config)
    y = config.psi_gain**s.delta_w * lam**s.delta
    return SectionPoint(SectionId.OUT_W, a=x, b=y, sheet=1)


@dataclass(frozen=True)
class ProfileSample:
    s: np.ndarray
    values: np.ndarray


def _profile_value(s: float, config: ModelConfig) -> float:
    """Post-return height of the unstable-manifold point at curve angle s."""
    u = config.unfolding
    out = zeta(SectionPoint(SectionId.IN_V, a=s, b=u.h(s)), config)
    if out.returned or out.status == "Escaped":
        # The shear is defined for any crossing; escape only means the
        # arrival left the trapping height, the value itself is still valid.
        q = out.out_point
        return q.b - u.g(q.a)
    return math.nan


def _profile_slope(s: float, config: ModelConfig) -> float:
    """Analytic d/ds of the post-return height along the h-curve."""
    u, sp = config.unfolding, config.saddles
    h = u.h(s)
    hp = u.h_prime(s)
    xi = s - sp.k * math.log(h) - _gain_shift(config)
    stretch = config.psi_gain**sp.delta_w * sp.delta * h ** (sp.delta - 1.0)
    return stretch * hp - u.g_prime(xi) * (1.0 - sp.k * hp / h)


def _fold_window(config: ModelConfig) -> tuple[float, float]:
    """Fold-local parameter window on the upper h-curve.

    Half-width 2/K in curve parameter keeps the window clear of the
    adjacent-turn transverse crossings while containing the fold-side
    extremum (which sits near x_* - 1/K)."""
    half = min(2.0 / config.saddles.k, 0.45 * math.pi)
    x_star = _x_star_lift(config)
    return x_star - half, x_star + half


def curve_return_profile(
    lam: float,
    window: Optional[tuple[float, float]],
    resolution: int,
    config: ModelConfig,
    refine_rounds: int = 9,
) -> ProfileSample:
    """Sampled post-return height of the h-curve near the fold, adaptively
    refined around local minima until the extremum values are resolved."""
    if lam <= 0.0:
        raise DegenerateUnfolding("curve_return_profile needs lambda > 0")
    cfg = config.with_lambda(lam)
    u = cfg.unfolding
    if window is None:
        window = _fold_window(cfg)
    s_lo, s_hi = window
    if not (s_lo < s_hi):
        raise ValueError("empty profile window")
    # The h-curve meets the stable manifold at the connection angles; the
    # window must not contain them (the crossing angle diverges there).
    for zero in (u.pv1, u.pv2):
        k_lo = math.ceil((s_lo - zero) / TWO_PI)
        if zero + TWO_PI * k_lo <= s_hi:
            raise ValueError(
                "profile window contains a connection angle (|h| < y_floor)"
            )
    svals = list(np.linspace(s_lo, s_hi, max(resolution, 16)))
    vals = [_profile_value(s, cfg) for s in svals]
    for _ in range(refine_rounds):
        order = np.argsort(svals)
        s_arr = np.array(svals)[order]
        v_arr = np.array(vals)[order]
        inserts = []
        minima = [
            k
            for k in range(1, len(s_arr) - 1)
            if v_arr[k] <= v_arr[k - 1] and v_arr[k] <= v_arr[k + 1]
        ]
        minima.sort(key=lambda k: v_arr[k])
        for k in minima[:3]:
            for frac in (0.2, 0.4, 0.6, 0.8):
                inserts.append(s_arr[k - 1] + frac * (s_arr[k + 1] - s_arr[k - 1]))
        if not inserts:
            break
        for s in inserts:
            svals.append(float(s))
            vals.append(_profile_value(float(s), cfg))
    order = np.argsort(svals)
    return ProfileSample(s=np.array(svals)[order], values=np.array(vals)[order])


def _fold_minimum(lam: float, config: ModelConfig) -> tuple[float, float]:
    """(s_touch, min value) of the fold-local profile at this lam."""
    cfg = config.with_lambda(lam)
    s_lo, s_hi = _fold_window(cfg)
    n0 = 121
    svals = np.linspace(s_lo, s_hi, n0)
    vals = np.array([_profile_value(float(s), cfg) for s in svals])
    k = int(np.nanargmin(vals))
    a = svals[max(k - 1, 0)]
    b = svals[min(k + 1, n0 - 1)]
    # Golden-section refinement of the bracketed minimum.
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = _profile_value(float(c), cfg)
    fd = _profile_value(float(d), cfg)
    for _ in range(90):
        if b - a < 1e-12:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = _profile_value(float(c), cfg)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = _profile_value(float(d), cfg)
    s_touch = 0.5 * (a + b)
    return float(s_touch), float(_profile_value(s_touch, cfg))


def _polish_extremum(s_touch: float, config: ModelConfig) -> float:
    """Drive the analytic profile slope to zero around a located minimum."""
    span = 1e-7
    lo = hi = s_touch
    f_lo = f_hi = _profile_slope(s_touch, config)
    for _ in range(60):
        lo, hi = s_touch - span, s_touch + span
        f_lo, f_hi = _profile_slope(lo, config), _profile_slope(hi, config)
        if f_lo * f_hi < 0.0:
            break
        span *= 4.0
    else:
        return s_touch
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        fm = _profile_slope(mid, config)
        if fm == 0.0:
            return mid
        if f_lo * fm < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, fm
        if hi - lo < 1e-16 * (1.0 + abs(mid)):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TangencyRecord:
    lam_star: float
    bracket: tuple[float, float]  # (lam_2, lam_1)
    touch_point: tuple[float, float]  # (wrapped angle, height) on In(v)
    fold_preimage: float  # curve parameter s of the touching point
    value_residual: float
    slope_residual: float
    winding: int


def find_tangencies(
    lam_hi: float, lam_lo: float, config: ModelConfig
) -> list[TangencyRecord]:
    """All tangency parameters in [lam_lo, lam_hi], ordered decreasing.

    Per winding i the bracket is closed-form: lam_1 puts the fold on the
    maximum of g (profile minimum negative), lam_2 puts it mid way into the
    negative lobe (profile positive); the sign change in between is bisected
    in log-lambda.
    """
    if not (0.0 < lam_lo <= lam_hi):
        raise ValueError("need 0 < lam_lo <= lam_hi")
    u, s = config.unfolding, config.saddles
    records: list[TangencyRecord] = []
    if lam_lo == lam_hi:
        return records
    x_star = _x_star_lift(config)
    shift = _gain_shift(config)
    x_m = u.pw1 + 0.5 * math.pi  # maximum of g

    # ln lam_1(i) = (x_star - shift - x_m - 2 pi i) / K, decreasing in i.
    i_lo = math.ceil((x_star - shift - x_m - s.k * math.log(lam_hi)) / TWO_PI)
    i_hi = math.floor((x_star - shift - x_m - s.k * math.log(lam_lo)) / TWO_PI) + 1
    for i in range(i_lo, i_hi + 1):
        lam1 = math.exp((x_star - shift - x_m - TWO_PI * i) / s.k)
        lam2 = lam1 * math.exp(-math.pi / s.k)
        _, m1 = _fold_minimum(lam1, config)
        _, m2 = _fold_minimum(lam2, config)
        if not (m1 < 0.0 < m2):
            continue
        lo, hi = math.log(lam2), math.log(lam1)
        f_hi = m1
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            _, fm = _fold_minimum(math.exp(mid), config)
            if fm < 0.0:
                hi, f_hi = mid, fm
            else:
                lo = mid
            if hi - lo < 5e-16:
                break
        lam_star = math.exp(0.5 * (lo + hi))
        if not (lam_lo <= lam_star <= lam_hi):
            continue
        cfg_star = config.with_lambda(lam_star)
        s_touch, _ = _fold_minimum(lam_star, config)
        s_touch = _polish_extremum(s_touch, cfg_star)
        m_star = _profile_value(s_touch, cfg_star)
        slope = _profile_slope(s_touch, cfg_star)
        out = zeta(
            SectionPoint(SectionId.IN_V, a=s_touch, b=cfg_star.unfolding.h(s_touch)),
            cfg_star,
        )
        q = out.out_point
        touch = (wrap(q.a + cfg_star.unfolding.delta), q.b - cfg_star.unfolding.g(q.a))
        records.append(
            TangencyRecord(
                lam_star=lam_star,
                bracket=(lam2, lam1),
                touch_point=touch,
                fold_preimage=s_touch,
                value_residual=abs(m_star),
                slope_residual=abs(slope),
                winding=i,
            )
        )
    records.sort(key=lambda r: -r.lam_star)
    return records


# ---------------------------------------------------------------------------
# Periodic sinks near a tangency
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicOrbit:
    point: SectionPoint
    period: int
    lam: float
    multipliers: tuple[complex, complex]
    stability: str  # sink | saddle | source | nonhyperbolic
    residual: float
    orbit_points: tuple[tuple[float, float], ...]

    @property
    def moduli(self) -> tuple[float, float]:
        return (abs(self.multipliers[0]), abs(self.multipliers[1]))


def _orbit_jacobian(
    point: SectionPoint, period: int, config: ModelConfig
) -> Optional[tuple[np.ndarray, SectionPoint, list[tuple[float, float]]]]:
    """Accumulated Jacobian over one candidate period, or None on breakdown."""
    jac = np.eye(2)
    p = point
    pts = []
    for _ in range(period):
        pts.append((p.wrapped, p.b))
        if abs(p.b) < config.numeric.y_floor or abs(p.b) > config.numeric.y_max:
            return None
        jac = d_zeta(p, config) @ jac
        out = zeta(p, config)
        if not out.returned:
            return None
        p = out.next
    return jac, p, pts


def _newton_periodic(
    seed: SectionPoint, period: int, config: ModelConfig
) -> Optional[PeriodicOrbit]:
    num = config.numeric
    z = np.array([seed.a, seed.b])
    for _ in range(num.max_iter):
        p = SectionPoint(SectionId.IN_V, a=float(z[0]), b=float(z[1]))
        res = _orbit_jacobian(p, period, config)
        if res is None:
            return None
        jac, p_end, _ = res
        fx = (p_end.a - p.a + math.pi) % TWO_PI - math.pi
        fy = p_end.b - p.b
        fvec = np.array([fx, fy])
        if math.hypot(fx, fy) < num.tol_newton:
            mults = np.linalg.eigvals(jac)
            moduli = sorted(abs(m) for m in mults)
            band = 1e-6
            if any(abs(m - 1.0) <= band for m in moduli):
                tag = "nonhyperbolic"
            elif moduli[1] < 1.0:
                tag = "sink"
            elif moduli[0] > 1.0:
                tag = "source"
            else:
                tag = "saddle"
            res2 = _orbit_jacobian(p, period, config)
            pts = res2[2] if res2 else []
            return PeriodicOrbit(
                point=SectionPoint(SectionId.IN_V, a=p.wrapped, b=p.b),
                period=period,
                lam=config.unfolding.lam,
                multipliers=(complex(mults[0]), complex(mults[1])),
                stability=tag,
                residual=math.hypot(fx, fy),
                orbit_points=tuple(pts),
            )
        try:
            step = np.linalg.solve(jac - np.eye(2), -fvec)
        except np.linalg.LinAlgError:
            return None
        # Keep the height away from the singular locus during the solve.
        max_dy = 0.5 * abs(z[1]) + 0.1 * config.unfolding.lam
        if abs(step[1]) > max_dy:
            step = step * (max_dy / abs(step[1]))
        z = z + step
        if not np.isfinite(z).all() or abs(z[1]) < num.y_floor or abs(z[1]) > 1.0:
            return None
    return None


def _minimal_period(orbit: PeriodicOrbit, config: ModelConfig) -> bool:
    """True when no proper divisor of the period closes the orbit."""
    for q in range(1, orbit.period):
        if orbit.period % q != 0:
            continue
        res = _orbit_jacobian(orbit.point, q, config)
        if res is None:
            continue
        _, p_end, _ = res
        dx = (p_end.a - orbit.point.a + math.pi) % TWO_PI - math.pi
        if math.hypot(dx, p_end.b - orbit.point.b) < 100.0 * config.numeric.tol_newton:
            return False
    return True


def _same_orbit(a: PeriodicOrbit, b: PeriodicOrbit, tol: float) -> bool:
    if a.period != b.period or abs(a.lam - b.lam) > 0.0:
        return False
    pts_a, pts_b = a.orbit_points, b.orbit_points
    for shift in range(len(pts_b)):
        ok = True
        for (xa, ya), (xb, yb) in zip(pts_a, pts_b[shift:] + pts_b[:shift]):
            dx = (xa - xb + math.pi) % TWO_PI - math.pi
            if math.hypot(dx, ya - yb) > tol:
                ok = False
                break
        if ok:
            return True
    return False


def find_periodic_sinks(
    record: TangencyRecord,
    period_max: int,
    config: ModelConfig,
    lam_span: tuple[float, float] = (0.67, 1.0),
    n_lambda: int = 8,
) -> list[PeriodicOrbit]:
    """Periodic orbits near a located tangency, classified by multipliers.

    Newton solves for fixed points of the p-th return seed from a grid
    around the touch point, at parameters in a small neighbourhood below
    lam_star (small relative to the e^(-2 pi/K) ladder spacing, where the
    saddle-node windows created by the tangency live).
    """
    if period_max < 1:
        return []
    num = config.numeric
    lam_star = record.lam_star
    lams = np.exp(
        np.linspace(
            math.log(lam_star * lam_span[0]), math.log(lam_star * lam_span[1]), n_lambda
        )
    )
    x_touch = record.touch_point[0]
    found: list[PeriodicOrbit] = []
    for lam in lams:
        cfg = config.with_lambda(float(lam))
        s = cfg.saddles
        u = cfg.unfolding
        # Height seeds: the return-ladder levels plus a small spread near lam.
        ladder = []
        # Return-ladder levels y_n = e^((delta_offset - 2 pi n)/K), kept below ~0.8.
        n0 = math.ceil((u.delta - s.k * math.log(0.8)) / TWO_PI)
        for n in range(int(n0), int(n0) + 14):
            yl = math.exp((u.delta - TWO_PI * n) / s.k)
            if 50.0 * num.y_floor < yl < 0.8:
                ladder.append(yl)
        spread = [float(lam) * f for f in (0.3, 0.6, 0.9, 1.2)]
        y_seeds = sorted(set(ladder + spread))
        x_seeds = [x_touch + dx for dx in np.linspace(-0.9, 0.9, 7)]
        for period in range(1, period_max + 1):
            for xs in x_seeds:
                for ys in y_seeds:
                    orbit = _newton_periodic(
                        SectionPoint(SectionId.IN_V, a=wrap(xs), b=ys), period, cfg
                    )
                    if orbit is None or not _minimal_period(orbit, cfg):
                        continue
                    tol = 10.0 * num.tol_newton + 1e-9
                    if any(_same_orbit(orbit, o, tol) for o in found):
                        continue
                    found.append(orbit)
    found.sort(key=lambda o: (o.stability != "sink", o.period, -o.lam))
    return found


def verify_sink_contraction(
    orbit: PeriodicOrbit,
    config: ModelConfig,
    offset: float = 1e-6,
    periods: int = 50,
) -> tuple[bool, float]:
    """Re-verify a sink by iterating a perturbed start for many periods.

    The shear -K/y amplifies a height offset strongly on the first return
    (non-normal transient), so contraction is judged from the distance after
    one full period: the run passes when the final distance is below half of
    that and the orbit never leaves the chart.
    """
    cfg = config.with_lambda(orbit.lam)
    p = SectionPoint(SectionId.IN_V, a=orbit.point.a + offset, b=orbit.point.b + offset)

    def dist_to_orbit(q: SectionPoint) -> float:
        best = math.inf
        for ox, oy in orbit.orbit_points:
            dx = (q.wrapped - ox + math.pi) % TWO_PI - math.pi
            best = min(best, math.hypot(dx, q.b - oy))
        return best

    dist_first = None
    for k in range(1, periods * orbit.period + 1):
        out = zeta(p, cfg)
        if not out.returned:
            return False, math.inf
        p = out.next
        if k == orbit.period:
            dist_first = dist_to_orbit(p)
    final = dist_to_orbit(p)
    return final < 0.5 * dist_first, final


# ---------------------------------------------------------------------------
# Hyperbolicity-loss threshold scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TangencyScanResult:
    lam_c: float
    bracket: tuple[float, float]
    passes_above: bool
    fails_below: bool


def horseshoe_tangency_scan(
    rect: Rectangle,
    lam_hi: float,
    lam_lo: float,
    config: ModelConfig,
    cone_slope: float = 1.0,
    grid: int = 20,
    rel_tol: float = 1e-3,
) -> Optional[TangencyScanResult]:
    """Bisect the cone-certification flag in lambda for a fixed rectangle.

    The rectangle is kept fixed while lambda moves the g-graph, so the
    certified returns die out when the in-window image sweep drops below the
    rectangle; the threshold is located by bisection on the pass flag.
    Returns None when the whole range passes (no loss inside the range).
    """
    if not (0.0 < lam_lo < lam_hi):
        raise ValueError("need 0 < lam_lo < lam_hi")

    def passes(lam: float) -> bool:
        report = cone_hyperbolicity([rect], cone_slope, grid, config.with_lambda(lam))
        return bool(report.passed)

    if not passes(lam_hi):
        raise ValueError("rectangle is not certified hyperbolic at the upper end")
    if passes(lam_lo):
        return None
    lo, hi = math.log(lam_lo), math.log(lam_hi)
    while hi - lo > rel_tol:
        mid = 0.5 * (lo + hi)
        if passes(math.exp(mid)):
            hi = mid
        else:
            lo = mid
    return TangencyScanResult(
        lam_c=math.exp(0.5 * (lo + hi)),
        bracket=(math.exp(lo), math.exp(hi)),
        passes_above=True,
        fails_below=True,
    )
