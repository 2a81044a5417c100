"""Interval ladders, horseshoe rectangles with certified transition crossings,
numerical cone-field hyperbolicity, multipulse connections, itinerary
realization, and the Monte-Carlo escape experiment.

Geometry notes that shape this module.  Write xi = x - K ln|y| for the
angle at which a point of In(v) crosses Out(w).  A return lands inside an
angular window of half-width tau around a connection point only when xi is
within tau of the matching connection angle, so the arrival height there is
y' = sign(y) |y|^delta - g(xi) with |g(xi)| <= lam*sin(tau).  No image can
climb higher than about lam*sin(tau) inside the window; Markov rectangles
must therefore sit below that ceiling.  The canonical interval ladder
(interval_sequence) starts at the lam^(1/delta) scale instead, so
build_horseshoe rescales the ladder under the ceiling while preserving its
exact e^(-2 pi / K) rung geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CrossingUncertain,
    DegenerateUnfolding,
    InsufficientResolution,
    RealizationFailed,
)
from .localmaps import CurveSample
from .model import ModelConfig, SectionId, SectionPoint, TWO_PI, circdist, wrap
from .returnmap import ReturnOutcome, d_zeta, iterate, zeta, zeta_arrays


# ---------------------------------------------------------------------------
# Interval sequence (the canonical ladder)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeightInterval:
    """The vertical interval I_n = {x0} x [lo, hi] on In(v)."""

    x0: float
    lo: float
    hi: float
    index: int

    @property
    def log_width(self) -> float:
        return math.log(self.hi / self.lo)


def winding_offset(x0: float, config: ModelConfig) -> int:
    """Winding offset m of the ladder at this fiber: the smallest integer
    with x0 - Pw2 <= (K/delta) ln(lam) + 2 m pi, raised when needed so the
    top rung stays inside the chart (heights <= y_max)."""
    u, s = config.unfolding, config.saddles
    if u.lam <= 0.0:
        raise DegenerateUnfolding("winding offset needs lambda > 0")
    m = math.ceil((x0 - u.pw2 - (s.k / s.delta) * math.log(u.lam)) / TWO_PI)
    m_chart = math.ceil((x0 - u.pw1 - s.k * math.log(config.numeric.y_max)) / TWO_PI)
    return max(m, m_chart)


def interval_sequence(
    x0: float, count: int, config: ModelConfig
) -> list[HeightInterval]:
    """Ladder of fiber intervals whose first-hit images cross the g-graph.

    Endpoint law: eta maps (x0, hi_n) to the angle Pw1 + 2(m+n) pi and
    (x0, lo_n) to Pw2 + 2(m+n) pi, exactly; rung heights scale by
    e^(-2 pi / K) per index.
    """
    u, s = config.unfolding, config.saddles
    if u.lam <= 0.0:
        raise DegenerateUnfolding("interval_sequence needs lambda > 0")
    if count < 1:
        raise ValueError("count must be >= 1")
    m = winding_offset(x0, config)
    a = (x0 - u.pw1 - 2.0 * m * math.pi) / s.k
    b = (x0 - u.pw2 - 2.0 * m * math.pi) / s.k
    lo_exp, hi_exp = min(a, b), max(a, b)
    out = []
    for n in range(count):
        decay = -2.0 * n * math.pi / s.k
        out.append(
            HeightInterval(
                x0=x0, lo=math.exp(lo_exp + decay), hi=math.exp(hi_exp + decay), index=n
            )
        )
    return out


def intervals_disjoint(intervals: Sequence[HeightInterval]) -> bool:
    """True when consecutive ladder intervals do not overlap."""
    ordered = sorted(intervals, key=lambda i: i.index)
    return all(ordered[k + 1].hi < ordered[k].lo for k in range(len(ordered) - 1))


# ---------------------------------------------------------------------------
# Transverse crossing counter
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingReport:
    count: int
    tangency_suspected: bool
    suspicion_params: tuple[float, ...] = ()


def crossing_count(
    curve: CurveSample,
    model,
    tol_root: float = 1e-10,
    max_depth: int = 60,
) -> CrossingReport:
    """Count transverse crossings of a sampled Out(w) curve with y = g(x).

    Sign changes of y(s) - g(x(s)) are counted; when the sample owns a
    generating function each change is bisection-refined to confirm it is
    isolated, and exhausting the depth budget raises InsufficientResolution.
    A local minimum of |y - g| below tol_root without an adjacent sign
    change is reported as a tangency suspicion.
    """
    if curve.section is not SectionId.OUT_W:
        raise ValueError("crossing_count expects a curve on OutW")
    d = np.array([p.b - model.g(p.a) for p in curve.points])
    params = curve.params

    count = 0
    last = 0
    for v in d:
        sgn = 1 if v > 0.0 else (-1 if v < 0.0 else 0)
        if sgn == 0:
            continue
        if last != 0 and sgn != last:
            count += 1
        last = sgn

    if curve.func is not None and params is not None:
        for k in range(len(d) - 1):
            if d[k] == 0.0 or d[k + 1] == 0.0 or d[k] * d[k + 1] > 0.0:
                continue
            s_lo, s_hi = params[k], params[k + 1]
            f_lo = d[k]
            depth = 0
            while abs(s_hi - s_lo) > 1e-15 * (1.0 + abs(s_hi)):
                if depth >= max_depth:
                    raise InsufficientResolution(
                        f"crossing near s={s_lo:.6g} not isolated within budget"
                    )
                s_mid = 0.5 * (s_lo + s_hi)
                p = curve.func(s_mid)
                f_mid = p.b - model.g(p.a)
                if f_lo * f_mid <= 0.0:
                    s_hi = s_mid
                else:
                    s_lo, f_lo = s_mid, f_mid
                depth += 1

    suspicions = []
    absd = np.abs(d)
    for k in range(1, len(d) - 1):
        if absd[k] <= tol_root and absd[k] <= absd[k - 1] and absd[k] <= absd[k + 1]:
            if d[k - 1] * d[k + 1] > 0.0:
                suspicions.append(params[k] if params is not None else float(k))
    return CrossingReport(
        count=count,
        tangency_suspected=bool(suspicions),
        suspicion_params=tuple(suspicions),
    )


# ---------------------------------------------------------------------------
# Horseshoe rectangles and certified transitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    label: str = ""

    def __post_init__(self) -> None:
        if not (self.x_lo < self.x_hi):
            raise ValueError("rectangle needs x_lo < x_hi")
        if not (0.0 < self.y_lo < self.y_hi):
            raise ValueError("rectangle needs 0 < y_lo < y_hi")

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def center(self) -> float:
        return 0.5 * (self.x_lo + self.x_hi)

    def contains(self, x: float, y: float) -> bool:
        if not (self.y_lo <= y <= self.y_hi):
            return False
        return (x - self.x_lo) % TWO_PI <= self.width

    def in_window(self, x: float) -> bool:
        return (x - self.x_lo) % TWO_PI <= self.width


@dataclass(frozen=True)
class CrossingCertificate:
    source: str
    target: str
    crosses: bool
    fibers_checked: int
    undershoot: float  # clearance below the target bottom (1-entries)
    overshoot: float  # clearance above the target top (1-entries)
    separation: float  # distance between image and target (0-entries)


@dataclass(frozen=True)
class TransitionMatrix:
    labels: tuple[str, ...]
    entries: np.ndarray
    certificates: tuple[CrossingCertificate, ...]

    def as_lines(self) -> list[str]:
        return [" ".join(str(int(v)) for v in row) for row in self.entries]


def _fiber_passages(
    x: float,
    band: tuple[float, float],
    window_center: float,
    window_halfwidth: float,
    config: ModelConfig,
) -> list[tuple[float, float, bool]]:
    """ln-height sub-intervals of the fiber {x} x band whose first-return
    landings fall inside the angular window.  Each entry is
    (ln_lo, ln_hi, fully_interior)."""
    u, s = config.unfolding, config.saddles
    gain_shift = math.log(config.psi_gain) / s.e_w
    xi_center = window_center - u.delta
    lo_ln, hi_ln = math.log(band[0]), math.log(band[1])
    w = window_halfwidth / s.k
    n_min = math.floor((x - gain_shift - xi_center - s.k * (hi_ln + w)) / TWO_PI)
    n_max = math.ceil((x - gain_shift - xi_center - s.k * (lo_ln - w)) / TWO_PI)
    out = []
    for n in range(n_min, n_max + 1):
        ln_c = (x - gain_shift - xi_center - TWO_PI * n) / s.k
        ln_a, ln_b = ln_c - w, ln_c + w
        a, b = max(ln_a, lo_ln), min(ln_b, hi_ln)
        if a < b:
            out.append((a, b, ln_a >= lo_ln and ln_b <= hi_ln))
    return out


def _certify_crossing(
    src: Rectangle,
    dst: Rectangle,
    config: ModelConfig,
    n_fibers: int,
    n_samples: int,
    corner_tol: float,
) -> CrossingCertificate:
    """Track fiber images through the landing window: certify either a full
    monotone passage through dst on every fiber, or a clean separation."""
    n_full, n_sep = 0, 0
    undershoot = math.inf
    overshoot = math.inf
    separation = math.inf
    xs = np.linspace(src.x_lo, src.x_hi, n_fibers)
    for x in xs:
        passages = _fiber_passages(
            float(x), (src.y_lo, src.y_hi), dst.center, 0.5 * dst.width, config
        )
        if not passages:
            n_sep += 1
            continue
        fiber_verdict = None  # "full" | "sep"
        fiber_sep = math.inf
        for ln_a, ln_b, _interior in passages:
            lny = np.linspace(ln_a, ln_b, n_samples)
            ys = np.exp(lny)
            xv = np.full_like(ys, float(x))
            x2, y2, _, alive = zeta_arrays(xv, ys, config)
            if not np.all(alive):
                raise CrossingUncertain(
                    f"fiber x={x:.6f}: passage leaves the modelled chart"
                )
            y_min, y_max_img = float(np.min(y2)), float(np.max(y2))
            if y_max_img < dst.y_lo - corner_tol:
                fiber_sep = min(fiber_sep, dst.y_lo - y_max_img)
                continue
            if y_min > dst.y_hi + corner_tol:
                fiber_sep = min(fiber_sep, y_min - dst.y_hi)
                continue
            mono = bool(np.all(np.diff(y2) > 0.0) or np.all(np.diff(y2) < 0.0))
            clears = (y_min < dst.y_lo - corner_tol) and (
                y_max_img > dst.y_hi + corner_tol
            )
            in_band = (y2 >= dst.y_lo - corner_tol) & (y2 <= dst.y_hi + corner_tol)
            wrapped = np.mod(x2, TWO_PI)
            window_ok = bool(
                np.all([(dst.in_window(float(xx))) for xx in wrapped[in_band]])
            )
            if mono and clears and window_ok:
                fiber_verdict = "full"
                undershoot = min(undershoot, dst.y_lo - y_min)
                overshoot = min(overshoot, y_max_img - dst.y_hi)
            else:
                raise CrossingUncertain(
                    f"fiber x={x:.6f}: image grazes {dst.label} "
                    f"(mono={mono}, clears={clears}, window_ok={window_ok})"
                )
        if fiber_verdict == "full":
            n_full += 1
        else:
            if fiber_sep < corner_tol:
                raise CrossingUncertain(
                    f"{src.label}->{dst.label}: separation {fiber_sep:.3e} "
                    "below tolerance at a fiber"
                )
            n_sep += 1
            separation = min(separation, fiber_sep)
    if n_full == len(xs):
        return CrossingCertificate(
            source=src.label,
            target=dst.label,
            crosses=True,
            fibers_checked=len(xs),
            undershoot=undershoot,
            overshoot=overshoot,
            separation=0.0,
        )
    if n_sep == len(xs):
        return CrossingCertificate(
            source=src.label,
            target=dst.label,
            crosses=False,
            fibers_checked=len(xs),
            undershoot=math.inf,
            overshoot=math.inf,
            separation=separation,
        )
    raise CrossingUncertain(
        f"{src.label}->{dst.label}: mixed fiber verdicts ({n_full} full, {n_sep} separated)"
    )


def build_horseshoe(
    n_range: Sequence[int],
    tau: float,
    config: ModelConfig,
    safety: float = 0.8,
    n_fibers: int = 7,
    n_samples: int = 1500,
) -> tuple[list[Rectangle], TransitionMatrix]:
    """Markov rectangles at the first connection window plus the certified
    transition matrix.

    Rungs follow the canonical ladder geometry (height ratio e^(-2 pi/K),
    band width e^((Pw2-Pw1)/K)) anchored just below the reachability ceiling
    safety * lam * sin(tau); the anchor phase is chosen so every fiber's
    crossing of Out(w) contains the landing arc in its interior.
    """
    u, s, num = config.unfolding, config.saddles, config.numeric
    if u.lam <= 0.0:
        raise DegenerateUnfolding("build_horseshoe needs lambda > 0")
    if s.k <= 1.0:
        raise ValueError("build_horseshoe needs the disjointness regime K > 1")
    half_gap = 0.5 * (u.pw2 - u.pw1)
    if not (0.0 < tau < half_gap):
        raise ValueError(
            f"tau must lie in (0, {half_gap:.4f}) so rectangles at the two "
            "connection windows stay disjoint"
        )
    indices = sorted(set(int(n) for n in n_range))
    if not indices or indices[0] < 0:
        raise ValueError("n_range must be a non-empty set of indices >= 0")

    ceiling = safety * u.lam * math.sin(tau)
    x_c = u.pv1
    phase = 1.5 * math.pi - 0.5 * tau  # landing arc interior to every fiber span
    t = x_c - u.pw1 - phase
    m_anchor = math.ceil((t - s.k * math.log(ceiling)) / TWO_PI)
    hi0 = math.exp((t - TWO_PI * m_anchor) / s.k)
    rho = math.exp(-TWO_PI / s.k)
    band = math.exp(-(u.pw2 - u.pw1) / s.k)

    rects = []
    for n in indices:
        hi = hi0 * rho**n
        lo = hi * band
        if lo <= 100.0 * num.y_floor:
            raise ValueError(f"rung {n} sits below the resolvable height floor")
        rects.append(
            Rectangle(x_lo=x_c - tau, x_hi=x_c + tau, y_lo=lo, y_hi=hi, label=f"R{n}")
        )

    size = len(rects)
    entries = np.zeros((size, size), dtype=int)
    certs = []
    for i, src in enumerate(rects):
        for j, dst in enumerate(rects):
            cert = _certify_crossing(
                src, dst, config, n_fibers, n_samples, corner_tol=num.tol_root
            )
            entries[i, j] = 1 if cert.crosses else 0
            certs.append(cert)
    matrix = TransitionMatrix(
        labels=tuple(r.label for r in rects), entries=entries, certificates=tuple(certs)
    )
    return rects, matrix


# ---------------------------------------------------------------------------
# Cone-field hyperbolicity
# ---------------------------------------------------------------------------


def _arrival_height(x: float, lny: float, config: ModelConfig) -> float:
    u, s = config.unfolding, config.saddles
    y = math.exp(lny)
    xi = x - s.k * lny - math.log(config.psi_gain) / s.e_w
    return config.psi_gain**s.delta_w * y**s.delta - u.lam * math.sin(xi - u.pw1)


def _band_preimage_segment(
    x: float,
    ln_a: float,
    ln_b: float,
    target: Rectangle,
    config: ModelConfig,
) -> Optional[tuple[float, float]]:
    """Sub-interval of a passage whose arrival heights lie in the target band.

    Arrival height is monotone along a passage, so the preimages of the two
    band edges are located by bisection."""
    v_a = _arrival_height(x, ln_a, config)
    v_b = _arrival_height(x, ln_b, config)
    lo_t, hi_t = target.y_lo, target.y_hi
    v_min, v_max = min(v_a, v_b), max(v_a, v_b)
    if v_max < lo_t or v_min > hi_t:
        return None

    def preimage(level: float) -> float:
        if v_min >= level:
            return ln_a if v_a <= v_b else ln_b
        if v_max <= level:
            return ln_b if v_a <= v_b else ln_a
        lo, hi = ln_a, ln_b
        f_lo = v_a - level
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = _arrival_height(x, mid, config) - level
            if f_lo * fm <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, fm
        return 0.5 * (lo + hi)

    p1 = preimage(max(lo_t, v_min))
    p2 = preimage(min(hi_t, v_max))
    return (min(p1, p2), max(p1, p2))


@dataclass(frozen=True)
class ConeReport:
    valid_input: bool
    checked_points: int
    mu: float
    image_halfangle: float
    passed: bool
    note: str = ""


def cone_hyperbolicity(
    rects: Sequence[Rectangle],
    cone_slope: float,
    grid: int,
    config: ModelConfig,
) -> ConeReport:
    """Certify expansion of the vertical cone along returns that stay in the
    rectangle family.

    At each probed point p with q = zeta(p) inside the family, the cone
    {|dx| <= c |dy|} is pushed forward; mu is the smallest growth seen over
    the first application and over the second application at q.  The second
    application is what collapses to 1 when a fold of the g-graph enters the
    image (the hyperbolicity-loss mechanism), so it is part of the verdict.
    """
    if cone_slope <= 0.0:
        return ConeReport(False, 0, math.nan, math.nan, False, "degenerate cone (c <= 0)")
    if not rects:
        return ConeReport(False, 0, math.nan, math.nan, False, "no rectangles")

    norm = math.hypot(cone_slope, 1.0)
    probes = [
        np.array([0.0, 1.0]),
        np.array([cone_slope / norm, 1.0 / norm]),
        np.array([-cone_slope / norm, 1.0 / norm]),
    ]

    # Uniform grid plus the preimages of each target band inside the fiber
    # passages: the Markov-relevant set is exponentially thin, so a plain
    # grid can miss it entirely.
    points: list[tuple[float, float]] = []
    sub = max(4, grid // 4)
    for rect in rects:
        xs = np.linspace(rect.x_lo, rect.x_hi, grid)
        lnys = np.linspace(math.log(rect.y_lo), math.log(rect.y_hi), grid)
        points.extend((float(x), math.exp(float(l))) for x in xs for l in lnys)
        for target in rects:
            for x in np.linspace(rect.x_lo, rect.x_hi, sub):
                for ln_a, ln_b, _ in _fiber_passages(
                    float(x),
                    (rect.y_lo, rect.y_hi),
                    target.center,
                    0.5 * target.width,
                    config,
                ):
                    seg = _band_preimage_segment(
                        float(x), ln_a, ln_b, target, config
                    )
                    if seg is not None:
                        points.extend(
                            (float(x), math.exp(float(l)))
                            for l in np.linspace(seg[0], seg[1], sub)
                        )

    mu = math.inf
    halfangle = 0.0
    checked = 0
    for x, y in points:
        p = SectionPoint(SectionId.IN_V, a=x, b=y)
        out = zeta(p, config)
        if not out.returned:
            continue
        q = out.next
        if not any(r.contains(q.wrapped, q.b) for r in rects):
            continue
        checked += 1
        j1 = d_zeta(p, config)
        j2 = d_zeta(q, config)
        center = j1 @ probes[0]
        c_dir = center / np.linalg.norm(center)
        for v in probes:
            w = j1 @ v
            g1 = float(np.linalg.norm(w))
            g2 = float(np.linalg.norm(j2 @ w)) / g1
            mu = min(mu, g1, g2)
            cosang = abs(float(np.dot(w / g1, c_dir)))
            halfangle = max(halfangle, math.acos(min(1.0, cosang)))
    if checked == 0:
        return ConeReport(
            True, 0, math.nan, math.nan, False, "no certified returns into the rectangles"
        )
    passed = mu > 1.0 and halfangle < 0.5 * math.pi
    return ConeReport(True, checked, mu, halfangle, passed)


# ---------------------------------------------------------------------------
# Multipulse connections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PulseConnection:
    s: float
    point: SectionPoint
    winding: int
    pulse: int
    residual: float


@dataclass(frozen=True)
class MultipulseScan:
    connections: tuple[PulseConnection, ...]
    tangency_suspected: tuple[float, ...]


def _upper_h_domain(config: ModelConfig, max_winding: int) -> tuple[float, float]:
    """Lifted angular domain of the upper h-curve with winding <= max."""
    u, s = config.unfolding, config.saddles
    y_min = math.exp(-(TWO_PI * (max_winding + 1)) / s.k)
    y_min = max(y_min, 10.0 * config.numeric.y_floor)
    if y_min >= u.lam:
        raise DegenerateUnfolding(
            f"winding budget needs reachable heights below lambda={u.lam:.3e}"
        )
    margin = math.asin(y_min / u.lam)
    lo = u.pv1 + math.pi + margin
    hi = u.pv1 + TWO_PI - margin
    return lo, hi


def find_multipulse(
    config: ModelConfig,
    max_winding: int,
    pulses: int = 1,
    resolution: int = 6000,
) -> MultipulseScan:
    """Subsidiary heteroclinic connections: points of the upper h-curve whose
    pulse-th return lands exactly on the stable manifold y = 0."""
    u, s = config.unfolding, config.saddles
    if u.lam <= 0.0:
        raise DegenerateUnfolding("find_multipulse needs lambda > 0")
    if pulses < 1:
        raise ValueError("pulses must be >= 1")
    lo, hi = _upper_h_domain(config, max_winding)
    svals = np.linspace(lo, hi, resolution)

    def profile(sv: float) -> float:
        p = SectionPoint(SectionId.IN_V, a=sv, b=u.h(sv))
        for _ in range(pulses - 1):
            out = zeta(p, config)
            if not out.returned:
                return math.nan
            p = out.next
        out = zeta(p, config)
        if out.returned or out.status == "Escaped":
            nxt_b = out.next.b if out.returned else math.nan
            return nxt_b
        return math.nan

    vals = np.array([profile(float(sv)) for sv in svals])
    connections = []
    tol = config.numeric.tol_root
    for k in range(len(svals) - 1):
        f0, f1 = vals[k], vals[k + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0 or f0 * f1 < 0.0:
            s_lo, s_hi, v_lo = float(svals[k]), float(svals[k + 1]), float(f0)
            for _ in range(90):
                s_mid = 0.5 * (s_lo + s_hi)
                v_mid = profile(s_mid)
                if not np.isfinite(v_mid):
                    break
                if v_lo * v_mid <= 0.0:
                    s_hi = s_mid
                else:
                    s_lo, v_lo = s_mid, v_mid
                if abs(s_hi - s_lo) < 1e-15 * (1.0 + abs(s_hi)):
                    break
            s_root = 0.5 * (s_lo + s_hi)
            h_root = u.h(s_root)
            wind = int(math.floor((-s.k * math.log(h_root)) / TWO_PI))
            if wind <= max_winding:
                res = profile(s_root)
                connections.append(
                    PulseConnection(
                        s=s_root,
                        point=SectionPoint(SectionId.IN_V, a=s_root, b=h_root),
                        winding=wind,
                        pulse=pulses,
                        residual=abs(res) if np.isfinite(res) else math.inf,
                    )
                )
    suspicions = []
    absvals = np.abs(vals)
    for k in range(1, len(svals) - 1):
        if not (
            np.isfinite(vals[k - 1]) and np.isfinite(vals[k]) and np.isfinite(vals[k + 1])
        ):
            continue
        if absvals[k] <= tol and absvals[k] <= absvals[k - 1] and absvals[k] <= absvals[k + 1]:
            if vals[k - 1] * vals[k + 1] > 0.0:
                suspicions.append(float(svals[k]))
    return MultipulseScan(
        connections=tuple(connections), tangency_suspected=tuple(suspicions)
    )


# ---------------------------------------------------------------------------
# Itinerary realization (switching)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealizedItinerary:
    word: tuple[tuple[int, int], ...]
    point: SectionPoint
    outcomes: tuple[ReturnOutcome, ...]
    matched: int

    @property
    def exact(self) -> bool:
        return self.matched == len(self.word)

    def transcript(self) -> list[str]:
        lines = []
        for k, (target, out) in enumerate(zip(self.word, self.outcomes), start=1):
            ok = "ok" if out.returned and out.symbol == target else "MISMATCH"
            lines.append(
                f"step {k}: want {format_symbol(target)} got {format_outcome(out)} {ok}"
            )
        lines.append(f"MATCH {self.matched}/{len(self.word)}")
        return lines


def format_symbol(sym: tuple[int, int]) -> str:
    return f"{sym[0]}{'+' if sym[1] > 0 else '-'}"


def format_outcome(out: ReturnOutcome) -> str:
    return format_symbol(out.symbol) if out.returned else out.status


def parse_word(text: str) -> list[tuple[int, int]]:
    """Parse itinerary words like '1+,1+,2+,1-'."""
    word = []
    for token in text.split(","):
        token = token.strip()
        if len(token) != 2 or token[0] not in "12" or token[1] not in "+-":
            raise ValueError(f"bad itinerary token {token!r}")
        word.append((int(token[0]), 1 if token[1] == "+" else -1))
    if not word:
        raise ValueError("empty itinerary word")
    return word


def _itinerary_score(
    outcomes: list[ReturnOutcome],
    word: Sequence[tuple[int, int]],
    upto: int,
    config: ModelConfig,
) -> float:
    """Margin of a candidate orbit against the first `upto` targets; negative
    when it mismatches.  The margin mixes the distance of each Out(w)
    crossing to the symbol-arc boundaries with the normalized arrival height
    (distance to the sheet-flip locus)."""
    u = config.unfolding
    mid12 = wrap(0.5 * (u.pw1 + u.pw2))
    mid21 = wrap(mid12 + math.pi)
    if len(outcomes) < upto:
        return -1.0
    score = math.inf
    for k in range(upto):
        out = outcomes[k]
        if not out.returned or out.symbol != word[k]:
            return -1.0
        if k + 1 < len(word):
            want_sheet = word[k + 1][1]
            arrival = out.next.b
            if arrival == 0.0 or (1 if arrival > 0 else -1) != want_sheet:
                return -1.0
            score = min(score, abs(arrival) / u.lam)
        xi = out.out_point.wrapped
        score = min(score, circdist(xi, mid12), circdist(xi, mid21))
    return score


@dataclass(frozen=True)
class _Run:
    lo: float
    hi: float
    best_y: float
    best_score: float
    spread: float  # ratio of arrival heights over the run (next-step reach)


def _good_runs(
    lo: float,
    hi: float,
    k: int,
    word: Sequence[tuple[int, int]],
    x0: float,
    sheet0: int,
    config: ModelConfig,
    samples: int,
    max_rounds: int,
) -> list[_Run]:
    """Maximal sample runs realizing the first k symbols, ordered so that
    runs whose arrival heights spread over at least one full winding of the
    next crossing come first (they keep every continuation reachable)."""
    s = config.saddles
    full_turn = math.exp(TWO_PI / s.k)
    n = samples
    for _ in range(max_rounds):
        ys = np.exp(np.linspace(math.log(lo), math.log(hi), n))
        scores = np.empty(n)
        arrivals = np.full(n, math.nan)
        for i, y in enumerate(ys):
            p = SectionPoint(SectionId.IN_V, a=x0, b=sheet0 * float(y))
            outs = iterate(p, config, k)
            scores[i] = _itinerary_score(outs, word, k, config)
            if scores[i] > 0.0 and len(outs) >= k and outs[k - 1].returned:
                arrivals[i] = abs(outs[k - 1].next.b)
        runs: list[_Run] = []
        i = 0
        while i < n:
            if scores[i] <= 0.0:
                i += 1
                continue
            j = i
            while j + 1 < n and scores[j + 1] > 0.0:
                j += 1
            seg = slice(i, j + 1)
            best_rel = int(np.argmax(scores[seg]))
            arr = arrivals[seg]
            arr = arr[np.isfinite(arr)]
            spread = float(arr.max() / arr.min()) if arr.size and arr.min() > 0 else 1.0
            runs.append(
                _Run(
                    lo=float(ys[max(i - 1, 0)]),
                    hi=float(ys[min(j + 1, n - 1)]),
                    best_y=float(ys[i + best_rel]),
                    best_score=float(scores[seg][best_rel]),
                    spread=spread,
                )
            )
            i = j + 1
        if runs:
            if k < len(word):
                runs.sort(key=lambda r: (-min(r.spread, 1.2 * full_turn), -r.best_score))
            else:
                runs.sort(key=lambda r: -r.best_score)
            return runs
        n *= 2
    return []


def realize_itinerary(
    word: Sequence[tuple[int, int]],
    config: ModelConfig,
    samples: int = 500,
    max_rounds: int = 6,
    node_budget: int = 160,
) -> RealizedItinerary:
    """Find a point whose itinerary reproduces the requested word exactly.

    Depth-first refinement on the height interval of the fiber through the
    first connection point: at each stage the interval is sampled, maximal
    runs realizing one more symbol are extracted, and the search descends
    into runs ordered by the winding spread of their arrival heights
    (backtracking when a run starves the continuation).
    """
    word = [(int(a), int(b)) for a, b in word]
    if not word:
        raise RealizationFailed("empty itinerary word", 0)
    for sym, sheet in word:
        if sym not in (1, 2) or sheet not in (1, -1):
            raise RealizationFailed(f"bad symbol {(sym, sheet)}", 0)
    u, num = config.unfolding, config.numeric
    if u.lam <= 0.0:
        raise DegenerateUnfolding("realize_itinerary needs lambda > 0")
    x0 = u.pv1
    sheet0 = word[0][1]
    lo = max(1e-7, 100.0 * num.y_floor)
    hi = 0.45 * num.y_max
    if lo >= hi:
        raise RealizationFailed("no realizable heights above y_floor", 0)

    m = len(word)
    deepest = 0
    visited = 0

    def search(k: int, lo_k: float, hi_k: float) -> Optional[float]:
        nonlocal deepest, visited
        if visited >= node_budget:
            return None
        visited += 1
        if hi_k - lo_k < num.y_floor:
            return None
        runs = _good_runs(
            lo_k, hi_k, k, word, x0, sheet0, config, samples, max_rounds
        )
        if not runs:
            return None
        deepest = max(deepest, k)
        if k == m:
            return runs[0].best_y
        for run in runs:
            res = search(k + 1, run.lo, run.hi)
            if res is not None:
                return res
        return None

    y_found = search(1, lo, hi)
    if y_found is None:
        raise RealizationFailed(
            f"refinement stalled after {deepest} symbols", deepest
        )
    point = SectionPoint(SectionId.IN_V, a=x0, b=sheet0 * y_found)
    outcomes = iterate(point, config, m)
    matched = 0
    for target, out in zip(word, outcomes):
        if out.returned and out.symbol == target:
            matched += 1
        else:
            break
    return RealizedItinerary(
        word=tuple(word), point=point, outcomes=tuple(outcomes), matched=matched
    )


# ---------------------------------------------------------------------------
# Monte-Carlo escape experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurvivalCurve:
    fractions: tuple[float, ...]  # index j = 0..horizon
    horizon: int
    n_samples: int
    seed: int
    decay_rate: float
    rate_ci: tuple[float, float]

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.fractions, self.fractions[1:]))

    @property
    def strictly_decreasing_while_positive(self) -> bool:
        prev = self.fractions[0]
        for f in self.fractions[1:]:
            if prev == 0.0:
                if f != 0.0:
                    return False
            elif not (f < prev):
                return False
            prev = f
        return True


def _fit_geometric(fractions: Sequence[float]) -> tuple[float, tuple[float, float]]:
    """Least-squares geometric-decay fit of the positive part of the curve."""
    js, logs = [], []
    for j, f in enumerate(fractions):
        if j >= 1 and f > 0.0:
            js.append(float(j))
            logs.append(math.log(f))
    if len(js) < 3:
        return math.nan, (math.nan, math.nan)
    x = np.array(js)
    y = np.array(logs)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    dof = max(len(x) - 2, 1)
    se = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    rate = math.exp(slope)
    ci = (math.exp(slope - 1.96 * se), math.exp(slope + 1.96 * se))
    return rate, ci


def escape_experiment(
    rects: Rectangle | Sequence[Rectangle],
    n_samples: int,
    horizon: int,
    config: ModelConfig,
    tube_halfwidth: float = 1.2,
    tube_height: Optional[float] = None,
    initial_points: Optional[Sequence[SectionPoint]] = None,
) -> SurvivalCurve:
    """Survival fractions under iteration within a tubular neighbourhood of
    the cycle.

    A point dies when it hits the stable manifold, escapes above y_max, its
    Out(w) crossing leaves the angular tube around the two connection
    points, or its arrival height exceeds the tube height.  Draws are
    uniform over the rectangle union, seeded from the configuration.
    """
    if isinstance(rects, Rectangle):
        rects = [rects]
    rects = list(rects)
    if not rects:
        raise ValueError("escape_experiment needs at least one rectangle")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    u, num = config.unfolding, config.numeric
    h_cap = num.y_max if tube_height is None else tube_height
    rng = np.random.default_rng(num.seed)
    if initial_points is not None:
        xs = np.array([p.a for p in initial_points], dtype=float)
        ys = np.array([p.b for p in initial_points], dtype=float)
        n_samples = len(xs)
    else:
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        areas = np.array([(r.x_hi - r.x_lo) * (r.y_hi - r.y_lo) for r in rects])
        choice = rng.choice(len(rects), size=n_samples, p=areas / areas.sum())
        xs = np.empty(n_samples)
        ys = np.empty(n_samples)
        for i, r in enumerate(rects):
            mask = choice == i
            cnt = int(mask.sum())
            xs[mask] = rng.uniform(r.x_lo, r.x_hi, size=cnt)
            ys[mask] = rng.uniform(r.y_lo, r.y_hi, size=cnt)

    alive = np.ones(n_samples, dtype=bool)
    fractions = [1.0]
    for _ in range(horizon):
        x2, y2, xi, step_alive = zeta_arrays(xs, ys, config)
        with np.errstate(invalid="ignore"):
            d1 = np.abs((xi - u.pw1 + math.pi) % TWO_PI - math.pi)
            d2 = np.abs((xi - u.pw2 + math.pi) % TWO_PI - math.pi)
            in_tube = (np.minimum(d1, d2) <= tube_halfwidth) & (np.abs(y2) <= h_cap)
        alive &= step_alive & np.where(np.isfinite(xi), in_tube, False)
        xs = np.where(alive, x2, np.nan)
        ys = np.where(alive, y2, np.nan)
        fractions.append(float(alive.sum()) / n_samples)
    rate, ci = _fit_geometric(fractions)
    return SurvivalCurve(
        fractions=tuple(fractions),
        horizon=horizon,
        n_samples=n_samples,
        seed=num.seed,
        decay_rate=rate,
        rate_ci=ci,
    )
