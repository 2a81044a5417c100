"""Model parameters, section charts, and the symmetry-breaking curves.

The phase space is reduced to four cross-sections around the two saddle-foci
v and w.  Cylinder-wall sections In(v) and Out(w) carry coordinates
(x mod 2*pi, y in [-1, 1]); the disc sections Out(v) and In(w) carry polar
coordinates (r in [0, 1], phi mod 2*pi) plus a sheet sign selecting the top
or bottom disc.  Angles are stored unwrapped so that winding diagnostics
remain meaningful after many turns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ConfigError

TWO_PI = 2.0 * math.pi


def wrap(angle: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    return angle % TWO_PI


def circdist(a: float, b: float) -> float:
    """Shortest angular distance between two angles."""
    d = abs(wrap(a) - wrap(b))
    return min(d, TWO_PI - d)


class SectionId(Enum):
    IN_V = "InV"
    OUT_V = "OutV"
    IN_W = "InW"
    OUT_W = "OutW"

    @property
    def is_cylinder(self) -> bool:
        """Cylinder-wall chart (x, y); discs use (phi, r)."""
        return self in (SectionId.IN_V, SectionId.OUT_W)


@dataclass(frozen=True)
class SectionPoint:
    """A point on one of the four cross-sections.

    ``a`` is the angular chart coordinate, stored unwrapped; ``b`` is the
    height y on cylinder walls (signed) or the radius r on discs.  ``sheet``
    distinguishes the two connection branches: on cylinder walls it matches
    sign(b) for b != 0, on discs it selects the top (+1) or bottom (-1) disc.
    """

    section: SectionId
    a: float
    b: float
    sheet: int = 1

    @property
    def wrapped(self) -> float:
        return wrap(self.a)

    @property
    def winding(self) -> int:
        return int(math.floor(self.a / TWO_PI))

    def in_chart(self) -> bool:
        if self.section.is_cylinder:
            return abs(self.b) <= 1.0
        return 0.0 <= self.b <= 1.0


@dataclass(frozen=True)
class SaddleParameters:
    """Eigenvalue data of the two saddle-foci (contraction/expansion rates)."""

    c_v: float
    e_v: float
    c_w: float
    e_w: float

    @property
    def delta_v(self) -> float:
        return self.c_v / self.e_v

    @property
    def delta_w(self) -> float:
        return self.c_w / self.e_w

    @property
    def delta(self) -> float:
        return self.delta_v * self.delta_w

    @property
    def k(self) -> float:
        return (self.c_v + self.e_w) / (self.e_v * self.e_w)


@dataclass(frozen=True)
class UnfoldingModel:
    """Symmetry-breaking amplitude and the geometry of the split manifolds.

    The intersection of W^s(v) with Out(w) is modelled as the sine graph
    y = g(x) = lam * sin(x - pw1), which pins pw2 = pw1 + pi.  The transition
    Out(w) -> In(v) is a rotation by ``delta`` composed with the shear
    y -> y - g(x), which forces the second curve h(x) = -g(x - delta).
    """

    lam: float
    pw1: float = 0.0
    delta: float = math.pi / 3.0

    @property
    def pw2(self) -> float:
        return self.pw1 + math.pi

    @property
    def pv1(self) -> float:
        return wrap(self.pw1 + self.delta)

    @property
    def pv2(self) -> float:
        return wrap(self.pw2 + self.delta)

    @property
    def x_max_g(self) -> float:
        """Angle of the maximum of g on Out(w)."""
        return wrap(self.pw1 + 0.5 * math.pi)

    @property
    def x_max_h(self) -> float:
        """Angle of the maximum of h on In(v)."""
        return wrap(self.pv1 + 1.5 * math.pi)

    def g(self, x: float) -> float:
        return self.lam * math.sin(x - self.pw1)

    def g_prime(self, x: float) -> float:
        return self.lam * math.cos(x - self.pw1)

    def h(self, x: float) -> float:
        return -self.g(x - self.delta)

    def h_prime(self, x: float) -> float:
        return -self.g_prime(x - self.delta)


@dataclass(frozen=True)
class NumericSettings:
    tol_root: float = 1e-10
    tol_newton: float = 1e-12
    max_iter: int = 64
    y_floor: float = 1e-14
    y_max: float = 1.0
    seed: int = 12345


@dataclass(frozen=True)
class ModelConfig:
    saddles: SaddleParameters
    unfolding: UnfoldingModel
    numeric: NumericSettings = field(default_factory=NumericSettings)
    psi_gain: float = 1.0

    def with_lambda(self, lam: float) -> "ModelConfig":
        return replace(self, unfolding=replace(self.unfolding, lam=lam))

    def with_seed(self, seed: int) -> "ModelConfig":
        return replace(self, numeric=replace(self.numeric, seed=seed))

    def resolved_items(self) -> list[tuple[str, str]]:
        """Canonical key/value listing, used for provenance headers."""
        n = self.numeric
        return [
            ("C_v", fmt(self.saddles.c_v)),
            ("E_v", fmt(self.saddles.e_v)),
            ("C_w", fmt(self.saddles.c_w)),
            ("E_w", fmt(self.saddles.e_w)),
            ("lambda", fmt(self.unfolding.lam)),
            ("Pw1", fmt(self.unfolding.pw1)),
            ("delta_offset", fmt(self.unfolding.delta)),
            ("y_floor", fmt(n.y_floor)),
            ("y_max", fmt(n.y_max)),
            ("seed", str(n.seed)),
            ("tol_root", fmt(n.tol_root)),
            ("tol_newton", fmt(n.tol_newton)),
            ("max_iter", str(n.max_iter)),
            ("psi_vw_gain", fmt(self.psi_gain)),
        ]


def fmt(x: float) -> str:
    """17 significant digits: round-trip exact for doubles."""
    return format(float(x), ".17g")


_MODEL_KEYS = ("C_v", "E_v", "C_w", "E_w", "lambda", "Pw1", "delta_offset")
_FLOAT_KEYS = _MODEL_KEYS + ("y_floor", "y_max", "tol_root", "tol_newton", "psi_vw_gain")
_INT_KEYS = ("seed", "max_iter")
_ALL_KEYS = _FLOAT_KEYS + _INT_KEYS


def parse_config(text: str) -> ModelConfig:
    """Parse the flat key = value configuration format.

    '#' starts a comment, blank lines are ignored, decimal literals are
    parsed bit-exactly by float().  Unknown keys are a hard error.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val

    missing = [k for k in _MODEL_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    def as_float(key: str, default: float | None = None) -> float:
        if key not in values:
            return default  # type: ignore[return-value]
        try:
            return float(values[key])
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: bad float literal {values[key]!r}") from exc

    def as_int(key: str, default: int) -> int:
        if key not in values:
            return default
        try:
            return int(values[key])
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: bad integer literal {values[key]!r}") from exc

    saddles = SaddleParameters(
        c_v=as_float("C_v"), e_v=as_float("E_v"), c_w=as_float("C_w"), e_w=as_float("E_w")
    )
    unfolding = UnfoldingModel(
        lam=as_float("lambda"), pw1=as_float("Pw1"), delta=as_float("delta_offset")
    )
    defaults = NumericSettings()
    numeric = NumericSettings(
        tol_root=as_float("tol_root", defaults.tol_root),
        tol_newton=as_float("tol_newton", defaults.tol_newton),
        max_iter=as_int("max_iter", defaults.max_iter),
        y_floor=as_float("y_floor", defaults.y_floor),
        y_max=as_float("y_max", defaults.y_max),
        seed=as_int("seed", defaults.seed),
    )
    return ModelConfig(
        saddles=saddles,
        unfolding=unfolding,
        numeric=numeric,
        psi_gain=as_float("psi_vw_gain", 1.0),
    )


def load_config(path: str) -> ModelConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]
    stability_criterion: bool
    disjoint_intervals_regime: bool

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def validate(config: ModelConfig) -> ValidationReport:
    """Check every standing hypothesis; report failures, never correct them."""
    s, u, n = config.saddles, config.unfolding, config.numeric
    checks: list[Check] = []

    def add(name: str, ok: bool, detail: str) -> None:
        checks.append(Check(name, bool(ok), detail))

    add("C_v > E_v > 0", s.c_v > s.e_v > 0.0, f"C_v={fmt(s.c_v)}, E_v={fmt(s.e_v)}")
    add("C_w > E_w > 0", s.c_w > s.e_w > 0.0, f"C_w={fmt(s.c_w)}, E_w={fmt(s.e_w)}")
    saddle_ok = s.c_v > s.e_v > 0.0 and s.c_w > s.e_w > 0.0
    if saddle_ok:
        add("delta_v > 1", s.delta_v > 1.0, f"delta_v={fmt(s.delta_v)}")
        add("delta_w > 1", s.delta_w > 1.0, f"delta_w={fmt(s.delta_w)}")
        add("delta > 1", s.delta > 1.0, f"delta={fmt(s.delta)}")
        add("K > 0", s.k > 0.0, f"K={fmt(s.k)}")
    add("lambda >= 0", u.lam >= 0.0, f"lambda={fmt(u.lam)}")
    add(
        "0 <= Pw1 < Pw2 < 2*pi",
        0.0 <= u.pw1 < u.pw2 < TWO_PI,
        f"Pw1={fmt(u.pw1)}, Pw2={fmt(u.pw2)}",
    )
    # Sign conventions at the connection angles, probed by finite differences.
    step = 1e-6
    gp1 = (u.g(u.pw1 + step) - u.g(u.pw1 - step)) / (2 * step)
    gp2 = (u.g(u.pw2 + step) - u.g(u.pw2 - step)) / (2 * step)
    hp1 = (u.h(u.pw1 + u.delta + step) - u.h(u.pw1 + u.delta - step)) / (2 * step)
    hp2 = (u.h(u.pw2 + u.delta + step) - u.h(u.pw2 + u.delta - step)) / (2 * step)
    if u.lam > 0.0:
        add("g'(Pw1) > 0", gp1 > 0.0, f"g'(Pw1)={fmt(gp1)}")
        add("g'(Pw2) < 0", gp2 < 0.0, f"g'(Pw2)={fmt(gp2)}")
        add("h'(Pv1) < 0", hp1 < 0.0, f"h'(Pv1)={fmt(hp1)}")
        add("h'(Pv2) > 0", hp2 > 0.0, f"h'(Pv2)={fmt(hp2)}")
    add(
        "tolerances > 0",
        n.tol_root > 0.0 and n.tol_newton > 0.0 and n.max_iter > 0,
        f"tol_root={fmt(n.tol_root)}, tol_newton={fmt(n.tol_newton)}, max_iter={n.max_iter}",
    )
    add(
        "0 < y_floor < y_max <= 1",
        0.0 < n.y_floor < n.y_max <= 1.0,
        f"y_floor={fmt(n.y_floor)}, y_max={fmt(n.y_max)}",
    )
    add("psi_vw_gain > 0", config.psi_gain > 0.0, f"gain={fmt(config.psi_gain)}")

    stability = saddle_ok and (s.c_v * s.c_w > s.e_v * s.e_w)
    disjoint = saddle_ok and (s.k > 1.0)
    return ValidationReport(
        checks=tuple(checks),
        stability_criterion=bool(stability),
        disjoint_intervals_regime=bool(disjoint),
    )


def g_curve(model: UnfoldingModel, x: float) -> float:
    """Height of W^s_loc(v) on Out(w) at angle x."""
    return model.g(x)


def h_curve(model: UnfoldingModel, x: float) -> float:
    """Height of W^u_loc(w) on In(v) at angle x."""
    return model.h(x)
