"""Acceptance suite: every criterion at its stated tolerance, one pass/fail
line per criterion (run with -s to see them).

Reference scenario throughout: C_v = 2, E_v = 1, C_w = 2, E_w = 1 (K = 3,
delta = 4), Pw1 = 0, Pw2 = pi, angular offset pi/3, sine-model splitting.
"""

import itertools
import math
import time

import numpy as np

from conftest import central_diff

from bykovlab.cli import main as cli_main
from bykovlab.globalmaps import d_psi_wv, psi_wv
from bykovlab.horseshoe import (
    CurveSample,
    build_horseshoe,
    cone_hyperbolicity,
    crossing_count,
    escape_experiment,
    interval_sequence,
    realize_itinerary,
    winding_offset,
)
from bykovlab.localmaps import d_phi_v, d_phi_w, phi_v, phi_w
from bykovlab.model import SectionId, SectionPoint
from bykovlab.returnmap import d_eta, d_zeta, eta, eta_composed, iterate, zeta
from bykovlab.tangency import (
    find_periodic_sinks,
    find_tangencies,
    horseshoe_tangency_scan,
    verify_sink_contraction,
)

TWO_PI = 2.0 * math.pi


def report(num, ok, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


def P(a, b):
    return SectionPoint(SectionId.IN_V, a=a, b=b)


def test_criterion_1_closed_form_composition(ref_config):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    sup = 0.0
    for _ in range(10000):
        x = float(rng.uniform(0.0, TWO_PI))
        y = float(rng.uniform(1e-6, 0.999))
        if rng.uniform() < 0.5:
            y = -y
        a = eta(P(x, y), ref_config)
        b = eta_composed(P(x, y), ref_config)
        sup = max(sup, abs(a.a - b.a), abs(a.b - b.b))
    elapsed = time.perf_counter() - t0
    report(
        1,
        sup < 1e-12 and elapsed < 1.0,
        f"sup chart distance {sup:.3e} over 1e4 points in {elapsed:.2f}s",
    )


def test_criterion_2_proplines(ref_config):
    s, u = ref_config.saddles, ref_config.unfolding
    # (i) horizontal segments map to constant height y0^delta, exactly.
    rng = np.random.default_rng(3)
    exact_i = True
    for _ in range(100):
        y0 = float(rng.uniform(0.01, 0.95))
        a, b = sorted(rng.uniform(0.0, TWO_PI, 2))
        heights = {eta(P(float(x), y0), ref_config).b for x in np.linspace(a, b, 7)}
        exact_i &= heights == {y0**s.delta}
    # (ii) vertical segment angular span K * d(ln y) = 6 within 1e-9.
    span = eta(P(0.0, math.exp(-3.0)), ref_config).a - eta(
        P(0.0, math.exp(-1.0)), ref_config
    ).a
    ok_ii = abs(span - 6.0) < 1e-9
    # (iii) eta(I0) crosses the g-graph exactly twice; endpoints at 2pi, 3pi.
    iv = interval_sequence(0.0, 3, ref_config)
    m = winding_offset(0.0, ref_config)
    assert m == 1
    curve = CurveSample.from_function(
        lambda yy: eta(P(0.0, float(yy)), ref_config),
        np.geomspace(iv[0].lo, iv[0].hi, 4000),
    )
    rep = crossing_count(curve, u)
    hi_angle = eta(P(0.0, iv[0].hi), ref_config).a
    lo_angle = eta(P(0.0, iv[0].lo), ref_config).a
    ok_iii = (
        rep.count == 2
        and abs(hi_angle - TWO_PI) < 1e-10
        and abs(lo_angle - 3.0 * math.pi) < 1e-10
    )
    # (iv) I0, I1, I2 pairwise disjoint with exact geometric ratios.
    rho = math.exp(-TWO_PI / s.k)
    ok_iv = all(
        b_.hi < a_.lo for a_, b_ in zip(iv, iv[1:])
    ) and all(
        abs(b_.lo / a_.lo - rho) < 1e-12 and abs(b_.hi / a_.hi - rho) < 1e-12
        for a_, b_ in zip(iv, iv[1:])
    )
    report(
        2,
        exact_i and ok_ii and ok_iii and ok_iv,
        f"i exact={exact_i}, ii span err {abs(span - 6.0):.2e}, "
        f"iii count={rep.count}, iv disjoint+ratios={ok_iv}",
    )


def test_criterion_3_jacobians(ref_config):
    s = ref_config.saddles
    rng = np.random.default_rng(9)
    xs = rng.uniform(0.0, TWO_PI, 100)
    ys = rng.uniform(1e-6, 0.9, 100)
    worst = 0.0

    def rel(jac, fd):
        scale = np.abs(jac) + np.abs(fd) + 1e-12
        return float(np.max(np.abs(jac - fd) / scale))

    for x, y in zip(xs, ys):
        x, y = float(x), float(y)
        fd = central_diff(
            lambda a, b: (lambda q: (q.b, q.a))(phi_v(P(a, b), s)), (x, y)
        )
        worst = max(worst, rel(d_phi_v(P(x, y), s), fd))
        fd = central_diff(
            lambda r, p: (lambda q: (q.a, q.b))(
                phi_w(SectionPoint(SectionId.IN_W, p, r), s)
            ),
            (y, x),
        )
        worst = max(worst, rel(d_phi_w(SectionPoint(SectionId.IN_W, x, y), s), fd))
        fd = central_diff(
            lambda a, b: (lambda q: (q.a, q.b))(eta(P(a, b), ref_config)), (x, y)
        )
        worst = max(worst, rel(d_eta(P(x, y), ref_config), fd))
        fd = central_diff(
            lambda a, b: (lambda q: (q.a, q.b))(
                psi_wv(SectionPoint(SectionId.OUT_W, a, b), ref_config.unfolding)
            ),
            (x, y),
        )
        worst = max(
            worst,
            rel(
                d_psi_wv(SectionPoint(SectionId.OUT_W, x, y), ref_config.unfolding), fd
            ),
        )
        fd = central_diff(
            lambda a, b: (lambda o: (o.next.a, o.next.b))(zeta(P(a, b), ref_config)),
            (x, y),
        )
        worst = max(worst, rel(d_zeta(P(x, y), ref_config), fd))
    report(3, worst <= 1e-6, f"worst relative error {worst:.3e} on 100 points")


def test_criterion_4_horseshoe(ref_config):
    t0 = time.perf_counter()
    rects, matrix = build_horseshoe([0, 1], 0.05, ref_config)
    cone = cone_hyperbolicity(rects, 1.0, 50, ref_config)
    elapsed = time.perf_counter() - t0
    ok = (
        matrix.entries.shape == (2, 2)
        and bool(np.all(matrix.entries == 1))
        and cone.passed
        and cone.mu > 1.0
        and elapsed < 10.0
    )
    report(
        4,
        ok,
        f"matrix all-ones, cone mu={cone.mu:.1f} on {cone.checked_points} pts, "
        f"{elapsed:.2f}s",
    )


def test_criterion_5_tangency_ladder(ref_config):
    t0 = time.perf_counter()
    records = find_tangencies(1e-1, 1e-5, ref_config)
    elapsed = time.perf_counter() - t0
    ok = len(records) >= 3 and elapsed < 60.0
    for r in records:
        ok &= r.value_residual <= 1e-10 and r.slope_residual <= 1e-10
        ok &= r.bracket[0] < r.lam_star < r.bracket[1]
    target = math.exp(-TWO_PI / 3.0)
    ratio_errs = [
        abs(b.lam_star / a.lam_star / target - 1.0)
        for a, b in zip(records, records[1:])
    ]
    ok &= all(err <= 0.05 for err in ratio_errs)
    report(
        5,
        ok,
        f"{len(records)} records, worst ratio err "
        f"{max(ratio_errs):.2e}, {elapsed:.2f}s",
    )


def test_criterion_6_sinks_near_tangency(ref_config):
    records = find_tangencies(1e-1, 1e-5, ref_config)
    orbits = find_periodic_sinks(records[0], 2, ref_config, n_lambda=6)
    sinks = [o for o in orbits if o.stability == "sink"]
    verified = []
    for o in sinks:
        if max(o.moduli) < 1.0:
            contracted, dist = verify_sink_contraction(o, ref_config, 1e-6, 50)
            if contracted:
                verified.append((o, dist))
    report(
        6,
        len(verified) >= 1,
        f"{len(sinks)} sinks found, {len(verified)} verified by 50-period "
        "contraction from 1e-6 offset",
    )


def test_criterion_7_switching(ref_config):
    exact = 0
    for bits in itertools.product([1, 2], repeat=4):
        res = realize_itinerary([(b, 1) for b in bits], ref_config)
        check = iterate(res.point, ref_config, 4)
        exact += res.exact and [o.symbol for o in check] == [(b, 1) for b in bits]
    word8 = [(1, 1), (1, 1), (2, 1), (1, 1), (1, -1), (2, -1), (1, -1), (2, -1)]
    res8 = realize_itinerary(word8, ref_config)
    check8 = iterate(res8.point, ref_config, 8)
    ok8 = res8.exact and [o.symbol for o in check8] == word8
    report(7, exact == 16 and ok8, f"{exact}/16 length-4 words, mixed length-8 {ok8}")


def test_criterion_8_escape(ref_config):
    t0 = time.perf_counter()
    rects, _ = build_horseshoe([0, 1], 0.05, ref_config)
    curve = escape_experiment(rects, 10000, 12, ref_config)
    elapsed = time.perf_counter() - t0
    ok = (
        curve.monotone
        and curve.strictly_decreasing_while_positive
        and curve.decay_rate < 1.0
        and curve.rate_ci[1] < 1.0
        and elapsed < 30.0
    )
    report(
        8,
        ok,
        f"rate {curve.decay_rate:.4f}, CI ({curve.rate_ci[0]:.4f}, "
        f"{curve.rate_ci[1]:.4f}), survivors at 12: {curve.fractions[-1]:.4f}, "
        f"{elapsed:.2f}s",
    )


def test_criterion_9_hyperbolicity_loss(ref_config):
    rects, _ = build_horseshoe([0, 1], 0.05, ref_config)
    result = horseshoe_tangency_scan(rects[0], 1e-3, 1e-4, ref_config)
    records = find_tangencies(1e-1, 1e-5, ref_config)
    inside = result is not None and any(
        r.bracket[0] <= result.lam_c <= r.bracket[1] for r in records
    )
    report(
        9,
        result is not None
        and result.passes_above
        and result.fails_below
        and inside,
        f"lam_c = {result.lam_c:.5e} inside a tangency alignment window",
    )


def test_criterion_10_cli_determinism(ref_config_path, tmp_path):
    commands = [
        ["validate"],
        ["curves", "--samples", "128"],
        ["orbit", "--x", "0.3", "--y", "0.2", "--k", "6"],
        ["horseshoe", "--grid", "20"],
        ["escape", "--samples", "2000", "--horizon", "8"],
        ["tangency", "--lambda-hi", "0.1", "--lambda-lo", "0.001"],
        ["sinks", "--lambda-hi", "0.1", "--lambda-lo", "0.01", "--period-max", "1"],
        ["itinerary", "--word", "1+,1+,2+,1+"],
    ]
    identical = True
    for idx, cmd in enumerate(commands):
        outs = []
        for rep_dir in ("a", "b"):
            out = tmp_path / f"{idx}_{rep_dir}"
            code = cli_main(
                cmd + ["--config", ref_config_path, "--out", str(out)]
            )
            assert code == 0, f"command {cmd[0]} failed"
            outs.append(out)
        for name in sorted(p.name for p in outs[0].iterdir()):
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                identical = False
    report(10, identical, f"{len(commands)} commands replayed byte-identically")
