import math

import numpy as np
import pytest

from critset.errors import InvalidParameter, NotApplicable, NotPositive, RangeUnattainable
from critset.grid import Grid, GridFunction
from critset.manifold import (LineFamily, asymptotic_arguments, chart_point,
                              comparison_identity, comparison_identity_residual, decompose,
                              find_lambda, is_Ck_nonempty, lambda_scan)
from critset.nonlinearity import custom, exponential, linear, quadratic, softplus
from critset.pruefer import free_argument, integrate_argument
from critset.variational import is_critical


def sine(*c):
    return GridFunction.sine(c, Grid())


def test_decompose_examples(sin_t):
    h, lam = decompose(sine(3.0), sin_t)
    assert lam == pytest.approx(3.0, abs=1e-14) and np.max(np.abs(h.values)) < 1e-13
    h, lam = decompose(sine(0.0, 1.0), sin_t)
    assert abs(lam) < 1e-15 and np.allclose(h.values, sine(0.0, 1.0).values, atol=1e-15)


def test_decompose_round_trip():
    u, p = sine(2.0, 0.0, 1.0), sine(1.0, 0.2)
    h, lam = decompose(u, p)
    assert abs(h.inner(p)) <= 1e-10 * h.norm() * p.norm()
    h2, lam2 = decompose(h.combine(1.0, p, lam), p)
    assert abs(lam2 - lam) <= 1e-12 and np.max(np.abs(h2.values - h.values)) <= 1e-12


def test_decompose_requires_positive_direction():
    with pytest.raises(NotPositive):
        decompose(sine(1.0), sine(0.0, 1.0))


def test_line_family_projects(sin_t):
    line = LineFamily.build(sine(0.7, 1.0), sin_t)
    assert abs(line.h.inner(sin_t)) < 1e-14


def _scan_root(f, h, theta, lo, hi, step):
    """Dense scan bracket followed by plain bisection; no derivative information."""
    lams = np.arange(lo, hi + step / 2, step)
    W = lambda_scan(f, h, None, lams)
    d = np.sign(W - theta)
    i = np.nonzero(d[:-1] != d[1:])[0]
    assert i.size == 1
    a, b = lams[i[0]], lams[i[0] + 1]
    wa = W[i[0]] - theta
    p = sine(1.0)
    while b - a > 1e-9:
        m = 0.5 * (a + b)
        wm = integrate_argument(f, h.combine(1.0, p, m)).W_pi - theta
        if np.sign(wm) == np.sign(wa):
            a, wa = m, wm
        else:
            b = m
    return 0.5 * (a + b)


def test_find_lambda_pi(convex, zero):
    pt = find_lambda(convex, zero, None, math.pi)
    assert pt.residual <= 1e-8 and pt.lambda_star > 0
    assert pt.transversality < 0
    # at lambda = 0, W(pi) = free argument of 4.5, between 2 pi and 3 pi
    assert 2 * math.pi < free_argument(4.5) < 3 * math.pi
    assert pt.lambda_star == pytest.approx(_scan_root(convex, zero, math.pi, 0.0, 5.0, 0.01), abs=1e-7)


def test_chart_points_ordered(convex, zero):
    pts = [chart_point(convex, zero, None, k) for k in (1, 2, 3)]
    assert all(p.residual <= 1e-8 and p.k == k for p, k in zip(pts, (1, 2, 3)))
    assert pts[0].lambda_star > pts[1].lambda_star > pts[2].lambda_star
    for p in pts:
        assert is_critical(integrate_argument(convex, p.u)).k == p.k


def test_chart_point_k4_unattainable(convex, zero):
    with pytest.raises(RangeUnattainable):
        chart_point(convex, zero, None, 4)
    with pytest.raises(RangeUnattainable):
        find_lambda(convex, zero, None, 4 * math.pi)


def test_chart_point_off_axis(convex):
    pt = chart_point(convex, sine(0.0, 0.5), None, 1)
    assert pt.residual <= 1e-8
    assert is_critical(integrate_argument(convex, pt.u)).k == 1
    # chart points for k = 2 are critical through the argument route as well
    pt2 = chart_point(convex, GridFunction.zero(), None, 2)
    assert is_critical(integrate_argument(convex, pt2.u), 1e-8).k == 2


def test_concave_orientation(zero):
    f = softplus(3.0, -12.0)
    pts = [chart_point(f, zero, None, k) for k in (1, 2, 3)]
    assert pts[0].lambda_star < pts[1].lambda_star < pts[2].lambda_star
    assert all(p.transversality > 0 for p in pts)


def test_not_applicable(zero):
    with pytest.raises(NotApplicable):
        find_lambda(linear(-1.0), zero, None, math.pi)
    with pytest.raises(NotApplicable):
        is_Ck_nonempty(linear(-1.0), 1)
    f = custom(np.exp, np.exp, np.exp)
    with pytest.raises(NotApplicable):
        is_Ck_nonempty(f, 1)
    with pytest.raises(InvalidParameter):
        find_lambda(softplus(-12.0, 3.0), zero, None, -1.0)


def test_is_Ck_nonempty():
    f = softplus(-12.0, 3.0)
    assert [is_Ck_nonempty(f, k) for k in (1, 2, 3, 4)] == [True, True, True, False]
    assert not any(is_Ck_nonempty(exponential(), k) for k in range(1, 20))
    assert all(is_Ck_nonempty(quadratic(1.0), k) for k in range(1, 20))


def test_asymptotic_arguments(convex):
    lo, hi = asymptotic_arguments(convex)
    assert hi == free_argument(-3.0)
    assert 3 * math.pi < lo < 4 * math.pi
    assert asymptotic_arguments(exponential()) == (math.atan(math.pi), 0.0)
    assert asymptotic_arguments(quadratic(1.0)) == (math.inf, 0.0)
    assert asymptotic_arguments(softplus(3.0, -12.0)) == (hi, lo)


def test_crossing_count_matches_emptiness(convex):
    lo, hi = asymptotic_arguments(convex)
    a, b = sorted((lo, hi))
    crossings = [k for k in range(1, 10) if a < k * math.pi < b]
    assert crossings == [k for k in range(1, 10) if is_Ck_nonempty(convex, k)] == [1, 2, 3]


def test_comparison_identity_matched_linear(zero):
    for c in (-2.0, 0.5, 3.0):
        r = comparison_identity(linear(c), zero, None, 1.7, -c)
        assert r.residual == 0.0 and np.all(r.U == 0.0)


def test_comparison_identity_softplus(convex, zero):
    low = comparison_identity(convex, zero, None, 2.0, -3.0)
    assert low.residual <= 1e-6 and low.U_pi < 0
    high = comparison_identity(convex, zero, None, 2.0, 12.0)
    assert high.residual <= 1e-6 and high.U_pi > 0
    assert comparison_identity_residual(convex, zero, None, -50.0, 12.0) <= 1e-6


def test_comparison_identity_nodes_input(convex, grid):
    # node-valued h goes through Hermite refinement
    h = GridFunction.from_nodes(0.3 * np.sin(2 * grid.nodes), grid)
    assert comparison_identity_residual(convex, h, None, 1.0, 12.0) <= 1e-6


def test_lambda_scan_threads_identical(convex, zero):
    lams = np.linspace(-10, 10, 21)
    assert np.array_equal(lambda_scan(convex, zero, None, lams, threads=1),
                          lambda_scan(convex, zero, None, lams, threads=4))


def test_chart_continuity_along_segment(convex):
    lams = []
    for s in np.arange(0.0, 2.0 + 1e-9, 0.05):
        pt = chart_point(convex, sine(0.0, s), None, 1)
        assert pt.residual <= 1e-8 and pt.transversality != 0
        lams.append(pt.lambda_star)
    steps = np.abs(np.diff(lams))
    # Lipschitz-type bound: no jump exceeds a few times the typical step
    assert steps.max() <= 5 * max(np.median(steps), 1e-3)


def test_asymptotic_approach_rate(convex, sin_t):
    # DOP853 on the angle equation (rtol 1e-12) gives W(pi) = 0.5261826975448527
    # at lambda = 1e3 and 10.61271919583282 at lambda = -1e3
    lo, hi = asymptotic_arguments(convex)
    w_p3 = integrate_argument(convex, sin_t * 1e3).W_pi
    w_m3 = integrate_argument(convex, sin_t * -1e3).W_pi
    assert w_p3 == pytest.approx(0.5261826975448527, abs=1e-7)
    assert w_m3 == pytest.approx(10.61271919583282, abs=1e-6)
    # boundary layers of width ~1/lambda near t = 0 and t = pi: gap ~ C / lambda
    gp4 = abs(integrate_argument(convex, sin_t * 1e4).W_pi - hi)
    gm4 = abs(integrate_argument(convex, sin_t * -1e4).W_pi - lo)
    assert 7 < abs(w_p3 - hi) / gp4 < 12
    assert 7 < abs(w_m3 - lo) / gm4 < 12
    assert w_p3 > hi and w_m3 < lo
