import math

import numpy as np
import pytest

from hypconc.bounds import (GeometryConstants, a0, a0_radius, ball_size_tree, busemann_tail_family,
                            c_const, concentration_bound, corollary_constants, covering_number,
                            d_const, drift_lower_bound, freeness_prob_lb, frostman_exponent,
                            geometry_constants, ln_plus, matrix_norm_bound, plane_ball_area,
                            rate_lower_bound, simple_concentration_bound, tits_T_n0)
from hypconc.hypspace import plane_model, tree_ball, tree_model

S32 = math.sqrt(3) / 2
C3 = 1 - S32


# A0 and ball sizes

def test_ball_size_matches_enumeration():
    for r in range(5):
        assert ball_size_tree(2, r) == len(tree_ball(2, r)) == 2 * 3 ** r - 1


def test_a0_examples():
    assert a0(tree_model(2)) == pytest.approx(math.sqrt(118097 / 485), rel=1e-12)
    R = 13.8
    ref = math.sqrt((math.cosh(2 * R) - 1) / (math.cosh(R) - 1))
    assert a0(plane_model()) == pytest.approx(ref, rel=1e-12)
    assert a0_radius(lambda r: 1.0, 5.0) == 1.0
    assert plane_ball_area(1.0) == pytest.approx(2 * math.pi * (math.cosh(1) - 1))


# D and C

def test_d_const_examples():
    assert d_const(1, 0.25, 3) == 32 * 41 ** 2 * 16 == 860672
    assert d_const(1, 1.0, 3) == math.inf
    assert d_const(0.3, 0.25, 3) == d_const(1, 0.25, 3)
    with pytest.raises(ValueError):
        d_const(0, 0.5, 3)
    with pytest.raises(ValueError):
        d_const(1, 1.5, 3)


def test_c_const_examples():
    assert c_const(1, 0.25, 3) == 80
    assert c_const(1, 1.0, 3) == math.inf
    assert c_const(1, 0.25, 3, "infimum") <= 80
    with pytest.raises(ValueError):
        c_const(1, 0.25, 3, "golden")


def test_c_infimum_matches_dense_scan():
    # brute-force scan of c over (1, lambda^-1/2)
    for kappa, lam, A in ((1, 0.25, 3), (2.5, 0.6, 15.6), (0.3, 0.9, 1)):
        c = np.linspace(1, lam ** -0.5, 200_001)[1:-1]
        lc = np.log(c)
        obj = 4 * np.maximum(math.log(kappa) / lc, 1 / lc ** 2) + A / (1 - c * c * lam)
        ref = kappa * obj.min()
        got = c_const(kappa, lam, A, "infimum")
        assert got <= ref * (1 + 1e-9)
        assert got >= ref * (1 - 1e-4)


def test_constants_monotone_and_divergent():
    lams = [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999]
    for f in (d_const, c_const):
        vals = [f(2.0, l, 15.6) for l in lams]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 1e3 * vals[0]
    ks = [0.5, 1, 2, 5, 10]
    vals = [d_const(k, 0.5, 3) for k in ks]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_d_majorizes_c_chain():
    for kappa in (0.3, 1, 2.5, 7):
        for lam in (0.05, 0.3, 0.6, 0.85, 0.99):
            for A in (1, 3, 15.6045, 100, 992.28):
                C = c_const(kappa, lam, A)
                assert 32 * (kappa + 2 * C) ** 2 <= kappa ** 2 * d_const(kappa, lam, A)
                assert c_const(kappa, lam, A, "infimum") <= C * (1 + 1e-12)


# probability bounds

def test_concentration_bound_examples():
    assert concentration_bound(100, 0.0, 1, 8.6e5).value == 1.0
    b = concentration_bound(10 ** 10, 0.1, 1, 8.6e5)
    assert b.value == pytest.approx(2 * math.exp(-1e8 / 8.6e5), rel=1e-12)
    assert 6.0e-51 < b.value < 6.6e-51 and not b.vacuous
    assert b.kind == "D-form"
    inf = concentration_bound(10, 0.5, 1, math.inf)
    assert inf.value == 1.0 and inf.vacuous and "D infinite" in inf.assumptions


def test_concentration_doubling_n():
    a = concentration_bound(10 ** 8, 0.1, 1, 8.6e5).value / 2
    b = concentration_bound(2 * 10 ** 8, 0.1, 1, 8.6e5).value / 2
    assert b == pytest.approx(a * a, rel=1e-9)


def test_concentration_monotone():
    ns = [10, 100, 10 ** 4, 10 ** 6, 10 ** 8]
    vals = [concentration_bound(n, 0.2, 1.5, 1e4).value for n in ns]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    ts = [0.0, 0.1, 0.2, 0.5, 1.0]
    vals = [concentration_bound(10 ** 6, t, 1.5, 1e4).value for t in ts]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_simple_concentration_examples():
    b = simple_concentration_bound(10 ** 4, 0.2, 1, 0.75)
    assert b.value == pytest.approx(2 * math.exp(-400 / 98), rel=1e-12)
    assert b.value == pytest.approx(0.0337, abs=1e-4)
    assert simple_concentration_bound(10 ** 4, 0.0, 1, 0.75).value == 1.0
    with pytest.raises(ValueError):
        simple_concentration_bound(10, 0.1, 1, -0.1)


def test_matrix_norm_bound():
    m = matrix_norm_bound(10 ** 5, 0.2, 1, 0.5, 2)
    assert m.value == pytest.approx(4 * math.exp(-4000 / (128 * 2.25)), rel=1e-12)
    assert not any("outside" in a for a in m.assumptions)
    small = matrix_norm_bound(2, 0.1, 1, 0.5, 2)
    assert any("outside" in a for a in small.assumptions)


def test_rate_lower_bound():
    assert rate_lower_bound(0.5, 0.5, 1, 8.6e5) == 0
    assert rate_lower_bound(1.0, 0.5, 1, 8.6e5) == pytest.approx(0.25 / 8.6e5)
    assert round(rate_lower_bound(1.0, 0.5, 1, 8.6e5), 8) == 2.9e-7
    assert rate_lower_bound(0.2, 0.5, 1, 10) == pytest.approx(rate_lower_bound(0.8, 0.5, 1, 10))
    assert rate_lower_bound(1.0, 0.5, 1, math.inf) == 0


# Frostman and drift

def test_frostman_exponent():
    s = frostman_exponent(1, {0.0: S32})
    assert s == pytest.approx(math.log(2 / math.sqrt(3)), rel=1e-12)
    assert 0 < s <= math.log(3)
    assert frostman_exponent(1, lambda r: 1.0) == 0
    assert frostman_exponent(2, {0.0: S32}) == pytest.approx(s / 2)
    # lazy family r + (1 - r) lambda peaks at r = 0
    assert frostman_exponent(1, lambda r: r + (1 - r) * S32) == pytest.approx(s)


def test_drift_lower_bound():
    gc = geometry_constants(tree_model(2))
    assert gc.K0 == 361
    b = drift_lower_bound(gc, lambda r: r + (1 - r) * S32)
    assert 0 < b <= 0.5
    assert drift_lower_bound(gc, lambda r: 1.0) == 0
    gc2 = GeometryConstants(0.0, 2.0, gc.A0, gc.K0)
    assert drift_lower_bound(gc2, {0.0: S32}) == pytest.approx(2 * drift_lower_bound(gc, {0.0: S32}))
    with pytest.raises(ValueError):
        drift_lower_bound(GeometryConstants(0.0, 1.0, 2.0, 1), {0.0: 0.5})


def test_covering_number():
    K0, exact = covering_number(tree_model(2))
    assert exact and len(tree_ball(2, 6)) == 1457
    # every ball of radius 1 has 5 points, so at least 1457/5 centres are needed
    assert math.ceil(1457 / 5) <= K0 <= 1457
    Kp, exact_p = covering_number(plane_model())
    assert not exact_p and Kp == math.ceil(plane_ball_area(6.5) / plane_ball_area(0.5))


def test_geometry_constants_validation():
    with pytest.raises(ValueError):
        GeometryConstants(0.0, 1.0, 0.5, 10)
    with pytest.raises(ValueError):
        GeometryConstants(0.0, 1.0, 2.0, 2.5)
    gc = GeometryConstants(0.7, 0.0, 2.0, 10)
    assert gc.D1 == 1.0 and gc.R == pytest.approx(13.8)


# Tits constants

def test_tits_constants_example():
    gc = GeometryConstants(0.0, 1.0, 15.6, 300)
    tc = tits_T_n0(1, 0.933, gc)
    BM = 1 / (2 ** 17 * math.log(300) ** 2)
    AM = 15.6 / 6 + 33 / 16
    assert tc.A_M == pytest.approx(AM) and tc.B_M == pytest.approx(BM)
    ref = BM * math.log(0.933) ** 2 * (1 - math.sqrt(0.933)) ** 4 / AM ** 2
    assert tc.T == pytest.approx(ref, rel=1e-12)
    assert 1e-17 < tc.T < 1e-15
    assert tc.n0 == 2 and tc.n0_printed == 2


def test_tits_T_limits():
    gc = GeometryConstants(0.5, 1.0, 15.6, 300)
    Ts = [tits_T_n0(1, l, gc).T for l in (0.9, 0.99, 0.999, 0.9999)]
    assert all(b < a for a, b in zip(Ts, Ts[1:]))
    tc = tits_T_n0(1, 0.5, gc)
    assert tc.n0 > 2
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            tits_T_n0(1, bad, gc)


# freeness lower bound

def test_freeness_examples():
    fb = freeness_prob_lb(lambda n, e: 0.0, 0.5, 10, T=1.0)
    assert fb.prop.value == 1.0 and fb.in_range
    p = busemann_tail_family(1.0, 100.0)
    fb = freeness_prob_lb(p, 0.5, 10 ** 6, T=1e-4)
    eps = 0.5 / 8
    ref = 1 - 13 * 4 * math.exp(-1e6 * eps ** 2 / 100) - 8 * 4 * math.exp(-5e5 * eps ** 2 / 100)
    assert fb.prop.value == pytest.approx(ref, rel=1e-12)
    assert fb.thm.value == pytest.approx(1 - 84 * math.exp(-100), rel=1e-12)
    assert freeness_prob_lb(lambda n, e: 0.0, 0.5, 3).in_range
    out = freeness_prob_lb(lambda n, e: 0.0, 0.5, 2)
    assert not out.in_range and "n outside validity range" in out.prop.assumptions
    assert math.isnan(out.thm.value)


def test_freeness_monotone_in_n():
    p = busemann_tail_family(1.0, 500.0)
    vals = [freeness_prob_lb(p, 0.5, n).prop.value for n in range(3, 2_000_000, 50_000)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[0] == 0 and vals[-1] > 0


# corollary constants

def test_corollary_examples():
    hg = corollary_constants("hyperbolic_group", 1, 15.6)
    assert hg.N == 4 and hg.alpha == pytest.approx(2 ** 25 / C3 ** 4) and hg.A == pytest.approx(18.6)
    assert C3 ** 4 == pytest.approx(3.222e-4, rel=1e-3)
    ro = corollary_constants("rank_one", 1, 15.6)
    assert ro.N == 16 and ro.A == pytest.approx(15.6 / 3 + 3)
    assert hg.tail_bound(10 ** 6, 0.1, 1, 1e-9).value == 1.0
    assert hg.spectral_bound(1.0) == pytest.approx(1 - C3 / 4)
    with pytest.raises(ValueError):
        corollary_constants("lattice", 1, 1)
    with pytest.raises(ValueError):
        corollary_constants("rank_one", 0, 1)


def test_ln_plus():
    assert ln_plus(0.5) == 0 and ln_plus(math.e) == pytest.approx(1) and ln_plus(0) == 0
