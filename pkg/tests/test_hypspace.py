import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypconc.hypspace import (InsufficientDepth, ModelMismatch, Mobius, PlaneBoundary,
                              TreeBoundary, Word, act, busemann, displacement, distance,
                              estimate_delta, gromov_product, plane_ball_sampler,
                              shadow_contains, tree_ball, tree_ball_sampler, tree_model,
                              plane_model)

W = Word.parse
o = Word.identity(2)


def bfs_distance(x, y):
    # breadth-first search on the Cayley graph of F2 from x until y
    gens = [Word((j,), 2) for j in (1, 2, -1, -2)]
    seen = {x}
    q = deque([(x, 0)])
    while q:
        v, d = q.popleft()
        if v == y:
            return d
        for g in gens:
            w = v * g
            if w not in seen:
                seen.add(w)
                q.append((w, d + 1))


words = st.lists(st.sampled_from([1, 2, -1, -2]), max_size=8).map(lambda l: Word.reduced(l, 2))
mobius = st.tuples(st.floats(-2, 2), st.floats(0.2, 3), st.floats(-math.pi, math.pi)).map(
    lambda p: Mobius(1, p[0], 0, 1) * Mobius.translation_along_imaginary_axis(math.log(p[1]))
    * Mobius.rotation(p[2]))


# words and reduction

def test_word_reduction_and_str():
    assert str(W("abBA")) == "e"
    assert str(W("aB") * W("bb")) == "ab"
    assert W("ab").inverse() == W("BA")
    with pytest.raises(ValueError):
        Word((1, -1), 2)
    with pytest.raises(ModelMismatch):
        W("a", 2) * W("a", 3)


# distance

def test_distance_examples():
    assert distance(W("ab"), W("aa")) == 2
    assert distance(W("abab"), W("abab")) == 0
    assert distance(1j, 2j) == pytest.approx(math.log(2), abs=1e-12)


def test_distance_matches_bfs():
    for x in tree_ball(2, 2):
        for y in tree_ball(2, 2)[::3]:
            assert distance(x, y) == bfs_distance(x, y)


def test_plane_distance_arccosh_form():
    z, w = 0.3 + 1.7j, -1.1 + 0.4j
    ref = math.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag))
    assert distance(z, w) == pytest.approx(ref, abs=1e-12)


def test_model_mismatch():
    with pytest.raises(ModelMismatch):
        distance(W("a"), 1j)


# Gromov products

def test_gromov_examples():
    assert gromov_product(W("ab"), W("aa"), o) == 1
    x = W("abA")
    assert gromov_product(x, x, o) == len(x)
    assert gromov_product(TreeBoundary.parse("(a)"), W("a"), o) == 1


def test_gromov_boundary_limit_of_interior():
    xi, eta = TreeBoundary.parse("ab(a)"), TreeBoundary.parse("abb(a)")
    inner = [gromov_product(W("ab" + "a" * m), W("abb" + "a" * m)) for m in range(1, 6)]
    assert gromov_product(xi, eta) == min(inner) == 2


def test_tree_boundary_depth_is_enforced():
    xi = TreeBoundary.parse("aba")
    with pytest.raises(InsufficientDepth):
        gromov_product(xi, W("abab"))
    with pytest.raises(InsufficientDepth):
        xi.letters(4)
    assert xi.depth == 3 and TreeBoundary.parse("(a)").depth == math.inf


def test_plane_boundary_gromov_is_limit():
    xi, eta = PlaneBoundary(0.5), PlaneBoundary(-2.0)
    def toward(x, s):
        return x + 1j * s
    approx = gromov_product(toward(0.5, 1e-7), toward(-2.0, 1e-7))
    assert gromov_product(xi, eta) == pytest.approx(approx, abs=1e-5)
    z = 0.2 + 0.9j
    assert gromov_product(xi, z) == pytest.approx(gromov_product(toward(0.5, 1e-8), z), abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(words, words, words, words)
def test_tree_is_zero_hyperbolic(x, y, z, b):
    p = lambda u, v: gromov_product(u, v, b)
    assert p(x, y) >= min(p(x, z), p(z, y))


def test_plane_four_point_with_configured_delta():
    rng = np.random.default_rng(3)
    pts = plane_ball_sampler(5.0)(rng, 4 * 20000).reshape(4, -1)
    delta = plane_model().delta
    for x, y, z, b in pts.T[:2000]:
        assert gromov_product(x, y, b) >= min(gromov_product(x, z, b), gromov_product(z, y, b)) - delta


# Busemann cocycle

def test_busemann_examples():
    a_inf = TreeBoundary.parse("(a)")
    assert busemann(o, a_inf) == 0
    assert busemann(W("A"), a_inf) == -1
    assert busemann(W("b"), a_inf) == 1
    assert busemann(Mobius.identity(), PlaneBoundary(0.3)) == pytest.approx(0, abs=1e-12)


def test_busemann_interior_form():
    g, x = W("abA"), W("bba")
    assert busemann(g, x) == distance(x, g.inverse()) - distance(x, o)


@settings(max_examples=200, deadline=None)
@given(words, words, st.sampled_from(["(a)", "b(ab)", "Ab(b)", "(Ba)"]))
def test_tree_cocycle_and_bound(g1, g2, s):
    xi = TreeBoundary.parse(s)
    assert busemann(g1 * g2, xi) == busemann(g1, act(g2, xi)) + busemann(g2, xi)
    assert abs(busemann(g1, xi)) <= displacement(g1)


@settings(max_examples=100, deadline=None)
@given(mobius, mobius, st.floats(-5, 5))
def test_plane_cocycle_and_bound(g1, g2, x):
    xi = PlaneBoundary(x)
    lhs = busemann(g1 * g2, xi)
    rhs = busemann(g1, g2.apply(xi)) + busemann(g2, xi)
    assert lhs == pytest.approx(rhs, abs=1e-9)
    assert abs(busemann(g1, xi)) <= displacement(g1) + 1e-9


# displacement

def test_displacement_examples():
    assert displacement(W("abab")) == 4
    assert displacement(o) == 0
    assert displacement(Mobius.identity()) == pytest.approx(0, abs=1e-12)
    g = Mobius.from_matrix([[math.exp(0.5), 0], [0, math.exp(-0.5)]])
    assert displacement(g) == pytest.approx(1.0, abs=1e-12)


def test_mobius_normalised():
    g = Mobius(2, 1, 1, 3)
    assert abs(g.a * g.d - g.b * g.c - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_subadditivity_tree(g, h):
    assert displacement(g * h) <= displacement(g) + displacement(h)


@settings(max_examples=100, deadline=None)
@given(mobius, mobius)
def test_subadditivity_plane(g, h):
    assert displacement(g * h) <= displacement(g) + displacement(h) + 1e-9


# shadows

def test_shadow_examples():
    assert shadow_contains(0, o, W("aa"), W("aab"))
    assert not shadow_contains(0, o, W("aa"), W("b"))
    for z in tree_ball(2, 3):
        assert shadow_contains(2, o, W("aa"), z)


def test_shadow_image_inclusion_exhaustive():
    ball = tree_ball(2, 4)
    for gamma in tree_ball(2, 2)[1:]:
        k = displacement(gamma)
        for C in range(0, k + 1):
            for z in ball:
                if not shadow_contains(C, o, gamma.inverse(), z):
                    assert shadow_contains(k - C, o, gamma, gamma * z)


def test_shadow_disjointness_exhaustive():
    ball = tree_ball(2, 5)
    pairs = [(W("aa"), W("bb")), (W("ab"), W("aB")), (W("aaa"), W("BBa"))]
    for g1, g2 in pairs:
        C = min(displacement(g1), displacement(g2)) - gromov_product(g1, g2) - 1
        if C < 0:
            continue
        for z in ball:
            assert not (shadow_contains(C, o, g1, z) and shadow_contains(C, o, g2, z))


# delta estimate

def test_estimate_delta():
    assert estimate_delta(tree_ball_sampler(2, 6), 5000, seed=1) == 0
    assert estimate_delta(lambda rng, size: np.full(size, 1j), 10) == 0
    d = estimate_delta(plane_ball_sampler(5.0), 10**6, seed=0)
    assert 0 < d <= 1.0
    assert d <= plane_model().delta


def test_model_params():
    m = tree_model(2)
    assert m.delta == 0 and m.D0 == 1 and m.D1 == 1
    assert plane_model().D1 == 1
    with pytest.raises(ValueError):
        type(m)("tree", 0.5, 1.0, 2)
