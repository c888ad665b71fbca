import math

import numpy as np
import pytest

from hypconc.hypspace import Mobius, TreeBoundary, Word, busemann, displacement
from hypconc.rng import WALK, stream_key, uniforms
from hypconc.walk import (FiniteMeasure, busemann_values, drift_continuity_scan, empirical_tail, empirical_tails,
                          estimate_drift, exact_drift, sample_boundary, sample_boundary_batch,
                          sample_walk, walk_lengths)

W = Word.parse
SRW2 = FiniteMeasure.srw(2)


def birth_death_tail(n, t, k=2):
    """Exact P(|X_n - n ell| >= n t) for the word-length chain of SRW on F_k."""
    up = (2 * k - 1) / (2 * k)
    p = np.zeros(n + 1)
    p[0] = 1.0
    for _ in range(n):
        q = np.zeros(n + 1)
        q[1] += p[0]
        q[2:] += up * p[1:-1]
        q[:-1] += (1 - up) * p[1:]
        p = q
    ell = (k - 1) / k
    x = np.arange(n + 1)
    return float(p[np.abs(x - n * ell) >= n * t - 1e-12].sum())


# measures

def test_measure_validation():
    with pytest.raises(ValueError):
        FiniteMeasure(((W("a"), 0.5), (W("b"), 0.4)))
    with pytest.raises(ValueError):
        FiniteMeasure(((W("a"), 0.5), (W("a"), 0.5)))
    with pytest.raises(TypeError):
        FiniteMeasure(((W("a"), 0.5), (Mobius.identity(), 0.5)))


def test_kappa_and_m():
    mu = FiniteMeasure(((W("ab"), 0.7), (W("B"), 0.3)))
    assert mu.kappa_S == 2 and mu.m_mu == 0.3


def test_lazy_examples():
    assert SRW2.lazy(0) is SRW2
    lz = SRW2.lazy(0.5).as_dict()
    assert len(lz) == 5 and lz[Word.identity(2)] == 0.5
    assert all(v == 0.125 for g, v in lz.items() if len(g))
    e = FiniteMeasure.dirac(Word.identity(2))
    assert e.lazy(0.5).as_dict() == {Word.identity(2): 1.0}
    with pytest.raises(ValueError):
        SRW2.lazy(1.0)
    assert SRW2.lazy(0.3).kappa_S == SRW2.kappa_S


# walks

def test_dirac_walk():
    tr = sample_walk(FiniteMeasure.dirac(W("ab")), 5, seed=0)
    assert tr.product() == W("ab") ** 5
    assert tr.kappa[-1] == 10


def test_trace_consistency():
    tr = sample_walk(SRW2, 300, seed=4, trial=2)
    kap = [len(g) for g in tr.products()]
    assert list(tr.kappa) == kap
    assert all(k <= i + 1 for i, k in enumerate(kap))


def test_trace_deterministic():
    a = sample_walk(SRW2, 200, seed=9)
    b = sample_walk(SRW2, 200, seed=9)
    assert np.array_equal(a.steps, b.steps)
    c = sample_walk(SRW2, 200, seed=10)
    assert not np.array_equal(a.steps, c.steps)


def test_kernel_matches_python_replay():
    # the numba kernel draws the same uniforms the Python replay uses
    L = walk_lengths(SRW2, [50, 100], 5, seed=3)
    for t in range(5):
        tr = sample_walk(SRW2, 100, seed=3, trial=t)
        assert L[t, 0] == tr.kappa[49] and L[t, 1] == tr.kappa[99]


def test_plane_walk_trace():
    g = Mobius.translation_along_imaginary_axis(1.0)
    mu = FiniteMeasure.uniform([g, g.inverse(), Mobius.rotation(1.0) * g])
    tr = sample_walk(mu, 50, seed=1)
    for k, R in enumerate(tr.products()):
        assert tr.kappa[k] == pytest.approx(displacement(R), abs=1e-9)
        assert tr.kappa[k] <= (k + 1) * mu.kappa_S + 1e-9
    L = walk_lengths(mu, [50], 1, seed=1)
    assert L[0, 0] == pytest.approx(tr.kappa[-1], abs=1e-8)


def test_srw_walk_range():
    L = walk_lengths(SRW2, [10_000], 2000, seed=0)[:, 0] / 10_000
    assert ((L >= 0.45) & (L <= 0.55)).mean() >= 0.999


# drift

def test_drift_examples():
    assert abs(estimate_drift(SRW2, 10_000, 200, seed=1).value - 0.5) <= 0.005
    assert abs(estimate_drift(FiniteMeasure.srw(3), 10_000, 200, seed=1).value - 2 / 3) <= 0.005
    d = estimate_drift(FiniteMeasure.dirac(W("abb")), 100, 3, seed=0)
    assert d.value == 3 and d.radius == 0


def test_exact_drift():
    assert exact_drift(SRW2) == 0.5
    assert exact_drift(SRW2.lazy(0.2)) == pytest.approx(0.4)
    assert exact_drift(FiniteMeasure.dirac(W("abA"))) == 1.0


def test_lazy_drift_scaling():
    a = estimate_drift(SRW2, 5000, 400, seed=2)
    b = estimate_drift(SRW2.lazy(0.4), 5000, 400, seed=2)
    assert abs(b.value - 0.6 * a.value) <= b.radius + 0.6 * a.radius


def test_kingman_convergence():
    a = estimate_drift(SRW2, 2000, 400, seed=5)
    b = estimate_drift(SRW2, 4000, 400, seed=6)
    assert abs(a.value - b.value) <= 2 * (a.radius + b.radius)


def test_continuity_scan():
    fam = [(e, SRW2.lazy(e)) for e in (0.0, 0.1, 0.2)]
    scan = drift_continuity_scan(fam, 5000, 200, seed=0)
    for e, d in zip(scan.params, scan.drifts):
        assert abs(d - (1 - e) / 2) <= 0.01
    const = drift_continuity_scan([(i, SRW2) for i in range(3)], 1000, 50, seed=0)
    assert const.max_jump == 0
    fine = [(e, SRW2.lazy(e)) for e in np.arange(0, 0.06, 0.01)]
    scan = drift_continuity_scan(fine, 5000, 300, seed=1)
    assert scan.max_jump <= 0.01 + 2 * max(scan.radii)


# tails

def test_tail_examples():
    assert empirical_tail(SRW2, 100, 0.0, 1000, seed=0).empirical == 1.0
    row = empirical_tail(SRW2, 100, 0.3, 100_000, seed=0)
    assert row.empirical < 0.01
    assert empirical_tail(FiniteMeasure.dirac(W("a")), 50, 0.1, 1000, seed=0).empirical == 0


def test_tail_matches_birth_death_oracle():
    rows = empirical_tails(SRW2, [100], [0.1, 0.2], 50_000, seed=3)
    for r in rows:
        p = birth_death_tail(100, r.t)
        assert abs(r.empirical - p) <= 4 * math.sqrt(p * (1 - p) / 50_000)


def test_tail_monotone_in_t():
    rows = empirical_tails(SRW2, [200], [0.02, 0.05, 0.1, 0.15, 0.2], 20_000, seed=1)
    for a, b in zip(rows, rows[1:]):
        assert b.empirical <= a.empirical + 3 * a.sigma


def test_busemann_tail_at_basepoint_direction():
    xi = TreeBoundary.parse("(a)")
    rows = empirical_tails(SRW2, [200], [0.1, 0.3], 5000, seed=2, target=xi)
    assert rows[0].experiment.startswith("busemann")
    assert all(0 <= r.empirical <= 1 for r in rows)


def test_busemann_values_match_definition():
    xi = TreeBoundary.parse("b(a)")
    sig, flagged = busemann_values(SRW2, 30, 20, seed=7, xi=xi)
    assert flagged == 0
    # R_n^-1 is an n-step walk of the reflected measure, same counter stream
    inv = SRW2.inverse()
    for t in range(20):
        g = sample_walk(inv, 30, seed=7, trial=t).product()
        assert sig[t] == busemann(g.inverse(), xi)


# boundary sampling

def test_boundary_first_letters():
    arr = sample_boundary_batch(SRW2, 2, 10_000, seed=0)
    assert abs(np.mean(arr[:, 0] == 1) - 0.25) <= 0.01
    ab = np.mean((arr[:, 0] == 1) & (arr[:, 1] == 2))
    assert abs(ab - 1 / 12) <= 0.01


def test_boundary_cylinders_3sigma():
    n = 20_000
    arr = sample_boundary_batch(SRW2, 6, n, seed=5)
    run = np.cumprod(arr == -2, axis=1).sum(axis=1)
    for m in range(1, 7):
        p = 0.25 * (1 / 3) ** (m - 1)
        assert abs(np.mean(run >= m) - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1e-12


def test_dirac_boundary():
    xi = sample_boundary(FiniteMeasure.dirac(W("a")), 3, seed=0)
    assert xi.prefix == (1, 1, 1)


def test_rng_counter_independent_of_order():
    key = np.uint64(stream_key(1, WALK))
    a = uniforms(key, 5, 100)
    b = uniforms(key, 5, 50, offset=50)
    assert np.array_equal(a[50:], b)
    assert 0 <= a.min() and a.max() < 1
