"""Finitely supported measures, random walks and their empirical statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .hypspace import Mobius, TreeBoundary, Word, displacement
from .report import tail_row
from .rng import BOUNDARY, WALK, stream_key, uniforms

__all__ = ["FiniteMeasure", "WalkTrace", "DriftEstimate", "BoundaryNotConverged",
           "sample_walk", "estimate_drift", "walk_lengths", "empirical_tail",
           "empirical_tails", "sample_boundary", "sample_boundary_batch",
           "drift_continuity_scan", "reference_drift", "exact_drift", "busemann_values"]

Z99 = 2.5758293035489004


class BoundaryNotConverged(RuntimeError):
    """The boundary sampler ran out of steps before the prefix settled."""


@dataclass(frozen=True)
class FiniteMeasure:
    """Finitely supported probability measure on tree words or Mobius maps."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((g, float(w)) for g, w in self.atoms)
        if not atoms:
            raise ValueError("measure needs at least one atom")
        kinds = {type(g) for g, _ in atoms}
        if len(kinds) != 1 or kinds.pop() not in (Word, Mobius):
            raise TypeError("atoms must all be Word or all be Mobius")
        if any(w <= 0 for _, w in atoms):
            raise ValueError("weights must be positive")
        if abs(sum(w for _, w in atoms) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if len({g for g, _ in atoms}) != len(atoms):
            raise ValueError("atoms must be distinct")
        if isinstance(atoms[0][0], Word) and len({g.rank for g, _ in atoms}) != 1:
            raise ValueError("atoms from free groups of different rank")
        object.__setattr__(self, "atoms", atoms)

    # constructors

    @classmethod
    def srw(cls, rank=2):
        gens = Word.generators(rank)
        atoms = [(g, 1.0 / (2 * rank)) for g in gens] + [(g.inverse(), 1.0 / (2 * rank)) for g in gens]
        return cls(tuple(atoms))

    @classmethod
    def uniform(cls, elements):
        elements = list(elements)
        return cls(tuple((g, 1.0 / len(elements)) for g in elements))

    @classmethod
    def dirac(cls, g):
        return cls(((g, 1.0),))

    @classmethod
    def from_dict(cls, weights):
        return cls(tuple(weights.items()))

    # derived measures

    def lazy(self, r):
        """r delta_id + (1 - r) mu."""
        if not 0.0 <= r < 1.0:
            raise ValueError("laziness must lie in [0, 1)")
        if r == 0:
            return self
        e = self.identity()
        w = {g: (1 - r) * p for g, p in self.atoms}
        w[e] = w.get(e, 0.0) + r
        return FiniteMeasure(tuple(w.items()))

    def inverse(self):
        """The reflected measure g -> g^-1."""
        return FiniteMeasure(tuple((g.inverse(), w) for g, w in self.atoms))

    def identity(self):
        g = self.atoms[0][0]
        return Word.identity(g.rank) if isinstance(g, Word) else Mobius.identity()

    # properties

    @property
    def kind(self):
        return "tree" if isinstance(self.atoms[0][0], Word) else "plane"

    @property
    def rank(self):
        return self.atoms[0][0].rank if self.kind == "tree" else 0

    @property
    def kappa_S(self):
        return max(displacement(g) for g, _ in self.atoms)

    @property
    def m_mu(self):
        return min(w for _, w in self.atoms)

    @property
    def weights(self):
        return np.array([w for _, w in self.atoms])

    def as_dict(self):
        return dict(self.atoms)

    def is_symmetric(self, tol=1e-12):
        if self.kind != "tree":
            return False
        d = self.as_dict()
        return all(abs(d.get(g.inverse(), 0.0) - w) <= tol for g, w in self.atoms)

    def is_srw(self):
        """Simple random walk on the free generators (possibly lazy): (rank, r) or None."""
        if self.kind != "tree":
            return None
        k = self.rank
        d = self.as_dict()
        e = Word.identity(k)
        r = d.get(e, 0.0)
        gens = [g for g in Word.generators(k)] + [g.inverse() for g in Word.generators(k)]
        if len(d) != len(gens) + (1 if r > 0 else 0):
            return None
        p = (1 - r) / (2 * k)
        if all(abs(d.get(g, -1.0) - p) < 1e-12 for g in gens):
            return k, r
        return None

    def _cum(self):
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c

    def _tree_arrays(self):
        width = max(1, max(len(g) for g, _ in self.atoms))
        letters = np.zeros((len(self.atoms), width), dtype=np.int64)
        lens = np.zeros(len(self.atoms), dtype=np.int64)
        for i, (g, _) in enumerate(self.atoms):
            letters[i, :len(g)] = g.letters
            lens[i] = len(g)
        return letters, lens, self._cum()

    def _matrices(self):
        return np.array([g.matrix for g, _ in self.atoms]), self._cum()

    def __len__(self):
        return len(self.atoms)


@dataclass(frozen=True)
class WalkTrace:
    """One trajectory R_k = X_1 ... X_k, stored as chosen atom indices."""

    measure: FiniteMeasure
    seed: int
    trial: int
    steps: np.ndarray
    kappa: np.ndarray

    @property
    def n(self):
        return len(self.steps)

    def increments(self):
        return [self.measure.atoms[k][0] for k in self.steps]

    def product(self, k=None):
        """R_k (default R_n), recomputed by replaying the increments."""
        k = self.n if k is None else k
        g = self.measure.identity()
        for x in self.increments()[:k]:
            g = g * x
        return g

    def products(self):
        g = self.measure.identity()
        for x in self.increments():
            g = g * x
            yield g


@dataclass(frozen=True)
class DriftEstimate:
    value: float
    radius: float
    trials: int
    n: int


def _maxlen(mu, n):
    return int(n * max(1, max(len(g) for g, _ in mu.atoms))) + 2


def _picks(mu, key, trial, n):
    u = uniforms(key, trial, n)
    return np.minimum(np.searchsorted(mu._cum(), u, side="right"), len(mu) - 1)


def sample_walk(mu, n, seed, trial=0):
    """Trajectory of trial ``trial`` for the given seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    key = np.uint64(stream_key(seed, WALK))
    if mu.kind == "tree":
        letters, lens, cum = mu._tree_arrays()
        steps, kap = K.tree_trace(letters, lens, cum, key, trial, n, _maxlen(mu, n))
        return WalkTrace(mu, seed, trial, steps, kap.astype(float))
    steps = _picks(mu, key, trial, n)
    g = Mobius.identity()
    kap = np.empty(n)
    for i, k in enumerate(steps):
        g = g * mu.atoms[k][0]
        kap[i] = displacement(g)
    return WalkTrace(mu, seed, trial, steps, kap)


def walk_lengths(mu, checkpoints, trials, seed, stream=WALK):
    """kappa(R_n) for every trial and checkpoint, shape (trials, len(checkpoints))."""
    cps = np.asarray(sorted(int(c) for c in checkpoints), dtype=np.int64)
    if cps[0] < 1:
        raise ValueError("steps must be >= 1")
    key = np.uint64(stream_key(seed, stream))
    if mu.kind == "tree":
        letters, lens, cum = mu._tree_arrays()
        return K.tree_lengths(letters, lens, cum, key, trials, cps,
                              _maxlen(mu, cps[-1])).astype(float)
    mats, cum = mu._matrices()
    lnorm, _ = K.matrix_logs(mats, cum, key, trials, cps, np.zeros((0, 2)), 32)
    # det 1: d(g i, i) = 2 ln sigma_max(g)
    return 2.0 * lnorm


def estimate_drift(mu, n, trials, seed):
    """Mean of kappa(R_n)/n with a normal 99% half-width."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    x = walk_lengths(mu, [n], trials, seed)[:, 0] / n
    rad = Z99 * x.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    return DriftEstimate(float(x.mean()), float(rad), trials, n)


def exact_drift(mu):
    """Closed-form drift when one is known, else None.

    Lazy simple random walk on F_k: (1 - r)(k - 1)/k from the birth-death
    chain of word lengths.  Dirac mass at g: the cyclically reduced length.
    """
    s = mu.is_srw()
    if s is not None:
        k, r = s
        return (1 - r) * (k - 1) / k
    if len(mu) == 1 and mu.kind == "tree":
        w = mu.atoms[0][0].letters
        while len(w) >= 2 and w[0] == -w[-1]:
            w = w[1:-1]
        return float(len(w))
    return None


def reference_drift(mu, seed=0, n=100_000, trials=1000):
    """(drift, provenance): the closed form if known, else a long-run estimate."""
    ex = exact_drift(mu)
    if ex is not None:
        return ex, "drift exact"
    est = estimate_drift(mu, n, trials, seed)
    return est.value, f"drift estimated n={n} trials={trials} +-{est.radius:.2e}"


def _xi_letters(xi, depth_needed):
    if xi.exact:
        return np.array(xi.letters(depth_needed), dtype=np.int64)
    return np.array(xi.prefix, dtype=np.int64)


def busemann_values(mu, n, trials, seed, xi):
    """sigma(R_n, xi) per trial and the count of depth-limited trials.

    sigma(R_n, xi) = h_xi(R_n^-1 o) and R_n^-1 has the law of an n-step walk
    driven by the reflected measure, which is what gets simulated.
    """
    if mu.kind != "tree":
        raise NotImplementedError("Busemann tails are implemented for tree models")
    inv = mu.inverse()
    letters, lens, cum = inv._tree_arrays()
    maxlen = _maxlen(mu, n)
    xs = _xi_letters(xi, maxlen + 1)
    key = np.uint64(stream_key(seed, WALK))
    sig, flag = K.tree_busemann(letters, lens, cum, key, trials, n, xs, maxlen)
    return sig.astype(float), int(flag.sum())


def empirical_tails(mu, n_grid, t_grid, trials, seed, ell=None, target="kappa"):
    """Rows of P(|X_n - n ell| >= n t) for X_n = kappa(R_n) or sigma(R_n, xi)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    notes = []
    if ell is None:
        ell, how = reference_drift(mu, seed)
        notes.append(how)
    else:
        notes.append("drift supplied")
    n_grid = sorted(int(n) for n in n_grid)
    if isinstance(target, TreeBoundary):
        cols = []
        for n in n_grid:
            sig, flagged = busemann_values(mu, n, trials, seed, target)
            cols.append(sig)
            if flagged:
                notes.append(f"n={n}: {flagged} trials hit boundary depth")
        vals = np.stack(cols, axis=1)
        name = f"busemann[{target}]"
    elif target == "kappa":
        vals = walk_lengths(mu, n_grid, trials, seed)
        name = "kappa"
    else:
        raise ValueError(f"unknown target {target!r}")
    rows = []
    for j, n in enumerate(n_grid):
        dev = np.abs(vals[:, j] - n * ell)
        for t in t_grid:
            hits = int(np.count_nonzero(dev >= n * t))
            rows.append(tail_row(name, n, t, hits, trials, notes))
    return rows


def empirical_tail(mu, n, t, trials, seed, ell=None, target="kappa"):
    """Single row of `empirical_tails`."""
    return empirical_tails(mu, [n], [t], trials, seed, ell, target)[0]


def sample_boundary_batch(mu, depth, samples, seed, margin=None, max_steps=None):
    """Letter array (samples, depth) of harmonic-measure prefixes."""
    if mu.kind != "tree":
        raise NotImplementedError("boundary sampling is implemented for tree models")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    margin = 4 * depth if margin is None else margin
    if max_steps is None:
        max_steps = 200 * (depth + margin) + 2000
    letters, lens, cum = mu._tree_arrays()
    key = np.uint64(stream_key(seed, BOUNDARY))
    out, status = K.tree_boundary(letters, lens, cum, key, samples, depth, margin,
                                  max_steps, _maxlen(mu, max_steps))
    bad = int(status.sum())
    if bad:
        raise BoundaryNotConverged(f"{bad} of {samples} samples did not settle "
                                   f"within {max_steps} steps")
    return out


def sample_boundary(mu, depth, seed, trial=0):
    """One harmonic-measure boundary point, known to ``depth`` letters."""
    arr = sample_boundary_batch(mu, depth, trial + 1, seed)
    return TreeBoundary(tuple(int(x) for x in arr[trial]), (), mu.rank)


@dataclass(frozen=True)
class ContinuityScan:
    params: tuple
    drifts: tuple
    radii: tuple

    @property
    def max_jump(self):
        d = np.asarray(self.drifts)
        return float(np.abs(np.diff(d)).max()) if len(d) > 1 else 0.0


def drift_continuity_scan(family, n, trials, seed):
    """Drift estimates along a parametrised family [(param, measure), ...]."""
    params, drifts, radii = [], [], []
    for p, mu in family:
        est = estimate_drift(mu, n, trials, seed)
        params.append(p)
        drifts.append(est.value)
        radii.append(est.radius)
    return ContinuityScan(tuple(params), tuple(drifts), tuple(radii))
