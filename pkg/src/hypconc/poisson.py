"""Poisson equation on finite Markov chains and the martingale tail experiment.

Also the Monte Carlo estimate of the cocycle constant c for tree walks,
c = sup_x 2 E[(x|y)_o] with y drawn from the harmonic measure of the
reflected walk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse.csgraph import connected_components

from . import _kernels as K
from .bounds import BoundValue, simple_concentration_bound
from .hypspace import TreeBoundary, Word
from .report import tail_row
from .rng import CHAIN, stream_key
from .walk import Z99, sample_boundary_batch

__all__ = ["FiniteChain", "PoissonSolution", "ReducibleChain", "SingularSystem",
           "stationary", "solve_poisson", "azuma_experiment", "AzumaReport",
           "random_chain", "estimate_c_walk", "CEstimate", "default_c_grid"]


class ReducibleChain(ValueError):
    pass


class SingularSystem(ArithmeticError):
    pass


@dataclass(frozen=True)
class FiniteChain:
    P: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        f = np.array(self.f, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("P must be square")
        if f.shape != (P.shape[0],):
            raise ValueError("f needs one value per state")
        if (P < 0).any() or np.abs(P.sum(axis=1) - 1).max() > 1e-12:
            raise ValueError("P must be stochastic")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "f", f)

    @property
    def S(self):
        return self.P.shape[0]

    def irreducible(self):
        k, _ = connected_components(self.P > 0, directed=True, connection="strong")
        return k == 1

    def relabel(self, perm):
        perm = np.asarray(perm)
        return FiniteChain(self.P[np.ix_(perm, perm)], self.f[perm])


@dataclass(frozen=True)
class PoissonSolution:
    phi: np.ndarray
    pi: np.ndarray
    alpha: float
    residual: float

    @property
    def sup(self):
        return float(np.abs(self.phi).max())

    @property
    def sup_centred(self):
        """min over constant shifts of ||phi + c||_inf (half the range)."""
        return float(self.phi.max() - self.phi.min()) / 2


def stationary(chain):
    """Invariant distribution of an irreducible chain."""
    if not chain.irreducible():
        raise ReducibleChain("chain is not irreducible")
    S = chain.S
    A = chain.P.T - np.eye(S)
    A[-1, :] = 1.0
    b = np.zeros(S)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


def solve_poisson(chain, tol=1e-10):
    """phi with phi - P phi = f - pi(f) and pi(phi) = 0."""
    pi = stationary(chain)
    alpha = float(pi @ chain.f)
    S = chain.S
    M = np.eye(S) - chain.P + np.outer(np.ones(S), pi)
    rhs = chain.f - alpha
    lu = lu_factor(M)
    phi = lu_solve(lu, rhs)
    for _ in range(3):
        r = rhs - M @ phi
        if np.abs(r).max() <= 1e-15 * max(1.0, np.abs(rhs).max()):
            break
        phi = phi + lu_solve(lu, r)
    res = float(np.abs(phi - chain.P @ phi - rhs).max())
    if res > tol:
        raise SingularSystem(f"residual {res:.3e} above {tol:.1e}")
    return PoissonSolution(phi, pi, alpha, res)


def random_chain(S, seed, f_scale=1.0):
    """Chain with Dirichlet(1) rows (all entries positive) and uniform f on [0, f_scale]."""
    rng = np.random.default_rng(seed)
    return FiniteChain(rng.dirichlet(np.ones(S), size=S), f_scale * rng.random(S))


@dataclass
class AzumaReport:
    rows: list
    solution: PoissonSolution
    max_decomposition_error: float
    max_increment: float

    @property
    def increments_bounded(self):
        return self.max_increment <= 2 * self.solution.sup_centred + 1e-12


def azuma_experiment(chain, n_grid, t_grid, trials, start=0, seed=0, centred=True):
    """Empirical P_x(|sum f(Z_i) - n alpha| >= n t) against 2 exp(-n t^2/(32 ||phi||^2)).

    With ``centred`` the bound uses the shift of phi with smallest sup norm,
    which is again a solution.
    """
    sol = solve_poisson(chain)
    phi = sol.phi - (sol.phi.max() + sol.phi.min()) / 2 if centred else sol.phi
    pphi = chain.P @ phi
    cumP = np.cumsum(chain.P, axis=1)
    cumP[:, -1] = 1.0
    norm = float(np.abs(phi).max())
    rows, worst_err, worst_inc = [], 0.0, 0.0
    for n in n_grid:
        # one key per horizon so the n-grid entries are independent experiments
        key = np.uint64(stream_key(seed, CHAIN) ^ int(n))
        dev, err, inc = K.chain_paths(cumP, chain.f, phi, pphi, sol.alpha, int(start), key, trials, int(n))
        worst_err = max(worst_err, float(err.max()))
        worst_inc = max(worst_inc, float(inc.max()))
        for t in t_grid:
            hits = int(np.count_nonzero(dev >= n * t))
            row = tail_row("azuma", n, t, hits, trials, [f"start={start}"])
            if norm == 0:
                # f constant: the centred sum vanishes identically
                row.bound, row.bound_kind, row.vacuous = (1.0 if t == 0 else 0.0), "azuma", t == 0
                row.assumptions.append("phi=0")
            else:
                b = simple_concentration_bound(n, t, norm, 0.0, kind="azuma")
                row.attach(BoundValue(b.value, "azuma", b.vacuous, (f"phi_sup={norm!r}",)))
            rows.append(row)
    return AzumaReport(rows, sol, worst_err, worst_inc)


# ---------------------------------------------------------------------------
# the constant c for tree walks


@dataclass(frozen=True)
class CEstimate:
    value: float
    radius: float
    argmax: object
    per_point: tuple
    truncated: int
    samples: int


def default_c_grid(mu, extra=8, depth=40, seed=0):
    """Basepoint, the 2k ends a_i^{+-inf} and ``extra`` harmonic-measure samples."""
    k = mu.rank
    grid = [Word.identity(k)]
    grid += [TreeBoundary((), (s * j,), k) for j in range(1, k + 1) for s in (1, -1)]
    if extra:
        arr = sample_boundary_batch(mu, depth, extra, seed + 7919)
        grid += [TreeBoundary(tuple(int(x) for x in row), (), k) for row in arr]
    return grid


def _x_letters(x, depth):
    # (letters compared, whether full agreement only gives a lower value)
    if isinstance(x, Word):
        return np.array(x.letters[:depth], dtype=np.int64), len(x) > depth
    if x.exact:
        return np.array(x.letters(depth), dtype=np.int64), True
    return np.array(x.prefix[:depth], dtype=np.int64), True


def estimate_c_walk(mu, x_grid=None, samples=20_000, seed=0, depth=40):
    """Monte Carlo c = max over the grid of 2 E[(x|y)_o], y ~ reflected harmonic measure.

    A sample whose agreement with x reaches the known depth is counted as
    truncated (its product is then a lower value).
    """
    if mu.kind != "tree":
        raise ValueError("estimate_c_walk works on tree models")
    if len(mu) == 1:
        raise ValueError("measure is elementary (single atom)")
    if x_grid is None:
        x_grid = default_c_grid(mu, seed=seed, depth=depth)
    ys = sample_boundary_batch(mu.inverse(), depth, samples, seed)
    best, per, trunc = None, [], 0
    for x in x_grid:
        xl, open_end = _x_letters(x, depth)
        m = len(xl)
        if m == 0:
            vals = np.zeros(samples)
        else:
            agree = np.cumprod(ys[:, :m] == xl[None, :], axis=1)
            vals = agree.sum(axis=1).astype(float)
            if open_end:
                trunc += int(np.count_nonzero(vals == m))
        mean = 2 * vals.mean()
        rad = Z99 * 2 * vals.std(ddof=1) / math.sqrt(samples)
        per.append((x, float(mean), float(rad)))
        if best is None or mean > best[1]:
            best = (x, float(mean), float(rad))
    return CEstimate(best[1], best[2], best[0], tuple(per), trunc, samples)
