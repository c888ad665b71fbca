"""Products of random real matrices.

Norm cocycle, projective metric, Lyapunov exponent, the stationary measure
on projective space, the constant c(mu*) and the tail check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .bounds import matrix_norm_bound, simple_concentration_bound
from .report import tail_row
from .rng import MATRIX, PROJECTIVE, stream_key, uniforms
from .walk import Z99

__all__ = ["MatrixMeasure", "NotProximal", "norm_cocycle", "projective_metric",
           "lyapunov_estimate", "lyapunov_spectrum", "sample_stationary_projective",
           "estimate_c_matrix", "MatrixCEstimate", "matrix_concentration_check",
           "example_measure", "rotation", "LOG_CLIP", "reference_lyapunov"]

LOG_CLIP = math.log(1e12)
RENORM_EVERY = 32


class NotProximal(ValueError):
    """Screen found no gap between the top two Lyapunov exponents."""


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class MatrixMeasure:
    mats: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        mats = np.array(self.mats, dtype=float)
        w = np.array(self.weights, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("expected a stack of square matrices")
        if w.shape != (mats.shape[0],) or (w <= 0).any() or abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        for g in mats:
            if np.linalg.cond(g) > 1e12:
                raise ValueError("atom is numerically singular")
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, mats):
        return cls(np.array(mats), np.full(len(mats), 1.0 / len(mats)))

    @classmethod
    def from_spec(cls, spec):
        """{"matrices": [[row-major entries], ...], "weights": [...]}."""
        mats = [np.array(m, dtype=float) for m in spec["matrices"]]
        mats = [m.reshape(int(round(math.sqrt(m.size))), -1) if m.ndim == 1 else m for m in mats]
        w = spec.get("weights") or [1.0 / len(mats)] * len(mats)
        return cls(np.array(mats), np.array(w))

    @property
    def d(self):
        return self.mats.shape[1]

    @property
    def kappa_S(self):
        return max(max(math.log(np.linalg.norm(g, 2)), math.log(np.linalg.norm(np.linalg.inv(g), 2)))
                   for g in self.mats)

    def transpose(self):
        """Pushforward by g -> g^T (the adjoint for real matrices)."""
        return MatrixMeasure(np.transpose(self.mats, (0, 2, 1)).copy(), self.weights)

    def _cum(self):
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c


def example_measure():
    """Uniform on diag(2, 1/2) and Rot(pi/7) diag(2, 1/2)."""
    A = np.diag([2.0, 0.5])
    return MatrixMeasure.uniform([A, rotation(math.pi / 7) @ A])


def norm_cocycle(g, v):
    """ln(||g v|| / ||v||)."""
    g = np.asarray(g, dtype=float)
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("v must be nonzero")
    if abs(np.linalg.det(g)) == 0:
        raise ValueError("g is singular")
    return math.log(np.linalg.norm(g @ v) / nv)


def projective_metric(x, y):
    """||x ^ y|| / (||x|| ||y||), the sine of the angle between the lines."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("nonzero vectors required")
    x, y = x / nx, y / ny
    # ||x ^ y||^2 = sum_{i<j} (x_i y_j - x_j y_i)^2
    w = np.outer(x, y)
    wedge2 = float(((w - w.T) ** 2).sum()) / 2
    return min(1.0, math.sqrt(wedge2))


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    radius: float
    n: int
    trials: int


def lyapunov_estimate(mu, n, trials, seed, norm="operator"):
    """Mean of (1/n) ln ||R_n|| with a normal 99% half-width."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    key = np.uint64(stream_key(seed, MATRIX))
    vs = np.eye(mu.d) if norm == "frobenius" else np.zeros((0, mu.d))
    lnorm, lvec = K.matrix_logs(mu.mats, mu._cum(), key, trials, np.array([n], dtype=np.int64), vs,
                                RENORM_EVERY)
    if norm == "frobenius":
        x = 0.5 * np.logaddexp.reduce(2 * lvec[:, 0, :], axis=1) / n
    elif norm == "operator":
        x = lnorm[:, 0] / n
    else:
        raise ValueError("norm is 'operator' or 'frobenius'")
    rad = Z99 * x.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    return LyapunovEstimate(float(x.mean()), float(rad), n, trials)


def reference_lyapunov(mu, seed=0, n=1_000_000, trials=4):
    """Long-run oracle value of the top exponent."""
    return lyapunov_estimate(mu, n, trials, seed)


def lyapunov_spectrum(mu, n=500, seed=0):
    """All exponents from one QR-renormalised product (screening only)."""
    key = stream_key(seed, PROJECTIVE) ^ 0x5A5A
    u = uniforms(np.uint64(key), 0, n)
    idx = np.minimum(np.searchsorted(mu._cum(), u, side="right"), len(mu.weights) - 1)
    Q = np.eye(mu.d)
    acc = np.zeros(mu.d)
    for k in idx:
        Q, R = np.linalg.qr(mu.mats[k] @ Q)
        acc += np.log(np.abs(np.diag(R)))
    return np.sort(acc / n)[::-1]


def sample_stationary_projective(mu, burn_in, samples, seed, v0=None, check=True):
    """Unit vectors x_burn_in of independent chains x_{k+1} = [X_{k+1} x_k]."""
    if check:
        spec = lyapunov_spectrum(mu, seed=seed)
        if mu.d > 1 and spec[0] - spec[1] < 1e-3:
            raise NotProximal(f"top exponents {spec[0]:.4g}, {spec[1]:.4g} show no gap")
    if v0 is None:
        v0 = np.ones(mu.d) / math.sqrt(mu.d)
    key = np.uint64(stream_key(seed, PROJECTIVE))
    return K.projective_chain(mu.mats, mu._cum(), key, samples, burn_in, np.asarray(v0, float))


def _circle_grid(m):
    th = np.pi * np.arange(m) / m
    return np.stack([np.cos(th), np.sin(th)], axis=1)


@dataclass(frozen=True)
class MatrixCEstimate:
    value: float
    radius: float
    argmax: np.ndarray
    clipped: int
    samples: int


def _c_integrals(grid, ys):
    cos = np.abs(grid @ ys.T)
    with np.errstate(divide="ignore"):
        vals = -np.log(cos)
    clip = vals > LOG_CLIP
    return np.minimum(vals, LOG_CLIP), clip


def estimate_c_matrix(mu, x_grid=None, samples=20_000, seed=0, burn_in=500, net=2000):
    """sup_x of the mean of ln(||x|| ||y|| / |<x, y>|) over y ~ stationary(mu^T).

    d = 2 grid: 720 equally spaced lines; otherwise a random sphere net of
    ``net`` points plus a local refinement around the best one.
    """
    ys = sample_stationary_projective(mu.transpose(), burn_in, samples, seed)
    refine = x_grid is None and mu.d > 2
    if x_grid is None:
        if mu.d == 2:
            x_grid = _circle_grid(720)
        else:
            rng = np.random.default_rng(seed)
            x_grid = rng.standard_normal((net, mu.d))
    grid = np.asarray(x_grid, dtype=float)
    grid = grid / np.linalg.norm(grid, axis=1, keepdims=True)
    vals, clip = _c_integrals(grid, ys)
    means = vals.mean(axis=1)
    j = int(np.argmax(means))
    if refine:
        rng = np.random.default_rng(seed + 1)
        local = grid[j] + 0.05 * rng.standard_normal((200, mu.d))
        local /= np.linalg.norm(local, axis=1, keepdims=True)
        lv, lc = _c_integrals(local, ys)
        if lv.mean(axis=1).max() > means[j]:
            k = int(np.argmax(lv.mean(axis=1)))
            vals, clip, grid, j = lv, lc, local, k
            means = vals.mean(axis=1)
    rad = Z99 * vals[j].std(ddof=1) / math.sqrt(samples)
    return MatrixCEstimate(float(means[j]), float(rad), grid[j], int(clip.sum()), samples)


def matrix_concentration_check(mu, n_grid, t_grid, trials, seed, ell, c, vs=None):
    """Tail rows for ln||R_n v|| (each v) and ln||R_n|| against both bounds."""
    d = mu.d
    if vs is None:
        vs = np.vstack([np.eye(d), np.ones(d) / math.sqrt(d)])
    vs = np.asarray(vs, dtype=float)
    vs = vs / np.linalg.norm(vs, axis=1, keepdims=True)
    cps = np.array(sorted(int(n) for n in n_grid), dtype=np.int64)
    key = np.uint64(stream_key(seed, MATRIX))
    lnorm, lvec = K.matrix_logs(mu.mats, mu._cum(), key, trials, cps, vs, RENORM_EVERY)
    kap = mu.kappa_S
    notes = [f"lyapunov={ell!r}"]
    rows = []
    for i, n in enumerate(cps):
        for t in t_grid:
            for r in range(vs.shape[0]):
                hits = int(np.count_nonzero(np.abs(lvec[:, i, r] - n * ell) >= n * t))
                row = tail_row(f"matrix-vector[v{r}]", n, t, hits, trials, notes)
                rows.append(row.attach(simple_concentration_bound(n, t, kap, c, kind="matrix-vector")))
            hits = int(np.count_nonzero(np.abs(lnorm[:, i] - n * ell) >= n * t))
            row = tail_row("matrix-norm", n, t, hits, trials, notes)
            rows.append(row.attach(matrix_norm_bound(n, t, kap, c, d)))
    return rows
