"""Norms of convolution operators on the regular representation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypspace import Word, _mul_letters

__all__ = ["SpectralEstimate", "MemoryBudgetExceeded", "kesten_norm",
           "return_prob_estimate", "return_probabilities", "uniform_tits_upper",
           "lazy_norm"]

KINDS = ("exact", "lower-estimate", "upper-bound")


class MemoryBudgetExceeded(MemoryError):
    """The convolution table would not fit in the configured budget."""


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    kind: str
    note: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not 0.0 <= self.value <= 1.0 + 1e-15:
            raise ValueError("operator norm of a probability measure lies in [0, 1]")


def kesten_norm(k):
    """sqrt(2k - 1)/k, the norm for simple random walk on F_k."""
    if k < 1:
        raise ValueError("rank must be >= 1")
    return SpectralEstimate(math.sqrt(2 * k - 1) / k, "exact", f"simple random walk on F_{k}")


def _nearest_neighbour(mu):
    return mu.kind == "tree" and all(len(g) <= 1 for g, _ in mu.atoms)


def _return_series(phases, k, steps):
    """p[m] = P(X_1 X_2 ... X_m = e) where X_j has law phases[(j - 1) % 2].

    First-passage recursion on the tree, exact for nearest-neighbour
    measures.
    """
    letters = [*range(1, k + 1), *range(-k, 0)]
    step = [{x: d.get(Word((x,), k), 0.0) for x in letters} for d in phases]
    stay = [d.get(Word.identity(k), 0.0) for d in phases]
    # F[ph][x][m]: first hit of the letter x at time m, starting in phase ph
    F = [{x: np.zeros(steps + 1) for x in letters} for _ in range(2)]
    for m in range(1, steps + 1):
        for ph in range(2):
            q = 1 - ph
            for x in letters:
                v = step[ph][x] if m == 1 else 0.0
                v += stay[ph] * F[q][x][m - 1]
                for y in letters:
                    if y == x or step[ph][y] == 0.0:
                        continue
                    back = F[q][-y]
                    acc = 0.0
                    for a in range(1, m - 1):
                        if back[a]:
                            acc += back[a] * F[(q + a) % 2][x][m - 1 - a]
                    v += step[ph][y] * acc
                F[ph][x][m] = v
    # first return U and renewal G, both phases
    U = [np.zeros(steps + 1) for _ in range(2)]
    for ph in range(2):
        q = 1 - ph
        U[ph][1] = stay[ph]
        for a in range(2, steps + 1):
            U[ph][a] = sum(step[ph][y] * F[q][-y][a - 1] for y in letters)
    G = [np.zeros(steps + 1) for _ in range(2)]
    G[0][0] = G[1][0] = 1.0
    for m in range(1, steps + 1):
        for ph in range(2):
            G[ph][m] = sum(U[ph][a] * G[(ph + a) % 2][m - a] for a in range(1, m + 1))
    return G[0]


def _sparse_conv(a, b, keep=None):
    # keys are reduced letter tuples; plain tuples keep the inner loop cheap
    out = {}
    bl = list(b.items())
    for g, p in a.items():
        for h, q in bl:
            x, _ = _mul_letters(g, h)
            if keep is not None and len(x) > keep:
                continue
            out[x] = out.get(x, 0.0) + p * q
    return {g: v for g, v in out.items() if v > 1e-300}


def _letters(d):
    return {g.letters: p for g, p in d.items()}


def return_probabilities(mu, n_max, method="auto", budget=4_000_000, form="reflected"):
    """nu^{*n}(e) for n = 1..n_max.

    form "reflected": nu = reflected(mu) * mu, whose limit gives the norm.
    form "plain": nu = mu * mu, whose limit is the spectral radius rho(mu)
    (a smaller quantity unless mu is symmetric).

    ``method`` is "series" (nearest-neighbour measures, any horizon),
    "sparse" (any finitely supported tree measure, memory bound) or "auto".
    """
    if form not in ("reflected", "plain"):
        raise ValueError("form is 'reflected' or 'plain'")
    if mu.kind != "tree":
        raise ValueError("return probabilities need a discrete (tree) model")
    if method == "auto":
        method = "series" if _nearest_neighbour(mu) else "sparse"
    if method == "series":
        if not _nearest_neighbour(mu):
            raise ValueError("series method needs support in generators and identity")
        first = mu.inverse() if form == "reflected" else mu
        p = _return_series([first.as_dict(), mu.as_dict()], mu.rank, 2 * n_max)
        return np.array([p[2 * n] for n in range(1, n_max + 1)])
    first = mu.inverse() if form == "reflected" else mu
    nu = _sparse_conv(_letters(first.as_dict()), _letters(mu.as_dict()))
    reach = max((len(g) for g in nu), default=0)
    cur = {(): 1.0}
    out = []
    for n in range(1, n_max + 1):
        # anything further than the remaining reach can never come back
        cur = _sparse_conv(cur, nu, keep=reach * (n_max - n))
        if len(cur) > budget:
            raise MemoryBudgetExceeded(f"{len(cur)} group elements at n={n}")
        out.append(cur.get((), 0.0))
    return np.array(out)


def return_prob_estimate(mu, n_max, method="auto", budget=4_000_000, form="reflected"):
    """Lower estimates nu^{*n}(e)^{1/(2n)} of the norm, n = 1..n_max.

    Both forms give valid lower estimates; a term is 0 when the walk cannot
    return in that many steps.
    """
    p = return_probabilities(mu, n_max, method, budget, form)
    out = []
    for n, v in enumerate(p, start=1):
        val = float(v) ** (1.0 / (2 * n)) if v > 0 else 0.0
        out.append(SpectralEstimate(min(val, 1.0), "lower-estimate", f"n={n}"))
    return out


def uniform_tits_upper(m_mu, N0):
    """(1 - (1 - sqrt3/2) m^{2 N0})^{1/(2 N0)} given a free pair in S^{N0}."""
    if not 0 < m_mu <= 1:
        raise ValueError("m_mu must lie in (0, 1]")
    if N0 < 1 or int(N0) != N0:
        raise ValueError("N0 must be a positive integer")
    c = 1 - math.sqrt(3) / 2
    val = (1 - c * m_mu ** (2 * N0)) ** (1.0 / (2 * N0))
    return SpectralEstimate(val, "upper-bound", f"free pair in S^{N0}")


def lazy_norm(lam, r, free_srw=False):
    """Norm of r I + (1 - r) T from the norm of a self-adjoint T.

    Exact when T has spectrum symmetric about 0 and the input is exact (simple
    random walk on a free group); an upper bound otherwise.
    """
    if not 0 <= r < 1:
        raise ValueError("r must lie in [0, 1)")
    if free_srw:
        kind = lam.kind
    elif lam.kind == "lower-estimate":
        raise ValueError("cannot turn a lower estimate into an upper bound")
    else:
        kind = "upper-bound"
    return SpectralEstimate(r + (1 - r) * lam.value, kind, f"lazy r={r}")
