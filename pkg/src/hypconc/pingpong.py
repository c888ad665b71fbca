"""Ping-pong freeness certificates and the random-pair freeness experiment."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bounds import (busemann_tail_family, d_const, freeness_prob_lb, geometry_constants,
                     tits_T_n0)
from .hypspace import Word, distance, gromov_product, tree_model
from .report import wilson
from .rng import WALK, WALK_PRIME, stream_key
from .spectral import kesten_norm, lazy_norm
from .walk import _maxlen, reference_drift

__all__ = ["FreenessCertificate", "certify_free", "word_oracle", "find_relation",
           "ULDTails", "uld_tails", "TitsReport", "tits_experiment", "random_pairs"]


def _orbit(g):
    return g if isinstance(g, Word) else g.apply(1j)


def _base(g):
    return Word.identity(g.rank) if isinstance(g, Word) else 1j


@dataclass(frozen=True)
class FreenessCertificate:
    certified: bool
    D: float
    D_interval: tuple
    cross: tuple
    self_products: tuple
    kappas: tuple
    delta: float

    @property
    def verdict(self):
        return "certified-free" if self.certified else "not-certified"

    def holds_at(self, D):
        """Do all three ping-pong conditions hold at this D?"""
        k_max, k_min = max(self.kappas), min(self.kappas)
        return (max(self.cross + self.self_products) <= D
                and 0 < k_max / 2 < k_min - D - self.delta)


def certify_free(g1, g2, delta=0.0, D=None):
    """Check the ping-pong conditions for <g1, g2>.

    Records the four distinct cross products (g1^e1 o | g2^e2 o)_o, the two
    products (g_i o | g_i^-1 o)_o and both displacements.  With D=None the
    feasible interval of D is searched and its midpoint is the witness.
    """
    if type(g1) is not type(g2):
        raise TypeError("generators from different models")
    o = _base(g1)
    pts = {(i, e): _orbit(g if e > 0 else g.inverse())
           for i, g in ((1, g1), (2, g2)) for e in (1, -1)}
    cross = tuple(float(gromov_product(pts[1, e1], pts[2, e2], o))
                  for e1 in (1, -1) for e2 in (1, -1))
    selfp = tuple(float(gromov_product(pts[i, 1], pts[i, -1], o)) for i in (1, 2))
    kap = (float(distance(pts[1, 1], o)), float(distance(pts[2, 1], o)))
    lo = max(cross + selfp + (0.0,))
    hi = min(kap) - delta - max(kap) / 2
    if D is None:
        ok = lo < hi and max(kap) > 0
        witness = (lo + hi) / 2 if ok else math.nan
    else:
        witness = float(D)
        ok = lo <= witness < hi and max(kap) > 0
    return FreenessCertificate(ok, witness, (lo, hi), cross, selfp, kap, float(delta))


def _tree_gens(g1, g2):
    ws = [g1, g1.inverse(), g2, g2.inverse()]
    width = max(1, max(len(w) for w in ws))
    gens = np.zeros((4, width), dtype=np.int64)
    lens = np.zeros(4, dtype=np.int64)
    for i, w in enumerate(ws):
        gens[i, :len(w)] = w.letters
        lens[i] = len(w)
    return gens, lens


_NAMES = ("g1", "g1^-1", "g2", "g2^-1")


def find_relation(g1, g2, L=6, tol=1e-9, tol_inconclusive=1e-6):
    """(status, word): status "free", "relation" or "inconclusive" (plane only)."""
    if not 1 <= L <= 8:
        raise ValueError("L must lie in 1..8")
    if isinstance(g1, Word):
        gens, lens = _tree_gens(g1, g2)
        # iterative deepening so the reported relation is a shortest one
        for depth in range(1, L + 1):
            w = K.tree_relation(gens, lens, depth)
            if len(w):
                return "relation", [_NAMES[i] for i in w]
        return "free", []
    mats = np.array([g.matrix for g in (g1, g1.inverse(), g2, g2.inverse())])
    status, w = K.plane_relation(mats, L, tol, tol_inconclusive)
    name = {0: "free", 1: "relation", 2: "inconclusive"}[status]
    return name, [_NAMES[i] for i in w]


def word_oracle(g1, g2, L=6):
    """True if no nontrivial reduced word of length <= L in g1, g2 is trivial.

    Exact on trees.  On the plane a product within 1e-9 of +-I counts as a
    relation (False); a closest approach in [1e-9, 1e-6) gives None.
    """
    status, _ = find_relation(g1, g2, L)
    return {"free": True, "relation": False, "inconclusive": None}[status]


@dataclass(frozen=True)
class ULDTails:
    shadow: float
    backtrack: float
    valid: bool
    notes: tuple = ()


def uld_tails(p, delta, ell, n, eps):
    """(2 p_n(eps), 4 p_n(eps) + 4 p_{n//2}(eps)) with a validity flag for the second."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    notes = []
    valid = True
    if not eps <= ell / 8:
        valid = False
        notes.append("eps > ell/8")
    if not n > 2 + 8 * delta / ell:
        valid = False
        notes.append("n <= 2 + 8 delta/ell")
    return ULDTails(2 * p(n, eps), 4 * p(n, eps) + 4 * p(n // 2, eps), valid, tuple(notes))


def random_pairs(mu, n, trials, seed):
    """Final words of two independent n-step walks, as lists of `Word`."""
    if mu.kind != "tree":
        raise NotImplementedError("pair sampling is implemented for tree models")
    letters, lens, cum = mu._tree_arrays()
    maxlen = _maxlen(mu, n)
    out = []
    for stream in (WALK, WALK_PRIME):
        key = np.uint64(stream_key(seed, stream))
        w, wl = K.tree_words(letters, lens, cum, key, trials, n, maxlen)
        out.append([Word(tuple(int(x) for x in w[t, :wl[t]]), mu.rank) for t in range(trials)])
    return out[0], out[1]


@dataclass
class TitsReport:
    n: int
    trials: int
    certified: int
    certified_at_Dn: int
    oracle_checked: int
    oracle_failures: int
    ell: float
    bounds: object = None
    notes: list = field(default_factory=list)

    @property
    def frequency(self):
        return self.certified / self.trials

    @property
    def sigma(self):
        p = self.frequency
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def wilson_radius(self):
        return wilson(self.certified, self.trials)[1]

    def consistent(self):
        """Empirical >= every positive theoretical lower bound - 3 sigma."""
        if self.bounds is None:
            return True
        for b in (self.bounds.prop, self.bounds.thm):
            if not math.isnan(b.value) and b.value > 0 and self.frequency < b.value - 3 * self.sigma:
                return False
        return True


def tits_experiment(mu, n, trials, seed, L=6, ell=None, delta=0.0, theory=True, check_words=True):
    """Certify freeness of <R_n, R'_n> over independent pairs.

    Also counts certification at the proof's witness D_n = n ell/8 + 2 delta
    and, if ``theory``, evaluates both lower bounds with lambda from the
    1/2-lazy Kesten norm (simple random walks only).
    """
    if ell is None:
        ell, _ = reference_drift(mu, seed)
    A, B = random_pairs(mu, n, trials, seed)
    Dn = n * ell / 8 + 2 * delta
    cert = at_dn = checked = fails = 0
    for g1, g2 in zip(A, B):
        c = certify_free(g1, g2, delta)
        if c.certified:
            cert += 1
            if check_words:
                checked += 1
                if not word_oracle(g1, g2, L):
                    fails += 1
        if certify_free(g1, g2, delta, D=Dn).certified:
            at_dn += 1
    rep = TitsReport(n, trials, cert, at_dn, checked, fails, ell)
    if theory:
        srw = mu.is_srw()
        if srw is None or srw[1] != 0:
            rep.notes.append("theory rows need an exact norm; skipped")
        else:
            k = srw[0]
            lam = lazy_norm(kesten_norm(k), 0.5, free_srw=True).value
            gc = geometry_constants(tree_model(k))
            kap = mu.kappa_S
            D = d_const(kap, lam, gc.A0)
            T = tits_T_n0(kap, lam, gc)
            rep.bounds = freeness_prob_lb(busemann_tail_family(kap, D), ell, n, delta, T.T)
            rep.notes.append(f"lambda_1/2={lam!r} D={D!r} T={T.T!r} n0={T.n0!r}")
    return rep
