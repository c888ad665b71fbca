"""Explicit constants and closed-form probability bounds.

Constant evaluators return floats (``math.inf`` where a constant blows up,
e.g. at lambda = 1).  Probability evaluators return a `BoundValue` that
carries the assumptions used and a vacuity flag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import minimize_scalar

from .hypspace import ModelParams, tree_ball

__all__ = ["BoundValue", "GeometryConstants", "ball_size_tree", "plane_ball_area",
           "a0", "a0_radius", "d_const", "c_const", "concentration_bound",
           "simple_concentration_bound", "matrix_norm_bound", "rate_lower_bound",
           "frostman_exponent", "drift_lower_bound", "covering_number",
           "geometry_constants", "TitsConstants", "tits_T_n0", "busemann_tail_family",
           "freeness_prob_lb", "FreenessBounds", "CorollaryPack", "corollary_constants",
           "R_GRID", "ln_plus"]

R_GRID = tuple(round(0.05 * i, 2) for i in range(20))
_C3 = 1 - math.sqrt(3) / 2


def ln_plus(x):
    return max(math.log(x), 0.0) if x > 0 else 0.0


@dataclass(frozen=True)
class BoundValue:
    value: float
    kind: str
    vacuous: bool
    assumptions: tuple = field(default_factory=tuple)


def _prob(value, kind, assumptions, lower=False):
    # upper bounds are vacuous at >= 1, lower bounds at <= 0
    v = min(1.0, max(0.0, value))
    vac = v <= 0.0 if lower else v >= 1.0
    return BoundValue(v, kind, vac, tuple(assumptions))


# ---------------------------------------------------------------------------
# geometry constants


@dataclass(frozen=True)
class GeometryConstants:
    delta: float
    D0: float
    A0: float
    K0: int

    def __post_init__(self):
        if self.A0 < 1:
            raise ValueError("A0 >= 1")
        if self.K0 < 1 or int(self.K0) != self.K0:
            raise ValueError("K0 must be a positive integer")

    @property
    def D1(self):
        return max(self.D0, 1.0)

    @property
    def R(self):
        return 14 * self.delta + 4


def ball_size_tree(rank, r):
    """|B_r| in the Cayley graph of F_rank (exact integer)."""
    r = int(math.floor(r))
    if r < 0:
        return 0
    return 1 + sum(2 * rank * (2 * rank - 1) ** (j - 1) for j in range(1, r + 1))


def plane_ball_area(r):
    return 2 * math.pi * (math.cosh(r) - 1)


def a0_radius(ball_measure, R):
    """(m(B_{2R}) / m(B_R))^{1/2}."""
    small = ball_measure(R)
    if small <= 0:
        raise ValueError("ball of radius R must have positive measure")
    return math.sqrt(ball_measure(2 * R) / small)


def a0(model: ModelParams):
    """A0 at radius R(delta) + D0 for one of the two model spaces."""
    R = 14 * model.delta + 4 + model.D0
    if model.kind == "tree":
        return math.sqrt(ball_size_tree(model.rank, 2 * R) / ball_size_tree(model.rank, R))
    return a0_radius(plane_ball_area, R)


def d_const(kappa, lam, A0):
    """D(kappa, lambda) = 32 (16 ln+ kappa + 8 A0/3 + 33)^2 / (1 - sqrt(lambda))^4."""
    _check(kappa, lam)
    if lam == 1:
        return math.inf
    return 32 * (16 * ln_plus(kappa) + 8 * A0 / 3 + 33) ** 2 / (1 - math.sqrt(lam)) ** 4


def _check(kappa, lam):
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")


def _c_objective(u, kappa, lam, A0):
    # u = ln c on (0, -ln(lambda)/2)
    lead = max(math.log(kappa) / u, 1.0 / (u * u))
    return 4 * lead + A0 / (1 - math.exp(2 * u) * lam)


def c_const(kappa, lam, A0, mode="closed_form"):
    """C(kappa, lambda), either as the infimum over c or its closed-form majorant."""
    _check(kappa, lam)
    if lam == 1:
        return math.inf
    if mode == "closed_form":
        return kappa * (8 * ln_plus(kappa) + 4 * A0 / 3 + 16) / (1 - math.sqrt(lam)) ** 2
    if mode != "infimum":
        raise ValueError("mode is 'infimum' or 'closed_form'")
    hi = -0.5 * math.log(lam)
    # the objective is convex in u; bounded Brent is golden section plus
    # parabolic steps
    res = minimize_scalar(_c_objective, bounds=(hi * 1e-9, hi * (1 - 1e-12)), method="bounded",
                          args=(kappa, lam, A0), options={"xatol": 1e-10 * hi})
    u_half = math.log((1 + lam ** -0.5) / 2)
    best = min(res.fun, _c_objective(u_half, kappa, lam, A0))
    return kappa * best


def _bound_from_exponent(expo, prefactor, kind, notes):
    if expo == 0 or math.isnan(expo):
        return _prob(1.0, kind, notes)
    return _prob(prefactor * math.exp(-expo), kind, notes)


def concentration_bound(n, t, kappa, D):
    """min(1, 2 exp(-n t^2 / (kappa^2 D)))."""
    if not D > 0:
        raise ValueError("D must be positive")
    notes = [f"kappa={kappa!r}", f"D={D!r}"]
    if math.isinf(D):
        return _prob(1.0, "D-form", notes + ["D infinite"])
    return _bound_from_exponent(n * t * t / (kappa * kappa * D), 2.0, "D-form", notes)


def simple_concentration_bound(n, t, kappa, c, kind="c-form"):
    """min(1, 2 exp(-n t^2 / (32 (kappa + c)^2)))."""
    if not kappa > 0 or c < 0:
        raise ValueError("need kappa > 0 and c >= 0")
    notes = [f"kappa={kappa!r}", f"c={c!r}"]
    return _bound_from_exponent(n * t * t / (32 * (kappa + c) ** 2), 2.0, kind, notes)


def matrix_norm_bound(n, t, kappa, c, d):
    """min(1, 2d exp(-n t^2 / (128 (kappa + c)^2))); valid for n t >= ln d."""
    notes = [f"kappa={kappa!r}", f"c={c!r}", f"d={d}"]
    if n * t < math.log(d):
        notes.append("outside validity: n t < ln d")
    return _bound_from_exponent(n * t * t / (128 * (kappa + c) ** 2), 2.0 * d, "matrix-norm", notes)


def rate_lower_bound(t, ell, kappa, D):
    """(t - ell)^2 / (kappa^2 D)."""
    if not D > 0:
        raise ValueError("D must be positive")
    if math.isinf(D):
        return 0.0
    return (t - ell) ** 2 / (kappa * kappa * D)


def _family(lams, r_grid):
    if callable(lams):
        return [(r, lams(r)) for r in r_grid]
    if isinstance(lams, dict):
        return sorted(lams.items())
    return [(0.0, float(lams))]


def frostman_exponent(kappa, lams, r_grid=R_GRID):
    """sup_r (1/kappa) ln(1/lambda_r) over the grid.

    ``lams`` is a callable r -> lambda_r, a dict {r: lambda_r} or a number.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return max(math.log(1 / lam) / kappa for _, lam in _family(lams, r_grid))


def drift_lower_bound(gc: GeometryConstants, lams, r_grid=R_GRID):
    """(2 D1 / ln K0) sup_r ln(1/lambda_r)/(1 - r)."""
    if gc.K0 < 2:
        raise ValueError("K0 must be >= 2")
    best = max(math.log(1 / lam) / (1 - r) for r, lam in _family(lams, r_grid))
    return 2 * gc.D1 / math.log(gc.K0) * best


def covering_number(model: ModelParams):
    """(K0, exact?) : balls of radius D1 needed to cover B_{6 D1}.

    Tree: greedy cover by translates g B_{D1}, g in B_{6 D1}.  Plane: the
    packing bound area(B_{6.5 D1}) / area(B_{D1/2}), an upper bound.
    """
    D1 = max(model.D0, 1.0)
    if model.kind == "plane":
        return math.ceil(plane_ball_area(6.5 * D1) / plane_ball_area(0.5 * D1)), False
    big = tree_ball(model.rank, int(6 * D1))
    index = {w: i for i, w in enumerate(big)}
    small = tree_ball(model.rank, int(D1))
    sets = [{index[g * h] for h in small if (g * h) in index} for g in big]
    uncovered = set(range(len(big)))
    count = 0
    while uncovered:
        j = max(range(len(sets)), key=lambda i: (len(sets[i] & uncovered), -i))
        uncovered -= sets[j]
        count += 1
    return count, True


def geometry_constants(model: ModelParams, K0=None):
    """Constant pack for a model; K0 defaults to `covering_number`."""
    if K0 is None:
        K0, _ = covering_number(model)
    return GeometryConstants(model.delta, model.D0, a0(model), int(K0))


# ---------------------------------------------------------------------------
# probabilistic Tits alternative


@dataclass(frozen=True)
class TitsConstants:
    T: float
    n0: float
    n0_printed: float
    A_M: float
    B_M: float
    C_M: float


def tits_T_n0(kappa, lam, gc: GeometryConstants):
    """T(kappa, lambda) and the validity threshold n0(lambda).

    n0 = 2 + C_M / ln(1/lambda) follows from the r = 1/2 range of validity;
    the variant 2 + C_M ln(1/lambda) is reported as ``n0_printed``.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if gc.K0 < 2:
        raise ValueError("K0 must be >= 2")
    lk = math.log(gc.K0)
    A_M = gc.A0 / 6 + 33 / 16
    B_M = gc.D1 ** 2 / (2 ** 17 * lk ** 2)
    C_M = 4 * gc.delta * lk / gc.D1
    T = B_M * math.log(lam) ** 2 * (1 - math.sqrt(lam)) ** 4 / (kappa ** 2 * (ln_plus(kappa) + A_M) ** 2)
    return TitsConstants(T, 2 + C_M / math.log(1 / lam), 2 + C_M * math.log(1 / lam), A_M, B_M, C_M)


def busemann_tail_family(kappa, D):
    """p_n(eps) = 4 exp(-n eps^2 / (kappa^2 D)), not clipped."""
    def p(n, eps):
        if math.isinf(D):
            return 4.0
        return 4.0 * math.exp(-n * eps * eps / (kappa * kappa * D))
    return p


@dataclass(frozen=True)
class FreenessBounds:
    prop: BoundValue
    thm: BoundValue
    in_range: bool


def freeness_prob_lb(p, ell, n, delta=0.0, T=None):
    """Lower bounds on P(<R_n, R'_n> is free).

    prop: 1 - (13 p_n(ell/8) + 8 p_{n//2}(ell/8)).
    thm:  1 - 84 exp(-n T), when T is given.
    Both are clamped to [0, 1]; ``in_range`` is n > 2 + 16 delta / ell.
    """
    eps = ell / 8
    in_range = n > 2 + 16 * delta / ell
    notes = [] if in_range else ["n outside validity range"]
    raw = 1 - (13 * p(n, eps) + 8 * p(n // 2, eps))
    prop = _prob(raw, "freeness-prop", notes + ["13p_n + 8p_{n/2} combiner"], lower=True)
    if T is None:
        thm = BoundValue(math.nan, "freeness-thm", True, ("T not supplied",))
    else:
        thm = _prob(1 - 84 * math.exp(-n * T), "freeness-thm", notes, lower=True)
    return FreenessBounds(prop, thm, in_range)


# ---------------------------------------------------------------------------
# corollary constants


@dataclass(frozen=True)
class CorollaryPack:
    kind: str
    N_prime: int
    N: int
    alpha: float
    A: float

    def spectral_bound(self, m_mu):
        """Upper bound on the norm fed into the corollary."""
        Np = self.N_prime
        if self.kind == "hyperbolic_group":
            return 1 - _C3 * m_mu ** Np / (Np * 2 ** (Np + 1))
        return 1 - m_mu ** (4 * Np) * _C3 / (4 * Np * 2 ** (4 * Np))

    def tail_bound(self, n, t, kappa, m_mu):
        """min(1, 2 exp(-n t^2 m^N / (alpha kappa^2 (ln+ kappa + A)^2)))."""
        expo = n * t * t * m_mu ** self.N / (self.alpha * kappa ** 2 * (ln_plus(kappa) + self.A) ** 2)
        notes = [f"{self.kind} N'={self.N_prime}", f"m_mu={m_mu!r}"]
        return _bound_from_exponent(expo, 2.0, "corollary-pack", notes)


def corollary_constants(kind, N_prime, A0):
    """Constants for the hyperbolic-group or rank-one corollary."""
    if N_prime < 1 or int(N_prime) != N_prime:
        raise ValueError("N' must be a positive integer")
    if kind == "hyperbolic_group":
        N = 4 * N_prime
        alpha = 2.0 ** (21 + 4 * N_prime) * N_prime ** 4 / _C3 ** 4
        return CorollaryPack(kind, N_prime, N, alpha, A0 + 3)
    if kind == "rank_one":
        N = 16 * N_prime
        alpha = 2.0 ** (25 + N) * N ** 4 / _C3 ** 4
        return CorollaryPack(kind, N_prime, N, alpha, A0 / 3 + 3)
    raise ValueError("kind is 'hyperbolic_group' or 'rank_one'")
