"""Exact geometry of two model hyperbolic spaces.

* The Cayley tree of the free group F_k.  Group elements and vertices are
  reduced words (`Word`); the basepoint is the identity word.  Boundary
  points are infinite reduced words (`TreeBoundary`), stored either as an
  eventually periodic word or as a finite prefix known to a given depth.
* The hyperbolic plane in the upper half-plane model, basepoint ``i``.
  Isometries are unit-determinant real 2x2 matrices (`Mobius`), points are
  complex numbers with positive imaginary part and boundary points are
  `PlaneBoundary` coordinates on the extended real line.

Letters of a tree word are signed integers: ``+j`` is the j-th generator,
``-j`` its inverse.  In strings, ``a, b, c, ...`` are generators and the
upper-case letter is the inverse, so ``"aB"`` is a b^-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "InsufficientDepth", "ModelMismatch", "Word", "TreeBoundary", "Mobius",
    "PlaneBoundary", "ModelParams", "tree_model", "plane_model", "distance",
    "gromov_product", "busemann", "displacement", "act", "shadow_contains",
    "estimate_delta", "tree_ball", "tree_ball_sampler", "plane_ball_sampler",
    "horofunction", "PLANE_DELTA",
]

PLANE_DELTA = 0.7
_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class InsufficientDepth(ValueError):
    """A tree boundary prefix is too short to determine the answer."""


class ModelMismatch(TypeError):
    """Arguments belong to different model spaces."""


# ---------------------------------------------------------------------------
# free group / tree


def _reduce(letters):
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _mul_letters(u, v):
    i, m = 0, min(len(u), len(v))
    while i < m and u[len(u) - 1 - i] == -v[i]:
        i += 1
    return u[:len(u) - i] + v[i:], i


def _common_prefix(u, v):
    n = 0
    for x, y in zip(u, v):
        if x != y:
            break
        n += 1
    return n


@dataclass(frozen=True)
class Word:
    """Reduced word in the free group of the given rank."""

    letters: tuple = ()
    rank: int = 2

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        for x in letters:
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x} outside F_{self.rank}")
        for x, y in zip(letters, letters[1:]):
            if x == -y:
                raise ValueError("word is not reduced; use Word.reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def reduced(cls, letters, rank=2):
        return cls(_reduce(int(x) for x in letters), rank)

    @classmethod
    def parse(cls, text, rank=2):
        letters = []
        for ch in text.replace(" ", ""):
            j = _ALPHABET.index(ch.lower()) + 1
            letters.append(j if ch.islower() else -j)
        return cls.reduced(letters, rank)

    @classmethod
    def identity(cls, rank=2):
        return cls((), rank)

    @classmethod
    def generators(cls, rank=2):
        return [cls((j,), rank) for j in range(1, rank + 1)]

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other):
        if not isinstance(other, Word) or other.rank != self.rank:
            raise ModelMismatch("can only multiply words of the same free group")
        return Word(_mul_letters(self.letters, other.letters)[0], self.rank)

    def __pow__(self, p):
        base = self if p >= 0 else self.inverse()
        out = Word.identity(self.rank)
        for _ in range(abs(p)):
            out = out * base
        return out

    def inverse(self):
        return Word(tuple(-x for x in reversed(self.letters)), self.rank)

    def is_identity(self):
        return not self.letters

    def __str__(self):
        if not self.letters:
            return "e"
        return "".join(_ALPHABET[x - 1] if x > 0 else _ALPHABET[-x - 1].upper()
                       for x in self.letters)


@dataclass(frozen=True)
class TreeBoundary:
    """End of the Cayley tree of F_k.

    ``prefix`` followed by ``period`` repeated forever when ``period`` is
    non-empty (then the point is known exactly).  With an empty period only
    the first ``len(prefix)`` letters are known.
    """

    prefix: tuple = ()
    period: tuple = ()
    rank: int = 2

    def __post_init__(self):
        prefix = tuple(int(x) for x in self.prefix)
        period = tuple(int(x) for x in self.period)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)
        if not prefix and not period:
            raise ValueError("boundary point needs at least one letter")
        for x in prefix + period:
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x} outside F_{self.rank}")
        check = prefix + period + period[:1]
        for x, y in zip(check, check[1:]):
            if x == -y:
                raise ValueError("boundary word is not reduced")

    @classmethod
    def periodic(cls, word, prefix=None):
        """The attracting end w^inf of a cyclically reduced word ``w``."""
        pre = () if prefix is None else prefix.letters
        return cls(pre, word.letters, word.rank)

    @classmethod
    def parse(cls, text, rank=2):
        """``"ab"`` is a finite prefix, ``"ab(a)"`` is ab followed by a^inf."""
        if "(" in text:
            head, tail = text.rstrip(")").split("(")
            return cls(Word.parse(head, rank).letters, Word.parse(tail, rank).letters, rank)
        return cls(Word.parse(text, rank).letters, (), rank)

    @property
    def exact(self):
        return bool(self.period)

    @property
    def depth(self):
        return math.inf if self.period else len(self.prefix)

    def letters(self, k):
        """First ``k`` letters; raises `InsufficientDepth` past a finite prefix."""
        if k <= len(self.prefix):
            return self.prefix[:k]
        if not self.period:
            raise InsufficientDepth(f"need {k} letters, prefix has {len(self.prefix)}")
        extra = k - len(self.prefix)
        reps = -(-extra // len(self.period))
        return (self.prefix + self.period * reps)[:k]

    def letter(self, i):
        if i < len(self.prefix):
            return self.prefix[i]
        if not self.period:
            raise InsufficientDepth(f"letter {i} beyond known depth {len(self.prefix)}")
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def __str__(self):
        head = str(Word(self.prefix, self.rank)) if self.prefix else ""
        if self.period:
            return f"{head}({Word(self.period, self.rank)})^inf"
        return f"{head}..."


def _tree_act_boundary(g, xi):
    if xi.period:
        need = len(g) + 1
        reps = max(1, -(-(need - len(xi.prefix)) // len(xi.period)))
        head = xi.prefix + xi.period * reps
        new, _ = _mul_letters(g.letters, head)
        # the tail q^inf follows head unchanged; fold a trailing copy back in
        return TreeBoundary(new, xi.period, xi.rank)
    new, cancelled = _mul_letters(g.letters, xi.prefix)
    if cancelled == len(xi.prefix):
        raise InsufficientDepth("g cancels the whole known prefix")
    return TreeBoundary(new, (), xi.rank)


def _tree_gp_vertex_boundary(x, xi):
    n = 0
    for i, a in enumerate(x.letters):
        if xi.letter(i) != a:
            break
        n += 1
    return n


def _tree_gp_boundary(xi, eta):
    if xi.period and eta.period:
        window = max(len(xi.prefix), len(eta.prefix)) + len(xi.period) * len(eta.period)
        for i in range(window):
            if xi.letter(i) != eta.letter(i):
                return i
        return math.inf
    i = 0
    while True:
        if xi.letter(i) != eta.letter(i):
            return i
        i += 1


# ---------------------------------------------------------------------------
# hyperbolic plane


@dataclass(frozen=True)
class Mobius:
    """Orientation preserving isometry z -> (az+b)/(cz+d), ad - bc = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise ValueError("matrix must have positive determinant")
        s = 1.0 / math.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)) * s)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation_along_imaginary_axis(cls, length):
        h = math.exp(length / 2)
        return cls(h, 0.0, 0.0, 1.0 / h)

    @classmethod
    def rotation(cls, angle):
        """Rotation by ``angle`` about the basepoint i."""
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return cls(c, -s, s, c)

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __mul__(self, other):
        if not isinstance(other, Mobius):
            raise ModelMismatch("can only multiply Mobius maps")
        return Mobius(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                      self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def __pow__(self, p):
        base = self if p >= 0 else self.inverse()
        out = Mobius.identity()
        for _ in range(abs(p)):
            out = out * base
        return out

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def is_identity(self, tol=1e-6):
        m = self.matrix
        return min(np.abs(m - np.eye(2)).max(), np.abs(m + np.eye(2)).max()) < tol

    def apply(self, z):
        if isinstance(z, PlaneBoundary):
            x = z.x
            if math.isinf(x):
                return PlaneBoundary(math.inf if self.c == 0 else self.a / self.c)
            den = self.c * x + self.d
            return PlaneBoundary(math.inf if den == 0 else (self.a * x + self.b) / den)
        return (self.a * z + self.b) / (self.c * z + self.d)


@dataclass(frozen=True)
class PlaneBoundary:
    """Point of the extended real line, the boundary of the upper half-plane."""

    x: float

    def disk(self):
        # Cayley transform to the unit circle; basepoint i goes to 0
        if math.isinf(self.x):
            return 1.0 + 0j
        return (self.x - 1j) / (self.x + 1j)


def _plane_distance(z, w):
    return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))


def horofunction(xi, z):
    """Busemann function of ``xi`` normalised to vanish at the basepoint."""
    if isinstance(xi, PlaneBoundary):
        if math.isinf(xi.x):
            return -math.log(z.imag)
        return math.log(abs(z - xi.x) ** 2 / z.imag) - math.log1p(xi.x * xi.x)
    if isinstance(xi, TreeBoundary):
        return len(z) - 2 * _tree_gp_vertex_boundary(z, xi)
    raise TypeError(f"not a boundary point: {xi!r}")


def _to_base_map(p):
    # isometry sending p to i
    return Mobius(1.0, -p.real, 0.0, p.imag)


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class ModelParams:
    """Per-space constants: hyperbolicity, twice the quotient diameter, basepoint."""

    kind: str
    delta: float
    D0: float
    rank: int = 0
    basepoint: object = field(default=None)

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.kind == "tree" and self.delta != 0:
            raise ValueError("trees are 0-hyperbolic")

    @property
    def D1(self):
        return max(self.D0, 1.0)

    def identity(self):
        return Word.identity(self.rank) if self.kind == "tree" else Mobius.identity()


def tree_model(rank=2):
    # quotient of the Cayley graph by F_k is a rose of diameter 1/2
    return ModelParams("tree", 0.0, 1.0, rank, Word.identity(rank))


def plane_model(delta=PLANE_DELTA):
    return ModelParams("plane", float(delta), 0.0, 0, 1j)


# ---------------------------------------------------------------------------
# dispatching operations


def _kind(x):
    if isinstance(x, (Word, TreeBoundary)):
        return "tree"
    if isinstance(x, (Mobius, PlaneBoundary, complex)):
        return "plane"
    raise TypeError(f"unsupported point type {type(x).__name__}")


def _same(*args):
    kinds = {_kind(a) for a in args}
    if len(kinds) != 1:
        raise ModelMismatch("arguments come from different model spaces")
    kind = kinds.pop()
    if kind == "tree" and len({a.rank for a in args}) != 1:
        raise ModelMismatch("free groups of different rank")
    return kind


def distance(x, y):
    """Distance between two points of the same model."""
    if _same(x, y) == "tree":
        return len(x.inverse() * y)
    return _plane_distance(complex(x), complex(y))


def act(g, x):
    """Image of a point or boundary point under an isometry."""
    if _same(g, x) == "tree":
        if isinstance(x, TreeBoundary):
            return _tree_act_boundary(g, x)
        return g * x
    if isinstance(x, Mobius):
        raise TypeError("act expects a point, not an isometry")
    return g.apply(x)


def displacement(g):
    """kappa(g) = d(g o, o)."""
    if isinstance(g, Word):
        return len(g)
    if isinstance(g, Mobius):
        return _plane_distance(g.apply(1j), 1j)
    raise TypeError(f"not an isometry: {g!r}")


def gromov_product(x, y, base=None):
    """(x|y)_base for interior or boundary arguments.

    Boundary values in the tree are confluence depths; in the plane they use
    the closed form -log(|w1 - w2| / 2) on the unit circle (and its interior
    analogue), which is the exact limit of interior products.
    """
    kind = _same(x, y) if base is None else _same(x, y, base)
    if kind == "tree":
        if base is not None and not base.is_identity():
            binv = base.inverse()
            x, y = act(binv, x), act(binv, y)
        bx, by = isinstance(x, TreeBoundary), isinstance(y, TreeBoundary)
        if bx and by:
            return _tree_gp_boundary(x, y)
        if bx:
            return _tree_gp_vertex_boundary(y, x)
        if by:
            return _tree_gp_vertex_boundary(x, y)
        return _common_prefix(x.letters, y.letters)

    if base is not None and complex(base) != 1j:
        t = _to_base_map(complex(base))
        x, y = t.apply(x), t.apply(y)
    bx, by = isinstance(x, PlaneBoundary), isinstance(y, PlaneBoundary)
    if bx and by:
        gap = abs(x.disk() - y.disk())
        return math.inf if gap == 0 else -math.log(gap / 2.0)
    if bx or by:
        xi, z = (x, y) if bx else (y, x)
        z = complex(z)
        return max(0.0, 0.5 * (_plane_distance(z, 1j) - horofunction(xi, z)))
    x, y = complex(x), complex(y)
    val = 0.5 * (_plane_distance(x, 1j) + _plane_distance(y, 1j) - _plane_distance(x, y))
    return max(0.0, val)


def busemann(g, xi):
    """Busemann cocycle sigma(g, xi) = h_xi(g^-1 o).

    For an interior point x this is d(x, g^-1 o) - d(x, o).
    """
    kind = _same(g, xi)
    ginv = g.inverse()
    if isinstance(xi, (TreeBoundary, PlaneBoundary)):
        return horofunction(xi, ginv if kind == "tree" else ginv.apply(1j))
    if kind == "tree":
        return distance(xi, ginv) - len(xi)
    return _plane_distance(complex(xi), ginv.apply(1j)) - _plane_distance(complex(xi), 1j)


def shadow_contains(C, x, y, z):
    """Is z in the shadow O_C(x, y) = {z : (z|y)_x >= d(x, y) - C}?"""
    return gromov_product(z, y, base=x) >= distance(x, y) - C


# ---------------------------------------------------------------------------
# sampling and the empirical hyperbolicity constant


def tree_ball(rank, radius):
    """All reduced words of length <= radius, shortest first."""
    out = [Word.identity(rank)]
    layer = [()]
    letters = [j for j in range(1, rank + 1)] + [-j for j in range(1, rank + 1)]
    for _ in range(int(radius)):
        nxt = []
        for w in layer:
            for x in letters:
                if not w or w[-1] != -x:
                    nxt.append(w + (x,))
        out.extend(Word(w, rank) for w in nxt)
        layer = nxt
    return out


def tree_ball_sampler(rank, radius):
    """Sampler of words: a random length in [0, radius] then a random reduced word."""
    def sample(rng, size):
        out = []
        for length in rng.integers(0, radius + 1, size=size):
            letters = []
            for _ in range(length):
                choices = [x for x in (*range(1, rank + 1), *range(-rank, 0))
                           if not letters or letters[-1] != -x]
                letters.append(choices[rng.integers(len(choices))])
            out.append(Word(tuple(letters), rank))
        return out
    return sample


def plane_ball_sampler(radius):
    """Area-uniform points of the hyperbolic disc of given radius about i."""
    def sample(rng, size):
        u = rng.random(size)
        r = np.arccosh(1.0 + u * (math.cosh(radius) - 1.0))
        w = np.tanh(r / 2) * np.exp(2j * np.pi * rng.random(size))
        return 1j * (1 + w) / (1 - w)
    return sample


def _plane_dist_array(z, w):
    return 2.0 * np.arcsinh(np.abs(z - w) / (2.0 * np.sqrt(z.imag * w.imag)))


def estimate_delta(sampler, quadruples, seed=0, batch=200_000):
    """Largest observed four-point defect over random quadruples.

    For each quadruple (x, y, z, o) the three products at o are sorted and
    the defect is (middle - smallest), the least delta that quadruple needs.
    """
    if quadruples < 1:
        raise ValueError("quadruples must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < quadruples:
        m = min(batch, quadruples - done)
        pts = sampler(rng, 4 * m)
        if isinstance(pts, np.ndarray) and np.iscomplexobj(pts):
            x, y, z, o = pts.reshape(4, m)
            dxo, dyo, dzo = (_plane_dist_array(p, o) for p in (x, y, z))
            p_xy = 0.5 * (dxo + dyo - _plane_dist_array(x, y))
            p_xz = 0.5 * (dxo + dzo - _plane_dist_array(x, z))
            p_yz = 0.5 * (dyo + dzo - _plane_dist_array(y, z))
            s = np.sort(np.stack([p_xy, p_xz, p_yz]), axis=0)
            worst = max(worst, float((s[1] - s[0]).max()))
        else:
            for j in range(m):
                x, y, z, o = pts[4 * j: 4 * j + 4]
                s = sorted([gromov_product(x, y, o), gromov_product(x, z, o),
                            gromov_product(y, z, o)])
                worst = max(worst, float(s[1] - s[0]))
        done += m
    return worst


def cyclic_words(rank, length):
    """Reduced words of exactly ``length`` letters (helper for enumeration)."""
    letters = [*range(1, rank + 1), *range(-rank, 0)]
    for w in product(letters, repeat=length):
        if all(a != -b for a, b in zip(w, w[1:])):
            yield Word(w, rank)
