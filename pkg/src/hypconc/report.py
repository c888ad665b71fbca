"""Tail-report rows, Wilson intervals and CSV output."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from scipy.stats import norm

COLUMNS = ["experiment", "n", "t", "empirical", "wilson_radius", "bound",
           "bound_kind", "vacuous", "assumptions"]

BOUND_KINDS = ("D-form", "c-form", "azuma", "matrix-vector", "matrix-norm",
               "corollary-pack", "freeness-prop", "freeness-thm", "none")

Z99 = float(norm.ppf(0.995))


def wilson(successes, trials, z=Z99):
    """Wilson score interval; returns (centre, half-width)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    den = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / den
    return centre, half


@dataclass
class TailRow:
    experiment: str
    n: int
    t: float
    empirical: float
    wilson_radius: float
    bound: float = math.nan
    bound_kind: str = "none"
    vacuous: bool = False
    assumptions: list = field(default_factory=list)
    trials: int = 0

    def __post_init__(self):
        # nan marks a bound-only row with no simulation behind it
        if not (math.isnan(self.empirical) or 0.0 <= self.empirical <= 1.0):
            raise ValueError("frequency outside [0, 1]")
        if self.bound_kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.bound_kind!r}")

    def attach(self, bound):
        """Attach a `BoundValue`."""
        self.bound = bound.value
        self.bound_kind = bound.kind
        self.vacuous = bound.vacuous
        self.assumptions = list(self.assumptions) + list(bound.assumptions)
        return self

    @property
    def sigma(self):
        p = self.empirical
        return math.sqrt(max(p * (1 - p), 0.0) / self.trials) if self.trials else 0.0

    def dominated(self, slack="wilson"):
        """empirical <= min(1, bound) + slack (Wilson radius or 3 sigma)."""
        extra = self.wilson_radius if slack == "wilson" else 3 * self.sigma
        b = 1.0 if math.isnan(self.bound) else min(1.0, self.bound)
        return self.empirical <= b + extra

    def cells(self):
        return [self.experiment, str(self.n), repr(float(self.t)), _num(self.empirical),
                _num(self.wilson_radius), _num(self.bound), self.bound_kind,
                "true" if self.vacuous else "false", ";".join(self.assumptions)]


def _num(x):
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return ""
    return repr(float(x))


def tail_row(experiment, n, t, hits, trials, assumptions=()):
    _, half = wilson(hits, trials)
    return TailRow(experiment, int(n), float(t), hits / trials, half,
                   assumptions=list(assumptions), trials=trials)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()
