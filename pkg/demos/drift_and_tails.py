"""Drift of simple random walk on F_2 and its deviation tails next to the two bound forms.

Run: python3 demos/drift_and_tails.py
"""
import math

from hypconc.bounds import a0, concentration_bound, d_const, simple_concentration_bound
from hypconc.hypspace import tree_model
from hypconc.poisson import estimate_c_walk
from hypconc.walk import FiniteMeasure, empirical_tails, estimate_drift

mu = FiniteMeasure.srw(2)
for n in (100, 1000, 10_000):
    d = estimate_drift(mu, n, 400, seed=0)
    print(f"n={n:>6}  drift {d.value:.4f} +- {d.radius:.4f}")

c = estimate_c_walk(mu, samples=50_000, seed=0)
print(f"\nc estimate {c.value:.4f} +- {c.radius:.4f} (cylinder sum gives 0.75)")

D = d_const(mu.kappa_S, math.sqrt(3) / 2, a0(tree_model(2)))
print(f"D for the headline bound: {D:.3e}\n")
print("     n     t   empirical   c-form     D-form")
for row in empirical_tails(mu, [1000, 10_000], [0.05, 0.1, 0.2], 50_000, seed=1):
    cb = simple_concentration_bound(row.n, row.t, 1.0, c.value).value
    db = concentration_bound(row.n, row.t, 1.0, D).value
    print(f"{row.n:>6}  {row.t:.2f}  {row.empirical:.5f}   {cb:.3e}  {db:.3f}")
