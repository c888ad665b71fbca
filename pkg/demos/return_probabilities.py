"""How slowly the return-probability roots approach the Kesten value.

p_{2n}(e)^{1/2n} behaves like (sqrt3/2) n^{-3/(4n)}, so twenty steps still
sit near 0.78.  The exact series reaches 0.85 only after a few hundred steps.

Run: python3 demos/return_probabilities.py
"""
import math

from hypconc.spectral import kesten_norm, return_prob_estimate
from hypconc.walk import FiniteMeasure

target = kesten_norm(2).value
est = return_prob_estimate(FiniteMeasure.srw(2), 400)
for n in (1, 5, 10, 20, 50, 100, 200, 400):
    v = est[n - 1].value
    print(f"n={n:>4}  root {v:.6f}  gap {target - v:.2e}  n^(-3/(4n)) factor {n ** (-0.75 / n):.4f}")
print(f"limit sqrt(3)/2 = {target:.6f}")
