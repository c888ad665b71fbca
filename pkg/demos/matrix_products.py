"""Random products of diag(2, 1/2) and a rotated copy: exponent, c and tails.

Run: python3 demos/matrix_products.py
"""
from hypconc.matprod import (estimate_c_matrix, example_measure, lyapunov_estimate,
                             lyapunov_spectrum, matrix_concentration_check)

mu = example_measure()
print("kappa_S", mu.kappa_S)
print("exponents (one QR run)", lyapunov_spectrum(mu, n=5000))
ell = lyapunov_estimate(mu, 100_000, 8, seed=0)
print(f"top exponent {ell.value:.5f} +- {ell.radius:.5f}")
c = estimate_c_matrix(mu, samples=20_000, seed=0)
print(f"c estimate {c.value:.4f} +- {c.radius:.4f}, clipped {c.clipped}")

rows = matrix_concentration_check(mu, [1000, 10_000], [0.1, 0.2], 20_000, seed=0,
                                  ell=ell.value, c=c.value)
for r in rows:
    print(f"{r.experiment:<18} n={r.n:>6} t={r.t}  emp {r.empirical:.4f}  bound {r.bound:.3g}")
