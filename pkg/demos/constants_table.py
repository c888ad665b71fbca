"""The explicit constants for the F_2 tree and the hyperbolic plane.

Run: python3 demos/constants_table.py
"""
import math

from hypconc.bounds import (c_const, covering_number, d_const, drift_lower_bound,
                            frostman_exponent, geometry_constants, tits_T_n0)
from hypconc.hypspace import plane_model, tree_model
from hypconc.spectral import kesten_norm, lazy_norm

lam = math.sqrt(3) / 2
for model in (tree_model(2), plane_model()):
    gc = geometry_constants(model)
    K0, exact = covering_number(model)
    print(f"{model.kind}: delta={gc.delta} D1={gc.D1} A0={gc.A0:.4f} K0={K0} ({'greedy' if exact else 'packing bound'})")
    print(f"  D(1, sqrt3/2) = {d_const(1, lam, gc.A0):.4e}")
    print(f"  C(1, sqrt3/2) = {c_const(1, lam, gc.A0):.4f} (infimum {c_const(1, lam, gc.A0, 'infimum'):.4f})")

gc = geometry_constants(tree_model(2))
family = lambda r: r + (1 - r) * lam
print("\nF_2 simple random walk")
print("  frostman exponent", frostman_exponent(1, family))
print("  drift lower bound", drift_lower_bound(gc, family), "(true drift 0.5)")
half = lazy_norm(kesten_norm(2), 0.5, free_srw=True).value
print("  1/2-lazy norm", half, " T =", tits_T_n0(1, half, gc).T)
