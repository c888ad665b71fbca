"""Concentration bounds and Monte Carlo checks for random walks on hyperbolic spaces."""
import os

# the TBB layer shipped with some numba wheels is too old and warns on import
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"
