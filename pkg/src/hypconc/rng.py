"""Counter-based random numbers.

Every draw is a pure function of ``(key, trial, step)``, so a trial's random
stream does not depend on which worker runs it or in what order.  The
mixing function is the SplitMix64 finalizer applied twice, once to fold in
the trial index and once for the step index.

Streams are separated by deriving a key from ``(seed, stream)``; the two
walks of a ping-pong pair, for instance, use different stream ids.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STEP_MUL = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# stream ids used across the package
WALK = 1
WALK_PRIME = 2
BOUNDARY = 3
CHAIN = 4
MATRIX = 5
PROJECTIVE = 6
START = 7
DELTA = 8


@njit(cache=True)
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def trial_key(key, trial):
    """Per-trial key; hoist out of step loops."""
    return mix64(np.uint64(key) + np.uint64(trial) * _GOLDEN)


@njit(cache=True)
def uniform_at(tkey, step):
    z = mix64(tkey + np.uint64(step) * _STEP_MUL)
    return float(z >> _S11) * _INV53


@njit(cache=True)
def uniform(key, trial, step):
    """Uniform double in [0, 1) addressed by (key, trial, step)."""
    return uniform_at(trial_key(key, trial), step)


def stream_key(seed, stream):
    """Key for the (seed, stream) pair, as a Python int in [0, 2**64)."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return int(mix64(np.uint64(seed) ^ mix64(np.uint64(stream) + _GOLDEN)))


def uniforms(key, trial, n, offset=0):
    """Vector of ``n`` consecutive draws of one trial (testing/inspection)."""
    return _uniform_block(np.uint64(key), np.uint64(trial), n, offset)


@njit(cache=True)
def _uniform_block(key, trial, n, offset):
    out = np.empty(n)
    for i in range(n):
        out[i] = uniform(key, trial, offset + i)
    return out
