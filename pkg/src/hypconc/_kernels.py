"""Compiled simulation kernels.

Tree measures are passed as a padded letter table ``letters[k, :lens[k]]``
plus cumulative weights ``cum``.  Every trial draws its randomness from
``uniform(key, trial, step)`` so the output of trial j is the same whatever
thread runs it.
"""
import numpy as np
from numba import njit, prange

from .rng import trial_key, uniform_at


@njit(cache=True, inline="always")
def _pick(cum, u):
    # branch-free: count cumulative weights <= u
    k = 0
    for j in range(cum.shape[0] - 1):
        k += u >= cum[j]
    return k


@njit(cache=True, inline="always")
def _push_atom(stack, top, letters, lens, k):
    # right-multiply the reduced word stack[:top] by atom k; written
    # branch-free since push/pop is a coin flip the predictor cannot learn
    for j in range(lens[k]):
        x = letters[k, j]
        c = (top > 0) & (stack[max(top - 1, 0)] == -x)
        stack[top] = x
        top += 1 - 2 * c
    return top


@njit(cache=True, parallel=True)
def tree_lengths(letters, lens, cum, key, trials, checkpoints, maxlen):
    """|R_n| at each checkpoint n (checkpoints increasing) for every trial."""
    out = np.empty((trials, checkpoints.shape[0]), dtype=np.int64)
    nmax = checkpoints[-1]
    for t in prange(trials):
        tk = trial_key(key, t)
        stack = np.empty(maxlen, dtype=np.int64)
        top = 0
        c = 0
        for s in range(nmax):
            k = _pick(cum, uniform_at(tk, s))
            top = _push_atom(stack, top, letters, lens, k)
            while c < checkpoints.shape[0] and checkpoints[c] == s + 1:
                out[t, c] = top
                c += 1
    return out


@njit(cache=True)
def tree_trace(letters, lens, cum, key, trial, n, maxlen):
    """Atom indices and word lengths of a single trajectory."""
    steps = np.empty(n, dtype=np.int64)
    kap = np.empty(n, dtype=np.int64)
    stack = np.empty(maxlen, dtype=np.int64)
    top = 0
    tk = trial_key(key, trial)
    for s in range(n):
        k = _pick(cum, uniform_at(tk, s))
        steps[s] = k
        top = _push_atom(stack, top, letters, lens, k)
        kap[s] = top
    return steps, kap


@njit(cache=True, parallel=True)
def tree_words(letters, lens, cum, key, trials, n, maxlen):
    """Final reduced words R_n, padded with zeros."""
    words = np.zeros((trials, maxlen), dtype=np.int64)
    wl = np.empty(trials, dtype=np.int64)
    for t in prange(trials):
        tk = trial_key(key, t)
        stack = np.empty(maxlen, dtype=np.int64)
        top = 0
        for s in range(n):
            k = _pick(cum, uniform_at(tk, s))
            top = _push_atom(stack, top, letters, lens, k)
        wl[t] = top
        words[t, :top] = stack[:top]
    return words, wl


@njit(cache=True, parallel=True)
def tree_busemann(letters, lens, cum, key, trials, n, xi, maxlen):
    """|W| - 2 (W | xi) for W the n-step walk, with a depth flag.

    ``xi`` holds the known letters of the boundary point; flag is 1 when
    the common prefix used up all of them, i.e. the value is not exact.
    """
    sig = np.empty(trials, dtype=np.int64)
    flag = np.zeros(trials, dtype=np.int64)
    depth = xi.shape[0]
    for t in prange(trials):
        tk = trial_key(key, t)
        stack = np.empty(maxlen, dtype=np.int64)
        top = 0
        for s in range(n):
            k = _pick(cum, uniform_at(tk, s))
            top = _push_atom(stack, top, letters, lens, k)
        cp = 0
        while cp < top and cp < depth and stack[cp] == xi[cp]:
            cp += 1
        if cp == depth and top > depth:
            flag[t] = 1
        sig[t] = top - 2 * cp
    return sig, flag


@njit(cache=True, parallel=True)
def tree_boundary(letters, lens, cum, key, trials, depth, margin, max_steps, maxlen):
    """First ``depth`` letters of the limit word, one walk per trial.

    Stops once the word is at least depth + margin long and has not dipped
    below ``depth`` letters for ``margin`` steps.  status 1 = budget hit.
    """
    out = np.zeros((trials, depth), dtype=np.int64)
    status = np.zeros(trials, dtype=np.int64)
    for t in prange(trials):
        tk = trial_key(key, t)
        stack = np.empty(maxlen, dtype=np.int64)
        top = 0
        last_dip = 0
        done = False
        for s in range(max_steps):
            k = _pick(cum, uniform_at(tk, s))
            for j in range(lens[k]):
                x = letters[k, j]
                if top > 0 and stack[top - 1] == -x:
                    top -= 1
                    if top < depth:
                        last_dip = s + 1
                else:
                    stack[top] = x
                    top += 1
                    if top >= maxlen:
                        top = maxlen - 1
            if top >= depth + margin and s + 1 - last_dip >= margin:
                done = True
                break
        if done:
            out[t, :] = stack[:depth]
        else:
            status[t] = 1
    return out, status


# ---------------------------------------------------------------------------
# word oracle: depth-first search over reduced words in g1^{+-1}, g2^{+-1}


@njit(cache=True)
def tree_relation(gens, glens, L):
    """First relation found by depth-first search.

    gens[0..3] = g1, g1^-1, g2, g2^-1.  Returns the index sequence of a
    nontrivial reduced word of length <= L that reduces to the identity,
    or an empty array when there is none.  A single buffer holds the
    running product; each level saves only the letters it cancelled.
    """
    maxg = max(1, glens.max())
    buf = np.zeros(L * maxg + 1, dtype=np.int64)
    saved = np.zeros((L + 1, maxg), dtype=np.int64)
    popped = np.zeros(L + 1, dtype=np.int64)
    applied = np.zeros(L + 1, dtype=np.int64)
    plen = np.zeros(L + 1, dtype=np.int64)
    choice = np.full(L + 1, -1, dtype=np.int64)
    depth = 1
    while depth >= 1:
        if applied[depth]:
            top = plen[depth - 1]
            k = popped[depth]
            for j in range(k):
                buf[top - k + j] = saved[depth, j]
            applied[depth] = 0
        choice[depth] += 1
        if choice[depth] > 3:
            choice[depth] = -1
            depth -= 1
            continue
        c = choice[depth]
        if depth > 1 and (c ^ 1) == choice[depth - 1]:
            continue
        top = plen[depth - 1]
        gl = glens[c]
        k = 0
        while k < gl and k < top and buf[top - 1 - k] == -gens[c, k]:
            k += 1
        for j in range(k):
            saved[depth, j] = buf[top - k + j]
        for j in range(k, gl):
            buf[top - k + j - k] = gens[c, j]
        popped[depth] = k
        applied[depth] = 1
        plen[depth] = top - 2 * k + gl
        if plen[depth] == 0:
            return choice[1:depth + 1].copy()
        if depth < L:
            depth += 1
    return np.empty(0, dtype=np.int64)


@njit(cache=True)
def plane_relation(gens, L, tol_rel, tol_inc):
    """Same search for 2x2 matrices modulo +-I.

    status 0: no relation and no near-miss, 1: relation (distance to +-I
    below tol_rel), 2: near-miss in [tol_rel, tol_inc) only.
    """
    prod = np.zeros((L + 1, 2, 2))
    prod[0, 0, 0] = 1.0
    prod[0, 1, 1] = 1.0
    choice = np.full(L + 1, -1, dtype=np.int64)
    best = np.empty(0, dtype=np.int64)
    status = 0
    depth = 1
    while depth >= 1:
        choice[depth] += 1
        if choice[depth] > 3:
            choice[depth] = -1
            depth -= 1
            continue
        c = choice[depth]
        if depth > 1 and (c ^ 1) == choice[depth - 1]:
            continue
        a = prod[depth - 1]
        g = gens[c]
        for i in range(2):
            for j in range(2):
                prod[depth, i, j] = a[i, 0] * g[0, j] + a[i, 1] * g[1, j]
        p = prod[depth]
        dp = max(abs(p[0, 0] - 1.0), abs(p[1, 1] - 1.0), abs(p[0, 1]), abs(p[1, 0]))
        dm = max(abs(p[0, 0] + 1.0), abs(p[1, 1] + 1.0), abs(p[0, 1]), abs(p[1, 0]))
        dist = min(dp, dm)
        if dist < tol_rel:
            return 1, choice[1:depth + 1].copy()
        if dist < tol_inc and status == 0:
            status = 2
            best = choice[1:depth + 1].copy()
        if depth < L:
            depth += 1
    return status, best


# ---------------------------------------------------------------------------
# finite Markov chains


@njit(cache=True, parallel=True)
def chain_paths(cumP, f, phi, pphi, alpha, start, key, trials, n):
    """Per trajectory: |sum f(Z_i) - n alpha|, decomposition error, max |D_i|.

    Z_0 = start and Z_{i+1} ~ P(Z_i, .); the sum runs over Z_1..Z_n.
    """
    dev = np.empty(trials)
    err = np.empty(trials)
    inc = np.empty(trials)
    for t in prange(trials):
        tk = trial_key(key, t)
        z = start
        z = _pick(cumP[z], uniform_at(tk, 0))
        z1 = z
        s = 0.0
        m = 0.0
        big = 0.0
        for i in range(1, n + 1):
            s += f[z]
            nz = _pick(cumP[z], uniform_at(tk, i))
            d = phi[nz] - pphi[z]
            m += d
            if abs(d) > big:
                big = abs(d)
            z = nz
        dev[t] = abs(s - n * alpha)
        err[t] = abs((s - n * alpha) - (m + phi[z1] - phi[z]))
        inc[t] = big
    return dev, err, inc


# ---------------------------------------------------------------------------
# matrix products


@njit(cache=True, inline="always")
def _matmul_into(a, b, out, d):
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc


@njit(cache=True)
def _opnorm(a):
    d = a.shape[0]
    if d == 2:
        # sigma_max = (|(a+d, c-b)| + |(a-d, b+c)|) / 2, free of cancellation
        return 0.5 * (np.hypot(a[0, 0] + a[1, 1], a[1, 0] - a[0, 1])
                      + np.hypot(a[0, 0] - a[1, 1], a[0, 1] + a[1, 0]))
    return np.linalg.svd(a)[1][0]


@njit(cache=True, parallel=True)
def matrix_logs(mats, cum, key, trials, checkpoints, vs, every):
    """ln||R_n|| and ln||R_n v|| (unit v) at each checkpoint, R_n = X_1...X_n."""
    d = mats.shape[1]
    nc = checkpoints.shape[0]
    nv = vs.shape[0]
    lnorm = np.empty((trials, nc))
    lvec = np.empty((trials, nc, nv))
    nmax = checkpoints[-1]
    for t in prange(trials):
        tk = trial_key(key, t)
        p = np.eye(d)
        q = np.empty((d, d))
        acc = 0.0
        c = 0
        for s in range(nmax):
            k = _pick(cum, uniform_at(tk, s))
            _matmul_into(p, mats[k], q, d)
            p, q = q, p
            if (s + 1) % every == 0:
                nrm = _opnorm(p)
                acc += np.log(nrm)
                for i in range(d):
                    for j in range(d):
                        p[i, j] /= nrm
            while c < nc and checkpoints[c] == s + 1:
                lnorm[t, c] = acc + np.log(_opnorm(p))
                for r in range(nv):
                    ss = 0.0
                    for i in range(d):
                        y = 0.0
                        for j in range(d):
                            y += p[i, j] * vs[r, j]
                        ss += y * y
                    lvec[t, c, r] = acc + 0.5 * np.log(ss)
                c += 1
    return lnorm, lvec


@njit(cache=True, parallel=True)
def projective_chain(mats, cum, key, trials, steps, v0):
    """x_{k+1} = [X_{k+1} x_k] from x_0 = v0, returned after ``steps`` steps."""
    d = mats.shape[1]
    out = np.empty((trials, d))
    for t in prange(trials):
        tk = trial_key(key, t)
        x = v0.copy()
        y = np.empty(d)
        for s in range(steps):
            k = _pick(cum, uniform_at(tk, s))
            nrm = 0.0
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += mats[k, i, j] * x[j]
                y[i] = acc
                nrm += acc * acc
            nrm = np.sqrt(nrm)
            for i in range(d):
                x[i] = y[i] / nrm
        out[t] = x
    return out
