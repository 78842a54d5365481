"""Hot numeric kernels with numba and pure-numpy implementations.

The numba path is used by default when numba imports cleanly.  Setting the
environment variable ``ADSANOSOV_NO_NUMBA=1`` (before import) forces the
pure-numpy path; ``ADSANOSOV_THREADS`` caps the numba thread count.
``BACKEND`` records which path is active.

All kernels are deterministic: reductions are max/min/count, whose results
do not depend on evaluation order.
"""

from __future__ import annotations

import os

import numpy as np

_BLOCK = 512


# ---------------------------------------------------------------- numpy path

def _pair_stats_numpy(theta, ys, tol):
    """Pairwise causal statistics of boundary points (theta_i, ys_i).

    ys rows are unit vectors on the spatial sphere.  For unit null lifts
    l_i = (cos t_i, sin t_i, ys_i)/sqrt(2) the q-inner product is
    (cos d_ij - cos dt_ij)/2 with d_ij the spherical distance.

    Returns (max_inner, max_ratio, n_lightlike, min_dist):
      max_inner   -- max over pairs of the q-inner product of the lifts
      max_ratio   -- max over pairs of |dtheta| / d_sphere (1 = lightlike)
      n_lightlike -- pairs with |inner| <= tol
      min_dist    -- smallest positive spherical separation
    """
    n = len(theta)
    max_inner = -np.inf
    max_ratio = 0.0
    n_light = 0
    min_dist = np.inf
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        dots = np.clip(ys[i0:i1] @ ys.T, -1.0, 1.0)
        d = np.arccos(dots)
        dt = np.abs(theta[i0:i1, None] - theta[None, :]) % (2 * np.pi)
        dt = np.minimum(dt, 2 * np.pi - dt)
        inner = 0.5 * (dots - np.cos(dt))
        # only pairs (i, j) with global j > global i
        cols = np.arange(n)[None, :]
        rows = np.arange(i0, i1)[:, None]
        sel = cols > rows
        if not sel.any():
            continue
        inner_s = inner[sel]
        d_s = d[sel]
        dt_s = dt[sel]
        max_inner = max(max_inner, inner_s.max())
        pos = d_s > 1e-12
        if pos.any():
            max_ratio = max(max_ratio, (dt_s[pos] / d_s[pos]).max())
            min_dist = min(min_dist, d_s[pos].min())
        n_light += int((np.abs(inner_s) <= tol).sum())
    return float(max_inner), float(max_ratio), int(n_light), float(min_dist)


def _max_offdiag_inner_numpy(lifts, jdiag):
    """Max of <l_i, l_j>_q over pairs i < j (lifts rows, jdiag = metric signs)."""
    jl = lifts * jdiag[None, :]
    n = len(lifts)
    best = -np.inf
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        g = lifts[i0:i1] @ jl.T
        cols = np.arange(n)[None, :]
        rows = np.arange(i0, i1)[:, None]
        sel = cols > rows
        if sel.any():
            best = max(best, g[sel].max())
    return float(best)


def _sign_fix_numpy(lifts, jdiag, tol):
    """Greedy achronal sign fixing.

    Starting from point 0 (sign fixed so its largest-|coord| entry is
    positive), repeatedly assign to each undecided point the sign forced by
    its most decisive decided neighbour (largest |inner product|).  Returns
    the sign vector; validation is the caller's job.
    """
    n = len(lifts)
    jl = lifts * jdiag[None, :]
    signs = np.zeros(n)
    s0 = 1.0 if lifts[0][np.argmax(np.abs(lifts[0]))] >= 0 else -1.0
    signs[0] = s0
    undecided = np.ones(n, dtype=bool)
    undecided[0] = False
    g = lifts @ jl.T  # full Gram; N^2 memory acceptable at desk scale
    for _ in range(n - 1):
        if not undecided.any():
            break
        dec = ~undecided
        sub = g[np.ix_(undecided, dec)] * signs[dec][None, :]
        flat = np.abs(sub)
        best = flat.argmax(axis=1)
        rows_u = np.where(undecided)[0]
        strength = flat[np.arange(len(rows_u)), best]
        pick = int(np.argmax(strength))
        i = rows_u[pick]
        val = sub[pick, best[pick]]
        signs[i] = -1.0 if val > 0 else 1.0
        undecided[i] = False
    return signs


def _envelope_numpy(theta_s, ys_s, ygrid):
    """Upper/lower 1-Lipschitz envelopes over a sphere grid.

    f_plus(Y)  = min_i theta_i + d(Y, Y_i)
    f_minus(Y) = max_i theta_i - d(Y, Y_i)
    """
    dots = np.clip(ygrid @ ys_s.T, -1.0, 1.0)
    d = np.arccos(dots)
    f_plus = (theta_s[None, :] + d).min(axis=1)
    f_minus = (theta_s[None, :] - d).max(axis=1)
    return f_plus, f_minus


# ---------------------------------------------------------------- numba path

def _build_numba():
    import numba
    from numba import njit, prange

    nthreads = os.environ.get("ADSANOSOV_THREADS")
    if nthreads:
        try:
            numba.set_num_threads(max(1, int(nthreads)))
        except ValueError:
            pass

    @njit(cache=True, parallel=True)
    def pair_stats(theta, ys, tol):
        n = theta.shape[0]
        max_inner = -1e300
        max_ratio = 0.0
        n_light = 0
        min_dist = 1e300
        for i in prange(n):
            mi = -1e300
            mr = 0.0
            nl = 0
            md = 1e300
            for j in range(i + 1, n):
                dot = 0.0
                for k in range(ys.shape[1]):
                    dot += ys[i, k] * ys[j, k]
                if dot > 1.0:
                    dot = 1.0
                elif dot < -1.0:
                    dot = -1.0
                d = np.arccos(dot)
                dt = abs(theta[i] - theta[j]) % (2.0 * np.pi)
                if dt > np.pi:
                    dt = 2.0 * np.pi - dt
                inner = 0.5 * (dot - np.cos(dt))
                if inner > mi:
                    mi = inner
                if d > 1e-12:
                    r = dt / d
                    if r > mr:
                        mr = r
                    if d < md:
                        md = d
                if abs(inner) <= tol:
                    nl += 1
            if mi > max_inner:
                max_inner = mi
            if mr > max_ratio:
                max_ratio = mr
            if md < min_dist:
                min_dist = md
            n_light += nl
        return max_inner, max_ratio, n_light, min_dist

    @njit(cache=True, parallel=True)
    def max_offdiag_inner(lifts, jdiag):
        n = lifts.shape[0]
        m = lifts.shape[1]
        best = -1e300
        for i in prange(n):
            bi = -1e300
            for j in range(i + 1, n):
                s = 0.0
                for k in range(m):
                    s += lifts[i, k] * jdiag[k] * lifts[j, k]
                if s > bi:
                    bi = s
            if bi > best:
                best = bi
        return best

    @njit(cache=True)
    def sign_fix(lifts, jdiag, tol):
        n = lifts.shape[0]
        m = lifts.shape[1]
        jl = lifts * jdiag.reshape(1, m)
        g = lifts @ jl.T
        signs = np.zeros(n)
        imax = 0
        amax = 0.0
        for k in range(m):
            if abs(lifts[0, k]) > amax:
                amax = abs(lifts[0, k])
                imax = k
        signs[0] = 1.0 if lifts[0, imax] >= 0 else -1.0
        for _ in range(n - 1):
            besti = -1
            bestval = 0.0
            beststr = -1.0
            for i in range(n):
                if signs[i] != 0.0:
                    continue
                for j in range(n):
                    if signs[j] == 0.0:
                        continue
                    v = g[i, j] * signs[j]
                    if abs(v) > beststr:
                        beststr = abs(v)
                        bestval = v
                        besti = i
            if besti < 0:
                break
            signs[besti] = -1.0 if bestval > 0 else 1.0
        return signs

    @njit(cache=True, parallel=True)
    def envelope(theta_s, ys_s, ygrid):
        ng = ygrid.shape[0]
        ns = theta_s.shape[0]
        m = ygrid.shape[1]
        f_plus = np.empty(ng)
        f_minus = np.empty(ng)
        for i in prange(ng):
            up = 1e300
            lo = -1e300
            for j in range(ns):
                dot = 0.0
                for k in range(m):
                    dot += ygrid[i, k] * ys_s[j, k]
                if dot > 1.0:
                    dot = 1.0
                elif dot < -1.0:
                    dot = -1.0
                d = np.arccos(dot)
                if theta_s[j] + d < up:
                    up = theta_s[j] + d
                if theta_s[j] - d > lo:
                    lo = theta_s[j] - d
            f_plus[i] = up
            f_minus[i] = lo
        return f_plus, f_minus

    def pair_stats_w(theta, ys, tol):
        r = pair_stats(np.ascontiguousarray(theta, dtype=np.float64),
                       np.ascontiguousarray(ys, dtype=np.float64), tol)
        return float(r[0]), float(r[1]), int(r[2]), float(r[3])

    def max_offdiag_w(lifts, jdiag):
        return float(max_offdiag_inner(np.ascontiguousarray(lifts, dtype=np.float64),
                                       np.ascontiguousarray(jdiag, dtype=np.float64)))

    def sign_fix_w(lifts, jdiag, tol):
        return sign_fix(np.ascontiguousarray(lifts, dtype=np.float64),
                        np.ascontiguousarray(jdiag, dtype=np.float64), tol)

    def envelope_w(theta_s, ys_s, ygrid):
        return envelope(np.ascontiguousarray(theta_s, dtype=np.float64),
                        np.ascontiguousarray(ys_s, dtype=np.float64),
                        np.ascontiguousarray(ygrid, dtype=np.float64))

    return pair_stats_w, max_offdiag_w, sign_fix_w, envelope_w


if os.environ.get("ADSANOSOV_NO_NUMBA", "0") == "1":
    BACKEND = "numpy"
else:
    try:
        pair_stats, max_offdiag_inner, sign_fix, envelope = _build_numba()
        BACKEND = "numba"
    except Exception:  # pragma: no cover - exercised only without numba
        BACKEND = "numpy"

if BACKEND == "numpy":
    pair_stats = _pair_stats_numpy
    max_offdiag_inner = _max_offdiag_inner_numpy
    sign_fix = _sign_fix_numpy
    envelope = _envelope_numpy

# always-available references for benchmarking / cross-checks
numpy_impls = {
    "pair_stats": _pair_stats_numpy,
    "max_offdiag_inner": _max_offdiag_inner_numpy,
    "sign_fix": _sign_fix_numpy,
    "envelope": _envelope_numpy,
}
