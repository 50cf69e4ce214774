"""Pure-Python sampling kernels (fallback twin of the C kernels).

Both kernel implementations follow the exact same draw protocol on the
same streams (see :mod:`jumpdensity.rng`), so their outputs are bit-for-bit
identical: per jump, one uniform for the holding time (inverse-CDF
exponential at the current vertex's exit rate) and one uniform for the
target (linear scan of the CSR weights against ``u * rate``).

Stop kinds: 0 = fixed time horizon, 1 = inverse local time at ``site``.
"""

import math

import numpy as np

from ..errors import EventCapExceeded
from ..rng import stream_state

BACKEND = "python"

_MASK = (1 << 64) - 1
_SCALE = 2.0 ** -53

STOP_FIXED_TIME = 0
STOP_INVERSE_LOCAL_TIME = 1


def _run_path(indptr, nbr, wts, rates, start, stop_kind, stop_param, site,
              seed, stream_id, cap, ell, k_counts, parent, record):
    """Advance one replica; mutates the per-path accumulators in place.

    Returns (times, targets, horizon, n_events). ``times``/``targets`` are
    Python lists, filled only when ``record`` is true.
    """
    s0, s1, s2, s3 = stream_state(seed, stream_id)
    times = []
    targets = []
    t = 0.0
    cur = start
    lsite = 0.0
    nev = 0
    while True:
        # uniform draw #1: holding time
        tt = (s0 + s3) & _MASK
        out = (((tt << 23) | (tt >> 41)) + s0) & _MASK
        tt = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= tt
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        u = (out >> 11) * _SCALE
        h = -math.log1p(-u) / rates[cur]

        if stop_kind == STOP_FIXED_TIME:
            if t + h >= stop_param:
                ell[cur] += stop_param - t
                horizon = stop_param
                break
        else:
            if cur == site and lsite + h >= stop_param:
                horizon = t + (stop_param - lsite)
                ell[site] = stop_param  # hit the budget exactly
                break
        ell[cur] += h
        if cur == site:
            lsite += h
        t += h

        # uniform draw #2: jump target
        tt = (s0 + s3) & _MASK
        out = (((tt << 23) | (tt >> 41)) + s0) & _MASK
        tt = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= tt
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        u = (out >> 11) * _SCALE

        thr = u * rates[cur]
        p = indptr[cur]
        end = indptr[cur + 1] - 1
        acc = 0.0
        while p < end:
            acc += wts[p]
            if thr < acc:
                break
            p += 1
        j = nbr[p]

        nev += 1
        if nev > cap:
            raise EventCapExceeded(
                "path exceeded %d events before stopping" % cap)
        k_counts[p] += 1
        parent[cur] = j
        if record:
            times.append(t)
            targets.append(j)
        cur = j

    parent[cur] = -1  # endpoint is the last-exit root
    return times, targets, horizon, nev, cur


def sample_path(g_arrays, start, stop_kind, stop_param, site, seed,
                stream_id, cap):
    """Sample one trajectory; returns (times, targets, horizon).

    ``g_arrays`` is the (indptr, nbr, wts, rates) CSR tuple of the graph.
    """
    indptr, nbr, wts, rates = (a.tolist() for a in g_arrays)
    n = len(rates)
    ell = [0.0] * n
    k = [0] * len(wts)
    parent = [-2] * n
    times, targets, horizon, _, _ = _run_path(
        indptr, nbr, wts, rates, start, stop_kind, stop_param, site,
        seed, stream_id, cap, ell, k, parent, record=True)
    return (np.asarray(times, dtype=np.float64),
            np.asarray(targets, dtype=np.int32),
            horizon)


def stats_batch(g_arrays, start, stop_kind, stop_param, site, seed, r0, n,
                cap, out_ell, out_k, out_parent, out_final, out_horizon,
                out_nev):
    """Simulate replicas r0..r0+n-1 and store their extracted statistics.

    Replica r draws from stream (seed, r); nothing is kept per path beyond
    local times, crossing counts (CSR order), the last-exit parent vector
    (-1 root, -2 unvisited), the final state, the horizon, and the event
    count.
    """
    indptr, nbr, wts, rates = (a.tolist() for a in g_arrays)
    nv = len(rates)
    ne = len(wts)
    for r in range(n):
        ell = [0.0] * nv
        k = [0] * ne
        parent = [-2] * nv
        _, _, horizon, nev, final = _run_path(
            indptr, nbr, wts, rates, start, stop_kind, stop_param, site,
            seed, r0 + r, cap, ell, k, parent, record=False)
        out_ell[r, :] = ell
        out_k[r, :] = k
        out_parent[r, :] = parent
        out_final[r] = final
        out_horizon[r] = horizon
        out_nev[r] = nev
