# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels (hot-loop twin of ``_pykernels``).

Same streams, same draw protocol, same floating-point operation order as
the pure-Python kernels, so outputs are bit-for-bit identical. See
``jumpdensity.rng`` for the stream definition.
"""

from libc.math cimport log1p
from libc.stdint cimport int32_t, int64_t, uint64_t

import numpy as np

from ..errors import EventCapExceeded

BACKEND = "c"

STOP_FIXED_TIME = 0
STOP_INVERSE_LOCAL_TIME = 1

cdef uint64_t SPLITMIX_GAMMA = <uint64_t> 0x9E3779B97F4A7C15
cdef uint64_t SPLITMIX_M1 = <uint64_t> 0xBF58476D1CE4E5B9
cdef uint64_t SPLITMIX_M2 = <uint64_t> 0x94D049BB133111EB
cdef uint64_t STREAM_MULT = <uint64_t> 0xDA942042E4DD58B5
cdef double DOUBLE_SCALE = 2.0 ** -53


cdef struct XoState:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t _splitmix_out(uint64_t* x) noexcept nogil:
    cdef uint64_t z
    x[0] = x[0] + SPLITMIX_GAMMA
    z = x[0]
    z = (z ^ (z >> 30)) * SPLITMIX_M1
    z = (z ^ (z >> 27)) * SPLITMIX_M2
    return z ^ (z >> 31)


cdef inline void _stream_init(XoState* st, uint64_t seed,
                              uint64_t stream_id) noexcept nogil:
    cdef uint64_t x = seed ^ (stream_id * STREAM_MULT)
    st.s0 = _splitmix_out(&x)
    st.s1 = _splitmix_out(&x)
    st.s2 = _splitmix_out(&x)
    st.s3 = _splitmix_out(&x)
    if not (st.s0 | st.s1 | st.s2 | st.s3):
        st.s0 = 1


cdef inline double _next_double(XoState* st) noexcept nogil:
    cdef uint64_t t = st.s0 + st.s3
    cdef uint64_t out = ((t << 23) | (t >> 41)) + st.s0
    t = st.s1 << 17
    st.s2 ^= st.s0
    st.s3 ^= st.s1
    st.s1 ^= st.s2
    st.s0 ^= st.s3
    st.s2 ^= t
    st.s3 = (st.s3 << 45) | (st.s3 >> 19)
    return <double> (out >> 11) * DOUBLE_SCALE


cdef int64_t _run_stats(const int64_t* indptr, const int32_t* nbr,
                        const double* wts, const double* rates,
                        int start, int stop_kind, double stop_param,
                        int site, uint64_t seed, uint64_t stream_id,
                        int64_t cap, double* ell, int64_t* k,
                        int32_t* parent, double* horizon,
                        int32_t* final) noexcept nogil:
    """One replica; returns the event count, or -1 on event-cap overrun."""
    cdef XoState st
    cdef double t = 0.0, lsite = 0.0, u, h, thr, acc
    cdef int cur = start, j
    cdef int64_t nev = 0, p, end
    _stream_init(&st, seed, stream_id)
    while True:
        u = _next_double(&st)
        h = -log1p(-u) / rates[cur]
        if stop_kind == 0:
            if t + h >= stop_param:
                ell[cur] += stop_param - t
                horizon[0] = stop_param
                break
        else:
            if cur == site and lsite + h >= stop_param:
                horizon[0] = t + (stop_param - lsite)
                ell[site] = stop_param
                break
        ell[cur] += h
        if cur == site:
            lsite += h
        t += h

        u = _next_double(&st)
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
            return -1
        k[p] += 1
        parent[cur] = j
        cur = j

    parent[cur] = -1
    final[0] = <int32_t> cur
    return nev


def sample_path(g_arrays, start, stop_kind, stop_param, site, seed,
                stream_id, cap):
    """Sample one trajectory; returns (times, targets, horizon)."""
    cdef const int64_t[::1] indptr
    cdef const int32_t[::1] nbr
    cdef const double[::1] wts
    cdef const double[::1] rates
    indptr, nbr, wts, rates = g_arrays

    cdef int64_t capacity = 256
    cdef int64_t cap_c = cap
    times_arr = np.empty(capacity, dtype=np.float64)
    targets_arr = np.empty(capacity, dtype=np.int32)
    cdef double[::1] times = times_arr
    cdef int32_t[::1] targets = targets_arr

    cdef XoState st
    cdef double t = 0.0, lsite = 0.0, u, h, thr, acc, param = stop_param
    cdef double horizon = 0.0
    cdef int cur = start, j, kind = stop_kind, site_c = site
    cdef int64_t nev = 0, p, end
    cdef bint overflow = False
    _stream_init(&st, <uint64_t> seed, <uint64_t> stream_id)
    while True:
        u = _next_double(&st)
        h = -log1p(-u) / rates[cur]
        if kind == 0:
            if t + h >= param:
                horizon = param
                break
        else:
            if cur == site_c and lsite + h >= param:
                horizon = t + (param - lsite)
                break
        if cur == site_c:
            lsite += h
        t += h

        u = _next_double(&st)
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

        if nev >= capacity:
            capacity *= 2
            new_times = np.empty(capacity, dtype=np.float64)
            new_targets = np.empty(capacity, dtype=np.int32)
            new_times[:nev] = times_arr[:nev]
            new_targets[:nev] = targets_arr[:nev]
            times_arr, targets_arr = new_times, new_targets
            times, targets = times_arr, targets_arr
        times[nev] = t
        targets[nev] = j
        nev += 1
        if nev > cap_c:
            overflow = True
            break
        cur = j

    if overflow:
        raise EventCapExceeded("path exceeded %d events before stopping" % cap)
    return times_arr[:nev].copy(), targets_arr[:nev].copy(), horizon


def stats_batch(g_arrays, start, stop_kind, stop_param, site, seed, r0, n,
                cap, out_ell, out_k, out_parent, out_final, out_horizon,
                out_nev):
    """Simulate replicas r0..r0+n-1 into the preallocated output arrays."""
    cdef const int64_t[::1] indptr
    cdef const int32_t[::1] nbr
    cdef const double[::1] wts
    cdef const double[::1] rates
    indptr, nbr, wts, rates = g_arrays

    cdef double[:, ::1] ell = out_ell
    cdef int64_t[:, ::1] k = out_k
    cdef int32_t[:, ::1] parent = out_parent
    cdef int32_t[::1] final = out_final
    cdef double[::1] horizon = out_horizon
    cdef int64_t[::1] nev = out_nev

    cdef int start_c = start, kind = stop_kind, site_c = site
    cdef double param = stop_param
    cdef uint64_t seed_c = <uint64_t> seed
    cdef int64_t r0_c = r0, n_c = n, cap_c = cap, r, got
    cdef Py_ssize_t nv = rates.shape[0], ne = wts.shape[0], i
    cdef int64_t failed = -1

    with nogil:
        for r in range(n_c):
            for i in range(nv):
                ell[r, i] = 0.0
                parent[r, i] = -2
            for i in range(ne):
                k[r, i] = 0
            got = _run_stats(&indptr[0], &nbr[0], &wts[0], &rates[0],
                             start_c, kind, param, site_c, seed_c,
                             <uint64_t> (r0_c + r), cap_c,
                             &ell[r, 0], &k[r, 0], &parent[r, 0],
                             &horizon[r], &final[r])
            if got < 0:
                failed = r
                break
            nev[r] = got

    if failed >= 0:
        raise EventCapExceeded(
            "replica %d exceeded %d events before stopping"
            % (r0 + failed, cap))
