# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event-merge kernel.

Twin of simcore_py, specialized to 64-bit integers. The caller has
already verified that scaled times and metered amounts fit in 64
bits; anything bigger goes to the pure-Python kernel instead. Merge
order, tie-break hash, and step dispatch match the Python version
operation for operation, so both kernels produce identical meters.
"""

from libc.stdlib cimport calloc, free

ctypedef unsigned long long u64
ctypedef long long i64


cdef inline u64 _splitmix(u64 x) nogil:
    cdef u64 z = x + <u64>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline u64 _tie_hash(u64 seed, u64 stream, u64 event) nogil:
    return _splitmix(seed ^ (stream * <u64>0x9E3779B97F4A7C15)
                          ^ (event * <u64>0xBF58476D1CE4E5B9))


def tie_hash(seed, stream, event):
    return _tie_hash(<u64>seed, <u64>stream, <u64>event)


def run_merge(
    int n_nodes,
    int n_diamonds,
    list period,
    list offset,
    list count,
    list priority,
    list cascade_idx,
    base,
    list casc_start,
    list casc_len,
    list op,
    list arg,
    list num,
    list den,
    list sub,
    seed,
):
    cdef int n_streams = len(period)
    cdef int n_steps = len(op)
    cdef int i, k
    cdef i64 c_base = <i64>base
    cdef u64 c_seed = <u64>seed

    cdef i64* c_period = <i64*>calloc(n_streams if n_streams else 1, sizeof(i64))
    cdef i64* c_off = <i64*>calloc(n_streams if n_streams else 1, sizeof(i64))
    cdef i64* c_count = <i64*>calloc(n_streams if n_streams else 1, sizeof(i64))
    cdef int* c_prio = <int*>calloc(n_streams if n_streams else 1, sizeof(int))
    cdef int* c_casc = <int*>calloc(n_streams if n_streams else 1, sizeof(int))
    cdef i64* c_next_ev = <i64*>calloc(n_streams if n_streams else 1, sizeof(i64))
    cdef i64* c_next_t = <i64*>calloc(n_streams if n_streams else 1, sizeof(i64))
    cdef u64* c_next_tie = <u64*>calloc(n_streams if n_streams else 1, sizeof(u64))

    cdef int* c_start = <int*>calloc(len(casc_start) if casc_start else 1, sizeof(int))
    cdef int* c_len = <int*>calloc(len(casc_len) if casc_len else 1, sizeof(int))
    cdef int* c_op = <int*>calloc(n_steps if n_steps else 1, sizeof(int))
    cdef int* c_arg = <int*>calloc(n_steps if n_steps else 1, sizeof(int))
    cdef i64* c_num = <i64*>calloc(n_steps if n_steps else 1, sizeof(i64))
    cdef i64* c_den = <i64*>calloc(n_steps if n_steps else 1, sizeof(i64))
    cdef int* c_sub = <int*>calloc(n_steps if n_steps else 1, sizeof(int))

    cdef i64* c_meters = <i64*>calloc(n_nodes if n_nodes else 1, sizeof(i64))
    cdef i64* c_backlog = <i64*>calloc(n_diamonds if n_diamonds else 1, sizeof(i64))

    if (c_period == NULL or c_off == NULL or c_count == NULL
            or c_prio == NULL or c_casc == NULL
            or c_next_ev == NULL or c_next_t == NULL or c_next_tie == NULL
            or c_start == NULL or c_len == NULL or c_op == NULL or c_arg == NULL
            or c_num == NULL or c_den == NULL or c_sub == NULL
            or c_meters == NULL or c_backlog == NULL):
        free(c_period); free(c_off); free(c_count); free(c_prio); free(c_casc)
        free(c_next_ev); free(c_next_t); free(c_next_tie)
        free(c_start); free(c_len); free(c_op); free(c_arg)
        free(c_num); free(c_den); free(c_sub); free(c_meters); free(c_backlog)
        raise MemoryError()

    cdef i64 remaining = 0
    for i in range(n_streams):
        c_period[i] = <i64>period[i]
        c_off[i] = <i64>offset[i]
        c_count[i] = <i64>count[i]
        c_prio[i] = <int>priority[i]
        c_casc[i] = <int>cascade_idx[i]
        c_next_ev[i] = 0
        c_next_t[i] = c_off[i]
        c_next_tie[i] = _tie_hash(c_seed, <u64>i, 0)
        remaining += c_count[i]
    for i in range(len(casc_start)):
        c_start[i] = <int>casc_start[i]
        c_len[i] = <int>casc_len[i]
    for k in range(n_steps):
        c_op[k] = <int>op[k]
        c_arg[k] = <int>arg[k]
        c_num[k] = <i64>num[k]
        c_den[k] = <i64>den[k]
        c_sub[k] = <int>sub[k]

    cdef int best
    cdef i64 amt, m
    cdef int ci, start, kk

    # Explicit two-level dispatch instead of recursion: a DRAIN runs a
    # consumer cascade, which by construction contains no DRAIN.
    with nogil:
        while remaining > 0:
            best = -1
            for i in range(n_streams):
                if c_next_ev[i] >= c_count[i]:
                    continue
                if best < 0:
                    best = i
                    continue
                if c_next_t[i] < c_next_t[best]:
                    best = i
                elif c_next_t[i] == c_next_t[best]:
                    if c_prio[i] < c_prio[best]:
                        best = i
                    elif c_prio[i] == c_prio[best]:
                        if c_next_tie[i] < c_next_tie[best] or (
                            c_next_tie[i] == c_next_tie[best] and i < best
                        ):
                            best = i

            ci = c_casc[best]
            start = c_start[ci]
            for k in range(start, start + c_len[ci]):
                amt = (c_base * c_num[k]) // c_den[k]
                if c_op[k] == 0:
                    c_meters[c_arg[k]] += amt
                elif c_op[k] == 1:
                    c_backlog[c_arg[k]] += amt
                else:
                    m = c_backlog[c_arg[k]]
                    if amt < m:
                        m = amt
                    if m > 0:
                        c_backlog[c_arg[k]] -= m
                        for kk in range(c_start[c_sub[k]],
                                        c_start[c_sub[k]] + c_len[c_sub[k]]):
                            c_meters[c_arg[kk]] += (m * c_num[kk]) // c_den[kk]

            c_next_ev[best] += 1
            remaining -= 1
            if c_next_ev[best] < c_count[best]:
                c_next_t[best] = c_off[best] + c_period[best] * c_next_ev[best]
                c_next_tie[best] = _tie_hash(c_seed, <u64>best, <u64>c_next_ev[best])

    meters = [c_meters[i] for i in range(n_nodes)]
    free(c_period); free(c_off); free(c_count); free(c_prio); free(c_casc)
    free(c_next_ev); free(c_next_t); free(c_next_tie)
    free(c_start); free(c_len); free(c_op); free(c_arg)
    free(c_num); free(c_den); free(c_sub); free(c_meters); free(c_backlog)
    return meters
