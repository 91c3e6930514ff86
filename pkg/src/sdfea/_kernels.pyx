# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled run loop for the built-in benchmarks.

Mirrors the step functions in ``algorithms.py`` draw for draw: same raw
64-bit stream, same conversions, same table lookups. Fitness is updated
incrementally from the flipped positions instead of re-scanning the string.
"""
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.stdlib cimport malloc, free
from cpython.pycapsule cimport PyCapsule_IsValid, PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cdef enum:
    SD_FEA = 0
    RLS = 1
    OEA = 2
    FEA = 3
    SD_OEA = 4
    SD_RLS_R = 5

cdef enum:
    ONEMAX = 0
    LEADINGONES = 1
    JUMP = 2


cdef inline uint64_t next64(bitgen_t* g) noexcept nogil:
    return g.next_uint64(g.state)


cdef inline double unif(bitgen_t* g) noexcept nogil:
    return <double>(next64(g) >> 11) * (1.0 / 9007199254740992.0)


cdef inline uint64_t below(bitgen_t* g, uint64_t m) noexcept nogil:
    cdef uint64_t prod = (next64(g) >> 32) * m
    cdef uint64_t low = prod & 0xFFFFFFFFULL
    cdef uint64_t threshold
    if low < m:
        threshold = ((<uint64_t>1 << 32) - m) % m
        while low < threshold:
            prod = (next64(g) >> 32) * m
            low = prod & 0xFFFFFFFFULL
    return prod >> 32


cdef inline int pow_sample(const double* cum, int u, double v) noexcept nogil:
    # smallest i with cum[i] > v * cum[u-1], as 1-based value
    cdef double target = v * cum[u - 1]
    cdef int lo = 0, hi = u, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] > target:
            hi = mid
        else:
            lo = mid + 1
    if lo > u - 1:
        lo = u - 1
    return lo + 1


cdef inline int cdf_sample(const double* cdf, int n, double v) noexcept nogil:
    cdef int k = 0
    while k < n and cdf[k] <= v:
        k += 1
    return k


cdef inline int64_t jump_value(int64_t ones, int n, int k, int delta) noexcept nogil:
    if ones > n - k and ones < n - k + delta:
        return -ones
    return ones


cdef inline int64_t leading_ones_from(const uint8_t* x, int n, int start) noexcept nogil:
    cdef int i = start
    while i < n and x[i]:
        i += 1
    return i


def run(int algo, int fkind, int fk, int fdelta, uint8_t[::1] x, object bit_generator,
        int64_t budget, const double[::1] ell, const double[::1] cum,
        const double[:, ::1] table, double gamma, int cap, bint stop_on_improvement,
        int64_t[::1] phase_iters):
    """Run one optimizer in place on ``x``.

    Returns ``(evaluations, success, final_fitness, flips_above_radius,
    improvement_radius, improvements, last_improvement_at,
    previous_improvement_at)``.
    """
    cdef int n = x.shape[0]
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    cdef bitgen_t* g = <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")
    if algo < SD_FEA or algo > SD_RLS_R:
        raise ValueError(f"unknown algorithm code {algo}")
    if fkind < ONEMAX or fkind > JUMP:
        raise ValueError(f"unknown fitness code {fkind}")
    if phase_iters.shape[0] < n + 1 or ell.shape[0] < 1:
        raise ValueError("trace or threshold array too short")

    cdef int64_t* perm = <int64_t*> malloc(n * sizeof(int64_t))
    if perm == NULL:
        raise MemoryError()
    cdef uint8_t* xp = &x[0]
    cdef const double* cump = &cum[0]
    cdef const double* tab = &table[0, 0]
    cdef int row = table.shape[1]
    cdef int64_t* trace = &phase_iters[0]

    cdef int i, j, s = 0, r = 1, s_cur = 1, a, minpos
    cdef int64_t tmp, ones = 0, lo = 0, ones_y, lo_y, fx, fy, opt = n
    cdef int64_t evals = 1, u = 0, improvements = 0, above = 0, last_at = 0, prev_at = 0
    cdef int imp_radius = 0
    cdef bint success = 0, equal, accept
    cdef double v, w, keep = 1.0 - gamma

    with nogil:
        for i in range(n):
            perm[i] = i
            ones += xp[i]
        if fkind == LEADINGONES:
            lo = leading_ones_from(xp, n, 0)
            fx = lo
        elif fkind == JUMP:
            fx = jump_value(ones, n, fk, fdelta)
        else:
            fx = ones
        success = fx == opt

        while not success and evals < budget:
            if algo == SD_FEA:
                v = unif(g)
                if v < keep:
                    s = r
                else:
                    w = (v - keep) / gamma
                    if w < 0.5:
                        s = r + pow_sample(cump, n - r if n - r > 1 else 1, 2.0 * w)
                        if s > n:
                            s = n
                    else:
                        s = r - pow_sample(cump, r - 1 if r - 1 > 1 else 1, 2.0 * w - 1.0)
            elif algo == RLS:
                s = 1
            elif algo == OEA:
                s = cdf_sample(tab + row, n, unif(g))
            elif algo == FEA:
                a = pow_sample(cump, cap, unif(g))
                s = cdf_sample(tab + a * row, n, unif(g))
            elif algo == SD_OEA:
                s = cdf_sample(tab + r * row, n, unif(g))
            else:
                s = s_cur

            # partial Fisher-Yates; flipped positions end up in perm[0..s-1]
            minpos = n
            ones_y = ones
            for i in range(s):
                j = i + <int> below(g, <uint64_t>(n - i))
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
                xp[perm[i]] ^= 1
                if xp[perm[i]]:
                    ones_y += 1
                else:
                    ones_y -= 1
                if perm[i] < minpos:
                    minpos = <int> perm[i]

            evals += 1
            trace[r] += 1
            if s > r:
                above += 1
            if algo == SD_FEA or algo == SD_OEA or algo == SD_RLS_R:
                u += 1

            if fkind == LEADINGONES:
                if minpos < lo:
                    lo_y = minpos
                elif minpos == lo:
                    lo_y = leading_ones_from(xp, n, <int> lo)
                else:
                    lo_y = lo
                fy = lo_y
            elif fkind == JUMP:
                fy = jump_value(ones_y, n, fk, fdelta)
            else:
                fy = ones_y

            if fy > fx:
                fx = fy
                ones = ones_y
                if fkind == LEADINGONES:
                    lo = lo_y
                improvements += 1
                imp_radius = r
                prev_at = last_at
                last_at = evals
                r = 1
                s_cur = 1
                u = 0
                if fy == opt or stop_on_improvement:
                    success = 1
                continue

            equal = fy == fx
            if algo == SD_FEA or algo == SD_OEA:
                accept = equal and r == 1
            elif algo == SD_RLS_R:
                accept = equal and s_cur == 1
            else:
                accept = equal
            if accept:
                ones = ones_y
                if fkind == LEADINGONES:
                    lo = lo_y
            else:
                for i in range(s):
                    xp[perm[i]] ^= 1

            if algo == SD_FEA:
                if <double> u >= ell[r]:
                    r = r + 1 if r + 1 < cap else cap
                    u = 0
            elif algo == SD_OEA:
                if <double> u > ell[r]:
                    r = r + 1 if r + 1 < cap else cap
                    u = 0
            elif algo == SD_RLS_R:
                if <double> u > ell[s_cur]:
                    if s_cur == 1:
                        r = r + 1 if r + 1 < cap else cap
                        s_cur = r
                    else:
                        s_cur -= 1
                    u = 0

    free(perm)
    return evals, bool(success), fx, above, imp_radius, improvements, last_at, prev_at
