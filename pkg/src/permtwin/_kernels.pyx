# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics are defined by ``_pykernels``; every
function here must return bit-identical results."""
from libc.stdint cimport uint64_t, int64_t
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t pt_mul128(uint64_t a, uint64_t b, uint64_t *lo) {
        unsigned __int128 p = (unsigned __int128)a * b;
        *lo = (uint64_t)p;
        return (uint64_t)(p >> 64);
    }
    """
    uint64_t pt_mul128(uint64_t a, uint64_t b, uint64_t *lo) nogil

cdef enum:
    MAX_CODE_LEN = 20
    MAX_MASK_BITS = 64

cdef extern from *:
    """
    template <typename It> static inline char deref_char_impl(It it) { return it->second; }
    template <typename It> static inline std::vector<uint64_t>& deref_vec_impl(It it) { return it->second; }
    template <typename It> static inline uint64_t deref_u64_impl(It it) { return it->second; }
    """
    char deref_char "deref_char_impl"(unordered_map[uint64_t, char].iterator) nogil
    vector[uint64_t]& deref_vec "deref_vec_impl"(unordered_map[uint64_t, vector[uint64_t]].iterator) nogil
    uint64_t deref_u64 "deref_u64_impl"(unordered_map[uint64_t, uint64_t].iterator) nogil




cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _next(uint64_t *state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    return _mix64(state[0])


cdef inline uint64_t _bounded(uint64_t *state, uint64_t m) noexcept nogil:
    cdef uint64_t lo, hi, threshold
    hi = pt_mul128(_next(state), m, &lo)
    if lo < m:
        threshold = (<uint64_t>0 - m) % m
        while lo < threshold:
            hi = pt_mul128(_next(state), m, &lo)
    return hi


cdef void _shuffle_into(int64_t *out, Py_ssize_t n, uint64_t seed) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef int64_t t
    cdef uint64_t state = seed
    for i in range(n):
        out[i] = i + 1
    for i in range(n - 1):
        j = i + <Py_ssize_t>_bounded(&state, <uint64_t>(n - i))
        t = out[i]
        out[i] = out[j]
        out[j] = t


def random_permutation(Py_ssize_t n, seed):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    if n > 0:
        with nogil:
            _shuffle_into(&out[0], n, s)
    return out


def random_prefix(Py_ssize_t n, Py_ssize_t m, seed):
    cdef uint64_t state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if m > n:
        m = n
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(m, dtype=np.int64)
    # sparse swap log: slot -> value for slots touched so far
    cdef vector[Py_ssize_t] keys
    cdef vector[int64_t] vals
    cdef Py_ssize_t i, j, t
    cdef int64_t vi, vj
    cdef Py_ssize_t ki, kj
    for i in range(m):
        if i < n - 1:
            j = i + <Py_ssize_t>_bounded(&state, <uint64_t>(n - i))
        else:
            j = i
        vi = i + 1
        vj = j + 1
        ki = -1
        kj = -1
        for t in range(<Py_ssize_t>keys.size()):
            if keys[t] == i:
                vi = vals[t]
                ki = t
            if keys[t] == j:
                vj = vals[t]
                kj = t
        out[i] = vj
        if kj >= 0:
            vals[kj] = vi
        else:
            keys.push_back(j)
            vals.push_back(vi)
    return out


def random_permutations(Py_ssize_t n, seeds):
    cdef cnp.ndarray[uint64_t, ndim=1] s = np.asarray(
        [int(x) & 0xFFFFFFFFFFFFFFFF for x in seeds], dtype=np.uint64)
    cdef Py_ssize_t count = s.shape[0]
    cdef cnp.ndarray[int64_t, ndim=2] rows = np.empty((count, n), dtype=np.int64)
    cdef Py_ssize_t r
    if n > 0:
        with nogil:
            for r in range(count):
                _shuffle_into(&rows[r, 0], n, s[r])
    return rows


cdef bint _contains(const int64_t *seq, int n, const int64_t *tau, int m,
                    int64_t *chosen, int depth, int start) noexcept nogil:
    cdef int i, q
    cdef int64_t v, t
    cdef bint ok
    if depth == m:
        return True
    for i in range(start, n - (m - depth) + 1):
        v = seq[i]
        t = tau[depth]
        ok = True
        for q in range(depth):
            if (chosen[q] < v) != (tau[q] < t):
                ok = False
                break
        if ok:
            chosen[depth] = v
            if _contains(seq, n, tau, m, chosen, depth + 1, i + 1):
                return True
    return False


def contains_pattern(seq, tau):
    cdef Py_ssize_t m = len(tau)
    cdef Py_ssize_t n = len(seq)
    if m == 0:
        return True
    if m > n:
        return False
    cdef cnp.ndarray[int64_t, ndim=1] s = np.asarray(seq, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] t = np.asarray(tau, dtype=np.int64)
    cdef vector[int64_t] chosen = vector[int64_t](m)
    return bool(_contains(&s[0], <int>n, &t[0], <int>m, chosen.data(), 0, 0))


cdef uint64_t _binom_capped(int n, int k) noexcept nogil:
    # saturates at 2**62, far beyond any usable node budget
    cdef uint64_t r = 1
    cdef uint64_t cap = (<uint64_t>1) << 62
    cdef int i
    if k < 0 or k > n:
        return 0
    for i in range(1, k + 1):
        if r > cap // 64:
            return cap
        r = r * <uint64_t>(n - k + i) // <uint64_t>i
    return r


def twins_at_length(perm, int k, budget=None, tau=None):
    """See ``_pykernels.twins_at_length``. Returns ``NotImplemented`` outside
    the fixed-width range (n > 64 or k > 20)."""
    cdef int n = len(perm)
    if n > MAX_MASK_BITS or k > MAX_CODE_LEN or k < 1 or 2 * k > n:
        return NotImplemented
    cdef cnp.ndarray[int64_t, ndim=1] p = np.asarray(perm, dtype=np.int64)
    cdef uint64_t limit = <uint64_t>0xFFFFFFFFFFFFFFFF
    if budget is not None:
        limit = <uint64_t>max(int(budget), 0)
    cdef int m = 0
    cdef cnp.ndarray[int64_t, ndim=1] tv
    cdef const int64_t *tp = NULL
    if tau is not None:
        m = len(tau)
        tv = np.asarray(tau, dtype=np.int64)
        if m > 0:
            tp = &tv[0]
    cdef bint use_tau = tau is not None

    cdef vector[int] idx = vector[int](k)
    cdef vector[int64_t] pv = vector[int64_t](k)
    cdef vector[uint64_t] codes = vector[uint64_t](k)
    cdef vector[uint64_t] masks = vector[uint64_t](k)
    cdef vector[int64_t] scratch = vector[int64_t](k + 1)
    cdef vector[unordered_map[uint64_t, char]] prefix_cache = \
        vector[unordered_map[uint64_t, char]](k)
    cdef unordered_map[uint64_t, vector[uint64_t]] classes
    cdef unordered_map[uint64_t, uint64_t] member
    cdef unordered_map[uint64_t, vector[uint64_t]].iterator cit
    cdef unordered_map[uint64_t, uint64_t].iterator mit
    cdef unordered_map[uint64_t, char].iterator pit
    cdef uint64_t scan_cap = _binom_capped(n - k, k)
    cdef uint64_t nodes = 0
    cdef uint64_t code, mask, other, partner = 0
    cdef bint found = False, exhausted = False, bad
    cdef int d, i, j, c, t, f
    cdef int64_t v
    cdef vector[int] free = vector[int](n)
    cdef vector[int] sub = vector[int](k)
    cdef vector[uint64_t] submask = vector[uint64_t](k)
    cdef int nfree, e

    if use_tau and m == 0:
        return None, None, _binom_capped(n, k), False

    with nogil:
        d = 0
        idx[0] = -1
        while d >= 0:
            idx[d] += 1
            i = idx[d]
            if i > n - k + d:
                d -= 1
                continue
            v = p[i]
            c = 0
            for j in range(d):
                if pv[j] < v:
                    c += 1
            pv[d] = v
            if d == 0:
                codes[0] = 0
                masks[0] = (<uint64_t>1) << i
            else:
                codes[d] = codes[d - 1] * <uint64_t>(d + 1) + <uint64_t>c
                masks[d] = masks[d - 1] | ((<uint64_t>1) << i)
            if use_tau and d + 1 >= m:
                pit = prefix_cache[d].find(codes[d])
                if pit == prefix_cache[d].end():
                    bad = _contains(pv.data(), d + 1, tp, m, scratch.data(), 0, 0)
                    prefix_cache[d][codes[d]] = <char>bad
                else:
                    bad = deref_char(pit)
                if bad:
                    nodes += _binom_capped(n - 1 - i, k - d - 1)
                    if nodes > limit:
                        exhausted = True
                        break
                    continue
            if d < k - 1:
                d += 1
                idx[d] = i
                continue
            # leaf
            nodes += 1
            if nodes > limit:
                exhausted = True
                nodes -= 1
                break
            code = codes[k - 1]
            mask = masks[k - 1]
            cit = classes.find(code)
            if cit == classes.end():
                classes[code].push_back(mask)
            else:
                if deref_vec(cit).size() <= scan_cap:
                    for t in range(<int>deref_vec(cit).size()):
                        other = deref_vec(cit)[t]
                        if (other & mask) == 0:
                            partner = other
                            found = True
                            break
                else:
                    nfree = 0
                    for f in range(n):
                        if ((mask >> f) & 1) == 0:
                            free[nfree] = f
                            nfree += 1
                    e = 0
                    sub[0] = -1
                    while e >= 0:
                        sub[e] += 1
                        if sub[e] > nfree - k + e:
                            e -= 1
                            continue
                        if e == 0:
                            submask[0] = (<uint64_t>1) << free[sub[0]]
                        else:
                            submask[e] = submask[e - 1] | ((<uint64_t>1) << free[sub[e]])
                        if e < k - 1:
                            e += 1
                            sub[e] = sub[e - 1]
                            continue
                        mit = member.find(submask[k - 1])
                        if mit != member.end() and deref_u64(mit) == code:
                            partner = submask[k - 1]
                            found = True
                            break
                if found:
                    break
                deref_vec(cit).push_back(mask)
            member[mask] = code

    if found:
        first = tuple(b for b in range(n) if (partner >> b) & 1)
        second = tuple(b for b in range(n) if (mask >> b) & 1)
        return first, second, nodes, False
    return None, None, nodes, exhausted


cdef bint _split(int pos, int L, int r, const int64_t *w, int64_t *A, int64_t *B,
                 int na, int nb, char *color) noexcept nogil:
    cdef int64_t v, x
    cdef int q
    cdef bint ok
    if pos == L:
        return True
    v = w[pos]
    if na < r:
        ok = True
        if nb > na:
            x = B[na]
            for q in range(na):
                if (A[q] < v) != (B[q] < x):
                    ok = False
                    break
        if ok:
            A[na] = v
            color[pos] = 0
            if _split(pos + 1, L, r, w, A, B, na + 1, nb, color):
                return True
    if nb < r and pos > 0:
        ok = True
        if na > nb:
            x = A[nb]
            for q in range(nb):
                if (B[q] < v) != (A[q] < x):
                    ok = False
                    break
        if ok:
            B[nb] = v
            color[pos] = 1
            if _split(pos + 1, L, r, w, A, B, na, nb + 1, color):
                return True
    return False


def tight_split(window):
    cdef int L = len(window)
    if L == 0 or L % 2:
        return None
    cdef cnp.ndarray[int64_t, ndim=1] w = np.asarray(window, dtype=np.int64)
    cdef int r = L // 2
    cdef vector[int64_t] A = vector[int64_t](r)
    cdef vector[int64_t] B = vector[int64_t](r)
    cdef vector[char] color = vector[char](L)
    cdef bint ok
    with nogil:
        ok = _split(0, L, r, &w[0], A.data(), B.data(), 0, 0, color.data())
    if not ok:
        return None
    return tuple(i for i in range(L) if color[i] == 0)
