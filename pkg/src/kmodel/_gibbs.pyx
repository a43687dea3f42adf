# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled collapsed Gibbs sweep.

Twin of kmodel._gibbs_py: same splitmix64 stream, same expression order,
so both kernels return identical assignments for identical inputs.
Compiled with -ffp-contract=off to rule out fused multiply-add drift.
"""

from libc.stdint cimport int32_t, uint64_t

import numpy as np


cdef inline uint64_t _next_u64(uint64_t* state) noexcept nogil:
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _next_double(uint64_t* state) noexcept nogil:
    # Uniform double in [0, 1) with 53 random bits.
    return <double>(_next_u64(state) >> 11) * (1.0 / 9007199254740992.0)


def sample_topics(doc_ids, word_ids, int n_docs, int vocab_size, int k,
                  double alpha, double beta, int iterations, seed):
    """Collapsed Gibbs sampling over a flattened token stream.

    Returns the final topic assignment per token as an int32 array.
    """
    docs_arr = np.ascontiguousarray(doc_ids, dtype=np.int32)
    words_arr = np.ascontiguousarray(word_ids, dtype=np.int32)
    cdef Py_ssize_t n = docs_arr.shape[0]
    z_arr = np.zeros(n, dtype=np.int32)
    n_dk_arr = np.zeros(n_docs * k, dtype=np.int32)
    n_kw_arr = np.zeros(k * vocab_size, dtype=np.int32)
    n_k_arr = np.zeros(k, dtype=np.int32)
    cum_arr = np.zeros(k, dtype=np.float64)

    cdef const int32_t[::1] docs = docs_arr
    cdef const int32_t[::1] tokens = words_arr
    cdef int32_t[::1] z = z_arr
    cdef int32_t[::1] n_dk = n_dk_arr
    cdef int32_t[::1] n_kw = n_kw_arr
    cdef int32_t[::1] n_k = n_k_arr
    cdef double[::1] cumulative = cum_arr

    cdef uint64_t state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t i
    cdef int j, t, d, w, sweep
    cdef double vbeta = vocab_size * beta
    cdef double total, u

    with nogil:
        for i in range(n):
            t = <int>(_next_double(&state) * k)
            if t >= k:
                t = k - 1
            z[i] = t
            n_dk[docs[i] * k + t] += 1
            n_kw[t * vocab_size + tokens[i]] += 1
            n_k[t] += 1

        for sweep in range(iterations):
            for i in range(n):
                d = docs[i]
                w = tokens[i]
                t = z[i]
                n_dk[d * k + t] -= 1
                n_kw[t * vocab_size + w] -= 1
                n_k[t] -= 1
                total = 0.0
                for j in range(k):
                    total += (n_kw[j * vocab_size + w] + beta) / (n_k[j] + vbeta) * (n_dk[d * k + j] + alpha)
                    cumulative[j] = total
                u = _next_double(&state) * total
                t = 0
                while t < k - 1 and cumulative[t] <= u:
                    t += 1
                z[i] = t
                n_dk[d * k + t] += 1
                n_kw[t * vocab_size + w] += 1
                n_k[t] += 1
    return z_arr
