"""Pure-Python collapsed Gibbs sweep, the fallback for the compiled kernel.

This mirrors kmodel._gibbs draw for draw: both kernels consume the same
splitmix64 stream and evaluate the same expressions in the same order,
so they return identical topic assignments for identical inputs.  Any
change here must be applied to the .pyx twin as well.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2 ** -53


class SplitMix64:
    """Deterministic 64-bit generator (splitmix64)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53


def sample_topics(doc_ids, word_ids, n_docs, vocab_size, k, alpha, beta, iterations, seed):
    """Collapsed Gibbs sampling over a flattened token stream.

    doc_ids and word_ids give, per token, the owning document and the
    vocabulary index.  Returns the final topic assignment per token as a
    list of ints.
    """
    docs = [int(d) for d in doc_ids]
    tokens = [int(w) for w in word_ids]
    n = len(docs)
    rng = SplitMix64(int(seed))

    z = [0] * n
    n_dk = [0] * (n_docs * k)
    n_kw = [0] * (k * vocab_size)
    n_k = [0] * k
    for i in range(n):
        t = int(rng.next_double() * k)
        if t >= k:
            t = k - 1
        z[i] = t
        n_dk[docs[i] * k + t] += 1
        n_kw[t * vocab_size + tokens[i]] += 1
        n_k[t] += 1

    vbeta = vocab_size * beta
    cumulative = [0.0] * k
    for _ in range(iterations):
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
            u = rng.next_double() * total
            t = 0
            while t < k - 1 and cumulative[t] <= u:
                t += 1
            z[i] = t
            n_dk[d * k + t] += 1
            n_kw[t * vocab_size + w] += 1
            n_k[t] += 1
    return z
