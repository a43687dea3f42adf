#!/usr/bin/env python3
"""Benchmark the compiled Gibbs kernel against the pure-Python fallback.

Both kernels must produce identical assignments (they share one RNG
stream); this script asserts that before reporting throughput.

Usage:
    python benchmarks/bench_gibbs.py [--docs 20] [--tokens 200]
                                     [--vocab 500] [--k 2]
                                     [--iterations 200] [--seed 13]
"""

import argparse
import time

import numpy as np

from kmodel import _gibbs_py

try:
    from kmodel import _gibbs as _gibbs_native
except ImportError:
    _gibbs_native = None


def build_corpus(n_docs, tokens_per_doc, vocab_size, seed):
    rng = np.random.default_rng(seed)
    doc_ids = np.repeat(np.arange(n_docs, dtype=np.int32), tokens_per_doc)
    word_ids = rng.integers(0, vocab_size, n_docs * tokens_per_doc).astype(np.int32)
    return doc_ids, word_ids


def run(kernel, args, doc_ids, word_ids):
    started = time.perf_counter()
    z = kernel.sample_topics(
        doc_ids, word_ids, args.docs, args.vocab, args.k,
        0.1, 0.01, args.iterations, args.seed,
    )
    elapsed = time.perf_counter() - started
    return np.asarray(z, dtype=np.int32), elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=20)
    parser.add_argument("--tokens", type=int, default=200, help="tokens per document")
    parser.add_argument("--vocab", type=int, default=500)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    doc_ids, word_ids = build_corpus(args.docs, args.tokens, args.vocab, args.seed)
    n_tokens = len(doc_ids)
    sweep_tokens = n_tokens * args.iterations
    print(f"{n_tokens} tokens, k={args.k}, {args.iterations} iterations "
          f"({sweep_tokens} token updates)")

    z_py, t_py = run(_gibbs_py, args, doc_ids, word_ids)
    print(f"python  {t_py:8.3f} s   {sweep_tokens / t_py / 1e6:8.2f} M updates/s")

    if _gibbs_native is None:
        print("native  unavailable (extension not built); nothing to compare")
        return

    z_native, t_native = run(_gibbs_native, args, doc_ids, word_ids)
    assert np.array_equal(z_py, z_native), "kernels diverged; outputs must be identical"
    print(f"native  {t_native:8.3f} s   {sweep_tokens / t_native / 1e6:8.2f} M updates/s")
    print(f"speedup {t_py / t_native:7.1f}x (identical output verified)")


if __name__ == "__main__":
    main()
