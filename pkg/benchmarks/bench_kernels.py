"""Time the compiled and pure-Python pairwise kernels on synthetic class rows.

    python benchmarks/bench_kernels.py --classes 200 --vocab 20000 --repeat 3
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from textdifficulty import kernels


def make_rows(classes: int, vocab: int, per_class: int, seed: int):
    rng = np.random.default_rng(seed)
    rows = []
    # Zipf-like shared head plus a class-specific tail, as in real corpora
    weights = 1.0 / np.arange(1, vocab + 1)
    weights /= weights.sum()
    for _ in range(classes):
        keys = np.unique(rng.choice(vocab, size=per_class, p=weights))
        counts = rng.integers(1, 50, size=len(keys)).astype(np.float64)
        rows.append(dict(zip(keys.tolist(), counts.tolist())))
    return rows


def inputs(rows, top_k: int = 10):
    vocab = {k: k for r in rows for k in r}
    roots = [{k: math.sqrt(v / sum(r.values())) for k, v in r.items()} for r in rows]
    hell = kernels.pack_rows(roots, vocab)
    tops = [sorted(r, key=lambda k: (-r[k], k))[:top_k] for r in rows]
    union = {k for t in tops for k in t}
    counts = kernels.pack_rows([{k: v for k, v in r.items() if k in union} for r in rows], vocab)
    tpack = kernels.pack_rows([dict.fromkeys(t, 1.0) for t in tops], vocab)
    totals = np.array([sum(r.values()) for r in rows])
    return hell, (*counts, tpack[0], tpack[1], totals)


def best_of(fn, args, repeat: int) -> tuple[float, np.ndarray]:
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--classes", type=int, default=200)
    ap.add_argument("--vocab", type=int, default=20000)
    ap.add_argument("--per-class", type=int, default=3000, help="draws per class row")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rows = make_rows(args.classes, args.vocab, args.per_class, args.seed)
    hell_args, mi_args = inputs(rows)
    backends = kernels.available_backends()
    pairs = args.classes * (args.classes - 1) // 2
    print(f"classes={args.classes} pairs={pairs} nnz={len(hell_args[1])} backends={sorted(backends)}")
    results = {}
    for name, impl in sorted(backends.items()):
        th, h = best_of(impl.hellinger_condensed, hell_args, args.repeat)
        tm, m = best_of(impl.top_mi_condensed, mi_args, args.repeat)
        results[name] = (h, m)
        print(f"{name:>7}: hellinger {th * 1e3:9.2f} ms   top-MI {tm * 1e3:9.2f} ms")
    if len(results) == 2:
        dh = float(np.max(np.abs(results["cython"][0] - results["python"][0])))
        dm = float(np.max(np.abs(results["cython"][1] - results["python"][1])))
        print(f"max |cython - python|: hellinger {dh:.2e}, top-MI {dm:.2e}")


if __name__ == "__main__":
    main()
