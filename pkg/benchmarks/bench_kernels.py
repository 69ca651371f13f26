"""Compare the compiled and pure-Python alignment kernels.

    python3 benchmarks/bench_kernels.py [--pairs 300] [--length 20] [--repeat 5]
"""

import argparse
import random
import timeit

from gecmetrics import kernels

WORDS = "the a an cat cats dog sat sit on in mat is was were go goes went school to".split()


def make_pairs(n, length, seed):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        src = [rng.choice(WORDS) for _ in range(length)]
        tgt = list(src)
        for _ in range(max(1, length // 5)):
            k = rng.randrange(len(tgt))
            op = rng.random()
            if op < 0.4:
                tgt[k] = rng.choice(WORDS)
            elif op < 0.7:
                del tgt[k]
            else:
                tgt.insert(k, rng.choice(WORDS))
        pairs.append((tuple(src), tuple(tgt)))
    return pairs


def bench(fn, pairs, repeat):
    best = min(timeit.repeat(lambda: [fn(a, b) for a, b in pairs], number=1, repeat=repeat))
    return best / len(pairs) * 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=300)
    ap.add_argument("--length", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    pairs = make_pairs(args.pairs, args.length, args.seed)
    texts = [(" ".join(a), " ".join(b)) for a, b in pairs]
    print(f"active backend: {kernels.BACKEND}")
    print(f"{args.pairs} pairs, {args.length} tokens each, best of {args.repeat}")
    print(f"{'kernel':<16}{'python us/pair':>16}{'compiled us/pair':>18}{'speedup':>10}")
    rows = [
        ("align_ops", kernels.python_align_ops, kernels.align_ops, pairs),
        ("char_distance", kernels.python_char_distance, kernels.char_distance, texts),
    ]
    for name, py, native, data in rows:
        t_py = bench(py, data, args.repeat)
        if kernels.BACKEND == "cython":
            assert all(py(a, b) == native(a, b) for a, b in data), f"{name}: backends disagree"
            t_native = bench(native, data, args.repeat)
            print(f"{name:<16}{t_py:>16.1f}{t_native:>18.1f}{t_py / t_native:>9.1f}x")
        else:
            print(f"{name:<16}{t_py:>16.1f}{'n/a':>18}{'':>10}")


if __name__ == "__main__":
    main()
