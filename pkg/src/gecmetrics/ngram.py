"""n-gram Venn decomposition, GLEU and GREEN."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .core import MetricResult, UsageError, as_tokens, check_parallel, f_beta

GROUPS = ("TK", "TD", "TI", "OD", "OI", "UD", "UI")


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


@dataclass(frozen=True)
class NGramVenn:
    """Counts of order-``n`` grams in each region of the source/hypothesis/reference diagram.

    TK: in all three; TD: source only; TI: hypothesis and reference only;
    OD: source and reference only; OI: hypothesis only; UD: source and
    hypothesis only; UI: reference only. Repeated grams are split so that
    the regions partition each multiset (e.g. TK + UD + TI + OI = |H|).
    """

    n: int
    counts: Dict[str, int]

    def __getitem__(self, group: str) -> int:
        return self.counts[group]

    def __getattr__(self, name):
        counts = self.__dict__.get("counts")
        if counts is not None and name in counts:
            return counts[name]
        raise AttributeError(name)


def venn_counts(source, hyp, ref, n: int) -> NGramVenn:
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    s, h, r = ngrams(as_tokens(source), n), ngrams(as_tokens(hyp), n), ngrams(as_tokens(ref), n)
    c = dict.fromkeys(GROUPS, 0)
    for g in s.keys() | h.keys() | r.keys():
        cs, ch, cr = s[g], h[g], r[g]
        tk = min(cs, ch, cr)
        sh, sr, hr = min(cs, ch), min(cs, cr), min(ch, cr)
        c["TK"] += tk
        c["UD"] += sh - tk
        c["OD"] += sr - tk
        c["TI"] += hr - tk
        c["TD"] += cs - sh - sr + tk
        c["OI"] += ch - sh - hr + tk
        c["UI"] += cr - sr - hr + tk
    return NGramVenn(n, c)


def _geo_mean_or_zero(values: List[float]) -> float:
    if not values:
        return 0.0
    if any(v <= 0 for v in values):
        return 0.0
    return math.exp(math.fsum(math.log(v) for v in values) / len(values))


def _stable_mean(values: Sequence[float]) -> float:
    # centred on the first value so that a constant sequence returns it exactly
    x0 = values[0]
    return x0 + math.fsum(v - x0 for v in values) / len(values)


# GLEU


def _gleu_sentence_stats(src, hyp, refs_i, n_max):
    src, hyp = as_tokens(src), as_tokens(hyp)
    num = np.zeros((len(refs_i), n_max), dtype=np.int64)
    den = np.zeros(n_max, dtype=np.int64)
    ref_len = np.zeros(len(refs_i), dtype=np.int64)
    for k, ref in enumerate(refs_i):
        ref = as_tokens(ref)
        ref_len[k] = len(ref)
        for n in range(1, n_max + 1):
            v = venn_counts(src, hyp, ref, n)
            num[k, n - 1] = max(0, v["TI"] + v["TK"] - v["UD"])
            den[n - 1] = v["TI"] + v["TK"] + v["OI"] + v["UD"]
    return num, den, ref_len, len(hyp)


def gleu_from_counts(num, den, ref_len: int, hyp_len: int) -> float:
    """GLEU from summed per-order numerators/denominators and lengths.

    Orders with an empty denominator are left out of the geometric mean.
    """
    logs = []
    for a, b in zip(num, den):
        if b == 0:
            continue
        if a == 0:
            return 0.0
        logs.append(math.log(a / b))
    if not logs:
        return 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    return bp * math.exp(math.fsum(logs) / len(logs))


def gleu(sources, hyps, refs, n_max: int = 4, iterations: int = 500, seed: int = 0, n_jobs: int = 1) -> MetricResult:
    """Corpus GLEU averaged over ``iterations`` random draws of one reference per sentence.

    Sentence scores average the single-sentence GLEU over all references.
    The draw uses numpy's PCG64 generator seeded with ``seed``.
    """
    check_parallel(sources, hyps, refs)
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    if n_max < 1:
        raise UsageError("n_max must be >= 1")
    per_sentence = [[ref[i] for ref in refs] for i in range(len(sources))]
    jobs = zip(sources, hyps, per_sentence)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            stats = list(ex.map(lambda a: _gleu_sentence_stats(*a, n_max), jobs))
    else:
        stats = [_gleu_sentence_stats(*a, n_max) for a in jobs]

    N, K = len(sources), len(refs)
    sentence_scores = [
        math.fsum(gleu_from_counts(num[k], den, int(rlen[k]), hlen) for k in range(K)) / K
        for num, den, rlen, hlen in stats
    ]
    if N == 0:
        return MetricResult(0.0, [], {"seed": seed, "rng": "PCG64", "iterations": iterations, "n_max": n_max})

    num_all = np.stack([s[0] for s in stats])  # (N, K, n_max)
    den_tot = np.stack([s[1] for s in stats]).sum(axis=0)
    rlen_all = np.stack([s[2] for s in stats])  # (N, K)
    hyp_tot = int(sum(s[3] for s in stats))
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = np.arange(N)
    iter_scores = []
    for _ in range(iterations):
        pick = rng.integers(0, K, size=N)
        num = num_all[rows, pick].sum(axis=0)
        rlen = int(rlen_all[rows, pick].sum())
        iter_scores.append(gleu_from_counts(num, den_tot, rlen, hyp_tot))
    return MetricResult(
        _stable_mean(iter_scores),
        sentence_scores,
        {"seed": seed, "rng": "PCG64", "iterations": iterations, "n_max": n_max},
    )


# GREEN


def _green_counts(src, hyp, ref, n_max):
    """Per-order (true, true+OI+OD, true+UI+UD) triples."""
    out = []
    for n in range(1, n_max + 1):
        v = venn_counts(src, hyp, ref, n)
        true = v["TI"] + v["TD"] + v["TK"]
        out.append((true, true + v["OI"] + v["OD"], true + v["UI"] + v["UD"]))
    return out


def green_from_counts(counts, beta: float):
    """Return (precision, recall, F) from per-order count triples; 0/0 orders count as 1."""
    precisions = [t / p if p else 1.0 for t, p, _ in counts]
    recalls = [t / r if r else 1.0 for t, _, r in counts]
    p = _geo_mean_or_zero(precisions)
    r = _geo_mean_or_zero(recalls)
    return p, r, f_beta(p, r, beta)


def green(sources, hyps, refs, n_max: int = 4, beta: float = 2.0, multi_ref: str = "best") -> MetricResult:
    """GREEN: F_beta of the geometric means of n-gram precision and recall.

    With several references each sentence uses the one with the best
    sentence-level F (``multi_ref="best"``, first on ties), or the counts
    of all references (``multi_ref="average"``, sentence score = mean).
    """
    check_parallel(sources, hyps, refs)
    if multi_ref not in ("best", "average"):
        raise UsageError(f"multi_ref must be 'best' or 'average', got {multi_ref!r}")
    totals = [[0, 0, 0] for _ in range(n_max)]
    sentence_scores = []
    for i, (src, hyp) in enumerate(zip(sources, hyps)):
        src, hyp = as_tokens(src), as_tokens(hyp)
        cands = [_green_counts(src, hyp, as_tokens(ref[i]), n_max) for ref in refs]
        fs = [green_from_counts(c, beta)[2] for c in cands]
        if multi_ref == "best":
            k = max(range(len(fs)), key=lambda j: (fs[j], -j))
            used = [cands[k]]
            sentence_scores.append(fs[k])
        else:
            used = cands
            sentence_scores.append(math.fsum(fs) / len(fs))
        for c in used:
            for n, (t, p, r) in enumerate(c):
                totals[n][0] += t
                totals[n][1] += p
                totals[n][2] += r
    p, r, f = green_from_counts(totals, beta)
    return MetricResult(f, sentence_scores, {"precision": p, "recall": r, "beta": beta, "n_max": n_max, "multi_ref": multi_ref})
