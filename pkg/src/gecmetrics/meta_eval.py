"""Agreement between metric scores and human judgments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from statistics import NormalDist
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import UsageError

AGGREGATIONS = ("average", "expected_wins", "trueskill")


# Correlation primitives


def average_ranks(values: Sequence[float], descending: bool = False) -> List[float]:
    """1-based ranks, tied values sharing the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: -values[i] if descending else values[i])
    ranks = [0.0] * len(values)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and values[order[end + 1]] == values[order[pos]]:
            end += 1
        r = (pos + end) / 2 + 1
        for t in range(pos, end + 1):
            ranks[order[t]] = r
        pos = end + 1
    return ranks


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Pearson's r; ``None`` when either side is constant or shorter than 2."""
    if len(x) != len(y):
        raise UsageError("vectors differ in length")
    n = len(x)
    if n < 2:
        return None
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0 or syy == 0:
        return None
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    return pearson(average_ranks(x), average_ranks(y))


def kendall(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Kendall's tau-b."""
    if len(x) != len(y):
        raise UsageError("vectors differ in length")
    conc = disc = tie_x = tie_y = 0
    for i, j in combinations(range(len(x)), 2):
        sx = (x[i] > x[j]) - (x[i] < x[j])
        sy = (y[i] > y[j]) - (y[i] < y[j])
        if sx == 0 and sy == 0:
            continue
        if sx == 0:
            tie_x += 1
        elif sy == 0:
            tie_y += 1
        elif sx == sy:
            conc += 1
        else:
            disc += 1
    denom = math.sqrt((conc + disc + tie_x) * (conc + disc + tie_y))
    if denom == 0:
        return None
    return (conc - disc) / denom


# Judgments


@dataclass
class JudgmentSet:
    """Per-source human rankings (1 = best, ties share a rank) and official system scores."""

    systems: List[str]
    rankings: List[Dict[str, int]]
    system_gold: Dict[str, float] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        known = set(self.systems)
        if len(known) != len(self.systems):
            raise UsageError("duplicate system names")
        for i, ranking in enumerate(self.rankings):
            unknown = set(ranking) - known
            if unknown:
                raise UsageError(f"source {i}: unknown systems {sorted(unknown)}")
        unknown = set(self.system_gold) - known
        if unknown:
            raise UsageError(f"gold scores for unknown systems {sorted(unknown)}")

    def ordered_pairs(self) -> List[Tuple[int, int, bool]]:
        """All comparisons as (better, worse, is_tie) system indices.

        Order follows sources, then ``systems`` order, so renaming systems
        leaves the sequence unchanged.
        """
        pos = {s: k for k, s in enumerate(self.systems)}
        out = []
        for ranking in self.rankings:
            present = sorted(ranking, key=pos.__getitem__)
            for a, b in combinations(present, 2):
                ra, rb = ranking[a], ranking[b]
                if ra <= rb:
                    out.append((pos[a], pos[b], ra == rb))
                else:
                    out.append((pos[b], pos[a], False))
        return out

    def relabel(self, mapping: Mapping[str, str]) -> "JudgmentSet":
        return JudgmentSet(
            [mapping[s] for s in self.systems],
            [{mapping[s]: r for s, r in ranking.items()} for ranking in self.rankings],
            {mapping[s]: v for s, v in self.system_gold.items()},
            self.label,
        )


@dataclass
class CorrResult:
    pearson: Optional[float] = None
    spearman: Optional[float] = None
    accuracy: Optional[float] = None
    kendall: Optional[float] = None

    def as_dict(self) -> Dict[str, Optional[float]]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


# System-level aggregation of human judgments


def expected_wins(judgments: JudgmentSet) -> Dict[str, Optional[float]]:
    """Mean over opponents of wins / (wins + losses); ties are ignored."""
    if len(judgments.systems) < 2:
        raise UsageError("expected wins needs at least two systems")
    n = len(judgments.systems)
    wins = [[0] * n for _ in range(n)]
    for a, b, tie in judgments.ordered_pairs():
        if not tie:
            wins[a][b] += 1
    out = {}
    for a, name in enumerate(judgments.systems):
        ratios = [wins[a][b] / (wins[a][b] + wins[b][a]) for b in range(n) if b != a and wins[a][b] + wins[b][a]]
        out[name] = math.fsum(ratios) / len(ratios) if ratios else None
    return out


@dataclass
class RatingState:
    mu: Dict[str, float]
    sigma: Dict[str, float]

    def __post_init__(self):
        for s, v in self.sigma.items():
            if not v > 0:
                raise ValueError(f"non-positive sigma for {s}")


_STD = NormalDist()
_SQRT2 = math.sqrt(2.0)


def _pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _v_win(t: float, eps: float) -> float:
    x = t - eps
    denom = _cdf(x)
    if denom < 1e-300:
        return -x
    return _pdf(x) / denom


def _w_win(t: float, eps: float) -> float:
    x = t - eps
    v = _v_win(t, eps)
    w = v * (v + x)
    return min(max(w, 0.0), 1.0)


def _v_draw(t: float, eps: float) -> float:
    a = abs(t)
    denom = _cdf(eps - a) - _cdf(-eps - a)
    if denom < 1e-300:
        v = -a + eps if a > eps else 0.0
    else:
        v = (_pdf(-eps - a) - _pdf(eps - a)) / denom
    return -v if t < 0 else v


def _w_draw(t: float, eps: float) -> float:
    a = abs(t)
    denom = _cdf(eps - a) - _cdf(-eps - a)
    if denom < 1e-300:
        return 1.0
    v = _v_draw(a, eps)
    w = v * v + ((eps - a) * _pdf(eps - a) + (eps + a) * _pdf(eps + a)) / denom
    return min(max(w, 0.0), 1.0)


def trueskill_rank(
    judgments: JudgmentSet,
    seed: int = 0,
    passes: int = 10,
    mu0: float = 25.0,
    sigma0: float = 25.0 / 3,
    beta: Optional[float] = None,
    tau: Optional[float] = None,
    draw_probability: Optional[float] = None,
) -> RatingState:
    """Two-player Gaussian skill updates over every pairwise comparison.

    The comparison list is replayed ``passes`` times, each time in an order
    drawn from PCG64(``seed``). The draw margin is set from the observed
    tie rate unless ``draw_probability`` is given.
    """
    if len(judgments.systems) < 2:
        raise UsageError("TrueSkill needs at least two systems")
    beta = sigma0 / 2 if beta is None else beta
    tau = sigma0 / 100 if tau is None else tau
    pairs = judgments.ordered_pairs()
    if draw_probability is None:
        draw_probability = sum(t for _, _, t in pairs) / len(pairs) if pairs else 0.0
    draw_probability = min(draw_probability, 0.99)
    eps = _STD.inv_cdf((draw_probability + 1) / 2) * _SQRT2 * beta

    n = len(judgments.systems)
    mu = [mu0] * n
    var = [sigma0 * sigma0] * n
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(passes):
        for idx in rng.permutation(len(pairs)):
            a, b, tie = pairs[idx]
            va = var[a] + tau * tau
            vb = var[b] + tau * tau
            c = math.sqrt(2 * beta * beta + va + vb)
            t = (mu[a] - mu[b]) / c
            e = eps / c
            if tie:
                v, w = _v_draw(t, e), _w_draw(t, e)
            else:
                v, w = _v_win(t, e), _w_win(t, e)
            mu[a] += va / c * v
            mu[b] -= vb / c * v
            var[a] = va * (1 - va / (c * c) * w)
            var[b] = vb * (1 - vb / (c * c) * w)
    return RatingState(
        dict(zip(judgments.systems, mu)),
        {s: math.sqrt(max(v, 1e-12)) for s, v in zip(judgments.systems, var)},
    )


def human_system_scores(
    judgments: JudgmentSet, aggregation: str = "average", seed: int = 0, passes: int = 10
) -> Dict[str, Optional[float]]:
    """Human system-level scores: the official ones for ``average``, else recomputed from rankings."""
    if aggregation == "average":
        if not judgments.system_gold:
            raise UsageError("judgments carry no official system scores")
        return dict(judgments.system_gold)
    if aggregation == "expected_wins":
        return expected_wins(judgments)
    if aggregation == "trueskill":
        return trueskill_rank(judgments, seed=seed, passes=passes).mu
    raise UsageError(f"unknown aggregation {aggregation!r}; expected one of {AGGREGATIONS}")


def corr_system(
    metric_scores: Mapping[str, float],
    judgments: JudgmentSet,
    aggregation: str = "average",
    higher_is_better: bool = True,
    seed: int = 0,
    passes: int = 10,
    human: Optional[Mapping[str, Optional[float]]] = None,
) -> CorrResult:
    """Pearson and Spearman between metric and human system scores.

    Only systems scored on both sides are used; fewer than three is an
    error. A constant side yields absent correlations.
    """
    if human is None:
        human = human_system_scores(judgments, aggregation, seed, passes)
    systems = [s for s in judgments.systems if human.get(s) is not None and metric_scores.get(s) is not None]
    if len(systems) < 3:
        raise UsageError(f"system-level correlation needs at least 3 systems, got {len(systems)}")
    sign = 1.0 if higher_is_better else -1.0
    x = [sign * metric_scores[s] for s in systems]
    y = [human[s] for s in systems]
    return CorrResult(pearson=pearson(x, y), spearman=spearman(x, y))


@dataclass
class PairCounts:
    agree: int = 0
    disagree: int = 0
    ties: int = 0

    @property
    def total(self) -> int:
        return self.agree + self.disagree + self.ties


def _pairs_for_source(ranking: Mapping[str, int], scores: Mapping[str, Optional[float]], systems: Sequence[str]):
    """Yield (human_rank_better, human_rank_worse, metric_sign) for decisive human pairs.

    ``metric_sign`` is 1 if the metric prefers the human-preferred system,
    -1 if it prefers the other, 0 on a metric tie.
    """
    present = [s for s in systems if s in ranking and scores.get(s) is not None]
    for a, b in combinations(present, 2):
        ra, rb = ranking[a], ranking[b]
        if ra == rb:
            continue
        if ra > rb:
            a, b, ra, rb = b, a, rb, ra
        d = scores[a] - scores[b]
        yield ra, rb, (d > 0) - (d < 0)


def sentence_pair_counts(sentence_scores: Mapping[str, Sequence[Optional[float]]], judgments: JudgmentSet, higher_is_better: bool = True) -> PairCounts:
    counts = PairCounts()
    sign = 1 if higher_is_better else -1
    for i, ranking in enumerate(judgments.rankings):
        scores = {}
        for s in ranking:
            seq = sentence_scores.get(s)
            if seq is None:
                continue
            if len(seq) != len(judgments.rankings):
                raise UsageError(f"system {s!r} has {len(seq)} sentence scores for {len(judgments.rankings)} sources")
            scores[s] = seq[i]
        for _, _, m in _pairs_for_source(ranking, scores, judgments.systems):
            m *= sign
            if m > 0:
                counts.agree += 1
            elif m < 0:
                counts.disagree += 1
            else:
                counts.ties += 1
    return counts


def corr_sentence(
    sentence_scores: Mapping[str, Sequence[Optional[float]]],
    judgments: JudgmentSet,
    higher_is_better: bool = True,
    metric_ties: str = "count",
) -> CorrResult:
    """Pairwise accuracy and Kendall's tau against per-source human rankings.

    Pairs tied by humans are skipped. With ``metric_ties="count"`` a metric
    tie counts as neither agreement nor disagreement but stays in the
    denominator; ``"exclude"`` drops such pairs.
    """
    if metric_ties not in ("count", "exclude"):
        raise UsageError("metric_ties must be 'count' or 'exclude'")
    c = sentence_pair_counts(sentence_scores, judgments, higher_is_better)
    denom = c.total if metric_ties == "count" else c.agree + c.disagree
    if denom == 0:
        raise UsageError("no comparable sentence pairs")
    return CorrResult(accuracy=c.agree / denom, kendall=(c.agree - c.disagree) / denom)


def judgments_from_scores(sentence_scores: Mapping[str, Sequence[Optional[float]]], systems: Sequence[str], higher_is_better: bool = True) -> JudgmentSet:
    """Turn per-sentence metric scores into per-source rankings (1 = best)."""
    n = len(next(iter(sentence_scores.values()))) if sentence_scores else 0
    rankings = []
    for i in range(n):
        scored = {s: sentence_scores[s][i] for s in systems if s in sentence_scores and sentence_scores[s][i] is not None}
        values = sorted(set(scored.values()), reverse=higher_is_better)
        rank_of = {v: k + 1 for k, v in enumerate(values)}
        rankings.append({s: rank_of[v] for s, v in scored.items()})
    return JudgmentSet(list(systems), rankings)


def ensemble_rank(per_metric_system_scores: Sequence[Mapping[str, float]], higher_is_better: Optional[Sequence[bool]] = None) -> Dict[str, float]:
    """Mean rank of each system across metrics (1 = best, so lower is better)."""
    if len(per_metric_system_scores) < 2:
        raise UsageError("ensembling needs at least two metrics")
    systems = sorted(per_metric_system_scores[0])
    for m in per_metric_system_scores[1:]:
        if sorted(m) != systems:
            raise UsageError("metrics score different system sets")
    if higher_is_better is None:
        higher_is_better = [True] * len(per_metric_system_scores)
    total = {s: 0.0 for s in systems}
    for scores, hib in zip(per_metric_system_scores, higher_is_better):
        ranks = average_ranks([scores[s] for s in systems], descending=hib)
        for s, r in zip(systems, ranks):
            total[s] += r
    return {s: total[s] / len(per_metric_system_scores) for s in systems}
