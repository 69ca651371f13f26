"""Window and pairwise analyses of a metric against human judgments."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from .core import UsageError
from .meta_eval import JudgmentSet, _pairs_for_source, human_system_scores, pearson, spearman

WINDOW_HEADER = ("start_rank", "pearson", "spearman", "window")
PAIRWISE_HEADER = ("rank_a", "rank_b", "agreement", "pair_count")


@dataclass(frozen=True)
class WindowRow:
    start_rank: int
    pearson: Optional[float]
    spearman: Optional[float]
    window: int


@dataclass(frozen=True)
class PairAgreementCell:
    rank_a: int
    rank_b: int
    agreement: float
    pair_count: int


def window_analysis(
    metric_scores: Mapping[str, float],
    judgments: JudgmentSet,
    window: int = 4,
    aggregation: str = "average",
    higher_is_better: bool = True,
    human: Optional[Mapping[str, Optional[float]]] = None,
    seed: int = 0,
) -> List[WindowRow]:
    """Correlations within each run of ``window`` consecutive systems in the human ranking.

    Systems are ordered by human score, best first (ties by name).
    """
    if human is None:
        human = human_system_scores(judgments, aggregation, seed=seed)
    systems = [s for s in judgments.systems if human.get(s) is not None and metric_scores.get(s) is not None]
    if window < 2 or window > len(systems):
        raise UsageError(f"window must be in [2, {len(systems)}], got {window}")
    ordered = sorted(systems, key=lambda s: (-human[s], s))
    sign = 1.0 if higher_is_better else -1.0
    rows = []
    for start in range(len(ordered) - window + 1):
        chunk = ordered[start:start + window]
        x = [sign * metric_scores[s] for s in chunk]
        y = [human[s] for s in chunk]
        rows.append(WindowRow(start + 1, pearson(x, y), spearman(x, y), window))
    return rows


def pairwise_analysis(
    sentence_scores: Mapping[str, Sequence[Optional[float]]],
    judgments: JudgmentSet,
    higher_is_better: bool = True,
) -> List[PairAgreementCell]:
    """Agreement rate per human rank pair (a, b), a < b.

    A pair agrees when the metric strictly prefers the system humans ranked
    higher. Cells are ordered by (a, b).
    """
    sign = 1 if higher_is_better else -1
    buckets: Dict[tuple, List[int]] = {}
    for i, ranking in enumerate(judgments.rankings):
        scores = {s: sentence_scores[s][i] for s in ranking if s in sentence_scores}
        for ra, rb, m in _pairs_for_source(ranking, scores, judgments.systems):
            cell = buckets.setdefault((ra, rb), [0, 0])
            cell[0] += (m * sign) > 0
            cell[1] += 1
    return [PairAgreementCell(a, b, hits / n, n) for (a, b), (hits, n) in sorted(buckets.items())]


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def write_rows(rows, header: Sequence[str], path) -> None:
    """Write dataclass rows as CSV to ``path`` and as JSON next to it."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            d = asdict(r)
            w.writerow([_fmt(d[h]) for h in header])
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump([asdict(r) for r in rows], f, indent=2)
        f.write("\n")


def write_window_rows(rows: Sequence[WindowRow], path) -> None:
    write_rows(rows, WINDOW_HEADER, path)


def write_pairwise_cells(cells: Sequence[PairAgreementCell], path) -> None:
    write_rows(cells, PAIRWISE_HEADER, path)
