import csv
import json
import random

import pytest

from gecmetrics.analysis import pairwise_analysis, window_analysis, write_pairwise_cells, write_window_rows
from gecmetrics.core import UsageError
from gecmetrics.meta_eval import JudgmentSet, corr_system, sentence_pair_counts
from oracles import exact_pearson, exact_spearman


def _gold_judgments(n):
    systems = [f"s{i:02d}" for i in range(n)]
    gold = {s: float(n - i) for i, s in enumerate(systems)}
    return systems, JudgmentSet(systems, [], gold)


def test_window_identity():
    systems, j = _gold_judgments(6)
    rows = window_analysis(j.system_gold, j, window=4)
    assert [r.start_rank for r in rows] == [1, 2, 3]
    assert all(r.pearson == pytest.approx(1.0) and r.spearman == pytest.approx(1.0) for r in rows)


def test_window_row_count():
    systems, j = _gold_judgments(12)
    rows = window_analysis(j.system_gold, j, window=4)
    assert [r.start_rank for r in rows] == list(range(1, 10))
    assert {r.window for r in rows} == {4}


def test_window_adjacent_inversion():
    systems, j = _gold_judgments(8)
    gold = j.system_gold
    metric = dict(gold)
    # swap the 4th and 5th systems in the human order
    metric[systems[3]], metric[systems[4]] = gold[systems[4]], gold[systems[3]]
    rows = window_analysis(metric, j, window=3)
    for r in rows:
        chunk = systems[r.start_rank - 1:r.start_rank + 2]
        x = [metric[s] for s in chunk]
        y = [gold[s] for s in chunk]
        assert r.pearson == pytest.approx(exact_pearson(x, y), abs=1e-12)
        assert r.spearman == pytest.approx(exact_spearman(x, y), abs=1e-12)
    drops = [r.start_rank for r in rows if r.spearman < 1.0]
    assert drops == [3, 4]
    assert rows[2].spearman == pytest.approx(0.5)


def test_window_constant_metric_is_absent():
    systems, j = _gold_judgments(4)
    rows = window_analysis({s: 1.0 for s in systems}, j, window=3)
    assert all(r.pearson is None and r.spearman is None for r in rows)


def test_window_bounds():
    systems, j = _gold_judgments(4)
    with pytest.raises(UsageError):
        window_analysis(j.system_gold, j, window=5)
    with pytest.raises(UsageError):
        window_analysis(j.system_gold, j, window=1)


def test_full_window_equals_corr_system():
    rng = random.Random(2)
    systems, j = _gold_judgments(7)
    metric = {s: rng.random() for s in systems}
    (row,) = window_analysis(metric, j, window=7)
    full = corr_system(metric, j)
    assert row.pearson == full.pearson and row.spearman == full.spearman


def _ranking_data():
    systems = ["A", "B", "C", "D", "E"]
    rankings = [{s: k + 1 for k, s in enumerate(systems)} for _ in range(5)]
    return systems, JudgmentSet(systems, rankings)


def test_pairwise_cell_counts():
    systems, j = _ranking_data()
    # metric follows humans except on source 0, where it prefers E over A
    scores = {s: [float(5 - k)] * 5 for k, s in enumerate(systems)}
    scores["E"] = [10.0, 1.0, 1.0, 1.0, 1.0]
    cells = {(c.rank_a, c.rank_b): c for c in pairwise_analysis(scores, j)}
    assert cells[(1, 5)].agreement == pytest.approx(0.8) and cells[(1, 5)].pair_count == 5
    assert cells[(1, 2)].agreement == 1.0
    assert len(cells) == 10


def test_pairwise_identity_and_constant():
    systems, j = _ranking_data()
    perfect = {s: [float(-k)] * 5 for k, s in enumerate(systems)}
    assert all(c.agreement == 1.0 for c in pairwise_analysis(perfect, j))
    const = {s: [0.0] * 5 for s in systems}
    assert all(c.agreement == 0.0 for c in pairwise_analysis(const, j))


def test_pairwise_counts_sum_to_decisive_pairs():
    rng = random.Random(9)
    systems = list("ABCDEF")
    rankings = []
    for _ in range(10):
        raw = {s: rng.randint(1, 4) for s in rng.sample(systems, rng.randint(2, 6))}
        order = sorted(set(raw.values()))
        rankings.append({s: order.index(v) + 1 for s, v in raw.items()})
    j = JudgmentSet(systems, rankings)
    scores = {s: [rng.choice([0.1, 0.2, 0.3]) for _ in range(10)] for s in systems}
    cells = pairwise_analysis(scores, j)
    assert sum(c.pair_count for c in cells) == sentence_pair_counts(scores, j).total


def test_writers(tmp_path):
    systems, j = _gold_judgments(4)
    rows = window_analysis({s: 1.0 for s in systems[:-1]} | {systems[-1]: 0.0}, j, window=3)
    write_window_rows(rows, tmp_path / "w.csv")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0] == "start_rank,pearson,spearman,window"
    assert len(lines) == 3
    data = json.loads((tmp_path / "w.json").read_text())
    assert data[0]["start_rank"] == 1 and data[0]["pearson"] is None

    _, jp = _ranking_data()
    cells = pairwise_analysis({s: [float(-k)] * 5 for k, s in enumerate("ABCDE")}, jp)
    write_pairwise_cells(cells, tmp_path / "p.csv")
    with open(tmp_path / "p.csv") as f:
        parsed = list(csv.DictReader(f))
    assert list(parsed[0]) == ["rank_a", "rank_b", "agreement", "pair_count"]
    assert parsed[0] == {"rank_a": "1", "rank_b": "2", "agreement": "1.0", "pair_count": "5"}
