"""Edit-level scoring with per-edit weights.

Uniform weights give ERRANT-style scores, weights read from a file give
PT-ERRANT-style scores, and correction-difficulty weights give GoToScorer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .align import extract_edits
from .core import Edit, EditSet, MetricResult, PRFScore, UsageError, as_tokens, check_parallel, f_beta


class EditWeightProvider:
    default: float = 1.0

    def weight(self, sentence_index: int, edit: Edit) -> float:
        return self.default


class UniformWeights(EditWeightProvider):
    def __init__(self, value: float = 1.0):
        if not value >= 0:
            raise UsageError("weights must be non-negative")
        self.default = value


class WeightFileError(ValueError):
    pass


class TableWeights(EditWeightProvider):
    def __init__(self, table: Dict[Tuple[int, int, int, Tuple[str, ...]], float], default: float = 1.0):
        self.table = dict(table)
        self.default = default

    def weight(self, sentence_index: int, edit: Edit) -> float:
        return self.table.get((sentence_index, edit.src_start, edit.src_end, edit.replacement), self.default)


def load_edit_weights(path, default: float = 1.0) -> TableWeights:
    """Read ``sentence_index<TAB>start<TAB>end<TAB>replacement<TAB>weight`` lines."""
    table = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise WeightFileError(f"{path}:{lineno}: expected 5 tab-separated fields, got {len(fields)}")
            try:
                idx, start, end = int(fields[0]), int(fields[1]), int(fields[2])
                w = float(fields[4])
            except ValueError:
                raise WeightFileError(f"{path}:{lineno}: malformed number") from None
            if not w >= 0:
                raise WeightFileError(f"{path}:{lineno}: negative weight {w}")
            table[(idx, start, end, tuple(fields[3].split()))] = w
    return TableWeights(table, default)


@dataclass(frozen=True)
class EditCounts:
    """Weighted true-positive, false-positive and false-negative mass.

    ``kept_tp``/``kept_fn`` hold kept-span mass (GoToScorer only); it enters
    recall but not precision.
    """

    tp: float = 0.0
    fp: float = 0.0
    fn: float = 0.0
    kept_tp: float = 0.0
    kept_fn: float = 0.0

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.kept_tp + other.kept_tp,
            self.kept_fn + other.kept_fn,
        )

    def score(self, beta: float) -> PRFScore:
        if not self.kept_tp and not self.kept_fn:
            return PRFScore.from_counts(self.tp, self.fp, self.fn, beta)
        p = self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else 1.0
        r_num = self.tp + self.kept_tp
        r_den = r_num + self.fn + self.kept_fn
        r = r_num / r_den if r_den > 0 else 1.0
        return PRFScore(p, r, f_beta(p, r, beta), beta)


def compare_edits(hyp: EditSet, ref: EditSet, weight) -> EditCounts:
    """Weighted overlap of two edit sets of the same source."""
    if hyp.source != ref.source:
        raise UsageError("edit sets refer to different sources")
    ref_keys = {(e.src_start, e.src_end, e.replacement) for e in ref}
    hyp_keys = {(e.src_start, e.src_end, e.replacement) for e in hyp}
    tp = fp = fn = 0.0
    for e in hyp:
        if (e.src_start, e.src_end, e.replacement) in ref_keys:
            tp += weight(e)
        else:
            fp += weight(e)
    for e in ref:
        if (e.src_start, e.src_end, e.replacement) not in hyp_keys:
            fn += weight(e)
    return EditCounts(tp, fp, fn)


def best_reference(candidates: Sequence[EditCounts], beta: float) -> int:
    best, best_f = 0, -1.0
    for k, c in enumerate(candidates):
        f = c.score(beta).f_beta
        if f > best_f:
            best, best_f = k, f
    return best


def score_edit_level(
    sources,
    hyps,
    refs,
    beta: float = 0.5,
    weights: Optional[EditWeightProvider] = None,
) -> MetricResult:
    """Weighted edit precision/recall/F over a corpus.

    ``refs`` is a list of reference sets, each parallel to ``sources``. Each
    sentence is scored against the reference giving it the highest F (first
    one on ties); the corpus score is F over the summed counts of those
    chosen references.
    """
    check_parallel(sources, hyps, refs)
    weights = weights or UniformWeights()
    total = EditCounts()
    sent_scores = []
    chosen = []
    for i, (src, hyp) in enumerate(zip(sources, hyps)):
        src = as_tokens(src)
        h_edits = extract_edits(src, hyp)
        cands = [compare_edits(h_edits, extract_edits(src, ref[i]), lambda e: weights.weight(i, e)) for ref in refs]
        k = best_reference(cands, beta)
        chosen.append(k)
        sent_scores.append(cands[k].score(beta).f_beta)
        total = total + cands[k]
    prf = total.score(beta)
    return MetricResult(
        prf.f_beta,
        sent_scores,
        {"precision": prf.precision, "recall": prf.recall, "beta": beta, "chosen_references": chosen},
    )


# GoToScorer


@dataclass
class DifficultyTable(EditWeightProvider):
    """Correction difficulty of reference edits and of spans that should be kept.

    ``edits`` is keyed by ``(sentence_index, start, end, replacement)`` and
    ``kept`` by ``(sentence_index, start, end)``. Hypothesis edits that are
    not reference edits take the highest difficulty among the kept spans
    they disturb, or ``default`` when they disturb none.
    """

    edits: Dict[Tuple[int, int, int, Tuple[str, ...]], float] = field(default_factory=dict)
    kept: Dict[Tuple[int, int, int], float] = field(default_factory=dict)
    num_systems: int = 0
    default: float = 1.0

    _index: Dict[int, List[Tuple[int, int, float]]] = field(default_factory=dict, init=False, repr=False)
    _indexed: int = field(default=-1, init=False, repr=False)

    def weight(self, sentence_index: int, edit: Edit) -> float:
        key = (sentence_index, edit.src_start, edit.src_end, edit.replacement)
        if key in self.edits:
            return self.edits[key]
        touched = [w for a, b, w in self.kept_spans(sentence_index) if touches(edit, a, b)]
        return max(touched) if touched else self.default

    def kept_spans(self, sentence_index: int) -> List[Tuple[int, int, float]]:
        if self._indexed != len(self.kept):
            self._index = {}
            for (i, a, b), w in sorted(self.kept.items()):
                self._index.setdefault(i, []).append((a, b, w))
            self._indexed = len(self.kept)
        return self._index.get(sentence_index, [])


def touches(edit: Edit, start: int, end: int) -> bool:
    """Whether ``edit`` changes any token of ``[start, end)`` or inserts strictly inside it."""
    if edit.is_insertion:
        return start < edit.src_start < end
    return edit.src_start < end and edit.src_end > start


def kept_spans(source_len: int, ref_edits: EditSet) -> List[Tuple[int, int]]:
    """Maximal runs of source tokens that no reference edit replaces."""
    covered = [False] * source_len
    for e in ref_edits:
        for t in range(e.src_start, e.src_end):
            covered[t] = True
    spans = []
    start = None
    for t, c in enumerate(covered + [True]):
        if not c and start is None:
            start = t
        elif c and start is not None:
            spans.append((start, t))
            start = None
    return spans


def gotoscorer_difficulty(sources, refs_first, system_outputs) -> DifficultyTable:
    """Difficulty of each first-reference edit and kept span from a pool of systems.

    The pool is ``system_outputs`` plus the unchanged sources, so it has
    ``K = len(system_outputs) + 1`` members. A reference edit reproduced by
    ``c`` members has difficulty ``1 - c/K``; a kept span left alone by ``c``
    members has difficulty ``1 - c/K``.
    """
    if len(system_outputs) == 0:
        raise UsageError("difficulty needs at least one system")
    check_parallel(sources, refs_first)
    for out in system_outputs:
        check_parallel(sources, out)
    K = len(system_outputs) + 1
    table = DifficultyTable(num_systems=K)
    for i, src in enumerate(sources):
        src = as_tokens(src)
        ref_edits = extract_edits(src, refs_first[i])
        sys_edits = [extract_edits(src, out[i]) for out in system_outputs]
        sys_keys = [{(e.src_start, e.src_end, e.replacement) for e in es} for es in sys_edits]
        for e in ref_edits:
            key = (e.src_start, e.src_end, e.replacement)
            hits = sum(key in keys for keys in sys_keys)
            table.edits[(i,) + key] = 1.0 - hits / K
        for a, b in kept_spans(len(src), ref_edits):
            # the unchanged source always leaves the span alone
            kept = 1 + sum(not any(touches(e, a, b) for e in es) for es in sys_edits)
            table.kept[(i, a, b)] = 1.0 - kept / K
    return table


def gotoscorer_counts(sentence_index: int, hyp: EditSet, ref: EditSet, table: DifficultyTable) -> EditCounts:
    """Edit counts plus kept spans: every kept span adds its difficulty to the
    recall denominator, and to the recall numerator when the hypothesis
    leaves it untouched."""
    counts = compare_edits(hyp, ref, lambda e: table.weight(sentence_index, e))
    kept_tp = kept_fn = 0.0
    for a, b, w in table.kept_spans(sentence_index):
        if any(touches(e, a, b) for e in hyp):
            kept_fn += w
        else:
            kept_tp += w
    return EditCounts(counts.tp, counts.fp, counts.fn, kept_tp, kept_fn)


def gotoscorer(sources, hyps, refs, system_outputs, beta: float = 0.5, table: Optional[DifficultyTable] = None) -> MetricResult:
    """GoToScorer against the first reference set."""
    check_parallel(sources, hyps, refs)
    if table is None:
        table = gotoscorer_difficulty(sources, refs[0], system_outputs)
    total = EditCounts()
    sent_scores = []
    for i, (src, hyp) in enumerate(zip(sources, hyps)):
        src = as_tokens(src)
        c = gotoscorer_counts(i, extract_edits(src, hyp), extract_edits(src, refs[0][i]), table)
        sent_scores.append(c.score(beta).f_beta)
        total = total + c
    prf = total.score(beta)
    return MetricResult(prf.f_beta, sent_scores, {"precision": prf.precision, "recall": prf.recall, "beta": beta, "pool_size": table.num_systems})
