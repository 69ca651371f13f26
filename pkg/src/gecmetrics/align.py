"""Token alignment and edit extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from . import kernels
from .core import Edit, EditSet, TokenSeq, UsageError, as_tokens

_KIND = {
    kernels.OP_MATCH: "match",
    kernels.OP_SUBSTITUTE: "substitute",
    kernels.OP_DELETE: "delete",
    kernels.OP_INSERT: "insert",
    kernels.OP_TRANSPOSE: "transpose",
}


@dataclass(frozen=True)
class AlignmentOp:
    kind: str
    src_span: Tuple[int, int]
    tgt_span: Tuple[int, int]


def alignment_cost(source, target) -> float:
    cost, _ = kernels.align_ops(as_tokens(source), as_tokens(target))
    return cost / 2


def align(source, target) -> List[AlignmentOp]:
    """Minimal-cost token alignment of ``source`` to ``target``.

    Costs: match 0, insert/delete 1, case-only substitution 1, substitution
    between tokens sharing a prefix of length >= 2 costs 1.5, any other
    substitution 2, transposing a block of k tokens costs k.
    """
    _, ops = kernels.align_ops(as_tokens(source), as_tokens(target))
    return [AlignmentOp(_KIND[op], (i0, i1), (j0, j1)) for op, i0, i1, j0, j1 in ops]


def extract_edits(source, target) -> EditSet:
    source = as_tokens(source)
    target = as_tokens(target)
    edits = []
    run = None
    for op in align(source, target):
        if op.kind == "match":
            if run is not None:
                edits.append(run)
                run = None
            continue
        if run is None:
            run = [op.src_span[0], op.src_span[1], op.tgt_span[0], op.tgt_span[1]]
        else:
            run[1] = op.src_span[1]
            run[3] = op.tgt_span[1]
    if run is not None:
        edits.append(run)
    out = []
    for s0, s1, t0, t1 in edits:
        rep = tuple(target[t0:t1])
        if tuple(source[s0:s1]) != rep:
            out.append(Edit(s0, s1, rep))
    return EditSet(source, tuple(out))


def edit_equal(a: Edit, b: Edit, source_a=None, source_b=None) -> bool:
    """Exact, case-sensitive equality of span and replacement.

    Pass the sources when available so that comparing edits of different
    sentences is caught.
    """
    if source_a is not None and source_b is not None and as_tokens(source_a) != as_tokens(source_b):
        raise UsageError("edits refer to different source sentences")
    return a.src_start == b.src_start and a.src_end == b.src_end and a.replacement == b.replacement


@dataclass
class M2Sentence:
    source: TokenSeq
    annotations: Dict[int, EditSet]

    def reference(self, annotator: int) -> TokenSeq:
        if annotator in self.annotations:
            return self.annotations[annotator].apply()
        return self.source


class M2FormatError(ValueError):
    pass


def _build_editset(source: TokenSeq, raw: Sequence[Tuple[int, int, Tuple[str, ...]]], lineno: int) -> EditSet:
    merged: List[List] = []
    for start, end, rep in sorted(raw, key=lambda e: (e[0], e[1])):
        if merged and start == end == merged[-1][0] == merged[-1][1]:
            merged[-1][2] = merged[-1][2] + rep
        else:
            merged.append([start, end, rep])
    edits = []
    for start, end, rep in merged:
        if tuple(source[start:end]) == tuple(rep):
            continue
        try:
            edits.append(Edit(start, end, rep))
        except UsageError as exc:
            raise M2FormatError(f"line {lineno}: {exc}") from None
    try:
        return EditSet(source, tuple(edits))
    except UsageError as exc:
        raise M2FormatError(f"line {lineno}: {exc}") from None


def parse_m2(text: str) -> List[M2Sentence]:
    """Read M2 blocks: an ``S`` line followed by ``A`` lines, blank-line separated.

    ``noop`` annotations (span ``-1 -1``) register the annotator with an
    empty edit set.
    """
    sentences: List[M2Sentence] = []
    source = None
    raw: Dict[int, list] = {}
    start_line = 0

    def flush():
        if source is not None:
            sentences.append(
                M2Sentence(source, {a: _build_editset(source, edits, start_line) for a, edits in sorted(raw.items())})
            )

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip():
            flush()
            source, raw = None, {}
            continue
        if line.startswith("S "):
            flush()
            source, raw, start_line = TokenSeq(line[2:].split()), {}, lineno
        elif line.startswith("A "):
            if source is None:
                raise M2FormatError(f"line {lineno}: annotation before any S line")
            fields = line[2:].split("|||")
            if len(fields) < 3:
                raise M2FormatError(f"line {lineno}: expected 'A start end|||type|||replacement|||...'")
            try:
                start, end = (int(x) for x in fields[0].split())
                annotator = int(fields[-1]) if len(fields) >= 6 else 0
            except ValueError:
                raise M2FormatError(f"line {lineno}: bad span or annotator id") from None
            raw.setdefault(annotator, [])
            if start == -1 and end == -1:
                continue
            if fields[1] == "noop":
                continue
            if not 0 <= start <= end <= len(source):
                raise M2FormatError(f"line {lineno}: span {start} {end} outside source of length {len(source)}")
            rep = fields[2].strip()
            rep_tokens = () if rep in ("", "-NONE-") else tuple(rep.split())
            raw[annotator].append((start, end, rep_tokens))
        else:
            raise M2FormatError(f"line {lineno}: unrecognized line {line[:30]!r}")
    flush()
    return sentences


def read_m2(path) -> List[M2Sentence]:
    with open(path, encoding="utf-8") as f:
        return parse_m2(f.read())
