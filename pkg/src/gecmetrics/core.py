"""Shared types for sentences, edits and scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple


class UsageError(ValueError):
    """Raised when a function is called with arguments outside its contract."""


class TokenSeq(tuple):
    """An immutable, whitespace-tokenized sentence."""

    def __new__(cls, tokens: Iterable[str] = ()):
        tokens = tuple(tokens)
        for tok in tokens:
            if not isinstance(tok, str) or tok == "" or tok != tok.strip() or len(tok.split()) != 1:
                raise UsageError(f"invalid token {tok!r}")
        return super().__new__(cls, tokens)

    @property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(self)

    def text(self) -> str:
        return " ".join(self)

    def __repr__(self) -> str:
        return f"TokenSeq({list(self)!r})"


def tokenize(text: str) -> TokenSeq:
    return TokenSeq(text.split())


def as_tokens(sent) -> TokenSeq:
    """Accept either a raw string or an already tokenized sequence."""
    if isinstance(sent, TokenSeq):
        return sent
    if isinstance(sent, str):
        return tokenize(sent)
    return TokenSeq(sent)


@dataclass(frozen=True, order=True)
class Edit:
    """Replace ``source[src_start:src_end]`` by ``replacement``."""

    src_start: int
    src_end: int
    replacement: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "replacement", tuple(self.replacement))
        if not 0 <= self.src_start <= self.src_end:
            raise UsageError(f"bad edit span [{self.src_start}, {self.src_end})")
        if self.src_start == self.src_end and not self.replacement:
            raise UsageError("an insertion must have a non-empty replacement")

    @property
    def span(self) -> Tuple[int, int]:
        return (self.src_start, self.src_end)

    @property
    def is_insertion(self) -> bool:
        return self.src_start == self.src_end

    def check_against(self, source: Sequence[str]) -> None:
        if self.src_end > len(source):
            raise UsageError(f"edit {self} exceeds source length {len(source)}")
        if tuple(source[self.src_start:self.src_end]) == self.replacement:
            raise UsageError(f"edit {self} is a no-op")


@dataclass(frozen=True)
class EditSet:
    source: TokenSeq
    edits: Tuple[Edit, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "source", as_tokens(self.source))
        edits = tuple(sorted(self.edits))
        prev_end = -1
        prev_insert_at = -1
        for e in edits:
            e.check_against(self.source)
            if e.src_start < prev_end:
                raise UsageError(f"overlapping edits at {e}")
            if e.is_insertion and e.src_start == prev_insert_at:
                raise UsageError(f"two insertions at index {e.src_start}; merge them")
            prev_end = max(prev_end, e.src_end)
            if e.is_insertion:
                prev_insert_at = e.src_start
        object.__setattr__(self, "edits", edits)

    def __len__(self) -> int:
        return len(self.edits)

    def __iter__(self):
        return iter(self.edits)

    def apply(self) -> TokenSeq:
        out = []
        pos = 0
        for e in self.edits:
            out.extend(self.source[pos:e.src_start])
            out.extend(e.replacement)
            pos = e.src_end
        out.extend(self.source[pos:])
        return TokenSeq(out)


@dataclass(frozen=True)
class WeightedEdit:
    edit: Edit
    weight: float

    def __post_init__(self):
        if not self.weight >= 0:
            raise UsageError(f"edit weight must be non-negative, got {self.weight}")


def f_beta(precision: float, recall: float, beta: float, undefined: bool = False) -> float:
    """Weighted harmonic mean of precision and recall.

    ``undefined=True`` signals that both quantities came from empty counts
    (nothing proposed, nothing required) and yields 1.0.
    """
    if not beta > 0:
        raise UsageError(f"beta must be positive, got {beta}")
    if undefined:
        return 1.0
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1 + b2) * precision * recall / denom


@dataclass(frozen=True)
class PRFScore:
    precision: float
    recall: float
    f_beta: float
    beta: float

    @classmethod
    def from_counts(cls, tp: float, fp: float, fn: float, beta: float) -> "PRFScore":
        """Score from (weighted) true-positive, false-positive and false-negative mass.

        Empty denominators count as perfect: no proposed edits gives
        precision 1.0, no required edits gives recall 1.0.
        """
        p = tp / (tp + fp) if tp + fp > 0 else 1.0
        r = tp / (tp + fn) if tp + fn > 0 else 1.0
        return cls(p, r, f_beta(p, r, beta), beta)


@dataclass
class MetricResult:
    corpus_score: float
    sentence_scores: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.sentence_scores)


def check_parallel(sources: Sequence, hyps: Sequence, refs: Optional[Sequence[Sequence]] = None) -> None:
    if len(hyps) != len(sources):
        raise UsageError(f"{len(hyps)} hypotheses for {len(sources)} sources")
    if refs is None:
        return
    if len(refs) == 0:
        raise UsageError("at least one reference set is required")
    for k, ref in enumerate(refs):
        if len(ref) != len(sources):
            raise UsageError(f"reference set {k} has {len(ref)} sentences for {len(sources)} sources")
