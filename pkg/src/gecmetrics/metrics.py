"""Metric classes behind a common interface, and the id registry used by the CLI."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from .core import MetricResult, UsageError, check_parallel
from .edit_metrics import UniformWeights, gotoscorer, gotoscorer_difficulty, load_edit_weights, score_edit_level
from .ngram import gleu, green
from .sentence_metrics import (
    ChatClient,
    HttpPerplexity,
    LlmJudgeConfig,
    TablePerplexity,
    llm_judge,
    load_external_scores,
    scribendi,
)


class Metric:
    """Base class. Subclasses define ``Config`` and ``score``.

    ``score_systems`` scores several systems on the same sources; metrics
    whose score depends on the whole pool (GoToScorer, LLM judges) or on
    system names (external scores) override it.
    """

    id = ""
    needs_references = False
    higher_is_better = True

    @dataclass
    class Config:
        pass

    def __init__(self, config: Optional["Metric.Config"] = None):
        self.config = config if config is not None else self.Config()

    def score(self, sources, hyps, refs=None) -> MetricResult:
        raise NotImplementedError

    def score_corpus(self, sources, hypotheses, references=None) -> float:
        return self.score(sources, hypotheses, references).corpus_score

    def score_sentence(self, sources, hypotheses, references=None) -> list:
        return self.score(sources, hypotheses, references).sentence_scores

    def score_systems(self, sources, hyps_by_system: Mapping[str, Sequence], refs=None) -> Dict[str, MetricResult]:
        return {name: self.score(sources, hyps, refs) for name, hyps in hyps_by_system.items()}

    def _require_refs(self, refs):
        if not refs:
            raise UsageError(f"metric {self.id!r} needs references")


class ERRANT(Metric):
    id = "errant"
    needs_references = True

    @dataclass
    class Config:
        beta: float = 0.5

    def score(self, sources, hyps, refs=None):
        self._require_refs(refs)
        return score_edit_level(sources, hyps, refs, beta=self.config.beta)


class PTERRANT(Metric):
    id = "pt-errant"
    needs_references = True

    @dataclass
    class Config:
        beta: float = 0.5
        weights_file: Optional[str] = None
        default_weight: float = 1.0

    def __init__(self, config=None):
        super().__init__(config)
        if self.config.weights_file:
            self.weights = load_edit_weights(self.config.weights_file, self.config.default_weight)
        else:
            self.weights = UniformWeights(self.config.default_weight)

    def score(self, sources, hyps, refs=None):
        self._require_refs(refs)
        return score_edit_level(sources, hyps, refs, beta=self.config.beta, weights=self.weights)


def read_lines(path) -> List[str]:
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


class GoToScorer(Metric):
    id = "gotoscorer"
    needs_references = True

    @dataclass
    class Config:
        beta: float = 0.5
        difficulty_systems: List[str] = field(default_factory=list)

    def _pool(self, sources, fallback):
        if self.config.difficulty_systems:
            pool = [read_lines(p) for p in self.config.difficulty_systems]
            for p, out in zip(self.config.difficulty_systems, pool):
                if len(out) != len(sources):
                    raise UsageError(f"{p}: {len(out)} lines for {len(sources)} sources")
            return pool
        return list(fallback)

    def score(self, sources, hyps, refs=None):
        self._require_refs(refs)
        return gotoscorer(sources, hyps, refs, self._pool(sources, [hyps]), beta=self.config.beta)

    def score_systems(self, sources, hyps_by_system, refs=None):
        self._require_refs(refs)
        pool = self._pool(sources, hyps_by_system.values())
        table = gotoscorer_difficulty(sources, refs[0], pool)
        return {
            name: gotoscorer(sources, hyps, refs, pool, beta=self.config.beta, table=table)
            for name, hyps in hyps_by_system.items()
        }


class GLEU(Metric):
    id = "gleu"
    needs_references = True

    @dataclass
    class Config:
        n_max: int = 4
        iterations: int = 500
        seed: int = 0
        n_jobs: int = 1

    def score(self, sources, hyps, refs=None):
        self._require_refs(refs)
        c = self.config
        return gleu(sources, hyps, refs, n_max=c.n_max, iterations=c.iterations, seed=c.seed, n_jobs=c.n_jobs)


class GREEN(Metric):
    id = "green"
    needs_references = True

    @dataclass
    class Config:
        n_max: int = 4
        beta: float = 2.0
        multi_ref: str = "best"

    def score(self, sources, hyps, refs=None):
        self._require_refs(refs)
        c = self.config
        return green(sources, hyps, refs, n_max=c.n_max, beta=c.beta, multi_ref=c.multi_ref)


class Scribendi(Metric):
    id = "scribendi"

    @dataclass
    class Config:
        threshold: float = 0.8
        ppl_file: Optional[str] = None
        ppl_endpoint: Optional[str] = None
        timeout: float = 60.0

    def __init__(self, config=None, provider=None):
        super().__init__(config)
        if provider is None:
            if self.config.ppl_file:
                provider = TablePerplexity.from_file(self.config.ppl_file)
            elif self.config.ppl_endpoint:
                provider = HttpPerplexity(self.config.ppl_endpoint, timeout=self.config.timeout)
            else:
                raise UsageError("scribendi needs ppl_file or ppl_endpoint")
        self.provider = provider

    def score(self, sources, hyps, refs=None):
        return scribendi(sources, hyps, self.provider, threshold=self.config.threshold)


class _LLMJudge(Metric):
    mode = "sentence"

    @dataclass
    class Config:
        endpoint: str = "https://api.openai.com/v1/chat/completions"
        model: str = "gpt-4o-mini-2024-07-18"
        api_key_env: str = "OPENAI_API_KEY"
        timeout: float = 60.0
        retries: int = 3
        max_in_flight: int = 4

    def judge_config(self) -> LlmJudgeConfig:
        return LlmJudgeConfig(mode=self.mode, **dataclasses.asdict(self.config))

    def score(self, sources, hyps, refs=None):
        return self.score_systems(sources, {"system": hyps})["system"]

    def score_systems(self, sources, hyps_by_system, refs=None):
        cfg = self.judge_config()
        return llm_judge(sources, hyps_by_system, cfg, ChatClient(cfg))


class LLMS(_LLMJudge):
    id = "llm-s"
    mode = "sentence"


class LLME(_LLMJudge):
    id = "llm-e"
    mode = "edit"


class External(Metric):
    """Per-sentence scores computed elsewhere (e.g. SOME or IMPARA), read from a TSV file."""

    id = "external"

    @dataclass
    class Config:
        scores_file: Optional[str] = None

    def __init__(self, config=None):
        super().__init__(config)
        if not self.config.scores_file:
            raise UsageError("external metric needs scores_file")
        self.table = load_external_scores(self.config.scores_file)

    def score(self, sources, hyps, refs=None):
        names = self.table.systems()
        if len(names) != 1:
            raise UsageError("score() needs a single-system table; use score_systems()")
        return self.table.result(names[0], len(sources))

    def score_systems(self, sources, hyps_by_system, refs=None):
        for name, hyps in hyps_by_system.items():
            check_parallel(sources, hyps)
        return {name: self.table.result(name, len(sources)) for name in hyps_by_system}


METRICS = {m.id: m for m in (ERRANT, PTERRANT, GoToScorer, GLEU, GREEN, Scribendi, LLMS, LLME, External)}
