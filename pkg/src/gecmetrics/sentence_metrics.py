"""Reference-free sentence-level metrics."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import httpx

from . import kernels
from .align import extract_edits
from .core import MetricResult, UsageError, as_tokens, check_parallel

logger = logging.getLogger(__name__)


# Scribendi


def levenshtein_ratio(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - kernels.char_distance(a, b) / longest


def token_sort_ratio(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> float:
    return levenshtein_ratio(" ".join(sorted(a_tokens)), " ".join(sorted(b_tokens)))


class PerplexityError(RuntimeError):
    def __init__(self, index: int, message: str):
        super().__init__(f"sentence {index}: {message}")
        self.index = index


class PerplexityProvider:
    def perplexity(self, sentence: str) -> float:
        raise NotImplementedError

    def batch(self, sentences: Sequence[str]) -> List[float]:
        return [self.perplexity(s) for s in sentences]


class TablePerplexity(PerplexityProvider):
    """Perplexities looked up from a ``sentence<TAB>ppl`` file."""

    def __init__(self, table: Mapping[str, float]):
        self.table = dict(table)

    @classmethod
    def from_file(cls, path) -> "TablePerplexity":
        table = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                sent, sep, value = line.rpartition("\t")
                try:
                    ppl = float(value)
                except ValueError:
                    ppl = float("nan")
                if not sep or not ppl > 0:
                    raise ValueError(f"{path}:{lineno}: expected 'sentence<TAB>positive perplexity'")
                table[" ".join(sent.split())] = ppl
        return cls(table)

    def perplexity(self, sentence: str) -> float:
        key = " ".join(sentence.split())
        if key not in self.table:
            raise KeyError(f"no perplexity for {sentence!r}")
        return self.table[key]


class HttpPerplexity(PerplexityProvider):
    """POSTs ``{"sentences": [...]}`` and expects ``{"perplexities": [...]}`` back."""

    def __init__(self, url: str, timeout: float = 60.0, batch_size: int = 32, client: Optional[httpx.Client] = None):
        self.url = url
        self.batch_size = batch_size
        self.client = client or httpx.Client(timeout=timeout)
        self._cache: Dict[str, float] = {}

    def batch(self, sentences: Sequence[str]) -> List[float]:
        todo = [s for s in dict.fromkeys(sentences) if s not in self._cache]
        for start in range(0, len(todo), self.batch_size):
            chunk = todo[start:start + self.batch_size]
            resp = self.client.post(self.url, json={"sentences": chunk})
            resp.raise_for_status()
            values = resp.json()["perplexities"]
            if len(values) != len(chunk):
                raise ValueError(f"endpoint returned {len(values)} perplexities for {len(chunk)} sentences")
            self._cache.update(zip(chunk, (float(v) for v in values)))
        return [self._cache[s] for s in sentences]

    def perplexity(self, sentence: str) -> float:
        return self.batch([sentence])[0]


def scribendi_sentence(src, hyp, ppl_src: float, ppl_hyp: float, threshold: float = 0.8) -> int:
    src, hyp = as_tokens(src), as_tokens(hyp)
    if src == hyp:
        return 0
    if ppl_hyp >= ppl_src:
        return -1
    ratio = max(levenshtein_ratio(src.text(), hyp.text()), token_sort_ratio(src, hyp))
    return 1 if ratio >= threshold else -1


def scribendi(sources, hyps, ppl: PerplexityProvider, threshold: float = 0.8) -> MetricResult:
    """Scores each hypothesis -1/0/+1; the corpus score is their sum."""
    check_parallel(sources, hyps)
    sources = [as_tokens(s) for s in sources]
    hyps = [as_tokens(h) for h in hyps]
    changed = [i for i, (s, h) in enumerate(zip(sources, hyps)) if s != h]
    texts = []
    for i in changed:
        texts += [sources[i].text(), hyps[i].text()]
    try:
        values = ppl.batch(texts)
    except Exception:
        # fall back to one call per sentence to name the failing index
        values = []
        for i in changed:
            for t in (sources[i].text(), hyps[i].text()):
                try:
                    values.append(ppl.perplexity(t))
                except Exception as exc:
                    raise PerplexityError(i, str(exc)) from exc
    scores = [0] * len(sources)
    for n, i in enumerate(changed):
        scores[i] = scribendi_sentence(sources[i], hyps[i], values[2 * n], values[2 * n + 1], threshold)
    return MetricResult(float(sum(scores)), scores, {"threshold": threshold})


# Externally computed scores


class ExternalScoreError(KeyError):
    pass


class ExternalScoreTable:
    """Scores produced elsewhere, keyed by (system, sentence index)."""

    def __init__(self, table: Optional[Dict[Tuple[str, int], float]] = None, duplicates: int = 0):
        self.table = dict(table or {})
        self.duplicates = duplicates

    def __len__(self):
        return len(self.table)

    def lookup(self, system: str, index: int) -> float:
        try:
            return self.table[(system, index)]
        except KeyError:
            raise ExternalScoreError(f"no external score for system {system!r}, sentence {index}") from None

    def systems(self) -> List[str]:
        return sorted({s for s, _ in self.table})

    def result(self, system: str, num_sentences: int) -> MetricResult:
        scores = [self.lookup(system, i) for i in range(num_sentences)]
        mean = sum(scores) / len(scores) if scores else 0.0
        return MetricResult(mean, scores, {"source": "external"})


def load_external_scores(path) -> ExternalScoreTable:
    """Read ``system<TAB>sentence_index<TAB>score`` lines; later duplicates win."""
    table = {}
    dups = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'system<TAB>sentence_index<TAB>score'")
            try:
                key = (fields[0], int(fields[1]))
                value = float(fields[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed sentence index or score") from None
            if key in table:
                dups += 1
            table[key] = value
    if dups:
        logger.warning("%s: %d duplicate (system, sentence) keys, kept the last", path, dups)
    return ExternalScoreTable(table, dups)


# LLM judge

SENTENCE_INSTRUCTION = (
    "The goal of this task is to rank the presented targets based on the quality of the sentences.\n\n"
    "After reading the source sentence and target sentences, please assign a score from a minimum of 1 point "
    "to a maximum of 5 points to each target based on the quality of the sentence (note that you can assign "
    "the same score multiple times)."
)

EDIT_INSTRUCTION = (
    "The goal of this task is to rank the presented targets based on the quality of the edits.\n\n"
    "After reading the source sentence and the edit sequences of the targets, please assign a score from a "
    "minimum of 1 point to a maximum of 5 points to each target based on the quality of its edits (note that "
    "you can assign the same score multiple times)."
)

MAX_TARGETS = 5
SCORE_MIN, SCORE_MAX = 1, 5


@dataclass
class LlmJudgeConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o-mini-2024-07-18"
    api_key_env: str = "OPENAI_API_KEY"
    mode: str = "sentence"
    timeout: float = 60.0
    retries: int = 3
    max_in_flight: int = 4
    max_targets: int = MAX_TARGETS

    def __post_init__(self):
        if self.mode not in ("sentence", "edit"):
            raise UsageError(f"mode must be 'sentence' or 'edit', got {self.mode!r}")
        if not 1 <= self.max_targets <= MAX_TARGETS:
            raise UsageError(f"at most {MAX_TARGETS} targets per request")
        if self.retries < 0 or self.max_in_flight < 1:
            raise UsageError("retries must be >= 0 and max_in_flight >= 1")


class JudgeResponseError(RuntimeError):
    def __init__(self, source_index: int, message: str):
        super().__init__(f"source {source_index}: {message}")
        self.source_index = source_index


def select_targets(hyps_by_system: Mapping[str, str], k: int = MAX_TARGETS) -> Tuple[List[str], Dict[str, List[str]]]:
    """Pick up to ``k`` distinct hypotheses, most frequently produced first.

    Ties are broken by the hypothesis text. Returns the selection and, for
    every distinct hypothesis, the systems that produced it.
    """
    producers: Dict[str, List[str]] = {}
    for system, hyp in hyps_by_system.items():
        producers.setdefault(hyp, []).append(system)
    ranked = sorted(producers, key=lambda h: (-len(producers[h]), h))
    return ranked[:k], producers


def render_edits(source, hyp) -> str:
    edits = extract_edits(source, hyp)
    if not len(edits):
        return "no edits"
    src = as_tokens(source)
    return "; ".join(f"[{' '.join(src[e.src_start:e.src_end])} → {' '.join(e.replacement)}]" for e in edits)


def build_prompt(source: str, targets: Sequence[str], mode: str = "sentence") -> str:
    if mode == "edit":
        lines = [f"{i}. {render_edits(source, t)}" for i, t in enumerate(targets)]
        instruction = EDIT_INSTRUCTION
    else:
        lines = [f"{i}. {t}" for i, t in enumerate(targets)]
        instruction = SENTENCE_INSTRUCTION
    return f"{instruction}\n\n# source\n\n{source}\n\n# targets\n\n" + "\n".join(lines)


def parse_judgement(content: str, n_targets: int) -> Dict[int, int]:
    """Parse ``{"0": 4, "1": 2, ...}``; raises ValueError unless every target gets an integer in 1..5."""
    data = json.loads(content)
    if isinstance(data, dict) and "scores" in data and isinstance(data["scores"], dict):
        data = data["scores"]
    if not isinstance(data, dict):
        raise ValueError("response is not a JSON object")
    scores = {}
    for key, value in data.items():
        idx = int(key)
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            else:
                raise ValueError(f"score for target {idx} is not an integer: {value!r}")
        if not SCORE_MIN <= value <= SCORE_MAX:
            raise ValueError(f"score {value} for target {idx} outside {SCORE_MIN}..{SCORE_MAX}")
        scores[idx] = value
    missing = set(range(n_targets)) - set(scores)
    if missing:
        raise ValueError(f"no score for targets {sorted(missing)}")
    return {i: scores[i] for i in range(n_targets)}


class ChatClient:
    """Minimal client for an OpenAI-compatible chat-completions endpoint."""

    def __init__(self, cfg: LlmJudgeConfig, client: Optional[httpx.Client] = None):
        self.cfg = cfg
        headers = {}
        key = os.environ.get(cfg.api_key_env) if cfg.api_key_env else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self.client = client or httpx.Client(timeout=cfg.timeout, headers=headers)

    def complete(self, prompt: str) -> str:
        body = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "response_format": {"type": "json_object"},
            "temperature": 0,
        }
        resp = self.client.post(self.cfg.endpoint, json=body)
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


def _judge_source(client: ChatClient, cfg: LlmJudgeConfig, index: int, source: str, targets: List[str]) -> Dict[int, int]:
    prompt = build_prompt(source, targets, cfg.mode)
    last = None
    for _ in range(cfg.retries + 1):
        try:
            return parse_judgement(client.complete(prompt), len(targets))
        except (ValueError, KeyError, TypeError, IndexError, httpx.HTTPError) as exc:
            last = exc
            logger.debug("source %d: bad judge response (%s), retrying", index, exc)
    raise JudgeResponseError(index, f"no valid response after {cfg.retries + 1} attempts: {last}")


def llm_judge(sources, hyps_per_system: Mapping[str, Sequence], cfg: LlmJudgeConfig, client: Optional[ChatClient] = None) -> Dict[str, MetricResult]:
    """Score systems' hypotheses on a 1..5 scale with a chat model.

    For each source, the (up to five) most frequently produced hypotheses are
    judged in one request and each score is copied to every system that
    produced that hypothesis. Systems whose hypothesis was not selected get
    ``None`` for that source.
    """
    if not hyps_per_system:
        raise UsageError("at least one system is required")
    for name, hyps in hyps_per_system.items():
        if len(hyps) != len(sources):
            raise UsageError(f"system {name!r} has {len(hyps)} hypotheses for {len(sources)} sources")
    client = client or ChatClient(cfg)
    systems = list(hyps_per_system)
    plans = []
    for i, src in enumerate(sources):
        src_text = as_tokens(src).text()
        by_system = {s: as_tokens(hyps_per_system[s][i]).text() for s in systems}
        targets, producers = select_targets(by_system, cfg.max_targets)
        plans.append((i, src_text, targets, producers))

    def run(plan):
        i, src_text, targets, _ = plan
        return _judge_source(client, cfg, i, src_text, targets)

    with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as ex:
        judgements = list(ex.map(run, plans))

    per_system: Dict[str, List[Optional[int]]] = {s: [None] * len(sources) for s in systems}
    for (i, _, targets, producers), scores in zip(plans, judgements):
        for t, hyp in enumerate(targets):
            for s in producers[hyp]:
                per_system[s][i] = scores[t]
    out = {}
    for s in systems:
        avail = [v for v in per_system[s] if v is not None]
        corpus = sum(avail) / len(avail) if avail else None
        out[s] = MetricResult(corpus, per_system[s], {"mode": cfg.mode, "model": cfg.model, "missing": len(per_system[s]) - len(avail)})
    return out
