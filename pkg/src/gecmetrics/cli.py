"""Command-line entry points: ``gecmetrics-eval`` and ``gecmetrics-meta``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__, kernels
from .analysis import pairwise_analysis, window_analysis, write_pairwise_cells, write_window_rows
from .config import ConfigError, load_config
from .core import UsageError
from .datasets import DatasetError, load_meta_dataset
from .meta_eval import CorrResult, corr_sentence, corr_system, expected_wins, judgments_from_scores, trueskill_rank
from .metrics import METRICS, read_lines

EXIT_OK, EXIT_DATA, EXIT_CONFIG = 0, 1, 2


def _clean(obj):
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(payload, out):
    text = json.dumps(_clean(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _metadata(cfg):
    params = cfg.to_dict()
    return {
        "metric": cfg.metric,
        "config": params,
        "seed": params.get("seed"),
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
    }


def eval_parser():
    p = argparse.ArgumentParser(prog="gecmetrics-eval", description="Score system outputs with a GEC metric.")
    p.add_argument("--src", required=True, help="source sentences, one per line")
    p.add_argument("--hyps", nargs="+", required=True, help="hypothesis file(s), one per system")
    p.add_argument("--refs", nargs="*", default=[], help="reference file(s)")
    p.add_argument("--metric", required=True, choices=list(METRICS), help="metric id")
    p.add_argument("--config", help="YAML file with metric parameters")
    p.add_argument("--out", default="-", help="output JSON path, '-' for stdout")
    return p


def main_eval(argv=None) -> int:
    args = eval_parser().parse_args(argv)
    try:
        cfg = load_config(args.metric, args.config)
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_CONFIG, exc)

    try:
        sources = read_lines(args.src)
        hyps = {}
        for path in args.hyps:
            lines = read_lines(path)
            if len(lines) != len(sources):
                return _fail(EXIT_DATA, f"{path} has {len(lines)} lines but {args.src} has {len(sources)}")
            name = Path(path).stem
            if name in hyps:
                name = path
            hyps[name] = lines
        refs = []
        for path in args.refs:
            lines = read_lines(path)
            if len(lines) != len(sources):
                return _fail(EXIT_DATA, f"{path} has {len(lines)} lines but {args.src} has {len(sources)}")
            refs.append(lines)
    except OSError as exc:
        return _fail(EXIT_DATA, exc)

    metric_cls = METRICS[cfg.metric]
    if metric_cls.needs_references and not refs:
        return _fail(EXIT_CONFIG, f"metric {cfg.metric!r} needs --refs")
    try:
        metric = cfg.build()
    except (UsageError, ValueError, OSError) as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        results = metric.score_systems(sources, hyps, refs or None)
    except (UsageError, ValueError, KeyError, OSError, RuntimeError) as exc:
        return _fail(EXIT_DATA, exc)

    payload = _metadata(cfg)
    payload["systems"] = {
        name: {"corpus_score": r.corpus_score, "sentence_scores": r.sentence_scores, "details": r.metadata}
        for name, r in results.items()
    }
    if len(results) == 1:
        (only,) = results.values()
        payload["corpus_score"] = only.corpus_score
        payload["sentence_scores"] = only.sentence_scores
    _emit(payload, args.out)
    return EXIT_OK


def meta_parser():
    p = argparse.ArgumentParser(prog="gecmetrics-meta", description="Meta-evaluate a metric against human judgments.")
    p.add_argument("--dataset", required=True, help="dataset root directory")
    p.add_argument("--metric", required=True, choices=list(METRICS))
    p.add_argument("--config", help="YAML file with metric parameters")
    p.add_argument("--level", choices=["system", "sentence", "both"], default="both")
    p.add_argument(
        "--aggregation",
        choices=["average", "expected_wins", "trueskill"],
        default="average",
        help="human system scores: the dataset's official ones (average) or recomputed from rankings",
    )
    p.add_argument(
        "--metric-aggregation",
        choices=["corpus", "expected_wins", "trueskill"],
        default="corpus",
        help="metric system scores: corpus score, or rankings built from sentence scores",
    )
    p.add_argument("--analysis", choices=["none", "window", "pairwise", "both"], default="none")
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--metric-ties", choices=["count", "exclude"], default="count")
    p.add_argument("--seed", type=int, default=0, help="seed for TrueSkill orderings")
    p.add_argument("--passes", type=int, default=10, help="TrueSkill passes over the comparisons")
    p.add_argument("--out", default="-", help="output JSON path, '-' for stdout")
    p.add_argument("--out-dir", help="directory for analysis CSV/JSON tables")
    return p


def _safe_corr(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs).as_dict(), None
    except UsageError as exc:
        return CorrResult().as_dict(), str(exc)


def main_meta(argv=None) -> int:
    args = meta_parser().parse_args(argv)
    try:
        cfg = load_config(args.metric, args.config)
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        ds = load_meta_dataset(args.dataset, trueskill_seed=args.seed, trueskill_passes=args.passes)
    except (DatasetError, UsageError, OSError) as exc:
        return _fail(EXIT_DATA, exc)

    try:
        metric = cfg.build()
    except (UsageError, ValueError, OSError) as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        refs = ds.references if metric.needs_references else (ds.references if ds.has_references else None)
        results = metric.score_systems(ds.sources, ds.systems, refs)
    except (DatasetError, UsageError, ValueError, KeyError, OSError, RuntimeError) as exc:
        return _fail(EXIT_DATA, exc)

    hib = cfg.higher_is_better
    sentence_scores = {s: r.sentence_scores for s, r in results.items()}
    if args.metric_aggregation == "corpus":
        system_scores = {s: r.corpus_score for s, r in results.items()}
        metric_hib = hib
    else:
        pseudo = judgments_from_scores(sentence_scores, ds.judgments.systems, hib)
        if args.metric_aggregation == "expected_wins":
            system_scores = expected_wins(pseudo)
        else:
            system_scores = trueskill_rank(pseudo, seed=args.seed, passes=args.passes).mu
        metric_hib = True

    payload = _metadata(cfg)
    payload.update(
        {
            "dataset": ds.name,
            "label": ds.judgments.label,
            "aggregation": args.aggregation,
            "metric_aggregation": args.metric_aggregation,
            "gold_source": ds.gold_source if args.aggregation == "average" else args.aggregation,
            "trueskill": {"seed": args.seed, "passes": args.passes},
            "system_scores": system_scores,
        }
    )
    human = None
    try:
        if args.aggregation == "average":
            human = dict(ds.judgments.system_gold)
        elif args.aggregation == "expected_wins":
            human = expected_wins(ds.judgments)
        else:
            human = trueskill_rank(ds.judgments, seed=args.seed, passes=args.passes).mu
    except UsageError as exc:
        payload["human_error"] = str(exc)
    payload["human_scores"] = human

    if args.level in ("system", "both"):
        if human is None:
            payload["system"], err = CorrResult().as_dict(), payload.get("human_error")
        else:
            payload["system"], err = _safe_corr(corr_system, system_scores, ds.judgments, higher_is_better=metric_hib, human=human)
        if err:
            payload["system_error"] = err
    if args.level in ("sentence", "both"):
        payload["sentence"], err = _safe_corr(corr_sentence, sentence_scores, ds.judgments, higher_is_better=hib, metric_ties=args.metric_ties)
        if err:
            payload["sentence_error"] = err

    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    if args.analysis in ("window", "both"):
        try:
            rows = window_analysis(system_scores, ds.judgments, window=args.window, higher_is_better=metric_hib, human=human or {})
        except UsageError as exc:
            return _fail(EXIT_CONFIG, exc)
        payload["window"] = [r.__dict__ for r in rows]
        if out_dir is not None:
            write_window_rows(rows, out_dir / "window.csv")
    if args.analysis in ("pairwise", "both"):
        cells = pairwise_analysis(sentence_scores, ds.judgments, higher_is_better=hib)
        payload["pairwise"] = [c.__dict__ for c in cells]
        if out_dir is not None:
            write_pairwise_cells(cells, out_dir / "pairwise.csv")
    _emit(payload, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("eval", "meta"):
        print("usage: python -m gecmetrics {eval,meta} ...", file=sys.stderr)
        return EXIT_CONFIG
    return (main_eval if argv[0] == "eval" else main_meta)(argv[1:])
