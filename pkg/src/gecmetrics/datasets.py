"""Loading meta-evaluation datasets from a directory layout.

    root/
      sources.txt
      references/ref0.txt, ref1.txt, ...   (optional)
      systems/<name>.txt
      judgments.tsv      source_index<TAB>system<TAB>rank   (1 = best)
      manifest.yaml      name, gold_aggregation, label, optional system_gold
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import yaml

from .meta_eval import JudgmentSet, expected_wins, trueskill_rank
from .metrics import read_lines


class DatasetError(ValueError):
    pass


@dataclass
class MetaDataset:
    root: Path
    name: str
    sources: List[str]
    systems: Dict[str, List[str]]
    judgments: JudgmentSet
    gold_aggregation: str
    gold_source: str
    _references: Optional[List[List[str]]] = field(default=None, repr=False)

    @property
    def references(self) -> List[List[str]]:
        if self._references is None:
            raise DatasetError(f"{self.root}: no references/ directory; this metric needs references")
        return self._references

    @property
    def has_references(self) -> bool:
        return self._references is not None


def _check_aligned(path: Path, lines: List[str], n: int) -> None:
    if len(lines) != n:
        raise DatasetError(f"{path}: {len(lines)} lines, but sources.txt has {n}")


def _ref_key(p: Path):
    m = re.search(r"(\d+)$", p.stem)
    return (int(m.group(1)) if m else -1, p.name)


def load_meta_dataset(root, trueskill_seed: int = 0, trueskill_passes: int = 10) -> MetaDataset:
    root = Path(root)
    manifest_path = root / "manifest.yaml"
    if not manifest_path.is_file():
        raise DatasetError(f"{manifest_path}: missing")
    with open(manifest_path, encoding="utf-8") as f:
        manifest = yaml.safe_load(f) or {}
    if not isinstance(manifest, dict):
        raise DatasetError(f"{manifest_path}: expected a mapping")
    allowed = {"name", "gold_aggregation", "label", "system_gold"}
    extra = set(manifest) - allowed
    if extra:
        raise DatasetError(f"{manifest_path}: unknown keys {sorted(extra)}")
    gold_agg = manifest.get("gold_aggregation", "trueskill")
    if gold_agg not in ("expected_wins", "trueskill"):
        raise DatasetError(f"{manifest_path}: gold_aggregation must be expected_wins or trueskill, got {gold_agg!r}")

    src_path = root / "sources.txt"
    if not src_path.is_file():
        raise DatasetError(f"{src_path}: missing")
    sources = read_lines(src_path)
    n = len(sources)

    sys_dir = root / "systems"
    if not sys_dir.is_dir():
        raise DatasetError(f"{sys_dir}: missing")
    systems = {}
    for p in sorted(sys_dir.glob("*.txt")):
        lines = read_lines(p)
        _check_aligned(p, lines, n)
        systems[p.stem] = lines

    references = None
    ref_dir = root / "references"
    if ref_dir.is_dir():
        references = []
        for p in sorted(ref_dir.glob("*.txt"), key=_ref_key):
            lines = read_lines(p)
            _check_aligned(p, lines, n)
            references.append(lines)
        if not references:
            references = None

    jpath = root / "judgments.tsv"
    if not jpath.is_file():
        raise DatasetError(f"{jpath}: missing")
    rankings: List[Dict[str, int]] = [{} for _ in range(n)]
    for lineno, line in enumerate(read_lines(jpath), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if lineno == 1 and fields[0] == "source_index":
            continue
        if len(fields) != 3:
            raise DatasetError(f"{jpath}:{lineno}: expected source_index<TAB>system<TAB>rank")
        try:
            idx, rank = int(fields[0]), int(fields[2])
        except ValueError:
            raise DatasetError(f"{jpath}:{lineno}: malformed source index or rank") from None
        name = fields[1]
        if not 0 <= idx < n:
            raise DatasetError(f"{jpath}:{lineno}: source index {idx} out of range 0..{n - 1}")
        if name not in systems:
            raise DatasetError(f"{jpath}:{lineno}: unknown system {name!r} (no systems/{name}.txt)")
        if rank < 1:
            raise DatasetError(f"{jpath}:{lineno}: rank must be >= 1")
        if name in rankings[idx]:
            raise DatasetError(f"{jpath}:{lineno}: duplicate judgment for ({idx}, {name})")
        rankings[idx][name] = rank
    for idx, ranking in enumerate(rankings):
        if ranking and sorted(set(ranking.values())) != list(range(1, max(ranking.values()) + 1)):
            raise DatasetError(f"{jpath}: ranks for source {idx} are not contiguous from 1: {sorted(ranking.values())}")

    judged = sorted({s for r in rankings for s in r}, key=list(systems).index)
    gold = manifest.get("system_gold")
    if gold is not None:
        if not isinstance(gold, dict):
            raise DatasetError(f"{manifest_path}: system_gold must map system names to scores")
        unknown = set(gold) - set(judged)
        if unknown:
            raise DatasetError(f"{manifest_path}: system_gold names unjudged systems {sorted(unknown)}")
        gold = {str(k): float(v) for k, v in gold.items()}
        gold_source = "manifest"
    judgments = JudgmentSet(judged, rankings, {}, str(manifest.get("label", "")))
    if gold is None:
        if gold_agg == "expected_wins":
            gold = {k: v for k, v in expected_wins(judgments).items() if v is not None}
        else:
            gold = trueskill_rank(judgments, seed=trueskill_seed, passes=trueskill_passes).mu
        gold_source = gold_agg
    judgments.system_gold = gold
    return MetaDataset(
        root=root,
        name=str(manifest.get("name", root.name)),
        sources=sources,
        systems={s: systems[s] for s in judged},
        judgments=judgments,
        gold_aggregation=gold_agg,
        gold_source=gold_source,
        _references=references,
    )


def toy_dataset_path() -> Path:
    """Root of the small synthetic dataset shipped with the package."""
    return Path(__file__).parent / "data" / "toy_meta"
