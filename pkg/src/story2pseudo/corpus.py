"""Dataset loading, validation, and deterministic splitting.

Two corpus shapes are supported:

* task corpora — one JSON record per line with integer ``id``, natural
  language ``text``, and multi-line ``code`` (newlines escaped by JSON);
* parallel corpora — two aligned plain-text files, one unit per line,
  pairing a code line with its pseudocode line.

Loaders preserve file order and fail loudly with the offending line
number. Splitting is pure and reproducible from (corpus, seed, ratios).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


class CorpusError(ValueError):
    """Malformed or inconsistent corpus input."""


@dataclass(frozen=True)
class TaskSample:
    """One natural-language task with its reference implementation."""

    id: int
    description: str
    code: str


@dataclass(frozen=True)
class ParallelPair:
    """A (code, pseudocode) line pair from an aligned corpus."""

    source: str
    target: str


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple
    valid: tuple
    test: tuple
    seed: int
    ratios: tuple[float, float, float]

    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.valid), len(self.test))


def load_task_corpus(path: str | Path) -> list[TaskSample]:
    """Load a line-delimited task corpus.

    Each non-blank line must be a JSON object with ``id`` (int),
    ``text`` (non-empty string) and ``code`` (non-empty string).
    Records come back in file order; ids must be unique.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"task corpus not found: {path}")

    samples: list[TaskSample] = []
    seen_ids: dict[int, int] = {}
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {line_no}: invalid record ({exc.msg})")
            if not isinstance(record, dict):
                raise CorpusError(f"{path}: line {line_no}: record is not an object")
            for key in ("id", "text", "code"):
                if key not in record:
                    raise CorpusError(f"{path}: line {line_no}: missing field '{key}'")
            sample_id = record["id"]
            if not isinstance(sample_id, int) or isinstance(sample_id, bool):
                raise CorpusError(f"{path}: line {line_no}: 'id' must be an integer")
            description = record["text"]
            code = record["code"]
            if not isinstance(description, str) or not description.strip():
                raise CorpusError(f"{path}: line {line_no}: 'text' is empty")
            if not isinstance(code, str) or not code.strip():
                raise CorpusError(f"{path}: line {line_no}: 'code' is empty")
            if sample_id in seen_ids:
                raise CorpusError(
                    f"{path}: line {line_no}: duplicate id {sample_id} "
                    f"(first seen at line {seen_ids[sample_id]})"
                )
            seen_ids[sample_id] = line_no
            samples.append(TaskSample(id=sample_id, description=description, code=code))
    if not samples:
        raise CorpusError(f"{path}: no records")
    return samples


def load_parallel_corpus(
    source_path: str | Path, target_path: str | Path
) -> list[ParallelPair]:
    """Load an aligned two-file corpus as positional line pairs.

    Pairs where either side is blank (empty or whitespace-only) are
    dropped; the remaining pairs keep their file order and exact bytes.
    """
    source_path, target_path = Path(source_path), Path(target_path)
    for p in (source_path, target_path):
        if not p.exists():
            raise FileNotFoundError(f"parallel corpus file not found: {p}")
    source_lines = source_path.read_text(encoding="utf-8").splitlines()
    target_lines = target_path.read_text(encoding="utf-8").splitlines()
    if len(source_lines) != len(target_lines):
        raise CorpusError(
            f"line count mismatch: {len(source_lines)} vs {len(target_lines)} "
            f"({source_path} / {target_path})"
        )
    pairs = []
    for src, tgt in zip(source_lines, target_lines):
        if not src.strip() or not tgt.strip():
            continue  # blank-flagged pair, excluded
        pairs.append(ParallelPair(source=src, target=tgt))
    return pairs


def split_corpus(
    samples: Sequence,
    ratios: tuple[float, float, float] = (0.9, 0.05, 0.05),
    seed: int = 13,
) -> CorpusSplit:
    """Shuffle-and-slice split into train/valid/test.

    Valid and test sizes are floor(n * ratio); the remainder goes to
    train. The shuffle is driven by ``random.Random(seed)`` (Mersenne
    Twister), so the same (corpus, seed, ratios) always yields the same
    member sets.
    """
    if len(ratios) != 3:
        raise ValueError(f"expected three ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative: {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")
    if not samples:
        raise ValueError("cannot split an empty corpus")

    order = list(samples)
    random.Random(seed).shuffle(order)
    n = len(order)
    n_valid = math.floor(n * ratios[1])
    n_test = math.floor(n * ratios[2])
    n_train = n - n_valid - n_test
    return CorpusSplit(
        train=tuple(order[:n_train]),
        valid=tuple(order[n_train : n_train + n_valid]),
        test=tuple(order[n_train + n_valid :]),
        seed=seed,
        ratios=tuple(ratios),
    )


def save_task_corpus(samples: Sequence[TaskSample], path: str | Path) -> None:
    """Write samples back out in the line-delimited record format."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            fh.write(json.dumps({"id": s.id, "text": s.description, "code": s.code}))
            fh.write("\n")
