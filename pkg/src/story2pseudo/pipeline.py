"""End-to-end orchestration: story -> code -> pseudocode, plus evaluation.

Stage 1 retrieves the nearest task's code for the story and corrects
its syntax; stage 2 converts that code to pseudocode with either the
rule table or a trained transformer; a final text simplification pass
cleans the output. Every intermediate is kept in the result so the
pipeline can be audited: the code in the result is exactly what stage
2 consumed, and the final pseudocode is exactly simplify_text of the
raw stage-2 output.

Stage failures are wrapped in StageError with the stage name; the CLI
maps stages to exit codes (2 config, 3 stage1, 4 stage2, 5 metric).
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import bleu, rules, tinyformer
from .corpus import ParallelPair, load_task_corpus
from .lexer import LineKind, parse_program
from .retrieval import build_index, generate_code

CONFIG_ENV_VAR = "STORY2PSEUDO_CONFIG"

ENGINES = ("rules", "model")


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    stage1_corpus: Path | None = None
    stage2_engine: str = "rules"
    rules_path: Path | None = None  # None means the built-in table
    model_path: Path | None = None
    bleu_max_n: int = 4
    bleu_smoothing: bool = False
    split_seed: int = 13
    split_ratios: tuple[float, float, float] = (0.9, 0.05, 0.05)
    output_dir: Path | None = None

    def validate(self) -> None:
        if self.stage2_engine not in ENGINES:
            raise ConfigError(f"unknown stage2 engine: {self.stage2_engine}")
        if self.stage1_corpus is None:
            raise ConfigError("stage1_corpus is not set")
        if not Path(self.stage1_corpus).exists():
            raise ConfigError(f"stage1 corpus not found: {self.stage1_corpus}")
        if self.stage2_engine == "model":
            if self.model_path is None:
                raise ConfigError("engine 'model' needs model_path")
            if not Path(self.model_path).exists():
                raise ConfigError(f"model not found: {self.model_path}")
        if self.rules_path is not None and not Path(self.rules_path).exists():
            raise StageError("stage2", f"ruleset not found: {self.rules_path}")

    def fingerprint(self) -> str:
        blob = json.dumps(
            {
                "stage1_corpus": str(self.stage1_corpus),
                "stage2_engine": self.stage2_engine,
                "rules_path": str(self.rules_path),
                "model_path": str(self.model_path),
                "bleu_max_n": self.bleu_max_n,
                "bleu_smoothing": self.bleu_smoothing,
                "split_seed": self.split_seed,
                "split_ratios": list(self.split_ratios),
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


_CONFIG_KEYS = {
    "stage1_corpus", "stage2_engine", "rules_path", "model_path",
    "bleu_max_n", "bleu_smoothing", "split_seed", "split_ratios",
    "output_dir",
}


def parse_config_text(text: str, base_dir: Path | None = None) -> PipelineConfig:
    """Parse the flat key=value config format (see README for keys)."""
    config = PipelineConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_no}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {line_no}: unknown key '{key}'")
        if key in ("stage1_corpus", "rules_path", "model_path", "output_dir"):
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            setattr(config, key, path)
        elif key == "bleu_max_n":
            config.bleu_max_n = int(value)
        elif key == "bleu_smoothing":
            config.bleu_smoothing = value.lower() in ("1", "true", "yes", "on")
        elif key == "split_seed":
            config.split_seed = int(value)
        elif key == "split_ratios":
            parts = [float(p) for p in value.split(",")]
            if len(parts) != 3:
                raise ConfigError(f"config line {line_no}: need three ratios")
            config.split_ratios = tuple(parts)
        else:
            config.stage2_engine = value
    return config


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Load config from a file, else from $STORY2PSEUDO_CONFIG, else defaults."""
    if path is None:
        env = os.environ.get(CONFIG_ENV_VAR)
        if env:
            path = env
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), base_dir=path.parent)


@dataclass
class PipelineResult:
    story: str
    code: str
    similarity: float
    syntax_fixes: tuple[str, ...]
    source_id: int
    pseudocode: str
    engine: str
    timings: dict[str, float] = field(default_factory=dict)

    def record(self) -> dict:
        """Deterministic record of the run; timings stay out on purpose
        so reruns are byte-identical."""
        return {
            "story": self.story,
            "engine": self.engine,
            "stage1": {
                "engine": "retrieval",
                "source_id": self.source_id,
                "similarity": float(f"{self.similarity:.12g}"),
                "syntax_fixes": list(self.syntax_fixes),
            },
            "code": self.code,
            "pseudocode": self.pseudocode,
        }


def simplify_text(pseudo: str) -> str:
    """Postprocessing pass over pseudocode text.

    Collapses runs of identical consecutive lines to one, collapses
    internal whitespace runs to single spaces, strips trailing
    whitespace, and preserves leading indentation exactly. Idempotent.
    """
    out_lines: list[str] = []
    for line in pseudo.split("\n"):
        body = line.lstrip(" \t")
        indent = line[: len(line) - len(body)]
        body = re.sub(r"\s+", " ", body).rstrip()
        cleaned = indent + body if body else ""
        if out_lines and out_lines[-1] == cleaned:
            continue
        out_lines.append(cleaned)
    return "\n".join(out_lines)


def _stage2_rules(code: str, ruleset: rules.RuleSet) -> str:
    doc = rules.convert_program(code, ruleset)
    return doc.to_text().rstrip("\n")


def _stage2_model(code: str, model_path: Path) -> str:
    params, model_config, vocab = tinyformer.load_model(model_path)
    out_lines = []
    for node in parse_program(code):
        if node.kind in (LineKind.BLANK, LineKind.COMMENT):
            continue
        line = tinyformer.translate(params, model_config, vocab, node.raw.strip())
        out_lines.append(" " * (4 * node.depth) + line)
    return "\n".join(out_lines)


def run_pipeline(story: str, config: PipelineConfig) -> PipelineResult:
    """Stage 1 retrieval (top-1) -> syntax-corrected code -> stage 2 -> simplify."""
    config.validate()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    try:
        corpus = load_task_corpus(config.stage1_corpus)
        index = build_index(corpus)
        candidate = generate_code(story, index, k=1)[0]
    except (ValueError, OSError) as exc:
        raise StageError("stage1", str(exc)) from exc
    timings["stage1"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        if config.stage2_engine == "rules":
            ruleset = rules.load_ruleset(config.rules_path)
            raw_pseudo = _stage2_rules(candidate.code, ruleset)
        else:
            raw_pseudo = _stage2_model(candidate.code, Path(config.model_path))
    except FileNotFoundError as exc:
        raise StageError("stage2", str(exc)) from exc
    except (ValueError, OSError) as exc:
        raise StageError("stage2", str(exc)) from exc
    timings["stage2"] = time.perf_counter() - t0

    return PipelineResult(
        story=story,
        code=candidate.code,
        similarity=candidate.similarity,
        syntax_fixes=candidate.syntax_fixes,
        source_id=candidate.source_id,
        pseudocode=simplify_text(raw_pseudo),
        engine=config.stage2_engine,
        timings=timings,
    )


@dataclass(frozen=True)
class EvalResult:
    corpus_report: bleu.BleuReport
    mean_sentence_bleu: float
    records: tuple[dict, ...]
    engine: str


def evaluate_stage(
    pairs: Sequence[ParallelPair],
    hypothesis_fn: Callable[[str], str],
    engine: str,
    max_n: int = 4,
    smoothing: bool = False,
) -> EvalResult:
    """Generate a hypothesis per pair and score against the references.

    Scoring tokenization is a plain whitespace split, case-sensitive.
    Reports the corpus BLEU (smoothing per caller) and the mean of
    smoothed per-sentence scores.
    """
    if not pairs:
        raise ValueError("empty corpus")
    scored = []
    records = []
    sentence_sum = 0.0
    for pair in pairs:
        hypothesis = hypothesis_fn(pair.source)
        hyp_tokens = hypothesis.split()
        ref_tokens = pair.target.split()
        scored.append((hyp_tokens, [ref_tokens]))
        sent = bleu.sentence_bleu(hyp_tokens, [ref_tokens], max_n=max_n)
        sentence_sum += sent.score
        records.append(
            {
                "source": pair.source,
                "reference": pair.target,
                "hypothesis": hypothesis,
                "sentence_bleu": sent.score,
            }
        )
    corpus_report = bleu.corpus_bleu(scored, max_n=max_n, smoothing=smoothing)
    return EvalResult(
        corpus_report=corpus_report,
        mean_sentence_bleu=sentence_sum / len(pairs),
        records=tuple(records),
        engine=engine,
    )


def rules_engine(ruleset: rules.RuleSet | None = None) -> Callable[[str], str]:
    """Hypothesis function converting one source block via the rule table."""
    rs = ruleset if ruleset is not None else rules.load_ruleset()

    def hypothesis(source: str) -> str:
        return simplify_text(_stage2_rules(source, rs))

    return hypothesis


def model_engine(model_path: str | Path) -> Callable[[str], str]:
    """Hypothesis function translating one source line via a trained model."""
    params, model_config, vocab = tinyformer.load_model(model_path)

    def hypothesis(source: str) -> str:
        return tinyformer.translate(params, model_config, vocab, source)

    return hypothesis


def write_eval_report(
    result: EvalResult, path_prefix: str | Path, config_hash: str
) -> tuple[Path, Path]:
    """Write the plain-text report and its machine-readable twin.

    Both files are deterministic functions of the evaluation result and
    config hash, so reruns are byte-identical.
    """
    prefix = Path(path_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    report = result.corpus_report
    text_path = prefix.with_suffix(".txt")
    json_path = prefix.with_suffix(".json")

    lines = [
        f"engine: {result.engine}",
        f"config: {config_hash}",
        f"samples: {len(result.records)}",
        bleu.format_report(report),
        f"mean sentence BLEU = {result.mean_sentence_bleu:.8f}",
    ]
    text_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    payload = {
        "engine": result.engine,
        "config": config_hash,
        "samples": len(result.records),
        "p": list(report.precisions),
        "numerators": list(report.numerators),
        "denominators": list(report.denominators),
        "bp": report.brevity_penalty,
        "score": report.score,
        "candidate_len": report.candidate_len,
        "reference_len": report.reference_len,
        "mean_sentence_bleu": result.mean_sentence_bleu,
        "records": list(result.records),
    }
    json_path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return text_path, json_path
