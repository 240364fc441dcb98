"""Command-line interface.

Subcommands: convert, stage1, rulegen, train, translate, eval, split.
Exit codes: 0 success, 2 config/input error, 3 stage-1 error, 4 stage-2
error, 5 metric error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import rules, tinyformer
from .corpus import (
    CorpusError,
    load_parallel_corpus,
    load_task_corpus,
    save_task_corpus,
    split_corpus,
)
from .pipeline import (
    ConfigError,
    StageError,
    evaluate_stage,
    load_config,
    model_engine,
    rules_engine,
    run_pipeline,
    simplify_text,
    write_eval_report,
)
from .retrieval import build_index, generate_code, load_index, save_index

_STAGE_EXIT_CODES = {"stage1": 3, "stage2": 4, "metric": 5}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="story2pseudo",
        description="Convert user stories to pseudocode via retrieval + "
        "rule-based or transformer code-to-pseudocode conversion.",
    )
    parser.add_argument("--config", help="pipeline config file (key=value lines)")
    parser.add_argument("--seed", type=int, help="override the seed of seeded commands")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="story -> pseudocode through both stages")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--story", help="story text")
    group.add_argument("--story-file", help="file containing the story text")
    p.add_argument("--corpus", help="stage-1 task corpus (overrides config)")
    p.add_argument("--engine", choices=("rules", "model"))
    p.add_argument("--rules", help="rule table path (default: built-in)")
    p.add_argument("--model", help="trained model path (engine=model)")
    p.add_argument("--out", help="output directory for pseudocode + run record")

    p = sub.add_parser("stage1", help="retrieve code for a query")
    p.add_argument("--corpus", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--cache", help="index cache file (built if missing/stale)")

    p = sub.add_parser("rulegen", help="convert a .py file to pseudocode .txt")
    p.add_argument("input", help=".py input file")
    p.add_argument("--out", help="output .txt path (default: input with .txt)")
    p.add_argument("--rules", help="rule table path (default: built-in)")

    p = sub.add_parser("train", help="train the code-to-pseudocode transformer")
    p.add_argument("--pairs", nargs=2, metavar=("SRC", "TGT"), required=True)
    p.add_argument("--model-config", help="model config file (key=value lines)")
    p.add_argument("--out", required=True, help="model output file")
    p.add_argument("--report", help="training report path (default: <out>.report.txt)")

    p = sub.add_parser("translate", help="translate a .py file with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True, help=".py input file")
    p.add_argument("--out", help="output .txt path (default: input with .txt)")

    p = sub.add_parser("eval", help="score an engine against a parallel corpus")
    p.add_argument("--pairs", nargs=2, metavar=("SRC", "TGT"), required=True)
    p.add_argument("--engine", choices=("rules", "model"), default="rules")
    p.add_argument("--rules", help="rule table path (engine=rules)")
    p.add_argument("--model", help="model path (engine=model)")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--smoothing", action="store_true")
    p.add_argument("--out", help="report path prefix (writes .txt and .json)")

    p = sub.add_parser("split", help="deterministic train/valid/test split")
    p.add_argument("--corpus", required=True, help="task corpus to split")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ratios", default=None, help="three comma-separated fractions")
    return parser


def _cmd_convert(args, config) -> int:
    if args.corpus:
        config.stage1_corpus = Path(args.corpus)
    if args.engine:
        config.stage2_engine = args.engine
    if args.rules:
        config.rules_path = Path(args.rules)
    if args.model:
        config.model_path = Path(args.model)
    story = args.story
    if story is None:
        story = Path(args.story_file).read_text(encoding="utf-8").strip()
    result = run_pipeline(story, config)
    if args.verbose:
        for stage, secs in result.timings.items():
            print(f"{stage}: {secs:.3f}s", file=sys.stderr)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "pseudocode.txt").write_text(
            result.pseudocode + "\n", encoding="utf-8", newline="\n"
        )
        (out_dir / "result.json").write_text(
            json.dumps(result.record(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"wrote {out_dir / 'pseudocode.txt'} and {out_dir / 'result.json'}")
    else:
        print(result.pseudocode)
    return 0


def _cmd_stage1(args, config) -> int:
    try:
        corpus = load_task_corpus(args.corpus)
        index = None
        if args.cache:
            index = load_index(args.cache, corpus)
        if index is None:
            index = build_index(corpus)
            if args.cache:
                save_index(index, args.cache)
        candidates = generate_code(args.query, index, k=args.k)
    except (CorpusError, FileNotFoundError, ValueError) as exc:
        raise StageError("stage1", str(exc)) from exc
    for rank, cand in enumerate(candidates, start=1):
        print(f"# rank {rank}  similarity={cand.similarity:.6f}  "
              f"id={cand.source_id}  engine=retrieval")
        if cand.syntax_fixes:
            print(f"# syntax fixes: {', '.join(cand.syntax_fixes)}")
        print(cand.code.rstrip("\n"))
    return 0


def _cmd_rulegen(args, config) -> int:
    in_path = Path(args.input)
    if not in_path.exists():
        raise StageError("stage2", f"input not found: {in_path}")
    rules_path = args.rules or config.rules_path
    try:
        ruleset = rules.load_ruleset(rules_path)
        doc = rules.convert_program(in_path.read_text(encoding="utf-8"), ruleset)
    except FileNotFoundError as exc:
        raise StageError("stage2", str(exc)) from exc
    except ValueError as exc:
        raise StageError("stage2", str(exc)) from exc
    out_path = Path(args.out) if args.out else in_path.with_suffix(".txt")
    rules.emit_txt(doc, out_path)
    print(
        f"{in_path}: {doc.source_lines} code lines -> {len(doc.lines)} "
        f"pseudocode lines ({doc.fallback_count} fallbacks) -> {out_path}"
    )
    return 0


def _parse_model_config(path: str | None, seed_override: int | None):
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"model config not found: {p}")
        valid = {f.name for f in fields(tinyformer.ModelConfig)}
        for line_no, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{p}: line {line_no}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in valid:
                raise ConfigError(f"{p}: line {line_no}: unknown key '{key}'")
            caster = float if key in ("dropout", "lr") else int
            values[key] = caster(value)
    if seed_override is not None:
        values["seed"] = seed_override
    try:
        return tinyformer.ModelConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_train(args, config) -> int:
    model_config = _parse_model_config(args.model_config, args.seed)
    try:
        pairs = load_parallel_corpus(args.pairs[0], args.pairs[1])
        if not pairs:
            raise StageError("stage2", "no usable pairs after blank filtering")
        vocab = tinyformer.build_vocab(pairs)
        params, report = tinyformer.train(pairs, model_config, vocab)
    except (CorpusError, FileNotFoundError, ValueError) as exc:
        raise StageError("stage2", str(exc)) from exc
    except tinyformer.TrainingDiverged as exc:
        raise StageError("stage2", str(exc)) from exc
    tinyformer.save_model(args.out, params, model_config, vocab)

    report_path = Path(args.report) if args.report else Path(args.out + ".report.txt")
    lines = [
        f"pairs: {len(pairs)}",
        f"vocab: {len(vocab)}",
        f"seed: {report.seed}",
        f"epochs: {report.epochs}",
        f"final_train_bleu: {report.final_train_bleu:.8f}",
        "epoch_losses:",
    ]
    lines += [
        f"  {i + 1} {loss:.8f}" for i, loss in enumerate(report.epoch_losses)
    ]
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    # wall time varies run to run, so it goes to the console, not the report
    print(
        f"trained {model_config.epochs} epochs on {len(pairs)} pairs "
        f"in {report.wall_time:.1f}s; final loss "
        f"{report.epoch_losses[-1]:.6f}; train BLEU {report.final_train_bleu:.4f}"
    )
    print(f"wrote {args.out} and {report_path}")
    return 0


def _cmd_translate(args, config) -> int:
    in_path = Path(args.input)
    if not in_path.exists():
        raise StageError("stage2", f"input not found: {in_path}")
    try:
        from .pipeline import _stage2_model

        text = _stage2_model(in_path.read_text(encoding="utf-8"), Path(args.model))
    except (FileNotFoundError, ValueError) as exc:
        raise StageError("stage2", str(exc)) from exc
    out_path = Path(args.out) if args.out else in_path.with_suffix(".txt")
    body = simplify_text(text)
    out_path.write_text(
        body + "\n" if body else "", encoding="utf-8", newline="\n"
    )
    print(f"wrote {out_path}")
    return 0


def _cmd_eval(args, config) -> int:
    try:
        pairs = load_parallel_corpus(args.pairs[0], args.pairs[1])
    except (CorpusError, FileNotFoundError) as exc:
        raise StageError("metric", str(exc)) from exc
    if args.engine == "rules":
        try:
            ruleset = rules.load_ruleset(args.rules or config.rules_path)
        except (FileNotFoundError, rules.RuleError) as exc:
            raise StageError("stage2", str(exc)) from exc
        hypothesis = rules_engine(ruleset)
    else:
        model_path = args.model or config.model_path
        if model_path is None:
            raise ConfigError("eval --engine model needs --model")
        try:
            hypothesis = model_engine(model_path)
        except (FileNotFoundError, ValueError) as exc:
            raise StageError("stage2", str(exc)) from exc
    try:
        result = evaluate_stage(
            pairs,
            hypothesis,
            engine=args.engine,
            max_n=args.max_n,
            smoothing=args.smoothing,
        )
    except ValueError as exc:
        raise StageError("metric", str(exc)) from exc

    from . import bleu as bleu_mod

    print(f"engine: {result.engine}")
    print(bleu_mod.format_report(result.corpus_report))
    print(f"mean sentence BLEU = {result.mean_sentence_bleu:.8f}")
    if args.out:
        text_path, json_path = write_eval_report(result, args.out, config.fingerprint())
        print(f"wrote {text_path} and {json_path}")
    return 0


def _cmd_split(args, config) -> int:
    seed = args.seed if args.seed is not None else config.split_seed
    ratios = config.split_ratios
    if args.ratios:
        parts = [float(p) for p in args.ratios.split(",")]
        if len(parts) != 3:
            raise ConfigError("--ratios needs three comma-separated fractions")
        ratios = tuple(parts)
    try:
        samples = load_task_corpus(args.corpus)
        split = split_corpus(samples, ratios=ratios, seed=seed)
    except (CorpusError, FileNotFoundError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", split.train), ("valid", split.valid), ("test", split.test)):
        save_task_corpus(part, out_dir / f"{name}.jsonl")
    report_lines = [
        f"seed: {split.seed}",
        f"ratios: {split.ratios[0]:g},{split.ratios[1]:g},{split.ratios[2]:g}",
        f"sizes: train={len(split.train)} valid={len(split.valid)} test={len(split.test)}",
        f"train_ids: {','.join(str(s.id) for s in split.train)}",
        f"valid_ids: {','.join(str(s.id) for s in split.valid)}",
        f"test_ids: {','.join(str(s.id) for s in split.test)}",
    ]
    (out_dir / "split_report.txt").write_text(
        "\n".join(report_lines) + "\n", encoding="utf-8", newline="\n"
    )
    print(
        f"split {len(samples)} samples into "
        f"{len(split.train)}/{len(split.valid)}/{len(split.test)} -> {out_dir}"
    )
    return 0


_HANDLERS = {
    "convert": _cmd_convert,
    "stage1": _cmd_stage1,
    "rulegen": _cmd_rulegen,
    "train": _cmd_train,
    "translate": _cmd_translate,
    "eval": _cmd_eval,
    "split": _cmd_split,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return _HANDLERS[args.command](args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _STAGE_EXIT_CODES.get(exc.stage, 1)
    except (CorpusError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
