"""Command line front end.

    curriculum-lm stats CORPUS [--unit line|sentence]
    curriculum-lm score CORPUS --method NAME [--annotations F] [--seed N] --out FILE
    curriculum-lm train CONFIG [--seed N] [--out DIR]
    curriculum-lm eval CHECKPOINT CORPUS
    curriculum-lm grid CONFIG... [--lambda0 a,b] [--increment x,y] --out DIR
    curriculum-lm summarize METRICS... --out DIR

Exit codes: 0 ok, 1 usage/config, 2 data validation, 3 runtime.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import report
from .annotations import load_annotations
from .corpus import UNITS, Vocabulary, corpus_stats, load_corpus
from .curriculum import CurriculumState, check_schedule, write_curriculum
from .difficulty import DifficultyMethod, Resources, score_corpus
from .errors import ConfigError, CurriculumError, DataError
from .toylm import load_checkpoint, perplexity
from .trainer import TrainConfig, train

log = logging.getLogger("curriculum_lm")

PATH_KEYS = ("train", "valid", "annotations", "out")
OTHER_KEYS = ("unit",)
_INT_KEYS = {"batch_size", "window", "total_steps", "eval_every", "seed", "context_size", "embed_dim", "hidden_dim", "checkpoint_every"}
_FLOAT_KEYS = {"lambda0", "lambda_increment", "learning_rate"}
TRAIN_KEYS = tuple(f.name for f in fields(TrainConfig))


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_run_config(path: str | Path) -> tuple[TrainConfig, dict[str, object]]:
    """Read a flat key=value run file. Relative paths resolve against the file's directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in TRAIN_KEYS and key not in PATH_KEYS and key not in OTHER_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = val

    train_kwargs: dict[str, object] = {}
    for key, val in values.items():
        if key not in TRAIN_KEYS:
            continue
        try:
            if key in _INT_KEYS:
                train_kwargs[key] = int(val)
            elif key in _FLOAT_KEYS:
                train_kwargs[key] = float(val)
            else:
                train_kwargs[key] = val
        except ValueError:
            raise ConfigError(f"{path}: {key}={val!r} is not a valid number") from None

    files: dict[str, object] = {"unit": values.get("unit", "sentence")}
    if files["unit"] not in UNITS:
        raise ConfigError(f"{path}: unit must be one of {UNITS}")
    for key in PATH_KEYS:
        if key in values:
            p = Path(values[key])
            files[key] = p if p.is_absolute() else Path(os.path.normpath(path.parent / p))
    if "train" not in files:
        raise ConfigError(f"{path}: 'train' is required")
    return TrainConfig(**train_kwargs), files


def _check_inputs(config: TrainConfig, files: dict) -> None:
    for key in ("train", "valid", "annotations"):
        if key in files and not Path(files[key]).is_file():
            raise ConfigError(f"{key} file not found: {files[key]}")
    if config.method.needs_annotations and "annotations" not in files:
        raise ConfigError(f"method {config.method.value} requires an annotations file")
    if "out" not in files:
        raise ConfigError("no output directory: set 'out' in the config or pass --out")


def run_training(config: TrainConfig, files: dict) -> Path:
    _check_inputs(config, files)
    train_corpus = load_corpus(files["train"], files["unit"])
    valid_corpus = load_corpus(files["valid"], files["unit"]) if "valid" in files else None
    anns = load_annotations(files["annotations"], train_corpus) if "annotations" in files else None
    out = Path(files["out"])
    train(train_corpus, valid_corpus, anns, config, out_dir=out)
    return out


def cmd_stats(args) -> int:
    stats = corpus_stats(load_corpus(args.corpus, args.unit))
    for k in ("vocab_size", "token_count", "sample_count"):
        print(f"{k}\t{stats[k]}")
    return 0


def cmd_score(args) -> int:
    method = DifficultyMethod.parse(args.method)
    check_schedule(args.lambda0, args.increment)
    if method.needs_annotations and not args.annotations:
        raise ConfigError(f"method {method.value} requires --annotations")
    corpus = load_corpus(args.corpus, args.unit)
    anns = load_annotations(args.annotations, corpus) if method.needs_annotations else None
    raw = score_corpus(corpus, method, Resources(annotations=anns, seed=args.seed, denominator=args.denominator))
    state = CurriculumState.from_raw(raw, args.lambda0, args.increment)
    out = Path(args.out)
    if out.is_dir():
        out = out / "curriculum.tsv"
    write_curriculum(out, raw, state)
    print(out)
    return 0


def cmd_train(args) -> int:
    config, files = parse_run_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        files["out"] = Path(args.out)
    out = run_training(config, files)
    print(out / "metrics.csv")
    return 0


def cmd_eval(args) -> int:
    config, params, vocab_tokens = load_checkpoint(args.checkpoint)
    if not vocab_tokens:
        raise DataError(f"{args.checkpoint}: checkpoint carries no vocabulary")
    vocab = Vocabulary(tuple(vocab_tokens))
    corpus = load_corpus(args.corpus, args.unit)
    ppl = perplexity(params, [vocab.encode(s.tokens) for s in corpus])
    print(f"{ppl:.4f}")
    return 0


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def cmd_grid(args) -> int:
    jobs = []
    for cfg_path in args.configs:
        config, files = parse_run_config(cfg_path)
        l0s = args.lambda0 or [config.lambda0]
        incs = args.increment or [config.lambda_increment]
        for l0, inc in itertools.product(l0s, incs):
            name = Path(cfg_path).stem
            if args.lambda0 or args.increment:
                name += f"_l0-{l0!r}_inc-{inc!r}"
            cfg = replace(config, lambda0=l0, lambda_increment=inc)
            run_files = dict(files, out=Path(args.out) / name)
            _check_inputs(cfg, run_files)
            jobs.append((cfg, run_files))
    metrics = []
    for cfg, run_files in jobs:
        log.info("grid run %s", run_files["out"])
        metrics.append(run_training(cfg, run_files) / "metrics.csv")
    rows = report.write_report(metrics, args.out)
    sys.stdout.write(report.summary_table(rows))
    return 0


def cmd_summarize(args) -> int:
    rows = report.write_report(args.metrics, args.out)
    sys.stdout.write(report.summary_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="curriculum-lm", description="Competence-based curriculum pretraining of a small language model.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", help="corpus statistics")
    s.add_argument("corpus")
    s.add_argument("--unit", choices=UNITS, default="sentence")
    s.set_defaults(func=cmd_stats)

    for name in ("score", "curriculum"):
        s = sub.add_parser(name, help="score a corpus and write its curriculum file")
        s.add_argument("corpus")
        s.add_argument("--method", required=True, choices=[m.value for m in DifficultyMethod])
        s.add_argument("--unit", choices=UNITS, default="sentence")
        s.add_argument("--annotations")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--lambda0", type=float, default=1e-3)
        s.add_argument("--increment", type=float, default=1e-5)
        s.add_argument("--denominator", choices=("total", "unique"), default="total")
        s.add_argument("--out", required=True)
        s.set_defaults(func=cmd_score)

    s = sub.add_parser("train", help="train from a key=value run config")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="perplexity of a checkpoint on a corpus")
    s.add_argument("checkpoint")
    s.add_argument("corpus")
    s.add_argument("--unit", choices=UNITS, default="sentence")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("grid", help="train every config (x lambda0 x increment) and summarise")
    s.add_argument("configs", nargs="+")
    s.add_argument("--lambda0", type=_float_list)
    s.add_argument("--increment", type=_float_list)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_grid)

    s = sub.add_parser("summarize", help="summary table and curves from metrics files")
    s.add_argument("metrics", nargs="+")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_summarize)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CurriculumError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
