"""Competence-based curriculum training loop.

score -> CDF -> for each step: draw an eligible batch, SGD update, raise competence.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .annotations import SampleAnnotation
from .corpus import Corpus, Vocabulary, build_vocabulary
from .curriculum import CurriculumState, write_curriculum
from .difficulty import DifficultyMethod, RawScores, Resources, score_corpus
from .errors import ConfigError, DataError, DegenerateBatchError, EligibilityViolation
from .ngram_stats import Denominator
from .sampler import EncodedCorpus, sample_batch, truncation_stats
from .toylm import ModelConfig, ModelParams, init_params, loss_and_grads, perplexity, save_checkpoint, sgd_step

log = logging.getLogger(__name__)

METRICS_HEADER = "step,lambda,eligible,train_loss,valid_ppl"


@dataclass
class TrainConfig:
    method: DifficultyMethod = DifficultyMethod.NONE
    lambda0: float = 1.0
    lambda_increment: float = 0.0
    batch_size: int = 128
    window: int = 20
    total_steps: int | None = None  # None: ceil(10 * N / batch_size), ten epochs of exposure
    eval_every: int = 100
    seed: int = 0
    context_size: int = 3
    embed_dim: int = 16
    hidden_dim: int = 32
    learning_rate: float = 0.1
    ngram_denominator: Denominator = "total"
    checkpoint_every: int | None = None  # None: 10 * eval_every

    def __post_init__(self):
        self.method = DifficultyMethod.parse(self.method)
        if not 0.0 < self.lambda0 <= 1.0:
            raise ConfigError(f"lambda0 must lie in (0, 1], got {self.lambda0}")
        if not (math.isfinite(self.lambda_increment) and self.lambda_increment >= 0.0):
            raise ConfigError(f"lambda_increment must be finite and >= 0, got {self.lambda_increment}")
        for name in ("batch_size", "window", "eval_every", "context_size", "embed_dim", "hidden_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.total_steps is not None and self.total_steps < 1:
            raise ConfigError(f"total_steps must be >= 1, got {self.total_steps}")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise ConfigError(f"checkpoint_every must be >= 1, got {self.checkpoint_every}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.window < self.context_size + 1:
            raise ConfigError(f"window ({self.window}) must be at least context_size + 1 ({self.context_size + 1})")
        if self.ngram_denominator not in ("total", "unique"):
            raise ConfigError(f"ngram_denominator must be 'total' or 'unique', got {self.ngram_denominator!r}")

    def steps_for(self, n_samples: int) -> int:
        if self.total_steps is not None:
            return self.total_steps
        return math.ceil(10 * n_samples / self.batch_size)

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(vocab_size, self.context_size, self.embed_dim, self.hidden_dim, self.learning_rate)


@dataclass(frozen=True)
class MetricsRecord:
    step: int
    lam: float
    eligible: int
    train_loss: float | None
    valid_ppl: float | None = None

    def to_csv(self) -> str:
        loss = "" if self.train_loss is None else repr(self.train_loss)
        ppl = "" if self.valid_ppl is None else repr(self.valid_ppl)
        return f"{self.step},{self.lam!r},{self.eligible},{loss},{ppl}"

    @classmethod
    def from_csv(cls, line: str) -> "MetricsRecord":
        step, lam, elig, loss, ppl = line.split(",")
        return cls(int(step), float(lam), int(elig), float(loss) if loss else None, float(ppl) if ppl else None)


@dataclass
class TrainResult:
    params: ModelParams
    metrics: list[MetricsRecord]
    vocab: Vocabulary
    model_config: ModelConfig
    state: CurriculumState
    raw: RawScores
    draws: list[np.ndarray] | None = field(default=None, repr=False)
    skipped_batches: int = 0


def write_metrics(path: str | Path, records: Sequence[MetricsRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(METRICS_HEADER + "\n")
        for r in records:
            f.write(r.to_csv() + "\n")


def read_metrics(path: str | Path) -> list[MetricsRecord]:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if lines[0] != METRICS_HEADER:
        raise DataError(f"{path}:1: expected header {METRICS_HEADER!r}")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        try:
            out.append(MetricsRecord.from_csv(line))
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    return out


def evaluate(params: ModelParams, valid_corpus: Corpus, vocab: Vocabulary) -> float:
    """Full-pass perplexity over the held-out split: no padding, no gating, OOV -> UNK."""
    if len(valid_corpus) == 0:
        raise DataError("validation corpus is empty")
    return perplexity(params, [vocab.encode(s.tokens) for s in valid_corpus])


def build_curriculum(
    corpus: Corpus,
    config: TrainConfig,
    annotations: Mapping[int, SampleAnnotation] | None = None,
) -> tuple[RawScores, CurriculumState]:
    res = Resources(annotations=annotations, seed=config.seed, denominator=config.ngram_denominator)
    raw = score_corpus(corpus, config.method, res)
    return raw, CurriculumState.from_raw(raw, config.lambda0, config.lambda_increment)


def train(
    train_corpus: Corpus,
    valid_corpus: Corpus | None,
    annotations: Mapping[int, SampleAnnotation] | None,
    config: TrainConfig,
    out_dir: str | Path | None = None,
    record_draws: bool = False,
) -> TrainResult:
    """Run the curriculum. Writes metrics, curriculum and checkpoints when `out_dir` is given."""
    raw, state = build_curriculum(train_corpus, config, annotations)
    vocab = build_vocabulary(train_corpus)
    mcfg = config.model_config(len(vocab))
    rng = np.random.default_rng(config.seed)
    params = init_params(mcfg, rng)
    encoded = EncodedCorpus(train_corpus, vocab)
    eps = np.asarray(state.eps)
    total = config.steps_for(len(train_corpus))
    ckpt_every = config.checkpoint_every or 10 * config.eval_every

    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_curriculum(out / "curriculum.tsv", raw, state)

    trunc = truncation_stats(train_corpus, config.window)
    if trunc["truncated_samples"]:
        log.info("window %d truncates %d samples (%d tokens)", config.window, trunc["truncated_samples"], trunc["truncated_tokens"])

    records: list[MetricsRecord] = []
    draws: list[np.ndarray] | None = [] if record_draws else None
    skipped = 0
    for step in range(1, total + 1):
        batch = sample_batch(state, encoded, vocab, config.batch_size, config.window, rng)
        # the sampler's guard may widen the set past lambda; anything beyond the prefix is a bug
        limit = max(batch.lam, state.sorted_eps[0])
        drawn_eps = eps[batch.sample_ids]
        if np.any(drawn_eps > limit):
            bad = int(batch.sample_ids[np.argmax(drawn_eps > limit)])
            raise EligibilityViolation(f"step {step}: sample {bad} has eps {eps[bad]} > competence {limit}")
        if draws is not None:
            draws.append(batch.sample_ids.copy())

        try:
            loss, grads = loss_and_grads(params, batch)
        except DegenerateBatchError:
            skipped += 1
            log.warning("step %d: batch has no scoreable position, update skipped", step)
            loss = None
        else:
            params = sgd_step(params, grads, config.learning_rate)

        ppl = None
        if valid_corpus is not None and step % config.eval_every == 0:
            ppl = evaluate(params, valid_corpus, vocab)
            log.info("step %d lambda %.6g eligible %d valid ppl %.3f", step, batch.lam, batch.eligible, ppl)
        records.append(MetricsRecord(step, batch.lam, batch.eligible, loss, ppl))
        state.advance()

        if out is not None and step % ckpt_every == 0 and step != total:
            save_checkpoint(out / f"checkpoint_{step:08d}.npz", mcfg, params, vocab.tokens)

    if out is not None:
        write_metrics(out / "metrics.csv", records)
        save_checkpoint(out / "checkpoint.npz", mcfg, params, vocab.tokens)
    return TrainResult(params, records, vocab, mcfg, state, raw, draws, skipped)
