"""Competence-gated batch sampling with replacement, padding and loss masks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import PAD_ID, Corpus, Vocabulary
from .curriculum import CurriculumState
from .errors import ConfigError


@dataclass(frozen=True)
class Batch:
    token_ids: np.ndarray  # (batch, window) int64
    loss_mask: np.ndarray  # (batch, window) int8, 0 on PAD
    sample_ids: np.ndarray  # (batch,) int64
    lam: float = 1.0
    eligible: int = 0


def pad_and_mask(samples: Sequence[Sequence[int]], window: int, pad_id: int = PAD_ID) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad or truncate every row to `window`; mask is 1 on kept tokens."""
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    ids = np.full((len(samples), window), pad_id, dtype=np.int64)
    mask = np.zeros((len(samples), window), dtype=np.int8)
    for r, seq in enumerate(samples):
        n = min(len(seq), window)
        ids[r, :n] = seq[:n]
        mask[r, :n] = 1
    return ids, mask


class EncodedCorpus:
    """Corpus pre-mapped to vocabulary ids, so batching does no string lookups."""

    def __init__(self, corpus: Corpus, vocab: Vocabulary):
        self.ids = [vocab.encode(s.tokens) for s in corpus]

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, i: int) -> list[int]:
        return self.ids[i]


def sample_batch(
    state: CurriculumState,
    corpus: "Corpus | EncodedCorpus",
    vocab: Vocabulary,
    batch_size: int,
    window: int,
    rng: np.random.Generator,
) -> Batch:
    """Draw `batch_size` ids uniformly with replacement from the eligible prefix.

    Uses the competence at ``state.step``; advancing the step is the caller's job.
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    lam = state.lam
    k = state.eligible_prefix(lam)
    picks = rng.integers(0, k, size=batch_size)
    order = np.asarray(state.order, dtype=np.int64)
    sample_ids = order[picks]
    if isinstance(corpus, EncodedCorpus):
        rows = [corpus[i] for i in sample_ids]
    else:
        rows = [vocab.encode(corpus[i].tokens) for i in sample_ids]
    token_ids, mask = pad_and_mask(rows, window)
    return Batch(token_ids, mask, sample_ids, lam, k)


def padding_stats(corpus: "Corpus | Sequence[int]", window: int) -> dict[str, float]:
    """PAD tokens needed to bring every sample up to `window`, and their share."""
    lengths = corpus.lengths if isinstance(corpus, Corpus) else list(corpus)
    pad = sum(max(0, window - n) for n in lengths)
    cells = len(lengths) * window
    return {"pad_tokens": pad, "pad_fraction": pad / cells if cells else 0.0}


def truncation_stats(corpus: Corpus, window: int) -> dict[str, int]:
    lengths = corpus.lengths
    over = [n - window for n in lengths if n > window]
    return {"truncated_samples": len(over), "truncated_tokens": sum(over)}
