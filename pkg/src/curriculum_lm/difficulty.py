"""Raw per-sample difficulty for the eight curricula."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .annotations import SampleAnnotation, pos_diversity, tree_depth
from .corpus import Corpus
from .errors import ConfigError
from .ngram_stats import Denominator, NGramTable, count_ngrams, iter_grams


NLL_DECIMALS = 9


class DifficultyMethod(str, enum.Enum):
    NONE = "none"
    RANDOM = "random"
    LENGTH = "length"
    UNIGRAM = "unigram"
    BIGRAM = "bigram"
    TRIGRAM = "trigram"
    POS = "pos"
    DEP = "dep"

    @classmethod
    def parse(cls, name: "str | DifficultyMethod") -> "DifficultyMethod":
        try:
            return cls(name)
        except ValueError:
            raise ConfigError(f"unknown difficulty method {name!r}; choose from {', '.join(m.value for m in cls)}")

    @property
    def ngram_order(self) -> int | None:
        return {"unigram": 1, "bigram": 2, "trigram": 3}.get(self.value)

    @property
    def needs_annotations(self) -> bool:
        return self in (DifficultyMethod.POS, DifficultyMethod.DEP)


@dataclass(frozen=True)
class RawScores:
    method: DifficultyMethod
    values: tuple[float, ...]


@dataclass
class Resources:
    """Inputs some methods need. Missing n-gram tables are counted on demand."""

    ngram_tables: dict[int, NGramTable] = field(default_factory=dict)
    annotations: Mapping[int, SampleAnnotation] | None = None
    seed: int = 0
    denominator: Denominator = "total"


def random_difficulty(seed: int, sample_id: int) -> float:
    # per-sample stream so scores do not depend on iteration order or sharding
    return float(np.random.default_rng([seed, sample_id]).random())


def ngram_nll(tokens: Sequence[str], table: NGramTable, denominator: Denominator = "total") -> float:
    """Negative log-likelihood of a sample's grams under corpus relative frequencies.

    Unseen grams get probability 1/(total+1). A sample with no grams scores 0.
    """
    grams = list(iter_grams(tokens, table.order))
    if not grams:
        return 0.0
    denom = table.total if denominator == "total" else table.unique
    floor = 1.0 / (table.total + 1)
    logs = []
    for g in grams:
        c = table.counts.get(g, 0)
        logs.append(math.log(c / denom if c else floor))
    # fsum is order independent; rounding lets ties like ln(1/6) vs ln(1/2)+ln(1/3) stay ties
    return round(-math.fsum(logs), NLL_DECIMALS) + 0.0


def score_sample(tokens: Sequence[str], sample_id: int, method: DifficultyMethod, res: Resources) -> float:
    if method is DifficultyMethod.NONE:
        return 0.0
    if method is DifficultyMethod.RANDOM:
        return random_difficulty(res.seed, sample_id)
    if method is DifficultyMethod.LENGTH:
        return float(len(tokens))
    if method.ngram_order is not None:
        return ngram_nll(tokens, res.ngram_tables[method.ngram_order], res.denominator)
    ann = res.annotations.get(sample_id) if res.annotations is not None else None
    if ann is None:
        raise ConfigError(f"method {method.value}: no annotation for sample {sample_id}")
    if method is DifficultyMethod.POS:
        return float(pos_diversity(ann.pos))
    return float(tree_depth(ann.heads))


def score_corpus(corpus: Corpus, method: "DifficultyMethod | str", resources: Resources | None = None) -> RawScores:
    method = DifficultyMethod.parse(method)
    res = resources if resources is not None else Resources()
    order = method.ngram_order
    if order is not None and order not in res.ngram_tables:
        res.ngram_tables[order] = count_ngrams(corpus, order)
    if method.needs_annotations and res.annotations is None:
        raise ConfigError(f"method {method.value} requires an annotations file")
    values = tuple(score_sample(s.tokens, s.id, method, res) for s in corpus)
    return RawScores(method, values)


def write_scores(path: str | Path, raw: RawScores, eps: Sequence[float] | None = None, header: str | None = None) -> None:
    """Write `id<TAB>raw<TAB>eps` lines sorted by id; eps left empty when not given."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header is not None:
            f.write(header + "\n")
        for i, r in enumerate(raw.values):
            e = "" if eps is None else repr(float(eps[i]))
            f.write(f"{i}\t{r!r}\t{e}\n")
