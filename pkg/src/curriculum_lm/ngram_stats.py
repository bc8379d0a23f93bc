"""Unigram/bigram/trigram counts and maximum-likelihood probabilities.

Grams never cross sample boundaries and no boundary symbols are added.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

from .corpus import Corpus
from .errors import CurriculumError

Gram = tuple[str, ...]
Denominator = Literal["total", "unique"]
ORDERS = (1, 2, 3)


class UndefinedDistributionError(CurriculumError):
    pass


@dataclass(frozen=True)
class NGramTable:
    order: int
    counts: Mapping[Gram, int]
    total: int

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order}")
        if any(len(g) != self.order for g in self.counts):
            raise ValueError(f"every gram of an order-{self.order} table needs {self.order} tokens")
        if sum(self.counts.values()) != self.total:
            raise ValueError("total does not match the sum of counts")

    @property
    def unique(self) -> int:
        return len(self.counts)

    def __len__(self) -> int:
        return len(self.counts)


def iter_grams(tokens: Sequence[str], order: int) -> Iterable[Gram]:
    for i in range(len(tokens) - order + 1):
        yield tuple(tokens[i : i + order])


def _count_token_lists(token_lists: Iterable[Sequence[str]], order: int) -> Counter:
    c: Counter = Counter()
    for toks in token_lists:
        c.update(iter_grams(toks, order))
    return c


def _table(counter: Mapping[Gram, int], order: int) -> NGramTable:
    counts = {g: counter[g] for g in sorted(counter)}
    return NGramTable(order, counts, sum(counts.values()))


def count_ngrams(corpus: Corpus, order: int) -> NGramTable:
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order}")
    return _table(_count_token_lists((s.tokens for s in corpus), order), order)


def merge_tables(tables: Sequence[NGramTable]) -> NGramTable:
    if not tables:
        raise ValueError("nothing to merge")
    order = tables[0].order
    if any(t.order != order for t in tables):
        raise ValueError("cannot merge tables of different orders")
    merged: Counter = Counter()
    for t in tables:
        merged.update(t.counts)
    return _table(merged, order)


def count_ngrams_sharded(corpus: Corpus, order: int, shards: int = 4, workers: int | None = None) -> NGramTable:
    """Count over contiguous shards, optionally in worker processes, then merge.

    The merge is a plain sum so the result equals count_ngrams exactly.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order}")
    shards = max(1, min(shards, len(corpus) or 1))
    size = -(-len(corpus) // shards)
    parts = [[s.tokens for s in corpus.samples[i : i + size]] for i in range(0, len(corpus), size)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            counters = list(ex.map(_count_token_lists, parts, [order] * len(parts)))
    else:
        counters = [_count_token_lists(p, order) for p in parts]
    return merge_tables([_table(c, order) for c in counters] or [_table(Counter(), order)])


def ngram_prob(table: NGramTable, gram: Sequence[str], denominator: Denominator = "total") -> float:
    """Relative frequency of `gram`; 0.0 when unseen.

    denominator="unique" divides by the number of distinct grams instead of the
    occurrence total. That is not a probability distribution and exists only
    for replication experiments.
    """
    if table.total == 0:
        raise UndefinedDistributionError(f"order-{table.order} table is empty; probabilities are undefined")
    count = table.counts.get(tuple(gram), 0)
    if denominator == "total":
        return count / table.total
    if denominator == "unique":
        return count / table.unique
    raise ValueError(f"unknown denominator {denominator!r}")


def dump_table(table: NGramTable, path: str | Path) -> None:
    """Write `gram<TAB>count` lines, grams space-joined and sorted."""
    rows = sorted((" ".join(g), c) for g, c in table.counts.items())
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for g, c in rows:
            f.write(f"{g}\t{c}\n")
