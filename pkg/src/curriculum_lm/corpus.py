"""Corpus loading, tokenization and vocabulary construction.

Text is expected in the wikitext raw format: already tokenized, one record
per line, tokens separated by whitespace.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

from .errors import CorpusLoadError, DataError

Unit = Literal["line", "sentence"]
UNITS = ("line", "sentence")

PAD, UNK, BOS, EOS = "<PAD>", "<UNK>", "<BOS>", "<EOS>"
SPECIALS = (PAD, UNK, BOS, EOS)
PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3

SENTENCE_FINAL = frozenset({".", "!", "?"})


@dataclass(frozen=True)
class Sample:
    id: int
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    samples: tuple[Sample, ...]
    unit: Unit = "sentence"

    def __post_init__(self):
        for i, s in enumerate(self.samples):
            if s.id != i:
                raise DataError(f"sample ids must be 0..N-1 in order; position {i} has id {s.id}")
            if not s.tokens:
                raise DataError(f"sample {s.id} is empty")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i: int) -> Sample:
        return self.samples[i]

    @property
    def lengths(self) -> list[int]:
        return [len(s) for s in self.samples]

    @classmethod
    def from_token_lists(cls, token_lists: Iterable[Sequence[str]], unit: Unit = "line") -> "Corpus":
        """Build a corpus from pre-split records, dropping empty ones."""
        kept = [tuple(t) for t in token_lists if len(t) > 0]
        return cls(tuple(Sample(i, t) for i, t in enumerate(kept)), unit)

    @classmethod
    def from_lines(cls, lines: Iterable[str], unit: Unit = "line") -> "Corpus":
        return cls.from_token_lists(_split_records(lines, unit), unit)


def tokenize(line: str) -> list[str]:
    return line.split()


def split_sentences(tokens: Sequence[str]) -> list[list[str]]:
    """Split a token list after every '.', '!' or '?' token.

    A trailing run without final punctuation forms its own sentence.
    """
    out: list[list[str]] = []
    cur: list[str] = []
    for tok in tokens:
        cur.append(tok)
        if tok in SENTENCE_FINAL:
            out.append(cur)
            cur = []
    if cur:
        out.append(cur)
    return out


def _split_records(lines: Iterable[str], unit: Unit) -> Iterable[list[str]]:
    if unit not in UNITS:
        raise ValueError(f"unit must be one of {UNITS}, got {unit!r}")
    for line in lines:
        toks = tokenize(line)
        if unit == "line":
            yield toks
        else:
            yield from split_sentences(toks)


def read_text(path: str | Path) -> str:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CorpusLoadError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CorpusLoadError(f"{path}: invalid UTF-8 at byte offset {e.start}") from e


def load_corpus(path: str | Path, unit: Unit = "sentence") -> Corpus:
    # splitlines() would also break on \x0b, \x1c etc.; records are '\n' separated
    return Corpus.from_lines(read_text(path).split("\n"), unit)


@dataclass(frozen=True)
class Vocabulary:
    """Bijective token <-> id map. Ids 0-3 are PAD, UNK, BOS, EOS."""

    tokens: tuple[str, ...]
    token_to_id: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.tokens[: len(SPECIALS)] != SPECIALS:
            raise DataError("vocabulary must start with the special tokens")
        mapping = {t: i for i, t in enumerate(self.tokens)}
        if len(mapping) != len(self.tokens):
            raise DataError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "token_to_id", mapping)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    @property
    def specials(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(SPECIALS)}

    def encode(self, tokens: Iterable[str]) -> list[int]:
        get = self.token_to_id.get
        return [get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]


def build_vocabulary(corpus: Corpus) -> Vocabulary:
    """Vocabulary ordered by descending frequency, ties broken lexicographically.

    Corpus tokens that collide with a special symbol keep the special id.
    """
    if len(corpus) == 0:
        raise DataError("cannot build a vocabulary from an empty corpus")
    freq = Counter(tok for s in corpus for tok in s.tokens)
    for sp in SPECIALS:
        freq.pop(sp, None)
    ordered = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(SPECIALS + tuple(t for t, _ in ordered))


def corpus_stats(corpus: Corpus) -> dict[str, int]:
    """Distinct token count (no specials), token count and sample count."""
    types: set[str] = set()
    n_tokens = 0
    for s in corpus:
        types.update(s.tokens)
        n_tokens += len(s)
    return {"vocab_size": len(types), "token_count": n_tokens, "sample_count": len(corpus)}
