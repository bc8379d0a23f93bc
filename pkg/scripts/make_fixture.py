#!/usr/bin/env python3
"""Regenerate the bundled pre-annotated fixture corpus.

Sentences come from a small probabilistic grammar that also knows each
word's POS tag and dependency head, so the POS and DEP curricula can be
exercised without an external tagger or parser.

    python scripts/make_fixture.py [--out src/curriculum_lm/data/fixture]
"""

import argparse
import random
from pathlib import Path

from curriculum_lm.annotations import SampleAnnotation, dump_annotations, validate_heads

LEXICON = {
    "DT": "the a every some this".split(),
    "JJ": "big small old young red green quiet bright dark happy strange heavy".split(),
    "NN": ("dog cat man woman child bird house tree river car book city garden "
           "teacher farmer horse road window box song").split(),
    "VT": "saw liked found followed carried painted watched built heard chased".split(),
    "VI": "slept ran laughed waited sang fell".split(),
    "IN": "near under behind with beside over".split(),
    "RB": "quickly slowly often quietly again".split(),
    "PRP": "she he they".split(),
}
TAG = {"VT": "VBD", "VI": "VBD"}


class Builder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.words: list[str] = []
        self.tags: list[str] = []
        self.heads: list[int] = []

    def word(self, cls: str) -> int:
        ws = LEXICON[cls]
        # Zipf-like preference for early entries keeps n-gram rarity varied
        w = self.rng.choices(ws, weights=[1.0 / (i + 1) for i in range(len(ws))])[0]
        return self.add(w, TAG.get(cls, cls))

    def add(self, w: str, tag: str, head: int = -2) -> int:
        self.words.append(w)
        self.tags.append(tag)
        self.heads.append(head)
        return len(self.words) - 1

    def attach(self, child: int, head: int) -> None:
        self.heads[child] = head

    def np(self, budget: int) -> int:
        r = self.rng
        if budget <= 1 and r.random() < 0.3:
            return self.word("PRP")
        det = self.word("DT")
        adjs = [self.word("JJ") for _ in range(r.choices([0, 1, 2], weights=[5, 3, 1])[0])]
        noun = self.word("NN")
        for c in [det] + adjs:
            self.attach(c, noun)
        if budget > 0:
            x = r.random()
            if x < 0.3:
                self.attach(self.pp(budget - 1), noun)
            elif x < 0.45:
                that = self.add("that", "WDT")
                verb = self.word("VT")
                self.attach(that, verb)
                self.attach(verb, noun)
                self.attach(self.np(budget - 1), verb)
        return noun

    def pp(self, budget: int) -> int:
        prep = self.word("IN")
        self.attach(self.np(budget), prep)
        return prep

    def clause(self, budget: int) -> int:
        r = self.rng
        subj = self.np(budget)
        transitive = r.random() < 0.65
        verb = self.word("VT" if transitive else "VI")
        self.attach(subj, verb)
        if transitive:
            self.attach(self.np(budget), verb)
        if r.random() < 0.3:
            self.attach(self.pp(budget - 1), verb)
        if r.random() < 0.25:
            self.attach(self.word("RB"), verb)
        return verb

    def sentence(self) -> int:
        r = self.rng
        budget = r.choices([0, 1, 2, 3], weights=[3, 4, 2, 1])[0]
        root = self.clause(budget)
        if r.random() < 0.15:
            conj = self.add("and", "CC")
            self.attach(conj, root)
            self.attach(self.clause(max(0, budget - 1)), root)
        self.attach(self.add(".", "."), root)
        self.heads[root] = -1
        return root


def generate(n: int, rng: random.Random, min_len: int = 4, max_len: int = 30):
    out = []
    while len(out) < n:
        b = Builder(rng)
        b.sentence()
        if not min_len <= len(b.words) <= max_len:
            continue
        validate_heads(b.heads)
        out.append((b.words, b.tags, b.heads))
    return out


def write_split(out: Path, name: str, rows) -> None:
    with open(out / f"{name}.txt", "w", encoding="utf-8", newline="\n") as f:
        for words, _, _ in rows:
            f.write(" ".join(words) + "\n")
    anns = [SampleAnnotation(i, tuple(t), tuple(h)) for i, (_, t, h) in enumerate(rows)]
    dump_annotations(anns, out / f"{name}.annotations.jsonl")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "src/curriculum_lm/data/fixture", type=Path)
    ap.add_argument("--train", type=int, default=1000)
    ap.add_argument("--valid", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    write_split(args.out, "train", generate(args.train, rng))
    write_split(args.out, "valid", generate(args.valid, rng))


if __name__ == "__main__":
    main()
