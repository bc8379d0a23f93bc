"""Sidecar POS / dependency annotations and the two structural difficulty measures.

The sidecar is JSON Lines, one object per sample::

    {"id": 0, "pos": ["DT", "NN"], "heads": [1, -1]}

`heads[i]` is the index of token i's head within the sample, -1 for the root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Corpus, read_text
from .errors import AnnotationError


@dataclass(frozen=True)
class SampleAnnotation:
    id: int
    pos: tuple[str, ...]
    heads: tuple[int, ...]


def validate_heads(heads: Sequence[int]) -> int:
    """Check that `heads` encodes a single rooted tree; return the root index."""
    n = len(heads)
    roots = [i for i, h in enumerate(heads) if h == -1]
    if len(roots) != 1:
        raise ValueError(f"expected exactly one root, found {len(roots)}")
    for i, h in enumerate(heads):
        if h != -1 and not 0 <= h < n:
            raise ValueError(f"head {h} of token {i} is out of range")
    # 0 = unvisited, 1 = on current path, 2 = known to reach the root
    state = [0] * n
    for start in range(n):
        path = []
        node = start
        while node != -1 and state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node]
        if node != -1 and state[node] == 1:
            raise ValueError(f"cycle through token {node}")
        for p in path:
            state[p] = 2
    return roots[0]


def tree_depth(heads: Sequence[int]) -> int:
    """Nodes on the longest root-to-leaf path; the root alone has depth 1."""
    try:
        validate_heads(heads)
    except ValueError as e:
        raise AnnotationError(f"invalid dependency tree: {e}") from e
    depth = [0] * len(heads)

    def resolve(i: int) -> int:
        chain = []
        while depth[i] == 0:
            chain.append(i)
            if heads[i] == -1:
                break
            i = heads[i]
        d = depth[i] if depth[i] else 0
        for node in reversed(chain):
            d += 1
            depth[node] = d
        return d

    return max(resolve(i) for i in range(len(heads)))


def pos_diversity(pos: Sequence[str]) -> int:
    if not pos:
        raise AnnotationError("cannot measure POS diversity of an empty tag list")
    return len(set(pos))


def _parse_record(obj, lineno: int) -> SampleAnnotation:
    if not isinstance(obj, dict) or set(obj) != {"id", "pos", "heads"}:
        raise AnnotationError(f"line {lineno}: record must have exactly the fields id, pos, heads")
    sid, pos, heads = obj["id"], obj["pos"], obj["heads"]
    if not isinstance(sid, int) or isinstance(sid, bool):
        raise AnnotationError(f"line {lineno}: id must be an integer")
    if not isinstance(pos, list) or not all(isinstance(p, str) for p in pos):
        raise AnnotationError(f"sample {sid}: pos must be a list of strings")
    if not isinstance(heads, list) or not all(isinstance(h, int) and not isinstance(h, bool) for h in heads):
        raise AnnotationError(f"sample {sid}: heads must be a list of integers")
    return SampleAnnotation(sid, tuple(pos), tuple(heads))


def validate_annotation(ann: SampleAnnotation, corpus: Corpus) -> None:
    if not 0 <= ann.id < len(corpus):
        raise AnnotationError(f"sample {ann.id}: id not present in the corpus")
    n = len(corpus[ann.id])
    if len(ann.pos) != n or len(ann.heads) != n:
        raise AnnotationError(
            f"sample {ann.id}: length mismatch (tokens={n}, pos={len(ann.pos)}, heads={len(ann.heads)})"
        )
    try:
        validate_heads(ann.heads)
    except ValueError as e:
        raise AnnotationError(f"sample {ann.id}: {e}") from e


def load_annotations(path: str | Path, corpus: Corpus) -> dict[int, SampleAnnotation]:
    out: dict[int, SampleAnnotation] = {}
    for lineno, line in enumerate(read_text(path).split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise AnnotationError(f"{path}:{lineno}: {e.msg}") from e
        ann = _parse_record(obj, lineno)
        if ann.id in out:
            raise AnnotationError(f"sample {ann.id}: duplicate record")
        validate_annotation(ann, corpus)
        out[ann.id] = ann
    return out


def dump_annotations(annotations: Sequence[SampleAnnotation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for a in annotations:
            rec = {"id": a.id, "pos": list(a.pos), "heads": list(a.heads)}
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")
