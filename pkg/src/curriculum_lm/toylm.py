"""Fixed-context feedforward language model with hand-written backprop.

Given the previous ``context_size`` tokens the model computes

    h = tanh(concat(E[context]) @ W1 + b1)
    p = softmax(h @ W2 + b2)

All arithmetic is float64 numpy, single threaded and order-deterministic.
"""

from __future__ import annotations

import io
import json
import math
import zipfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CheckpointError, ConfigError, DegenerateBatchError

CHECKPOINT_VERSION = 1
PARAM_NAMES = ("E", "W1", "b1", "W2", "b2")
_EVAL_CHUNK = 4096


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    context_size: int = 3
    embed_dim: int = 16
    hidden_dim: int = 32
    learning_rate: float = 0.1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not v > 0:
                raise ConfigError(f"{f.name} must be positive, got {v}")

    @property
    def shapes(self) -> dict[str, tuple[int, ...]]:
        c, d, h, v = self.context_size, self.embed_dim, self.hidden_dim, self.vocab_size
        return {"E": (v, d), "W1": (c * d, h), "b1": (h,), "W2": (h, v), "b2": (v,)}


@dataclass
class ModelParams:
    E: np.ndarray
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def arrays(self) -> dict[str, np.ndarray]:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def copy(self) -> "ModelParams":
        return ModelParams(**{n: a.copy() for n, a in self.arrays().items()})

    def check(self, config: ModelConfig) -> None:
        for name, shape in config.shapes.items():
            a = getattr(self, name)
            if a.shape != shape:
                raise CheckpointError(f"parameter {name} has shape {a.shape}, config implies {shape}")
            if not np.all(np.isfinite(a)):
                raise CheckpointError(f"parameter {name} has non-finite entries")


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero."""
    shapes = config.shapes

    def uniform(shape, fan_in):
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return ModelParams(
        E=uniform(shapes["E"], config.embed_dim),
        W1=uniform(shapes["W1"], shapes["W1"][0]),
        b1=np.zeros(shapes["b1"]),
        W2=uniform(shapes["W2"], config.hidden_dim),
        b2=np.zeros(shapes["b2"]),
    )


def zero_params(config: ModelConfig) -> ModelParams:
    """All-zero weights: a model that predicts the uniform distribution."""
    return ModelParams(**{n: np.zeros(s) for n, s in config.shapes.items()})


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def forward(params: ModelParams, context: Sequence[int]) -> np.ndarray:
    """Next-token distribution for a single context."""
    v, d = params.E.shape
    c = params.W1.shape[0] // d
    ctx = np.asarray(context, dtype=np.int64)
    if ctx.shape != (c,):
        raise ValueError(f"context must hold exactly {c} ids, got {len(ctx)}")
    if ctx.min() < 0 or ctx.max() >= v:
        raise ValueError(f"context id out of range for vocabulary of size {v}")
    x = params.E[ctx].reshape(-1)
    h = np.tanh(x @ params.W1 + params.b1)
    return _softmax(h @ params.W2 + params.b2)


def positions(token_ids: np.ndarray, loss_mask: np.ndarray, context_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Contexts and targets for every scoreable position of a padded batch.

    Position i is scoreable when i >= context_size, its target is unmasked and
    no context token is masked.
    """
    token_ids = np.asarray(token_ids)
    mask = np.asarray(loss_mask).astype(bool)
    b, w = token_ids.shape
    if w <= context_size:
        return np.empty((0, context_size), np.int64), np.empty(0, np.int64)
    win = np.lib.stride_tricks.sliding_window_view(mask, context_size + 1, axis=1)
    ok = win.all(axis=2)  # (b, w - c); column j covers positions j..j+c
    rows, cols = np.nonzero(ok)
    tgt_pos = cols + context_size
    ctx = np.stack([token_ids[rows, cols + k] for k in range(context_size)], axis=1)
    return ctx.astype(np.int64), token_ids[rows, tgt_pos].astype(np.int64)


def sequence_positions(seqs: Sequence[Sequence[int]], context_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Contexts and targets over unpadded sequences, at full length."""
    ctxs, tgts = [], []
    for s in seqs:
        a = np.asarray(s, dtype=np.int64)
        if len(a) <= context_size:
            continue
        ctxs.append(np.lib.stride_tricks.sliding_window_view(a[:-1], context_size))
        tgts.append(a[context_size:])
    if not ctxs:
        return np.empty((0, context_size), np.int64), np.empty(0, np.int64)
    return np.concatenate(ctxs), np.concatenate(tgts)


def _forward_positions(params: ModelParams, ctx: np.ndarray):
    x = params.E[ctx].reshape(len(ctx), -1)
    h = np.tanh(x @ params.W1 + params.b1)
    z = h @ params.W2 + params.b2
    return x, h, z


def _nll_sum(params: ModelParams, ctx: np.ndarray, tgt: np.ndarray) -> float:
    total = 0.0
    for i in range(0, len(tgt), _EVAL_CHUNK):
        _, _, z = _forward_positions(params, ctx[i : i + _EVAL_CHUNK])
        logp = _log_softmax(z)
        total -= float(logp[np.arange(len(z)), tgt[i : i + _EVAL_CHUNK]].sum())
    return total


def _batch_positions(params: ModelParams, batch) -> tuple[np.ndarray, np.ndarray]:
    c = params.W1.shape[0] // params.E.shape[1]
    ctx, tgt = positions(batch.token_ids, batch.loss_mask, c)
    if len(tgt) == 0:
        raise DegenerateBatchError(f"batch has no position with {c} unmasked context tokens and an unmasked target")
    return ctx, tgt


def batch_loss(params: ModelParams, batch) -> float:
    """Mean NLL over the scoreable positions of a batch."""
    ctx, tgt = _batch_positions(params, batch)
    return _nll_sum(params, ctx, tgt) / len(tgt)


def loss_and_grads(params: ModelParams, batch) -> tuple[float, ModelParams]:
    ctx, tgt = _batch_positions(params, batch)
    n = len(tgt)
    x, h, z = _forward_positions(params, ctx)
    logp = _log_softmax(z)
    loss = -float(logp[np.arange(n), tgt].sum()) / n

    dz = np.exp(logp)
    dz[np.arange(n), tgt] -= 1.0
    dz /= n
    dW2 = h.T @ dz
    db2 = dz.sum(axis=0)
    da = (dz @ params.W2.T) * (1.0 - h * h)
    dW1 = x.T @ da
    db1 = da.sum(axis=0)
    dx = (da @ params.W1.T).reshape(ctx.shape + (params.E.shape[1],))
    dE = np.zeros_like(params.E)
    np.add.at(dE, ctx, dx)
    return loss, ModelParams(E=dE, W1=dW1, b1=db1, W2=dW2, b2=db2)


def backward(params: ModelParams, batch) -> ModelParams:
    return loss_and_grads(params, batch)[1]


def sgd_step(params: ModelParams, grads: ModelParams, learning_rate: float) -> ModelParams:
    return ModelParams(**{n: a - learning_rate * getattr(grads, n) for n, a in params.arrays().items()})


def perplexity(params: ModelParams, dataset: Sequence[Sequence[int]]) -> float:
    """exp(mean NLL) over every scoreable position of unpadded sequences."""
    c = params.W1.shape[0] // params.E.shape[1]
    ctx, tgt = sequence_positions(dataset, c)
    if len(tgt) == 0:
        raise DegenerateBatchError(f"dataset has no sequence longer than the context size {c}")
    return math.exp(_nll_sum(params, ctx, tgt) / len(tgt))


def save_checkpoint(path: str | Path, config: ModelConfig, params: ModelParams, vocab_tokens: Sequence[str] = ()) -> None:
    """npz archive of every matrix plus a JSON header with version, config and vocabulary."""
    header = {"version": CHECKPOINT_VERSION, "config": asdict(config), "vocab": list(vocab_tokens)}
    buf = io.BytesIO()
    np.savez(buf, header=np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8), **params.arrays())
    Path(path).write_bytes(buf.getvalue())


def load_checkpoint(path: str | Path) -> tuple[ModelConfig, ModelParams, list[str]]:
    try:
        with np.load(path, allow_pickle=False) as z:
            header = json.loads(z["header"].tobytes().decode("utf-8"))
            arrays = {n: z[n] for n in PARAM_NAMES}
    except FileNotFoundError as e:
        raise CheckpointError(f"checkpoint not found: {path}") from e
    except (OSError, KeyError, ValueError, zipfile.BadZipFile, UnicodeDecodeError, EOFError) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint ({e})") from e
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {header.get('version')}")
    try:
        config = ModelConfig(**header["config"])
    except (TypeError, ConfigError) as e:
        raise CheckpointError(f"{path}: bad model config ({e})") from e
    params = ModelParams(**arrays)
    params.check(config)
    vocab = list(header.get("vocab", []))
    if vocab and len(vocab) != config.vocab_size:
        raise CheckpointError(f"{path}: vocabulary has {len(vocab)} entries, config says {config.vocab_size}")
    return config, params, vocab
