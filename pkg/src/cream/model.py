"""Bag-of-embeddings classifier with hand-written backpropagation.

    h = mean(E[ids]),  z = W.T @ h + b

One ``ModelParams`` instance serves every branch; there are no
branch-private weights.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .lexer import ID_PLACEHOLDER, is_reserved
from .rng import Rng

PAD, UNK, ID, VAR = "<PAD>", "<UNK>", ID_PLACEHOLDER, "VAR_*"
RESERVED = (PAD, UNK, ID, VAR)


class ShapeError(ValueError):
    pass


class Vocab:
    """Token <-> id map.  Ids 0..3 are reserved; every ``VAR_i`` maps to 3."""

    def __init__(self, tokens=()):
        self.itos = list(RESERVED)
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        for tok in tokens:
            self.add(tok)

    def add(self, tok: str) -> int:
        if is_reserved(tok):
            return self.lookup(tok)
        if tok not in self.stoi:
            self.stoi[tok] = len(self.itos)
            self.itos.append(tok)
        return self.stoi[tok]

    def lookup(self, tok: str) -> int:
        if tok == ID:
            return 2
        if is_reserved(tok):
            return 3
        return self.stoi.get(tok, 1)

    def encode(self, tokens, max_len: int | None = None) -> np.ndarray:
        if max_len is not None:
            tokens = tokens[:max_len]
        return np.fromiter((self.lookup(t) for t in tokens), dtype=np.int64, count=len(tokens))

    def __len__(self):
        return len(self.itos)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.itos == other.itos


@dataclass
class ModelParams:
    E: np.ndarray  # [V, d]
    W: np.ndarray  # [d, C]
    b: np.ndarray  # [C]

    @classmethod
    def init(cls, vocab_size: int, dim: int, n_classes: int, rng: Rng, scale: float = 0.1):
        E = rng.uniform_array((vocab_size, dim), -scale, scale)
        W = rng.uniform_array((dim, n_classes), -scale, scale)
        return cls(E, W, np.zeros(n_classes))

    @property
    def n_classes(self) -> int:
        return self.b.shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(self.E.copy(), self.W.copy(), self.b.copy())

    def check(self) -> None:
        V, d = self.E.shape
        if self.W.shape != (d, self.b.shape[0]):
            raise ShapeError(f"W has shape {self.W.shape}, expected ({d}, {self.b.shape[0]})")
        if not all(np.isfinite(a).all() for a in (self.E, self.W, self.b)):
            raise FloatingPointError("non-finite parameter")


@dataclass
class Gradients:
    """Same shapes as ModelParams, except E is stored sparsely by row."""

    rows: np.ndarray  # unique embedding rows touched
    E_rows: np.ndarray  # [len(rows), d]
    W: np.ndarray
    b: np.ndarray

    def dense_E(self, vocab_size: int) -> np.ndarray:
        out = np.zeros((vocab_size, self.W.shape[0]))
        out[self.rows] = self.E_rows
        return out

    def __add__(self, other: "Gradients") -> "Gradients":
        rows = np.union1d(self.rows, other.rows)
        E = np.zeros((len(rows), self.W.shape[0]))
        E[np.searchsorted(rows, self.rows)] += self.E_rows
        E[np.searchsorted(rows, other.rows)] += other.E_rows
        return Gradients(rows, E, self.W + other.W, self.b + other.b)


def _check_ids(params, ids):
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= params.E.shape[0]):
        raise ShapeError(f"token id out of range [0, {params.E.shape[0]})")
    return ids


def pool(params: ModelParams, ids) -> np.ndarray:
    ids = _check_ids(params, ids)
    if ids.size == 0:
        return np.zeros(params.E.shape[1])
    return params.E[ids].mean(axis=0)


def forward(params: ModelParams, ids) -> np.ndarray:
    return params.W.T @ pool(params, ids) + params.b


def softmax(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def cross_entropy(z, label: int) -> float:
    z = np.asarray(z, dtype=np.float64)
    if not 0 <= label < z.shape[0]:
        raise IndexError(f"label {label} out of range for {z.shape[0]} classes")
    m = z.max()
    return float(m + np.log(np.exp(z - m).sum()) - z[label])


def ce_grad(z, label: int) -> np.ndarray:
    """d cross_entropy / d z = softmax(z) - onehot(label)."""
    g = softmax(z)
    g[label] -= 1.0
    return g


def backprop_logits(params: ModelParams, ids, dz) -> Gradients:
    """Gradients of a scalar whose derivative w.r.t. forward(params, ids) is ``dz``."""
    ids = _check_ids(params, ids)
    h = pool(params, ids)
    dh = params.W @ dz
    if ids.size:
        rows, counts = np.unique(ids, return_counts=True)
        E_rows = np.outer(counts / ids.size, dh)
    else:
        rows, E_rows = np.zeros(0, dtype=np.int64), np.zeros((0, params.E.shape[1]))
    return Gradients(rows, E_rows, np.outer(h, dz), np.array(dz, dtype=np.float64))


def backward(params: ModelParams, ids, label: int) -> tuple[float, Gradients]:
    z = forward(params, ids)
    return cross_entropy(z, label), backprop_logits(params, ids, ce_grad(z, label))


def sgd_step(params: ModelParams, grads: Gradients, lr: float) -> ModelParams:
    """Return ``params - lr * grads``; the input is left untouched."""
    out = params.copy()
    out.E[grads.rows] -= lr * grads.E_rows
    out.W -= lr * grads.W
    out.b -= lr * grads.b
    return out


def sgd_step_(params: ModelParams, grads: Gradients, lr: float) -> None:
    """In-place variant used by the training loop."""
    params.E[grads.rows] -= lr * grads.E_rows
    params.W -= lr * grads.W
    params.b -= lr * grads.b


# Checkpoint layout: 8-byte little-endian header length, a UTF-8 JSON
# header (shapes, vocab, metadata), then E, W, b as row-major float64 LE.
_MAGIC = b"CREAMCK1"


def save_checkpoint(path, params: ModelParams, vocab: Vocab, meta: dict | None = None) -> None:
    header = {
        "shapes": {"E": list(params.E.shape), "W": list(params.W.shape), "b": list(params.b.shape)},
        "vocab": vocab.itos,
        "meta": meta or {},
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        for arr in (params.E, params.W, params.b):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ModelParams, Vocab, dict]:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (n,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(n).decode("utf-8"))
        arrays = []
        for key in ("E", "W", "b"):
            shape = tuple(header["shapes"][key])
            count = int(np.prod(shape))
            buf = fh.read(8 * count)
            if len(buf) != 8 * count:
                raise ValueError(f"{path}: truncated checkpoint")
            arrays.append(np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape))
    vocab = Vocab()
    vocab.itos = list(header["vocab"])
    vocab.stoi = {t: i for i, t in enumerate(vocab.itos)}
    return ModelParams(*arrays), vocab, header["meta"]
