"""Three-branch training with deferred fusion and counterfactual inference.

The naming branch sees only identifier occurrences (t), the non-naming
branch sees the code with identifiers masked (f), and the combined branch
sees the raw tokens (k).  All three run through the same parameters.

At inference the direct effect of names is removed from the fused score:

    Z'_r = Z_f + Z_k + (1 - alpha) * Z_t

which is the fused score minus ``alpha`` times the score obtained with the
structural inputs blanked, after dropping the positive factor 1/3 and the
uniform-score constant of the blanked branches.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import model as M
from .rng import STREAM_SHUFFLE, Rng, stream_seed
from .views import BranchViews, views_of

log = logging.getLogger(__name__)

MODES = ("cream", "baseline")


class EmptyDataset(ValueError):
    pass


class NumericError(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.6
    fusion_fraction: float = 0.1
    epochs: int = 4
    lr: float = 0.1
    seed: int = 0
    embed_dim: int = 32
    max_len: int = 256
    # "baseline" trains the combined branch alone (L_total = L_r, Z_r = Z_k)
    mode: str = "cream"

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.fusion_fraction <= 1.0:
            raise ValueError(f"fusion_fraction must lie in [0, 1], got {self.fusion_fraction}")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if self.embed_dim <= 0 or self.max_len <= 0:
            raise ValueError("embed_dim and max_len must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def fusion_iteration(self, n_train: int) -> int:
        return math.floor(self.fusion_fraction * self.epochs * n_train)


@dataclass(frozen=True)
class LossRecord:
    l_f: float
    l_r: float
    l_t: float
    l_total: float


@dataclass(frozen=True)
class IterationRecord:
    i: int
    fused: bool
    z_f: np.ndarray
    z_k: np.ndarray
    z_t: np.ndarray
    z_r: np.ndarray
    loss: LossRecord


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    l_f: float
    l_r: float
    l_t: float
    l_total: float
    valid_accuracy: Optional[float]


class EncodedViews(NamedTuple):
    f: np.ndarray
    t: np.ndarray
    k: np.ndarray


def encode_views(vocab: M.Vocab, views: BranchViews, max_len: int) -> EncodedViews:
    return EncodedViews(
        vocab.encode(views.f_tokens, max_len),
        vocab.encode(views.t_tokens, max_len),
        vocab.encode(views.k_tokens, max_len),
    )


def _same_shape(*arrays):
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays[1:]):
        raise M.ShapeError(f"shape mismatch: {[a.shape for a in arrays]}")
    return arrays


def fuse(z_f, z_k, z_t) -> np.ndarray:
    z_f, z_k, z_t = _same_shape(z_f, z_k, z_t)
    return (z_f + z_k + z_t) / 3.0


def te(r_fact, r_cf):
    """Total effect: factual outcome minus fully counterfactual outcome."""
    a, b = _same_shape(r_fact, r_cf)
    return a - b


def nde(r_t_only, r_null):
    """Natural direct effect of names: R(f*, k*, t) - R(f*, k*, t*)."""
    a, b = _same_shape(r_t_only, r_null)
    return a - b


def tie(te_val, nde_val):
    a, b = _same_shape(te_val, nde_val)
    return a - b


def cf_combine(z_f, z_k, z_t, alpha: float) -> np.ndarray:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    z_f, z_k, z_t = _same_shape(z_f, z_k, z_t)
    return z_f + z_k + (1.0 - alpha) * z_t


def branch_logits(params: M.ModelParams, views: EncodedViews):
    """(z_f, z_k, z_t); an empty naming view scores as the zero (uniform) vector."""
    z_t = M.forward(params, views.t) if len(views.t) else np.zeros(params.n_classes)
    return M.forward(params, views.f), M.forward(params, views.k), z_t


def cf_infer(params: M.ModelParams, views: EncodedViews, alpha: float) -> np.ndarray:
    return cf_combine(*branch_logits(params, views), alpha)


@dataclass
class TrainedModel:
    params: M.ModelParams
    vocab: M.Vocab
    config: TrainConfig
    log: list = field(default_factory=list)

    def encode(self, code: str) -> EncodedViews:
        return encode_views(self.vocab, views_of(code), self.config.max_len)

    def scores_encoded(self, ev: EncodedViews, alpha: float) -> np.ndarray:
        if self.config.mode == "baseline":
            # conventional model: the combined branch alone
            return M.forward(self.params, ev.k)
        return cf_infer(self.params, ev, alpha)

    def scores(self, code: str, alpha: float) -> np.ndarray:
        return self.scores_encoded(self.encode(code), alpha)


def predict(model: TrainedModel, sample, alpha: float) -> int:
    """Highest-scoring class; ``np.argmax`` breaks ties toward the lowest index."""
    return int(np.argmax(model.scores(sample.code, alpha)))


def build_vocab(dataset) -> M.Vocab:
    vocab = M.Vocab()
    for sample in dataset:
        v = views_of(sample.code)
        for tok in v.k_tokens:
            vocab.add(tok)
    return vocab


def n_classes_of(*datasets) -> int:
    return 1 + max(s.label for ds in datasets for s in ds)


def init_model(train_set, config: TrainConfig, n_classes: Optional[int] = None) -> tuple[M.ModelParams, M.Vocab, Rng]:
    vocab = build_vocab(train_set)
    rng = Rng(stream_seed(config.seed, STREAM_SHUFFLE))
    C = n_classes or n_classes_of(train_set)
    params = M.ModelParams.init(len(vocab), config.embed_dim, C, rng)
    return params, vocab, rng


def _step(params, ev, y, i, i_fusion, mode):
    """One multi-task update.  Returns the iteration record pieces."""
    C = params.n_classes
    z_k = M.forward(params, ev.k)
    if mode == "baseline":
        l_r = M.cross_entropy(z_k, y)
        grads = [(ev.k, M.ce_grad(z_k, y))]
        zero = np.zeros(C)
        return (zero, z_k, zero, z_k, False, LossRecord(0.0, l_r, 0.0, l_r)), grads

    has_t = len(ev.t) > 0
    z_f = M.forward(params, ev.f)
    z_t = M.forward(params, ev.t) if has_t else np.zeros(C)
    fused = i >= i_fusion
    z_r = (z_f + z_k + z_t) / 3.0 if fused else z_k
    l_f, l_r, l_t = M.cross_entropy(z_f, y), M.cross_entropy(z_r, y), M.cross_entropy(z_t, y)
    g_f, g_r, g_t = M.ce_grad(z_f, y), M.ce_grad(z_r, y), M.ce_grad(z_t, y)
    if fused:
        d_f, d_k, d_t = g_f + g_r / 3.0, g_r / 3.0, g_t + g_r / 3.0
    else:
        d_f, d_k, d_t = g_f, g_r, g_t
    grads = [(ev.f, d_f), (ev.k, d_k)]
    if has_t:
        grads.append((ev.t, d_t))
    # an empty naming input scores as a constant, so L_t has no gradient there
    return (z_f, z_k, z_t, z_r, fused, LossRecord(l_f, l_r, l_t, l_f + l_r + l_t)), grads


def train(
    train_set,
    valid_set,
    config: TrainConfig,
    on_iteration: Optional[Callable[[IterationRecord], None]] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
    n_classes: Optional[int] = None,
) -> TrainedModel:
    """Multi-task training with deferred fusion, batch size 1.

    Iteration ``i`` counts samples seen across all epochs, starting at 0.
    Until ``i`` reaches ``floor(fusion_fraction * epochs * len(train_set))``
    the combined score stands in for the fused one.
    """
    config.validate()
    if not train_set:
        raise EmptyDataset("training set is empty")
    params, vocab, rng = init_model(train_set, config, n_classes or n_classes_of(train_set, valid_set or []))
    model = TrainedModel(params, vocab, config)
    encoded = [(encode_views(vocab, views_of(s.code), config.max_len), s.label) for s in train_set]
    valid_encoded = [(model.encode(s.code), s.label) for s in valid_set or []]
    i_fusion = config.fusion_iteration(len(train_set))

    i = 0
    for epoch in range(config.epochs):
        order = list(range(len(encoded)))
        rng.shuffle(order)
        sums = np.zeros(3)
        for idx in order:
            ev, y = encoded[idx]
            (z_f, z_k, z_t, z_r, fused, loss), grads = _step(params, ev, y, i, i_fusion, config.mode)
            if not math.isfinite(loss.l_total):
                raise NumericError(f"non-finite loss at iteration {i}")
            if on_iteration is not None:
                on_iteration(IterationRecord(i, fused, z_f, z_k, z_t, z_r, loss))
            # all gradients are taken at the pre-update parameters
            computed = [M.backprop_logits(params, ids, dz) for ids, dz in grads]
            for g in computed:
                M.sgd_step_(params, g, config.lr)
            sums += (loss.l_f, loss.l_r, loss.l_t)
            i += 1
        means = sums / len(encoded)
        acc = None
        if valid_encoded:
            hits = sum(int(np.argmax(model.scores_encoded(ev, config.alpha))) == y for ev, y in valid_encoded)
            acc = hits / len(valid_encoded)
        rec = EpochRecord(epoch, *means, float(means.sum()), acc)
        model.log.append(rec)
        log.info("epoch %d l_f=%.4f l_r=%.4f l_t=%.4f valid_acc=%s", epoch, *means, acc)
        if on_epoch is not None:
            on_epoch(rec)
    return model


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)
