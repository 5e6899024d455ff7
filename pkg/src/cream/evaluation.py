"""Accuracy/F1, original-vs-renamed robustness, and a greedy renaming attack."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .framework import EmptyDataset, TrainedModel, encode_views
from .lexer import Kind, classify_identifiers, render, replace_texts, tokenize
from .rng import Rng
from .views import build_views, identifier_order

CANDIDATES_PER_IDENTIFIER = 32


class MisalignedSets(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class_f1: list
    macro_f1: float
    n: int


@dataclass(frozen=True)
class RobustnessReport:
    acc_original: float
    acc_transformed: float
    gap: float


@dataclass(frozen=True)
class AttackOutcome:
    flipped: bool
    trace: list = field(default_factory=list)  # (original, replacement) committed in order
    code: str = ""


@dataclass(frozen=True)
class AttackResult:
    n_attacked: int
    n_flipped: int
    asr: Optional[float]


def metrics_from_predictions(y_true, y_pred, n_classes: int) -> MetricsReport:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise EmptyDataset("no samples to evaluate")
    f1 = []
    for c in range(n_classes):
        tp = int(np.sum((y_pred == c) & (y_true == c)))
        fp = int(np.sum((y_pred == c) & (y_true != c)))
        fn = int(np.sum((y_pred != c) & (y_true == c)))
        # 2PR/(P+R) written in counts; 0 when precision + recall = 0
        f1.append(2 * tp / (2 * tp + fp + fn) if tp else 0.0)
    accuracy = float(np.mean(y_true == y_pred))
    return MetricsReport(accuracy, f1, float(np.mean(f1)), int(y_true.size))


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def predictions(model: TrainedModel, dataset, alpha: float, workers: int = 1) -> list[int]:
    return _map(lambda s: int(np.argmax(model.scores(s.code, alpha))), dataset, workers)


def evaluate(model: TrainedModel, dataset, alpha: float, workers: int = 1) -> MetricsReport:
    if not dataset:
        raise EmptyDataset("evaluation set is empty")
    preds = predictions(model, dataset, alpha, workers)
    return metrics_from_predictions([s.label for s in dataset], preds, model.params.n_classes)


def robustness(model: TrainedModel, original_set, transformed_set, alpha: float, workers: int = 1) -> RobustnessReport:
    if [s.id for s in original_set] != [s.id for s in transformed_set]:
        raise MisalignedSets("original and transformed sets are not aligned by id")
    a = evaluate(model, original_set, alpha, workers).accuracy
    b = evaluate(model, transformed_set, alpha, workers).accuracy
    return RobustnessReport(a, b, a - b)


def _margin(z: np.ndarray, label: int) -> float:
    others = np.delete(z, label)
    return float(z[label] - others.max())


def attack_greedy(model: TrainedModel, sample, candidate_pool, budget: int, alpha: float, rng: Rng) -> AttackOutcome:
    """Black-box identifier substitution against one correctly classified sample.

    Identifiers are visited in order of first occurrence.  For each, up to
    32 random pool entries are tried and the first one that strictly lowers
    the true-class margin is kept.  Stops on a flip or once ``budget``
    substitutions have been committed.
    """
    toks = tokenize(sample.code)
    ids = classify_identifiers(toks)
    pool = list(candidate_pool)
    max_len = model.config.max_len

    def score(tl):
        ev = encode_views(model.vocab, build_views(tl, ids), max_len)
        return model.scores_encoded(ev, alpha)

    z = score(toks)
    margin = _margin(z, sample.label)
    trace = []
    if budget <= 0 or not pool or margin <= 0:
        return AttackOutcome(margin <= 0 and int(np.argmax(z)) != sample.label, trace, sample.code)

    for name in identifier_order(toks, ids):
        if len(trace) >= budget:
            break
        positions = [i for i in ids if toks[i].text == name]
        present = {t.text for t in toks if t.kind is Kind.IDENTIFIER}
        for _ in range(CANDIDATES_PER_IDENTIFIER):
            cand = pool[rng.randbelow(len(pool))]
            if cand in present:
                # would merge two variables or shadow a call head
                continue
            trial = replace_texts(toks, {i: cand for i in positions})
            z_new = score(trial)
            m_new = _margin(z_new, sample.label)
            if m_new < margin:
                toks, margin = trial, m_new
                trace.append((name, cand))
                break
        if int(np.argmax(score(toks))) != sample.label:
            return AttackOutcome(True, trace, render(toks))
    return AttackOutcome(False, trace, render(toks))


def attack_suite(model: TrainedModel, dataset, alpha: float, budget: int, rng: Rng, candidate_pool=None, workers: int = 1) -> AttackResult:
    """ASR over the initially correct samples; sample ``i`` attacks with ``rng.fork(i)``."""
    if not dataset:
        raise EmptyDataset("attack set is empty")
    if candidate_pool is None:
        candidate_pool = model_identifier_pool(model)
    preds = predictions(model, dataset, alpha, workers)
    targets = [(i, s) for i, s in enumerate(dataset) if preds[i] == s.label]
    outcomes = _map(
        lambda item: attack_greedy(model, item[1], candidate_pool, budget, alpha, rng.fork(item[0])),
        targets,
        workers,
    )
    flipped = sum(o.flipped for o in outcomes)
    asr = flipped / len(targets) if targets else None
    return AttackResult(len(targets), flipped, asr)


def model_identifier_pool(model: TrainedModel) -> list[str]:
    """Vocabulary entries that lex as a single plain identifier."""
    out = []
    for tok in model.vocab.itos[4:]:
        try:
            tl = tokenize(tok)
        except ValueError:
            continue
        if len(tl) == 1 and tl[0].kind is Kind.IDENTIFIER and classify_identifiers(tl):
            out.append(tok)
    return out
