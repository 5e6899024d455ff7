"""One seed of the baseline-versus-counterfactual comparison."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Optional

from .evaluation import AttackResult, RobustnessReport, attack_suite, robustness
from .framework import TrainConfig, TrainedModel, train
from .rng import STREAM_ATTACK, STREAM_TRANSFORM, Rng, stream_seed
from .synthgen import GenSpec, generate_dataset
from .views import build_transformed_set, identifier_pool

ATTACK_ALL = 1 << 30


@dataclass
class Condition:
    model: TrainedModel
    alpha: float
    robustness: RobustnessReport
    attack: Optional[AttackResult] = None
    acc_transformed_by_alpha: dict = field(default_factory=dict)


@dataclass
class SeedResult:
    seed: int
    baseline: Condition
    cream: Condition
    seconds: float


def prepare(spec: GenSpec):
    """Splits plus the renamed test set; the rename pool is every training identifier."""
    train_set, valid_set, test_set = generate_dataset(spec)
    pool = identifier_pool(train_set)
    transformed = build_transformed_set(test_set, pool, Rng(stream_seed(spec.seed, STREAM_TRANSFORM)))
    return train_set, valid_set, test_set, transformed, pool


def run_seed(seed: int, spec: Optional[GenSpec] = None, config: Optional[TrainConfig] = None,
             alphas=(0.0, 0.8), attack_budget: Optional[int] = ATTACK_ALL, workers: int = 1) -> SeedResult:
    t0 = time.perf_counter()
    spec = dataclasses.replace(spec or GenSpec(), seed=seed)
    config = dataclasses.replace(config or TrainConfig(), seed=seed)
    train_set, valid_set, test_set, transformed, pool = prepare(spec)

    conditions = {}
    for mode, alpha in (("baseline", 0.0), ("cream", config.alpha)):
        model = train(train_set, valid_set, dataclasses.replace(config, mode=mode), n_classes=spec.n_classes)
        cond = Condition(model, alpha, robustness(model, test_set, transformed, alpha, workers))
        if mode == "cream":
            for a in alphas:
                cond.acc_transformed_by_alpha[a] = robustness(model, test_set, transformed, a, workers).acc_transformed
        if attack_budget is not None:
            rng = Rng(stream_seed(seed, STREAM_ATTACK))
            cond.attack = attack_suite(model, test_set, alpha, attack_budget, rng, pool, workers)
        conditions[mode] = cond
    return SeedResult(seed, conditions["baseline"], conditions["cream"], time.perf_counter() - t0)
