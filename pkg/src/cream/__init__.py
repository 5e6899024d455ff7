"""Counterfactual debiasing of identifier names for neural code classifiers."""

from .evaluation import AttackResult, MetricsReport, RobustnessReport, attack_greedy, attack_suite, evaluate, robustness
from .framework import TrainConfig, TrainedModel, cf_combine, cf_infer, fuse, nde, predict, te, tie, train
from .lexer import Kind, LexError, Token, TokenList, classify_identifiers, tokenize
from .synthgen import GenSpec, generate_dataset
from .views import BranchViews, CodeSample, abstract_code, build_transformed_set, build_views, rename_random

__version__ = "0.1.0"
