"""Branch inputs and semantic-preserving identifier transforms."""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import ID_PLACEHOLDER, KEYWORDS, Kind, TokenList, classify_identifiers, render, replace_texts, tokenize
from .rng import Rng

MAX_REDRAWS = 100


class EmptyVocab(ValueError):
    pass


@dataclass(frozen=True)
class BranchViews:
    f_tokens: list[str]  # structure only, identifiers masked
    t_tokens: list[str]  # identifier occurrences only
    k_tokens: list[str]  # everything


@dataclass(frozen=True)
class CodeSample:
    id: str
    code: str
    label: int


def build_views(toks: TokenList, ids) -> BranchViews:
    k = toks.texts
    f = [ID_PLACEHOLDER if i in ids else text for i, text in enumerate(k)]
    t = [text for i, text in enumerate(k) if i in ids]
    return BranchViews(f, t, k)


def views_of(code: str) -> BranchViews:
    toks = tokenize(code)
    return build_views(toks, classify_identifiers(toks))


def identifier_order(toks: TokenList, ids) -> list[str]:
    """Distinct identifier texts in order of first occurrence."""
    seen = {}
    for i in sorted(ids):
        seen.setdefault(toks[i].text, None)
    return list(seen)


def abstract_code(toks: TokenList, ids) -> TokenList:
    numbering = {name: f"VAR_{n}" for n, name in enumerate(identifier_order(toks, ids))}
    return replace_texts(toks, {i: numbering[toks[i].text] for i in ids})


def apply_rename(toks: TokenList, ids, mapping: dict[str, str]) -> TokenList:
    return replace_texts(toks, {i: mapping[toks[i].text] for i in ids if toks[i].text in mapping})


def rename_random(toks: TokenList, ids, vocab, rng: Rng) -> tuple[TokenList, dict[str, str]]:
    """Consistently rename every user identifier to a uniform draw from ``vocab``.

    A draw is rejected if another identifier already received it or if it
    names some other identifier still present in the sample (call heads
    included).  After ``MAX_REDRAWS`` rejections a numeric suffix is
    appended to the last draw until it is free.
    """
    if not vocab:
        raise EmptyVocab("identifier pool is empty")
    vocab = list(vocab)
    order = identifier_order(toks, ids)
    present = {t.text for t in toks if t.kind is Kind.IDENTIFIER}
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for name in order:
        others = (present - {name}) - set(mapping)

        def taken(c):
            return c in used or c in others

        for _ in range(MAX_REDRAWS):
            cand = vocab[rng.randbelow(len(vocab))]
            if not taken(cand):
                break
        else:
            base, k = cand, 1
            while taken(f"{base}{k}"):
                k += 1
            cand = f"{base}{k}"
        mapping[name] = cand
        used.add(cand)
    return apply_rename(toks, ids, mapping), mapping


def rename_sample(sample: CodeSample, vocab, rng: Rng) -> tuple[CodeSample, dict[str, str]]:
    toks = tokenize(sample.code)
    new, mapping = rename_random(toks, classify_identifiers(toks), vocab, rng)
    return CodeSample(sample.id, render(new), sample.label), mapping


def build_transformed_set(dataset, vocab, rng: Rng, with_maps: bool = False):
    """Rename every sample independently; sample ``i`` draws from ``rng.fork(i)``."""
    if not vocab:
        raise EmptyVocab("identifier pool is empty")
    out, maps = [], []
    for i, sample in enumerate(dataset):
        new, mapping = rename_sample(sample, vocab, rng.fork(i))
        out.append(new)
        maps.append(mapping)
    return (out, maps) if with_maps else out


def identifier_pool(dataset) -> list[str]:
    """Sorted distinct user identifiers occurring in ``dataset``."""
    pool = set()
    for sample in dataset:
        toks = tokenize(sample.code)
        pool.update(toks[i].text for i in classify_identifiers(toks))
    return sorted(pool - KEYWORDS)
