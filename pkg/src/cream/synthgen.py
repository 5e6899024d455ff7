"""Synthetic classification corpora with planted name/label correlation.

Each class owns one program template (a fixed token-kind skeleton) and a
private pool of identifier names.  With probability ``rho`` a sample names
its variables from its class pool, otherwise from the global pool (every
class pool plus a neutral pool).  Structure therefore determines the label
exactly while names only correlate with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lexer import KEYWORDS
from .rng import STREAM_DATASET, Rng, stream_seed
from .views import CodeSample


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    n_classes: int = 8
    n_train: int = 2000
    n_valid: int = 500
    n_test: int = 500
    rho: float = 0.9
    pool_size: int = 20
    seed: int = 0
    # correlation used for valid/test; None means same as training
    test_rho: Optional[float] = None

    def validate(self) -> None:
        for name in ("n_classes", "pool_size"):
            if getattr(self, name) <= 0:
                raise SpecError(f"{name} must be positive")
        for name in ("n_train", "n_valid", "n_test"):
            if getattr(self, name) < 0:
                raise SpecError(f"{name} must be non-negative")
        for name in ("rho", "test_rho"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise SpecError(f"{name} must lie in [0, 1], got {v}")
        if self.n_classes > len(TEMPLATES):
            raise SpecError(f"n_classes={self.n_classes} exceeds the {len(TEMPLATES)} available templates")
        if (self.n_classes + 1) * self.pool_size > len(NAME_SUPPLY):
            raise SpecError("pool_size too large for the name supply")


def _cmp(r):
    return r.choice(["<", "<=", "!="])


def _lit(r, lo=0, hi=9):
    return str(lo + r.randbelow(hi - lo + 1))


def _ty(r):
    return r.choice(["int", "char", "float"])


# Each template takes (names, rng) and returns code.  Literal values,
# operators and keywords vary inside their kind; the kind skeleton is fixed.
def _bubble(v, r):
    i, j, a, n, t = v
    return (
        f"for ({_ty(r)} {i} = {_lit(r)}; {i} {_cmp(r)} {n}; {i} = {i} + 1) {{\n"
        f"  for ({_ty(r)} {j} = {_lit(r)}; {j} {_cmp(r)} {n} - {i} - 1; {j} = {j} + 1) {{\n"
        f"    if ({a}[{j}] > {a}[{j} + 1]) {{\n"
        f"      {_ty(r)} {t} = {a}[{j}];\n"
        f"      {a}[{j}] = {a}[{j} + 1];\n"
        f"      {a}[{j} + 1] = {t};\n"
        f"    }}\n  }}\n}}\n"
    )


def _accumulate(v, r):
    s, i, a, n = v
    return (
        f"{_ty(r)} {s} = {_lit(r)};\n"
        f"for ({_ty(r)} {i} = {_lit(r)}; {i} {_cmp(r)} {n}; {i} = {i} + 1) {{\n"
        f"  {s} = {s} + {a}[{i}];\n}}\n"
        f"return {s};\n"
    )


def _count_if(v, r):
    c, i, a, n, k = v
    return (
        f"{_ty(r)} {c} = 0;\n"
        f"for ({_ty(r)} {i} = {_lit(r)}; {i} {_cmp(r)} {n}; {i} = {i} + 1) {{\n"
        f"  if ({a}[{i}] == {k}) {{\n    {c} = {c} + 1;\n  }}\n}}\n"
        f"return {c};\n"
    )


def _max_scan(v, r):
    m, i, a, n = v
    return (
        f"{_ty(r)} {m} = {a}[0];\n"
        f"{_ty(r)} {i} = {_lit(r, 1, 3)};\n"
        f"while ({i} {_cmp(r)} {n}) {{\n"
        f"  if ({a}[{i}] > {m}) {{\n    {m} = {a}[{i}];\n  }}\n"
        f"  {i} = {i} + 1;\n}}\n"
        f"return {m};\n"
    )


def _binary_search(v, r):
    lo, hi, mid, a, n, k = v
    return (
        f"{_ty(r)} {lo} = 0;\n{_ty(r)} {hi} = {n} - 1;\n"
        f"while ({lo} <= {hi}) {{\n"
        f"  {_ty(r)} {mid} = ({lo} + {hi}) / 2;\n"
        f"  if ({a}[{mid}] == {k}) {{\n    return {mid};\n  }}\n"
        f"  if ({a}[{mid}] < {k}) {{\n    {lo} = {mid} + 1;\n  }} else {{\n    {hi} = {mid} - 1;\n  }}\n"
        f"}}\nreturn -1;\n"
    )


def _product(v, r):
    p, n = v
    return (
        f"{_ty(r)} {p} = 1;\n"
        f"while ({n} > {_lit(r, 0, 1)}) {{\n"
        f"  {p} = {p} * {n};\n  {n} = {n} - 1;\n}}\n"
        f"return {p};\n"
    )


def _print_all(v, r):
    i, a, n = v
    fmt = r.choice(['"%d\\n"', '"%d "', '"[%d]"'])
    return (
        f"for ({_ty(r)} {i} = {_lit(r)}; {i} {_cmp(r)} {n}; {i} = {i} + 1) {{\n"
        f"  printf({fmt}, {a}[{i}]);\n}}\n"
    )


def _reverse(v, r):
    lo, hi, t, a, n = v
    return (
        f"{_ty(r)} {lo} = 0;\n{_ty(r)} {hi} = {n} - 1;\n"
        f"while ({lo} < {hi}) {{\n"
        f"  {_ty(r)} {t} = {a}[{lo}];\n  {a}[{lo}] = {a}[{hi}];\n  {a}[{hi}] = {t};\n"
        f"  {lo} = {lo} + 1;\n  {hi} = {hi} - 1;\n}}\n"
    )


def _gcd(v, r):
    x, y, t = v
    return (
        f"while ({y} != 0) {{\n"
        f"  {_ty(r)} {t} = {y};\n  {y} = {x} % {y};\n  {x} = {t};\n}}\n"
        f"return {x};\n"
    )


def _find_first(v, r):
    f, i, a, n, k = v
    return (
        f"{_ty(r)} {f} = -1;\n"
        f"for ({_ty(r)} {i} = {_lit(r)}; {i} {_cmp(r)} {n}; {i} = {i} + 1) {{\n"
        f"  if ({a}[{i}] == {k}) {{\n    {f} = {i};\n    break;\n  }}\n}}\n"
        f"return {f};\n"
    )


# (template, number of distinct identifiers it needs)
TEMPLATES = [
    (_bubble, 5),
    (_accumulate, 4),
    (_count_if, 5),
    (_max_scan, 4),
    (_binary_search, 6),
    (_product, 2),
    (_print_all, 3),
    (_reverse, 5),
    (_gcd, 3),
    (_find_first, 5),
]

_STEMS = [
    "arr", "buf", "cnt", "data", "elem", "flag", "head", "idx", "item", "key",
    "len", "lim", "node", "num", "pos", "ptr", "res", "size", "tmp", "val",
    "acc", "base", "cur", "end", "left", "right", "mid", "pivot", "step", "total",
    "sum", "prod", "max", "min", "low", "high", "row", "col", "seed", "score",
]
_SUFFIXES = ["", "_a", "_b", "_x", "_i", "_n", "_k", "2", "3"]
NAME_SUPPLY = sorted({s + x for s in _STEMS for x in _SUFFIXES} - KEYWORDS)


def make_pools(spec: GenSpec) -> tuple[list[list[str]], list[str]]:
    """Disjoint class pools and the neutral pool, drawn from a fixed supply."""
    names = list(NAME_SUPPLY)
    Rng(stream_seed(spec.seed, STREAM_DATASET)).fork(0).shuffle(names)
    k = spec.pool_size
    pools = [names[c * k : (c + 1) * k] for c in range(spec.n_classes)]
    neutral = names[spec.n_classes * k : (spec.n_classes + 1) * k]
    return pools, neutral


def _distinct(pool, count, r):
    picked = []
    while len(picked) < count:
        name = r.choice(pool)
        if name not in picked:
            picked.append(name)
    return picked


PROLOGUE_STATEMENTS = 4


def _arith(r):
    return r.choice(["+", "-", "*", "/", "%"])


def _prologue(names, r):
    """Declarations shared by every class: ``T a = b OP c;`` over the sample's names."""
    lines = []
    for _ in range(PROLOGUE_STATEMENTS):
        a, b, c = (names[r.randbelow(len(names))] for _ in range(3))
        lines.append(f"{_ty(r)} {a} = {b} {_arith(r)} {c};\n")
    return "".join(lines)


def make_sample(sid, label, rho, pools, global_pool, r):
    template, n_names = TEMPLATES[label]
    correlated = r.random() < rho
    pool = pools[label] if correlated else global_pool
    names = _distinct(pool, n_names, r)
    return CodeSample(sid, _prologue(names, r) + template(names, r), label)


def _split(name, n, rho, spec, pools, global_pool, root, offset):
    labels = [i % spec.n_classes for i in range(n)]
    root.fork(offset).shuffle(labels)
    return [
        make_sample(f"{name}-{i:05d}", labels[i], rho, pools, global_pool, root.fork(offset + 1 + i))
        for i in range(n)
    ]


def generate_dataset(spec: GenSpec):
    """Return ``(train, valid, test)`` lists of CodeSample, deterministic in ``spec.seed``."""
    spec.validate()
    pools, neutral = make_pools(spec)
    global_pool = sorted({n for p in pools for n in p} | set(neutral))
    root = Rng(stream_seed(spec.seed, STREAM_DATASET))
    test_rho = spec.rho if spec.test_rho is None else spec.test_rho
    # widely spaced offsets keep the per-sample streams of the splits apart
    train = _split("train", spec.n_train, spec.rho, spec, pools, global_pool, root, 1 << 20)
    valid = _split("valid", spec.n_valid, test_rho, spec, pools, global_pool, root, 2 << 20)
    test = _split("test", spec.n_test, test_rho, spec, pools, global_pool, root, 3 << 20)
    return train, valid, test
