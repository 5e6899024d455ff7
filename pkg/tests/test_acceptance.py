"""Exit criteria.  Each test records one PASS/FAIL line in the terminal summary."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from cream import framework as F
from cream import model as M
from cream.cli import main
from cream.experiment import run_seed
from cream.lexer import classify_identifiers, render, tokenize
from cream.rng import Rng
from cream.synthgen import GenSpec, generate_dataset
from cream.views import abstract_code, build_views, rename_random

from golden import FORCED_RENAMES, GOLDEN
from test_lexer import KIND
from test_model import finite_difference, random_model, rel_error

SEEDS = (0, 1, 2, 3, 4)

# frozen from the pilot runs (see README, "Calibration")
BASELINE_MIN_GAP = 0.15
MIN_GAP_REDUCTION = 0.10
MAX_ORIGINAL_ACC_DRIFT = 0.02
SEED_TIME_LIMIT = 300.0


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def test_1_mechanism_identities():
    t0 = time.perf_counter()
    r = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        C = int(r.integers(2, 9))
        zf, zk, zt = r.normal(size=(3, C)) * 5
        alpha = float(r.uniform())
        worst = max(worst, np.abs(F.fuse(zf, zk, zt) - (zf + zk + zt) / 3).max())
        worst = max(worst, np.abs(F.cf_combine(zf, zk, zt, alpha) - (zf + zk + (1 - alpha) * zt)).max())
        a, b, c = r.normal(size=(3, C))
        worst = max(worst, np.abs(F.tie(F.te(a, c), F.nde(b, c)) - (a - b)).max())
    identities = worst <= 1e-12

    # cf_infer on a real parameter set equals the closed form over branch logits
    p = random_model(1, V=12, d=4, C=3)
    ev = F.EncodedViews(np.array([4, 2, 6]), np.array([5, 7]), np.array([4, 5, 6, 7]))
    z = [M.forward(p, ev.f), M.forward(p, ev.k), M.forward(p, ev.t)]
    infer_ok = np.allclose(F.cf_infer(p, ev, 0.6), z[0] + z[1] + 0.4 * z[2], rtol=0, atol=1e-12)

    train_set, _, test_set = generate_dataset(GenSpec(n_train=48, n_valid=1, n_test=64, seed=1))
    records = []
    cfg = F.TrainConfig(epochs=1, fusion_fraction=0.25)
    model = F.train(train_set, [], cfg, on_iteration=records.append)
    argmax_ok = all(
        F.predict(model, s, 0.0) == int(np.argmax(F.fuse(*F.branch_logits(model.params, model.encode(s.code)))))
        for s in test_set
    )
    i_fusion = cfg.fusion_iteration(len(train_set))
    deferred_ok = i_fusion == 12 and all(r.z_r.tobytes() == r.z_k.tobytes() for r in records if r.i < i_fusion)
    additive_ok = all(r.loss.l_total == r.loss.l_f + r.loss.l_r + r.loss.l_t for r in records)
    elapsed = time.perf_counter() - t0
    ok = identities and infer_ok and argmax_ok and deferred_ok and additive_ok and elapsed < 1.0
    record(
        "1 mechanism identities",
        ok,
        f"max closed-form error {worst:.1e}, cf_infer={infer_ok}, alpha0-argmax={argmax_ok}, "
        f"deferred={deferred_ok}, additivity={additive_ok}, {elapsed:.2f}s",
    )


def test_2_numerical_core():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        r = np.random.default_rng(seed)
        V, d, C = int(r.integers(3, 11)), int(r.integers(1, 5)), int(r.integers(2, 4))
        p = random_model(seed, V=V, d=d, C=C)
        ids = r.integers(0, V, size=r.integers(1, 7))
        label = int(r.integers(0, C))
        _, g = M.backward(p, ids, label)
        fd = finite_difference(p, ids, label)
        worst = max(worst, rel_error(g.dense_E(V), fd["E"]), rel_error(g.W, fd["W"]), rel_error(g.b, fd["b"]))
    r = np.random.default_rng(7)
    sm = max(abs(M.softmax(r.normal(size=int(r.integers(1, 20))) * 50).sum() - 1) for _ in range(1000))
    ce = abs(M.cross_entropy([0.0, 0.0], 0) - math.log(2))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-4 and sm < 1e-9 and ce < 1e-9 and elapsed < 10
    record("2 numerical core", ok, f"grad rel err {worst:.1e}, softmax dev {sm:.1e}, CE(0,0) err {ce:.1e}, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def seeds():
    return [run_seed(s) for s in SEEDS]


def test_3_robustness_phenomenon(seeds):
    b_gap = np.mean([r.baseline.robustness.gap for r in seeds])
    c_gap = np.mean([r.cream.robustness.gap for r in seeds])
    b_acc = np.mean([r.baseline.robustness.acc_original for r in seeds])
    c_acc = np.mean([r.cream.robustness.acc_original for r in seeds])
    slowest = max(r.seconds for r in seeds)
    ok = (
        b_gap >= BASELINE_MIN_GAP
        and c_gap <= b_gap - MIN_GAP_REDUCTION
        and abs(c_acc - b_acc) <= MAX_ORIGINAL_ACC_DRIFT
        and slowest < SEED_TIME_LIMIT
    )
    record(
        "3 robustness phenomenon",
        ok,
        f"baseline gap {b_gap:.3f} (>= {BASELINE_MIN_GAP}), cream gap {c_gap:.3f} "
        f"(reduction {b_gap - c_gap:.3f} >= {MIN_GAP_REDUCTION}), acc_original baseline {b_acc:.3f} "
        f"vs cream {c_acc:.3f} (|diff| <= {MAX_ORIGINAL_ACC_DRIFT}), slowest seed {slowest:.0f}s",
    )


def test_4_alpha_sweep_direction(seeds):
    wins = [r.cream.acc_transformed_by_alpha[0.8] >= r.cream.acc_transformed_by_alpha[0.0] for r in seeds]
    detail = ", ".join(
        f"s{r.seed}: {r.cream.acc_transformed_by_alpha[0.0]:.3f}->{r.cream.acc_transformed_by_alpha[0.8]:.3f}" for r in seeds
    )
    record("4 alpha sweep direction", sum(wins) >= 4, f"{sum(wins)}/5 seeds ({detail})")


def test_5_attack_success_rate(seeds):
    wins = [r.cream.attack.asr <= r.baseline.attack.asr for r in seeds]
    detail = ", ".join(f"s{r.seed}: {r.baseline.attack.asr:.3f} vs {r.cream.attack.asr:.3f}" for r in seeds)
    record("5 attack success rate", all(wins), f"{sum(wins)}/5 seeds baseline vs cream ({detail})")


def test_6_determinism(tmp_path):
    config = "n_train = 400\nn_valid = 100\nn_test = 100\nepochs = 2\nseed = 21\n"
    outputs = []
    for name in ("first", "second"):
        d = tmp_path / name
        d.mkdir()
        (d / "exp.cfg").write_text(config)
        codes = [main([cmd, "--config", str(d / "exp.cfg")]) for cmd in ("gen", "train", "eval")]
        files = {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}
        outputs.append((codes, files))
    same = outputs[0][0] == outputs[1][0] == [0, 0, 0] and outputs[0][1] == outputs[1][1]

    from cream.cli import load_model, read_jsonl
    from cream.evaluation import evaluate

    d = tmp_path / "first"
    reloaded = load_model(d / "out/model.ckpt")
    live = F.train(read_jsonl(d / "data/train.jsonl"), read_jsonl(d / "data/valid.jsonl"), reloaded.config, n_classes=8)
    test_set = read_jsonl(d / "data/test.jsonl")
    roundtrip = evaluate(live, test_set, 0.6) == evaluate(reloaded, test_set, 0.6)
    record("6 determinism", same and roundtrip, f"{len(outputs[0][1])} artifacts byte-identical={same}, checkpoint round-trip={roundtrip}")


def test_7_golden_suite():
    failures = []
    for source, expected, ids, abstract in GOLDEN:
        toks = tokenize(source)
        got_ids = set(classify_identifiers(toks))
        texts = [t for t, _ in expected]
        v = build_views(toks, got_ids)
        checks = [
            [(t.text, t.kind) for t in toks] == [(t, KIND[k]) for t, k in expected],
            got_ids == ids,
            v.k_tokens == texts,
            v.f_tokens == ["<ID>" if i in ids else t for i, t in enumerate(texts)],
            v.t_tokens == [t for i, t in enumerate(texts) if i in ids],
            render(abstract_code(toks, got_ids)) == abstract,
            render(toks) == source,
        ]
        if not all(checks):
            failures.append(source)
    for source, vocab, want, mapping in FORCED_RENAMES:
        toks = tokenize(source)
        out, got = rename_random(toks, classify_identifiers(toks), vocab, Rng(0))
        if render(out) != want or got != mapping:
            failures.append(source)
    toks = tokenize("x = y + x;")
    out, got = rename_random(toks, classify_identifiers(toks), ["p", "q", "r"], Rng(7))
    if render(out) != "p = q + p;":
        failures.append("seeded trace")
    n = len(GOLDEN)
    record("7 lexer/views golden suite", n >= 20 and not failures, f"{n} snippets + {len(FORCED_RENAMES) + 1} rename traces, failures={failures}")
