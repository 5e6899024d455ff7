"""Experiment runner: ``cream {gen,train,eval,sweep,attack} --config FILE``.

The config is a flat ``key = value`` file (``#`` starts a comment).
Exit codes: 0 success, 2 config/validation error, 3 I/O error,
4 numeric failure during training.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .evaluation import attack_suite, evaluate, robustness
from .framework import NumericError, TrainConfig, TrainedModel, train
from .model import load_checkpoint, save_checkpoint
from .rng import STREAM_ATTACK, STREAM_TRANSFORM, Rng, stream_seed
from .synthgen import GenSpec, SpecError, generate_dataset
from .views import CodeSample, build_transformed_set, identifier_pool

log = logging.getLogger("cream")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

TRAIN_FILE, VALID_FILE, TEST_FILE, TRANSFORMED_FILE = "train.jsonl", "valid.jsonl", "test.jsonl", "test_transformed.jsonl"
MANIFEST_FILE, CHECKPOINT_FILE, TRAIN_LOG_FILE = "manifest.json", "model.ckpt", "train_log.csv"
REPORT_FILE, REPORT_CSV, SWEEP_FILE, ATTACK_FILE = "report.json", "report.csv", "sweep.csv", "attack.json"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # dataset
    n_classes: int = 8
    n_train: int = 2000
    n_valid: int = 500
    n_test: int = 500
    rho: float = 0.9
    test_rho: float | None = None
    pool_size: int = 20
    # training
    alpha: float = 0.6
    fusion_fraction: float = 0.1
    epochs: int = 4
    lr: float = 0.1
    embed_dim: int = 32
    max_len: int = 256
    mode: str = "cream"
    # evaluation
    alpha_sweep: list = field(default_factory=lambda: [0.0, 0.4, 0.5, 0.6, 0.7, 0.8])
    fusion_sweep: list = field(default_factory=lambda: [0.1])
    attack_budget: int = -1  # negative: every identifier
    # paths
    data_dir: str = "data"
    out_dir: str = "out"
    seed: int = 0

    def gen_spec(self) -> GenSpec:
        return GenSpec(self.n_classes, self.n_train, self.n_valid, self.n_test, self.rho, self.pool_size, self.seed, self.test_rho)

    def train_config(self, **overrides) -> TrainConfig:
        kw = dict(
            alpha=self.alpha, fusion_fraction=self.fusion_fraction, epochs=self.epochs, lr=self.lr,
            seed=self.seed, embed_dim=self.embed_dim, max_len=self.max_len, mode=self.mode,
        )
        kw.update(overrides)
        return TrainConfig(**kw)

    def digest(self) -> str:
        """Hash of every experimental setting; locations are left out."""
        settings = dataclasses.asdict(self)
        del settings["data_dir"], settings["out_dir"]
        blob = json.dumps(settings, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def validate(self) -> None:
        try:
            self.gen_spec().validate()
            self.train_config().validate()
            for a in self.alpha_sweep:
                self.train_config(alpha=a).validate()
            for f in self.fusion_sweep:
                self.train_config(fusion_fraction=f).validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _coerce(name, raw: str, default):
    kind = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}[name]
    try:
        if name in ("alpha_sweep", "fusion_sweep"):
            return [float(x) for x in raw.split(",") if x.strip()]
        if raw.lower() in ("none", "null", ""):
            if "None" in str(kind):
                return None
            raise ValueError("value required")
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw, 0)
        if isinstance(default, float) or "float" in str(kind):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r} ({exc})") from exc


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    known = {f.name for f in dataclasses.fields(cfg)}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, value, getattr(cfg, key)))
    return cfg


def load_config(path, seed=None, out=None) -> ExperimentConfig:
    try:
        text = Path(path).read_text() if path else ""
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text)
    if seed is not None:
        cfg.seed = seed
    if out is not None:
        cfg.out_dir = out
    if path:
        # relative paths in the config resolve against the config's directory
        base = Path(path).parent
        cfg.data_dir = str(base / cfg.data_dir)
        if out is None:
            cfg.out_dir = str(base / cfg.out_dir)
    cfg.validate()
    return cfg


def write_jsonl(path, samples) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            fh.write(json.dumps({"id": s.id, "code": s.code, "label": s.label}, ensure_ascii=False) + "\n")


def read_jsonl(path, n_classes: int | None = None) -> list[CodeSample]:
    out, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            s = CodeSample(str(obj["id"]), obj["code"], int(obj["label"]))
            if s.id in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate id {s.id!r}")
            if s.label < 0 or (n_classes is not None and s.label >= n_classes):
                raise ConfigError(f"{path}:{lineno}: label {s.label} out of range")
            seen.add(s.id)
            out.append(s)
    return out


def _data(cfg, name):
    return read_jsonl(Path(cfg.data_dir) / name, cfg.n_classes)


def _budget(cfg):
    return cfg.attack_budget if cfg.attack_budget >= 0 else 1 << 30


def cmd_gen(cfg: ExperimentConfig, workers: int = 1) -> int:
    train_set, valid_set, test_set = generate_dataset(cfg.gen_spec())
    pool = identifier_pool(train_set)
    transformed, maps = build_transformed_set(test_set, pool or ["v"], Rng(stream_seed(cfg.seed, STREAM_TRANSFORM)), with_maps=True)
    d = Path(cfg.data_dir)
    d.mkdir(parents=True, exist_ok=True)
    write_jsonl(d / TRAIN_FILE, train_set)
    write_jsonl(d / VALID_FILE, valid_set)
    write_jsonl(d / TEST_FILE, test_set)
    write_jsonl(d / TRANSFORMED_FILE, transformed)
    manifest = {
        "seed": cfg.seed,
        "gen_spec": dataclasses.asdict(cfg.gen_spec()),
        "identifier_pool_size": len(pool),
        "rename_maps": {s.id: m for s, m in zip(test_set, maps)},
    }
    (d / MANIFEST_FILE).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    log.info("wrote %d/%d/%d samples to %s", len(train_set), len(valid_set), len(test_set), d)
    return EXIT_OK


def _train_and_save(cfg, tcfg, ckpt_path, log_path) -> TrainedModel:
    train_set, valid_set = _data(cfg, TRAIN_FILE), _data(cfg, VALID_FILE)
    Path(ckpt_path).parent.mkdir(parents=True, exist_ok=True)
    with open(log_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "l_f", "l_r", "l_t", "valid_accuracy"])

        def on_epoch(rec):
            acc = "" if rec.valid_accuracy is None else repr(rec.valid_accuracy)
            writer.writerow([rec.epoch, repr(rec.l_f), repr(rec.l_r), repr(rec.l_t), acc])
            fh.flush()

        model = train(train_set, valid_set, tcfg, on_epoch=on_epoch, n_classes=cfg.n_classes)
    save_checkpoint(ckpt_path, model.params, model.vocab, {"train_config": dataclasses.asdict(tcfg)})
    return model


def load_model(path) -> TrainedModel:
    params, vocab, meta = load_checkpoint(path)
    return TrainedModel(params, vocab, TrainConfig(**meta["train_config"]))


def cmd_train(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    _train_and_save(cfg, cfg.train_config(), out / CHECKPOINT_FILE, out / TRAIN_LOG_FILE)
    return EXIT_OK


def cmd_eval(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    model = load_model(out / CHECKPOINT_FILE)
    test_set, transformed = _data(cfg, TEST_FILE), _data(cfg, TRANSFORMED_FILE)
    report = evaluation_report(model, test_set, transformed, cfg.alpha, cfg.digest(), workers)
    (out / REPORT_FILE).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    with open(out / REPORT_CSV, "w", newline="") as fh:
        keys = ["accuracy", "macro_f1", "acc_original", "acc_transformed", "gap"]
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "fusion_fraction", *keys])
        writer.writerow([cfg.alpha, cfg.fusion_fraction, *(repr(report[k]) for k in keys)])
    return EXIT_OK


def evaluation_report(model, test_set, transformed, alpha, digest, workers=1, asr=None) -> dict:
    if test_set:
        metrics = evaluate(model, test_set, alpha, workers)
        rob = robustness(model, test_set, transformed, alpha, workers)
        acc, macro, per_class = metrics.accuracy, metrics.macro_f1, metrics.per_class_f1
        acc_o, acc_t, gap = rob.acc_original, rob.acc_transformed, rob.gap
    else:
        # nothing to score; an empty transformed set has no gap by convention
        acc = macro = acc_o = acc_t = gap = 0.0
        per_class = [0.0] * model.params.n_classes
    return {
        "accuracy": acc,
        "macro_f1": macro,
        "per_class_f1": per_class,
        "acc_original": acc_o,
        "acc_transformed": acc_t,
        "gap": gap,
        "asr": asr,
        "config_digest": digest,
    }


def cmd_sweep(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    test_set, transformed = _data(cfg, TEST_FILE), _data(cfg, TRANSFORMED_FILE)
    rows = []
    for frac in cfg.fusion_sweep:
        # alpha only matters at inference, so one model serves the whole alpha column
        cell = out / f"fusion_{frac:g}"
        model = _train_and_save(cfg, cfg.train_config(fusion_fraction=frac), cell / CHECKPOINT_FILE, cell / TRAIN_LOG_FILE)
        for alpha in cfg.alpha_sweep:
            rob = robustness(model, test_set, transformed, alpha, workers)
            rows.append([alpha, frac, repr(rob.acc_original), repr(rob.acc_transformed), repr(rob.gap)])
    with open(out / SWEEP_FILE, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "fusion_fraction", "acc_original", "acc_transformed", "gap"])
        writer.writerows(rows)
    return EXIT_OK


def cmd_attack(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    model = load_model(out / CHECKPOINT_FILE)
    test_set = _data(cfg, TEST_FILE)
    pool = identifier_pool(_data(cfg, TRAIN_FILE))
    if test_set:
        res = attack_suite(model, test_set, cfg.alpha, _budget(cfg), Rng(stream_seed(cfg.seed, STREAM_ATTACK)), pool, workers)
        result = dataclasses.asdict(res)
    else:
        result = {"n_attacked": 0, "n_flipped": 0, "asr": None}
    result.update(alpha=cfg.alpha, budget=cfg.attack_budget, config_digest=cfg.digest())
    (out / ATTACK_FILE).write_text(json.dumps(result, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "eval": cmd_eval, "sweep": cmd_sweep, "attack": cmd_attack}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cream", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, help="override the root seed")
    p.add_argument("--workers", type=int, default=1, help="threads for evaluation and attack")
    p.add_argument("--out", help="output directory (overrides out_dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.seed, args.out)
        return COMMANDS[args.command](cfg, args.workers)
    except (ConfigError, SpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
