"""Command-line front end: funcs dump, generate, train, eval, experiment.

Every flag can also come from a JSON config file (``--config``); explicit
flags win.  Exit codes: 0 success, 2 configuration/usage error, 1 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, rng
from .datasets import (
    DatasetError,
    DatasetFormatError,
    DatasetSpec,
    NoiseKind,
    NoiseSpec,
    Regime,
    build_dataset,
    load,
    save,
)
from .encoder import DomainMap, EncoderConfig, EncoderError, ImageType, write_png
from .experiments import (
    ExperimentError,
    ExperimentPreset,
    PRESET_NAMES,
    default_output_root,
    run_preset,
)
from .metrics import MetricsError, accuracy, confusion, emit_breakdown
from .nn import (
    CheckpointError,
    ModelError,
    TrainConfig,
    init_model,
    load_model,
    predict,
    save_model,
    train,
)
from .suite import Suite, SuiteError, evaluate, list_functions, make_instance, problem

_SUITES = {"bbob": Suite.CONTINUOUS_BBOB, "discrete": Suite.DISCRETE_PB}


class CliError(ValueError):
    pass


def _merge_config(args: argparse.Namespace, parser_defaults: dict) -> argparse.Namespace:
    """Fill unset flags from the JSON config file, then from defaults."""
    config = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        config = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(config, dict):
            raise CliError("config file must hold a JSON object of flag values")
    for key, default in parser_defaults.items():
        if getattr(args, key, None) is None:
            value = config.get(key, default)
            setattr(args, key, value)
    return args


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file of flag defaults (flags override)")
    sub.add_argument("--seed", type=int, default=None, help="master seed")


# -- funcs dump --------------------------------------------------------------


def _cmd_funcs_dump(args) -> int:
    defaults = {"suite": "bbob", "k": 1, "dim": 2, "seed": 0, "at": None}
    args = _merge_config(args, defaults)
    prob = problem(_SUITES[args.suite], args.k)
    inst = make_instance(prob, args.dim, args.seed)
    if args.at is None:
        raise CliError("--at x1,x2,... is required")
    x = np.array([float(v) for v in str(args.at).split(",")])
    value = evaluate(inst, x)
    print(f"{prob.display_name} (k={prob.index}, d={args.dim}, seed={args.seed})")
    print(f"f({','.join(repr(float(v)) for v in x)}) = {value!r}")
    print(f"f_offset = {inst.f_offset!r}")
    return 0


def _cmd_funcs_list(args) -> int:
    for prob in list_functions(_SUITES[args.suite]):
        print(f"{prob.index:2d}  {prob.display_name}")
    return 0


# -- generate ----------------------------------------------------------------


def _cmd_generate(args) -> int:
    defaults = {
        "suite": "bbob",
        "dim": 22,
        "n": 24,
        "type": 1,
        "frame": 32,
        "domain": "unit_cube",
        "regime": "L1",
        "per_class": 200,
        "per_class_val": 0,
        "per_class_test": 50,
        "instances": 1,
        "unseen_instances": 0,
        "noise": "none",
        "uniform_lo": -2.5,
        "uniform_hi": 2.5,
        "seed": 0,
        "jobs": 1,
        "out": "dataset",
        "export_png": False,
    }
    args = _merge_config(args, defaults)
    spec = DatasetSpec(
        suite=_SUITES[args.suite],
        dim=args.dim,
        encoder=EncoderConfig(
            dim=args.dim,
            sample_size=args.n,
            image_type=ImageType(args.type),
            frame_size=args.frame,
            domain_map=DomainMap(args.domain),
        ),
        regime=Regime(args.regime),
        per_class_train=args.per_class,
        per_class_val=args.per_class_val,
        per_class_test=args.per_class_test,
        instances_per_function=args.instances,
        unseen_instances_per_function=args.unseen_instances,
        master_seed=args.seed,
        noise=NoiseSpec(
            kind=NoiseKind(args.noise),
            uniform_lo=args.uniform_lo,
            uniform_hi=args.uniform_hi,
        ),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    splits = build_dataset(spec, jobs=args.jobs)
    for name, ds in splits.items():
        if len(ds) == 0 and name != "train":
            continue
        save(ds, out / f"{name}.limg")
        print(f"{name}: {len(ds)} images, digest {ds.manifest.digest[:16]}...")
    if args.export_png:
        preview = out / "preview"
        preview.mkdir(exist_ok=True)
        seen = set()
        for img in splits["train"].images:
            if img.label not in seen:
                seen.add(img.label)
                write_png(preview / f"class_{img.label:02d}_type{int(img.image_type)}.png", img.pixels)
        print(f"previews: {preview}")
    return 0


# -- train -------------------------------------------------------------------


def _cmd_train(args) -> int:
    defaults = {
        "data": None,
        "val": None,
        "preset": "perceptron3",
        "lr": 1e-3,
        "epochs": 100,
        "batch_size": 64,
        "momentum": 0.0,
        "optimizer": "adam",
        "activation": "relu",
        "input_norm": "minmax",
        "seed": 0,
        "out": "model.lmdl",
        "report": None,
    }
    args = _merge_config(args, defaults)
    if not args.data:
        raise CliError("--data is required")
    train_ds = load(args.data)
    val_ds = load(args.val) if args.val else None
    meta = train_ds.manifest
    model = init_model(
        args.preset,
        class_count=meta.class_count,
        frame_size=meta.spec.encoder.frame_size,
        seed=args.seed,
        activation=args.activation,
        input_norm=args.input_norm,
    )
    cfg = TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=rng.derive_seed(args.seed, rng.BATCH_ORDER),
        momentum=args.momentum,
        optimizer=args.optimizer,
    )
    best, report = train(model, train_ds, val_ds, cfg)
    save_model(best, args.out)
    if args.report:
        report.to_csv(args.report)
    last = report.val_acc[-1] if report.has_validation else report.train_acc[-1]
    print(
        f"trained {args.preset} for {args.epochs} epochs; best epoch {report.best_epoch}"
        f" (loss {report.best_selection_loss():.6g}), final acc {last:.4f}"
    )
    print(f"checkpoint: {args.out}")
    return 0


# -- eval --------------------------------------------------------------------


def _cmd_eval(args) -> int:
    defaults = {"model": None, "data": None, "out": None}
    args = _merge_config(args, defaults)
    if not args.model or not args.data:
        raise CliError("--model and --data are required")
    model = load_model(args.model)
    ds = load(args.data)
    predictions = predict(model, ds)
    acc = accuracy(ds.labels, predictions)
    cm = confusion(ds.labels, predictions, ds.manifest.class_count)
    names = [p.display_name for p in list_functions(ds.manifest.spec.suite)]
    if args.out:
        emit_breakdown(names, cm, args.out)
        print(f"breakdown: {args.out}")
    print(f"accuracy: {acc:.4f} over {len(ds)} images")
    return 0


# -- experiment ---------------------------------------------------------------


def _parse_override(item: str):
    if "=" not in item:
        raise CliError(f"override {item!r} is not key=value")
    key, raw = item.split("=", 1)
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _cmd_experiment(args) -> int:
    defaults = {"scale": "desk", "seed": 0, "jobs": 1, "out": None}
    args = _merge_config(args, defaults)
    overrides = dict(_parse_override(item) for item in (args.set or []))
    preset = ExperimentPreset(args.preset, scale=args.scale, overrides=overrides)
    out_root = Path(args.out) if args.out else default_output_root()
    run_dir = run_preset(preset, output_root=out_root, master_seed=args.seed, jobs=args.jobs)
    results = json.loads((run_dir / "results.json").read_text(encoding="utf-8"))
    print(f"run dir: {run_dir}")
    print(json.dumps(results, indent=2, sort_keys=True))
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="funcid",
        description="Landscape-image function identification toolkit",
    )
    parser.add_argument("--version", action="version", version=f"funcid {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    funcs = subs.add_parser("funcs", help="inspect benchmark functions")
    funcs_subs = funcs.add_subparsers(dest="funcs_command", required=True)
    dump = funcs_subs.add_parser("dump", help="evaluate one instance at a point")
    dump.add_argument("--suite", choices=sorted(_SUITES))
    dump.add_argument("--k", type=int, help="function index within the suite")
    dump.add_argument("--dim", type=int)
    dump.add_argument("--at", help="comma-separated point, e.g. 0.5,0.5")
    _add_common(dump)
    dump.set_defaults(fn=_cmd_funcs_dump)
    listing = funcs_subs.add_parser("list", help="list suite functions in order")
    listing.add_argument("--suite", choices=sorted(_SUITES), default="bbob")
    listing.set_defaults(fn=_cmd_funcs_list)

    gen = subs.add_parser("generate", help="build a labeled landscape-image dataset")
    gen.add_argument("--suite", choices=sorted(_SUITES))
    gen.add_argument("--dim", type=int)
    gen.add_argument("--n", type=int, help="sample vectors per image")
    gen.add_argument("--type", type=int, choices=[1, 2, 3, 4, 5], help="image layout type")
    gen.add_argument("--frame", type=int, help="frame size M")
    gen.add_argument("--domain", choices=[d.value for d in DomainMap])
    gen.add_argument("--regime", choices=[r.value for r in Regime])
    gen.add_argument("--per-class", dest="per_class", type=int)
    gen.add_argument("--per-class-val", dest="per_class_val", type=int)
    gen.add_argument("--per-class-test", dest="per_class_test", type=int)
    gen.add_argument("--instances", type=int)
    gen.add_argument("--unseen-instances", dest="unseen_instances", type=int)
    gen.add_argument("--noise", choices=[n.value for n in NoiseKind])
    gen.add_argument("--uniform-lo", dest="uniform_lo", type=float)
    gen.add_argument("--uniform-hi", dest="uniform_hi", type=float)
    gen.add_argument("--jobs", type=int)
    gen.add_argument("--out", help="output directory")
    gen.add_argument("--export-png", dest="export_png", action="store_const", const=True)
    _add_common(gen)
    gen.set_defaults(fn=_cmd_generate)

    tr = subs.add_parser("train", help="train a classifier on a dataset")
    tr.add_argument("--data", help="training dataset (.limg)")
    tr.add_argument("--val", help="optional validation dataset (.limg)")
    tr.add_argument("--preset", choices=["perceptron1", "perceptron3", "lenet5"])
    tr.add_argument("--lr", type=float)
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batch-size", dest="batch_size", type=int)
    tr.add_argument("--momentum", type=float)
    tr.add_argument("--optimizer", choices=["sgd", "adam"])
    tr.add_argument("--activation", choices=["relu", "tanh"])
    tr.add_argument("--input-norm", dest="input_norm", choices=["minmax", "raw"])
    tr.add_argument("--out", help="checkpoint path (.lmdl)")
    tr.add_argument("--report", help="training report CSV path")
    _add_common(tr)
    tr.set_defaults(fn=_cmd_train)

    ev = subs.add_parser("eval", help="evaluate a checkpoint on a dataset")
    ev.add_argument("--model", help="checkpoint path (.lmdl)")
    ev.add_argument("--data", help="dataset path (.limg)")
    ev.add_argument("--out", help="breakdown CSV path")
    ev.add_argument("--config", help="JSON file of flag defaults")
    ev.set_defaults(fn=_cmd_eval)

    ex = subs.add_parser("experiment", help="run a reproducible experiment preset")
    ex.add_argument("preset", choices=list(PRESET_NAMES))
    ex.add_argument("--scale", choices=["desk", "paper"])
    ex.add_argument("--jobs", type=int)
    ex.add_argument("--out", help="output root (default $FUNCID_OUT or ./funcid_runs)")
    ex.add_argument("--set", action="append", metavar="KEY=VALUE", help="preset override")
    _add_common(ex)
    ex.set_defaults(fn=_cmd_experiment)

    return parser


_CONFIG_ERRORS = (
    CliError,
    SuiteError,
    EncoderError,
    DatasetError,
    ModelError,
    ExperimentError,
    MetricsError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DatasetFormatError, CheckpointError, OSError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
