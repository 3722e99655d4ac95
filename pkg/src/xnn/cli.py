"""Command-line pipelines: simulate | train | explain | predict | distill.

Every command writes a run manifest next to its primary output recording the
exact argv, seeds, config, and checksums of all inputs and outputs, so a run
can be reproduced byte-for-byte.  Exit codes: 0 success, 1 runtime or numeric
failure, 2 usage or flag validation failure.  The environment variable
``XNN_SEED`` overrides ``--seed`` when set.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from xnn.data import load_dataset, save_dataset
from xnn.errors import ValidationError, XnnError
from xnn.explain import (
    active_subnets,
    conditional_effects,
    interaction_signature,
    ridge_profiles,
    sparsity_report,
    write_explain_metadata,
    write_profiles_csv,
)
from xnn.model import XnnConfig, predict_batch
from xnn.serialize import load_model, save_model
from xnn.simulate import GENERATORS
from xnn.surrogate import distill
from xnn.training import TrainConfig, fit

_FMT = "%.17e"


class UsageError(XnnError):
    """Bad flags or malformed caller-supplied inputs; maps to exit code 2."""


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    manifest_path,
    argv: list[str],
    command: str,
    config: dict,
    inputs: list,
    outputs: list,
    started: float,
) -> None:
    payload = {
        "command": command,
        "argv": list(argv),
        "env_seed_override": os.environ.get("XNN_SEED"),
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "duration_seconds": time.time() - started,
    }
    with open(manifest_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _seed(args) -> int:
    env = os.environ.get("XNN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"XNN_SEED must be an integer, got '{env}'") from exc
    return args.seed


# ---------------------------------------------------------------------------
# shared flags
# ---------------------------------------------------------------------------


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--subnets", type=int, default=10, help="number of subnetworks")
    parser.add_argument(
        "--hidden", default="12,6", help="comma-separated subnetwork hidden widths"
    )
    parser.add_argument("--lambda-beta", type=float, default=0.0)
    parser.add_argument("--lambda-gamma", type=float, default=0.0)
    parser.add_argument("--lr", type=float, default=1e-3, help="learning rate")
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--epochs", type=int, default=2000, help="maximum epochs")
    parser.add_argument("--patience", type=int, default=100)
    parser.add_argument("--holdout", type=float, default=0.2, help="holdout fraction")
    parser.add_argument("--adam-beta1", type=float, default=0.9)
    parser.add_argument("--adam-beta2", type=float, default=0.999)
    parser.add_argument("--adam-eps", type=float, default=1e-8)
    parser.add_argument("--seed", type=int, default=0)


def _parse_hidden(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise UsageError(f"--hidden must be comma-separated integers, got '{text}'") from exc


def _configs_from_args(args, input_dim: int) -> tuple[XnnConfig, TrainConfig]:
    seed = _seed(args)
    try:
        xcfg = XnnConfig(
            input_dim=input_dim,
            num_subnets=args.subnets,
            subnet_hidden=_parse_hidden(args.hidden),
            seed=seed,
        )
        tcfg = TrainConfig(
            learning_rate=args.lr,
            batch_size=args.batch_size,
            max_epochs=args.epochs,
            lambda_beta=args.lambda_beta,
            lambda_gamma=args.lambda_gamma,
            adam_beta1=args.adam_beta1,
            adam_beta2=args.adam_beta2,
            adam_eps=args.adam_eps,
            holdout_fraction=args.holdout,
            patience=args.patience,
            shuffle_seed=seed,
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc
    return xcfg, tcfg


def _train_config_dict(xcfg: XnnConfig, tcfg: TrainConfig) -> dict:
    return {
        "model": {
            "input_dim": xcfg.input_dim,
            "num_subnets": xcfg.num_subnets,
            "subnet_hidden": list(xcfg.subnet_hidden),
            "activation": xcfg.activation,
            "seed": xcfg.seed,
        },
        "train": {
            "learning_rate": tcfg.learning_rate,
            "batch_size": tcfg.batch_size,
            "max_epochs": tcfg.max_epochs,
            "lambda_beta": tcfg.lambda_beta,
            "lambda_gamma": tcfg.lambda_gamma,
            "adam_beta1": tcfg.adam_beta1,
            "adam_beta2": tcfg.adam_beta2,
            "adam_eps": tcfg.adam_eps,
            "holdout_fraction": tcfg.holdout_fraction,
            "patience": tcfg.patience,
            "shuffle_seed": tcfg.shuffle_seed,
        },
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_simulate(args, argv) -> int:
    started = time.time()
    seed = _seed(args)
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    data = GENERATORS[args.generator](n=args.n, seed=seed)
    out = Path(args.out)
    save_dataset(data, out, metadata={"seed": seed, "generator": args.generator})
    sidecar = out.with_name(out.name + ".meta.json")
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        argv,
        "simulate",
        {"generator": args.generator, "n": args.n, "seed": seed},
        inputs=[],
        outputs=[out, sidecar],
        started=started,
    )
    print(f"wrote {data.num_rows} rows x {data.num_features} features to {out}")
    return 0


def _cmd_train(args, argv) -> int:
    started = time.time()
    data = load_dataset(args.data, response_column=args.response_column)
    xcfg, tcfg = _configs_from_args(args, data.num_features)
    model, report = fit(data, xcfg, tcfg)

    model_out = Path(args.model_out)
    save_model(model, model_out)
    report_out = Path(args.report_out) if args.report_out else model_out.with_suffix(".report.json")
    full_preds = predict_batch(model, data.features, raw_units=True)
    payload = report.to_dict()
    payload["full_data_mse"] = float(np.mean((full_preds - data.response) ** 2))
    with open(report_out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _write_manifest(
        model_out.with_name(model_out.name + ".manifest.json"),
        argv,
        "train",
        _train_config_dict(xcfg, tcfg),
        inputs=[args.data],
        outputs=[model_out, report_out],
        started=started,
    )
    print(
        f"trained {report.epochs_run} epochs; holdout MSE {report.final_holdout_mse:.6g}; "
        f"{report.active_subnet_count} active subnetworks"
    )
    return 0


def _cmd_explain(args, argv) -> int:
    started = time.time()
    model = load_model(args.model)
    data = load_dataset(args.data, response_column=args.response_column)
    if data.num_features != model.input_dim:
        raise ValidationError(
            f"model expects {model.input_dim} features, dataset has {data.num_features}"
        )
    if model.standardization is None:
        raise ValidationError("model carries no standardization parameters")
    features = model.standardization.transform_features(data.features)

    ridge = ridge_profiles(model, features, rel_threshold=args.rel_threshold)
    conditional = [conditional_effects(model, j) for j in range(model.input_dim)]
    active = [p.subnet_index for p in ridge if p.active]
    sparsity = sparsity_report(model, features)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    profiles_path = out_dir / "profiles.csv"
    write_profiles_csv(profiles_path, ridge, conditional)
    metadata_path = out_dir / "metadata.json"
    write_explain_metadata(
        metadata_path, model, active, args.rel_threshold, data.feature_names
    )
    sparsity_path = out_dir / "sparsity.json"
    with open(sparsity_path, "w") as fh:
        json.dump(
            {
                "nonzero_betas": sparsity.nonzero_betas,
                "nonzero_gammas": sparsity.nonzero_gammas,
                "active_subnets": sparsity.active_subnets,
                "threshold_used": sparsity.threshold_used,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")

    signature_path = out_dir / "interaction_signatures.csv"
    lines = ["subnet_a,subnet_b,feature_a,feature_b,coef_aa,coef_ab,coef_ba,coef_bb,detected"]
    for i, s1 in enumerate(active):
        for s2 in active[i + 1 :]:
            for f1 in range(model.input_dim):
                for f2 in range(f1 + 1, model.input_dim):
                    sig = interaction_signature(model, (s1, s2), (f1, f2))
                    c = sig.coefficients
                    lines.append(
                        f"{s1},{s2},{f1},{f2},"
                        f"{_FMT % c[0, 0]},{_FMT % c[0, 1]},{_FMT % c[1, 0]},{_FMT % c[1, 1]},"
                        f"{int(sig.detected)}"
                    )
    signature_path.write_text("\n".join(lines) + "\n")

    _write_manifest(
        out_dir / "manifest.json",
        argv,
        "explain",
        {"rel_threshold": args.rel_threshold},
        inputs=[args.model, args.data],
        outputs=[profiles_path, metadata_path, sparsity_path, signature_path],
        started=started,
    )
    print(f"wrote explanation artifacts for {len(ridge)} subnetworks to {out_dir}")
    return 0


def _cmd_predict(args, argv) -> int:
    started = time.time()
    model = load_model(args.model)
    data = load_dataset(args.data, response_column=args.response_column)
    if data.num_features != model.input_dim:
        raise ValidationError(
            f"model expects {model.input_dim} features, dataset has {data.num_features}"
        )
    preds = predict_batch(model, data.features, raw_units=True)
    out = Path(args.out)
    lines = ["row,prediction"]
    lines.extend(f"{i},{_FMT % v}" for i, v in enumerate(preds))
    out.write_text("\n".join(lines) + "\n")
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        argv,
        "predict",
        {},
        inputs=[args.model, args.data],
        outputs=[out],
        started=started,
    )
    print(f"wrote {len(preds)} predictions to {out}")
    return 0


def _cmd_distill(args, argv) -> int:
    started = time.time()
    probe_path = Path(args.probe)
    with open(probe_path) as fh:
        header = [c.strip() for c in fh.readline().strip().split(",")]
    if args.prediction_column not in header:
        raise UsageError(
            f"{probe_path}: missing prediction column '{args.prediction_column}'"
        )
    probe = load_dataset(probe_path, response_column=args.prediction_column)
    xcfg, tcfg = _configs_from_args(args, probe.num_features)
    model, fidelity = distill(
        probe.features, probe.response, xcfg, tcfg, feature_names=probe.feature_names
    )

    model_out = Path(args.model_out)
    save_model(model, model_out)
    fidelity_out = model_out.with_suffix(".fidelity.json")
    with open(fidelity_out, "w") as fh:
        json.dump(
            {
                "surrogate_mse": fidelity.surrogate_mse,
                "r_squared": fidelity.r_squared,
                "n_probe": fidelity.n_probe,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    _write_manifest(
        model_out.with_name(model_out.name + ".manifest.json"),
        argv,
        "distill",
        _train_config_dict(xcfg, tcfg),
        inputs=[probe_path],
        outputs=[model_out, fidelity_out],
        started=started,
    )
    print(
        f"distilled surrogate: fidelity MSE {fidelity.surrogate_mse:.6g}, "
        f"R^2 {fidelity.r_squared:.6g}"
    )
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xnn", description="Explainable additive-index network pipelines."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a simulation dataset")
    p.add_argument("generator", choices=sorted(GENERATORS))
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="fit a model to a dataset CSV")
    p.add_argument("data")
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out", default=None)
    p.add_argument("--response-column", default=None)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("explain", help="export explanation artifacts for a trained model")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--rel-threshold", type=float, default=0.01)
    p.add_argument("--response-column", default=None)
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("predict", help="write model predictions for a dataset CSV")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out", required=True)
    p.add_argument("--response-column", default=None)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("distill", help="fit a surrogate to a base model's predictions")
    p.add_argument("probe", help="CSV of features plus a base-prediction column")
    p.add_argument("--model-out", required=True)
    p.add_argument("--prediction-column", default="base_prediction")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_distill)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except XnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
