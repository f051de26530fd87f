"""Single entry point exposing the pipeline as subcommands.

Exit codes: 0 success, 1 computation failure, 2 usage or IO error. Every
artifact embeds the effective configuration and seed so runs can be
reproduced from the outputs alone. The SMOOTHCLAP_LOG environment variable
(error, warn, info, debug) controls log verbosity.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    NonFiniteLoss,
    SmoothClapError,
    TooFewValues,
)
from .evaluation import (
    EvalReport,
    Prediction,
    confusion_and_uar,
    format_confusion,
    ingest_external_embeddings,
    read_id_matrix_csv,
    read_labels_csv,
    save_report,
    zero_shot_classify,
)
from .gradcheck import DEFAULT_SIZES, run_gradcheck_suite
from .objective import KLMode, ObjectiveKind, SmoothingConfig
from .paralinguistics import acoustic_profile, load_wav
from .tagging import (
    DIMENSION_FEATURES,
    TemplateSet,
    fit_bins,
    load_thresholds,
    render_tags,
    save_thresholds,
)
from .trainer import (
    TrainConfig,
    embed_audio,
    embed_query_labels,
    load_model,
    save_model,
    train,
)

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-5


# --- run configuration ----------------------------------------------------------

_DEFAULTS: dict[str, object] = {
    "seed": 0,
    "smoothing.gamma": 0.5,
    "smoothing.beta": 0.1,
    "smoothing.tau_a2a": 1.0,
    "smoothing.tau_t2t": 1.0,
    "smoothing.tau_pred": 1.0,
    "smoothing.kl_mode": "symmetric",
    "smoothing.floor": 1e-8,
    "train.batch_size": 32,
    "train.epochs": 10,
    "train.lr": 1e-3,
    "train.lr_text": 1e-5,
    "train.embed_dim": 16,
    "train.objective": "smooth",
    "train.clap_mix_lambda": 0.0,
}

_COERCE: dict[str, type] = {
    "seed": int,
    "smoothing.gamma": float,
    "smoothing.beta": float,
    "smoothing.tau_a2a": float,
    "smoothing.tau_t2t": float,
    "smoothing.tau_pred": float,
    "smoothing.kl_mode": str,
    "smoothing.floor": float,
    "train.batch_size": int,
    "train.epochs": int,
    "train.lr": float,
    "train.lr_text": float,
    "train.embed_dim": int,
    "train.objective": str,
    "train.clap_mix_lambda": float,
}

_FLAG_TO_KEY = {
    "seed": "seed",
    "gamma": "smoothing.gamma",
    "beta": "smoothing.beta",
    "tau_a2a": "smoothing.tau_a2a",
    "tau_t2t": "smoothing.tau_t2t",
    "tau_pred": "smoothing.tau_pred",
    "kl_mode": "smoothing.kl_mode",
    "floor": "smoothing.floor",
    "batch_size": "train.batch_size",
    "epochs": "train.epochs",
    "lr": "train.lr",
    "lr_text": "train.lr_text",
    "embed_dim": "train.embed_dim",
    "objective": "train.objective",
    "clap_mix_lambda": "train.clap_mix_lambda",
}

_KEY_ALIASES = {short: dotted for short, dotted in _FLAG_TO_KEY.items()}


def _flatten_config(doc: dict, prefix: str = "") -> dict[str, object]:
    flat: dict[str, object] = {}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten_config(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def resolve_run_config(args: argparse.Namespace) -> dict[str, object]:
    """Defaults, overridden by the config file, overridden by flags.

    Unknown keys in the config file are errors, never warnings.
    """
    values = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            doc = json.loads(Path(config_path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{config_path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{config_path}: top level must be an object")
        for key, value in _flatten_config(doc).items():
            dotted = _KEY_ALIASES.get(key, key)
            if dotted not in _DEFAULTS:
                raise ConfigError(f"{config_path}: unknown config key {key!r}")
            try:
                values[dotted] = _COERCE[dotted](value)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"{config_path}: bad value for {key!r}: {value!r}"
                ) from None
    for flag, dotted in _FLAG_TO_KEY.items():
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            values[dotted] = _COERCE[dotted](flag_value)
    if values["smoothing.kl_mode"] not in ("symmetric", "forward"):
        raise ConfigError(f"kl_mode must be symmetric or forward, got {values['smoothing.kl_mode']!r}")
    if values["train.objective"] not in ("clap", "smooth"):
        raise ConfigError(f"objective must be clap or smooth, got {values['train.objective']!r}")
    return values


def train_config_from_values(values: dict[str, object]) -> TrainConfig:
    smoothing = SmoothingConfig(
        gamma=values["smoothing.gamma"],
        beta=values["smoothing.beta"],
        tau_a2a=values["smoothing.tau_a2a"],
        tau_t2t=values["smoothing.tau_t2t"],
        tau_pred=values["smoothing.tau_pred"],
        kl_mode=KLMode(values["smoothing.kl_mode"]),
        floor=values["smoothing.floor"],
    )
    return TrainConfig(
        batch_size=values["train.batch_size"],
        epochs=values["train.epochs"],
        lr_projection=values["train.lr"],
        lr_text=values["train.lr_text"],
        seed=values["seed"],
        embed_dim=values["train.embed_dim"],
        clap_mix_lambda=values["train.clap_mix_lambda"],
        smoothing=smoothing,
        objective=ObjectiveKind(values["train.objective"]),
    )


def _meta(command: str, values: dict[str, object]) -> dict:
    return {
        "tool": f"smoothclap-{command}",
        "version": __version__,
        "seed": values["seed"],
        "config": dict(sorted(values.items())),
    }


# --- JSONL helpers ---------------------------------------------------------------

def _write_jsonl(path, records: list[dict], meta: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _read_jsonl(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            records.append(obj)
    return records


# --- extract ----------------------------------------------------------------------

def _extract_inputs(args: argparse.Namespace) -> list[tuple[str, Path]]:
    if bool(args.manifest) == bool(args.in_dir):
        raise ConfigError("exactly one of --manifest or --in-dir is required")
    if args.in_dir:
        root = Path(args.in_dir)
        if not root.is_dir():
            raise ConfigError(f"{root} is not a directory")
        return [(p.stem, p) for p in sorted(root.glob("*.wav"))]
    manifest = Path(args.manifest)
    base = manifest.parent
    entries = _read_jsonl(manifest)
    out: list[tuple[str, Path]] = []
    for i, entry in enumerate(entries):
        if "id" not in entry or "wav" not in entry:
            raise ConfigError(f"{manifest}: entry {i} lacks id or wav")
        wav = Path(entry["wav"])
        out.append((str(entry["id"]), wav if wav.is_absolute() else base / wav))
    return out


def cmd_extract(args: argparse.Namespace) -> int:
    values = resolve_run_config(args)
    inputs = _extract_inputs(args)
    records: list[dict] = []
    failures = 0
    for utt_id, wav_path in inputs:
        try:
            profile = acoustic_profile(load_wav(wav_path))
        except (SmoothClapError, OSError) as exc:
            failures += 1
            logger.warning("skipping %s (%s): %s", utt_id, wav_path, exc)
            continue
        records.append({"id": utt_id, **profile.to_json_dict()})
    _write_jsonl(args.out, records, _meta("extract", values))
    if failures:
        print(f"warning: {failures} of {len(inputs)} files failed", file=sys.stderr)
        if args.strict:
            return 1
    return 0


# --- tags --------------------------------------------------------------------------

def cmd_tags(args: argparse.Namespace) -> int:
    values = resolve_run_config(args)
    profiles = _read_jsonl(args.profiles)
    labels_by_id: dict[str, dict] = {}
    if args.labels:
        for entry in _read_jsonl(args.labels):
            labels_by_id[str(entry["id"])] = entry

    fit_mode = args.thresholds_in is None or args.refit
    if fit_mode:
        feature_values: dict[str, list[float]] = {}
        for entry in labels_by_id.values():
            for dim in DIMENSION_FEATURES:
                if dim in entry:
                    feature_values.setdefault(dim, []).append(float(entry[dim]))
        for profile in profiles:
            for name, value in _profile_values(profile).items():
                feature_values.setdefault(name, []).append(value)
        thresholds = {}
        for name, vals in feature_values.items():
            try:
                thresholds[name] = fit_bins(vals, name)
            except TooFewValues as exc:
                raise ConfigError(f"cannot fit thresholds: {exc}") from None
        observed: dict[str, list[str]] = {}
        for entry in labels_by_id.values():
            for kind in ("emotion", "gender"):
                if kind in entry:
                    observed.setdefault(kind, [])
                    if entry[kind] not in observed[kind]:
                        observed[kind].append(entry[kind])
        templates = TemplateSet(
            emotions=frozenset(observed["emotion"]) if "emotion" in observed else None,
            genders=frozenset(observed["gender"]) if "gender" in observed else None,
        )
        thresholds_out = args.thresholds_out or f"{args.out}.thresholds.json"
        save_thresholds(thresholds_out, thresholds, observed, _meta("tags", values))
    else:
        thresholds, templates = load_thresholds(args.thresholds_in)

    matched = 0
    records: list[dict] = []
    for profile in profiles:
        utt_id = str(profile["id"])
        entry = labels_by_id.get(utt_id)
        if entry is not None:
            matched += 1
        labels = {}
        dims = {}
        if entry:
            labels = {k: str(entry[k]) for k in ("emotion", "gender") if k in entry}
            dims = {k: float(entry[k]) for k in DIMENSION_FEATURES if k in entry}
        record = render_tags(
            utt_id, labels, dims, _profile_values(profile), thresholds, templates
        )
        records.append(record.to_json_dict())
    _write_jsonl(args.out, records, _meta("tags", values))

    unmatched_profiles = len(profiles) - matched
    unmatched_labels = len(labels_by_id) - matched
    if unmatched_profiles or unmatched_labels:
        print(
            f"warning: {unmatched_profiles} profile id(s) without labels, "
            f"{unmatched_labels} label id(s) without profiles",
            file=sys.stderr,
        )
    return 0


def _profile_values(profile_record: dict) -> dict[str, float]:
    getters = {
        "pitch": "pitch_mean_hz",
        "intensity": "intensity_mean_db",
        "jitter": "jitter",
        "shimmer": "shimmer",
        "duration": "duration_s",
    }
    return {
        name: float(profile_record[field])
        for name, field in getters.items()
        if field in profile_record
    }


# --- train -------------------------------------------------------------------------

def _load_training_data(features_path, tags_path, min_rows: int):
    feature_ids, features = read_id_matrix_csv(features_path)
    tags_by_id = {str(r["id"]): list(r["tags"]) for r in _read_jsonl(tags_path)}
    keep = [i for i, fid in enumerate(feature_ids) if fid in tags_by_id]
    dropped_features = len(feature_ids) - len(keep)
    dropped_tags = len(tags_by_id) - len(keep)
    if dropped_features or dropped_tags:
        logger.warning(
            "id join dropped %d feature row(s) and %d tag record(s)",
            dropped_features,
            dropped_tags,
        )
    if len(keep) < min_rows:
        raise ConfigError(
            f"only {len(keep)} joined rows, need at least {min_rows}"
        )
    ids = [feature_ids[i] for i in keep]
    return ids, features[keep], [tags_by_id[i] for i in ids]


def cmd_train(args: argparse.Namespace) -> int:
    values = resolve_run_config(args)
    config = train_config_from_values(values)
    ids, features, tag_lists = _load_training_data(
        args.features, args.tags, config.batch_size
    )
    model = train(features, tag_lists, config)
    save_model(args.out, model, extra_meta=_meta("train", values))
    history_path = args.history or f"{args.out}.history.csv"
    with open(history_path, "w", newline="") as fh:
        fh.write("# " + json.dumps(_meta("train", values), sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(model.history, start=1):
            writer.writerow([epoch, repr(loss)])
    print(f"final epoch loss: {model.history[-1]:.9f}")
    return 0


# --- eval --------------------------------------------------------------------------

def _evaluate(
    audio_ids: list[str],
    audio_emb: np.ndarray,
    class_names: list[str],
    query_emb: np.ndarray,
    labels: dict[str, str],
) -> EvalReport:
    missing = [i for i in audio_ids if i not in labels]
    if missing:
        raise ConfigError(f"{len(missing)} audio id(s) have no label, e.g. {missing[0]!r}")
    name_to_index = {name: i for i, name in enumerate(class_names)}
    unknown = sorted({labels[i] for i in audio_ids} - set(class_names))
    if unknown:
        raise ConfigError(
            "true labels missing from the query classes: " + ", ".join(unknown)
        )
    y_true = [name_to_index[labels[i]] for i in audio_ids]
    pred = zero_shot_classify(audio_emb, query_emb, class_names)
    scores = audio_emb @ query_emb.T
    report = confusion_and_uar(y_true, pred.tolist(), len(class_names), class_names)
    report.predictions = [
        Prediction(
            utterance_id=utt_id,
            true_label=class_names[t],
            predicted_label=class_names[int(p)],
            scores=[float(s) for s in row],
        )
        for utt_id, t, p, row in zip(audio_ids, y_true, pred, scores)
    ]
    return report


def cmd_eval(args: argparse.Namespace) -> int:
    values = resolve_run_config(args)
    labels = dict(read_labels_csv(args.labels))

    if args.embeddings:
        audio_emb, audio_ids = ingest_external_embeddings(args.embeddings)
    elif args.model and args.features:
        model = load_model(args.model)
        audio_ids, features = read_id_matrix_csv(args.features)
        audio_emb = embed_audio(model, features)
    else:
        raise ConfigError("need --embeddings, or --model together with --features")

    if args.query_embeddings:
        query_emb, class_names = ingest_external_embeddings(args.query_embeddings)
    else:
        if not args.model:
            raise ConfigError("label-string queries need --model")
        model = load_model(args.model)
        class_names = (
            [q.strip() for q in args.queries.split(",") if q.strip()]
            if args.queries
            else sorted(set(labels.values()))
        )
        query_emb = embed_query_labels(model, class_names)

    report = _evaluate(audio_ids, audio_emb, list(class_names), query_emb, labels)
    save_report(args.out, report, meta=_meta("eval", values))
    if args.predictions_csv:
        with open(args.predictions_csv, "w", newline="") as fh:
            fh.write("# " + json.dumps(_meta("eval", values), sort_keys=True) + "\n")
            writer = csv.writer(fh)
            writer.writerow(["id", "true", "predicted"])
            for p in report.predictions:
                writer.writerow([p.utterance_id, p.true_label, p.predicted_label])
    print(format_confusion(report))
    return 0


# --- gradcheck ----------------------------------------------------------------------

def _parse_sizes(spec: str) -> tuple[tuple[int, int], ...]:
    sizes = []
    for part in spec.split(";"):
        fields = dict(kv.split("=", 1) for kv in part.split(","))
        try:
            sizes.append((int(fields["B"]), int(fields["d"])))
        except (KeyError, ValueError):
            raise ConfigError(f"bad --sizes entry {part!r}, expected B=<int>,d=<int>") from None
    return tuple(sizes)


def cmd_gradcheck(args: argparse.Namespace) -> int:
    values = resolve_run_config(args)
    sizes = _parse_sizes(args.sizes) if args.sizes else DEFAULT_SIZES
    report = run_gradcheck_suite(
        seed=values["seed"], sizes=sizes, corrupt_gradient=args.corrupt_gradient
    )
    print(
        f"gradcheck: max relative error {report.max_error:.3e} "
        f"over {report.n_cases} configurations"
    )
    if not report.passed:
        print("worst case: " + report.worst.describe(), file=sys.stderr)
        return 1
    return 0


# --- sweep --------------------------------------------------------------------------

def _parse_grid(spec: str, name: str) -> list[float]:
    try:
        grid = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad {name} grid: {spec!r}") from None
    if not grid:
        raise ConfigError(f"{name} grid is empty")
    for v in grid:
        if not 0.0 < v < 1.0:
            raise ConfigError(f"{name} grid values must lie strictly inside (0, 1), got {v}")
    return grid


def cmd_sweep(args: argparse.Namespace) -> int:
    values = resolve_run_config(args)
    base_config = train_config_from_values(values)
    gamma_grid = _parse_grid(args.gamma_grid, "gamma")
    beta_grid = _parse_grid(args.beta_grid, "beta")
    ids, features, tag_lists = _load_training_data(
        args.features, args.tags, base_config.batch_size
    )
    labels = dict(read_labels_csv(args.labels))
    class_names = sorted(set(labels.values()))

    rows: list[tuple[float, float, float, float]] = []
    for gamma in gamma_grid:
        for beta in beta_grid:
            config = replace(
                base_config,
                smoothing=replace(base_config.smoothing, gamma=gamma, beta=beta),
            )
            try:
                model = train(features, tag_lists, config)
                audio_emb = embed_audio(model, features)
                query_emb = embed_query_labels(model, class_names)
                report = _evaluate(ids, audio_emb, class_names, query_emb, labels)
                rows.append((gamma, beta, report.uar, model.history[-1]))
            except SmoothClapError as exc:
                logger.warning("sweep cell gamma=%s beta=%s failed: %s", gamma, beta, exc)
                rows.append((gamma, beta, float("nan"), float("nan")))
    with open(args.out, "w", newline="") as fh:
        fh.write("# " + json.dumps(_meta("sweep", values), sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["gamma", "beta", "uar", "final_loss"])
        for gamma, beta, uar, final_loss in rows:
            writer.writerow([repr(gamma), repr(beta), repr(uar), repr(final_loss)])
    return 0


# --- parser -------------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser, training: bool = False) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int)
    if training:
        p.add_argument("--gamma", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--tau-a2a", dest="tau_a2a", type=float)
        p.add_argument("--tau-t2t", dest="tau_t2t", type=float)
        p.add_argument("--tau-pred", dest="tau_pred", type=float)
        p.add_argument("--kl-mode", dest="kl_mode", choices=["symmetric", "forward"])
        p.add_argument("--objective", choices=["clap", "smooth"])
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--lr-text", dest="lr_text", type=float)
        p.add_argument("--embed-dim", dest="embed_dim", type=int)
        p.add_argument("--floor", type=float)
        p.add_argument("--clap-mix-lambda", dest="clap_mix_lambda", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothclap",
        description="soft-target contrastive audio-text pipeline",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="acoustic profiles from WAV files")
    p.add_argument("--manifest", help="JSONL with id and wav fields")
    p.add_argument("--in-dir", dest="in_dir", help="directory of .wav files")
    p.add_argument("--out", required=True, help="output profiles JSONL")
    p.add_argument("--strict", action="store_true", help="fail if any file fails")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("tags", help="render tags from profiles and labels")
    p.add_argument("--profiles", required=True, help="profiles JSONL from extract")
    p.add_argument("--labels", help="labels JSONL (id, emotion, gender, dims)")
    p.add_argument("--thresholds-in", dest="thresholds_in", help="reuse fitted thresholds")
    p.add_argument("--thresholds-out", dest="thresholds_out", help="where to write fitted thresholds")
    p.add_argument("--refit", action="store_true", help="refit thresholds even when --thresholds-in is given")
    p.add_argument("--out", required=True, help="output tag records JSONL")
    _add_config_flags(p)
    p.set_defaults(func=cmd_tags)

    p = sub.add_parser("train", help="fit projections and temperature")
    p.add_argument("--features", required=True, help="CSV id,f0..fN")
    p.add_argument("--tags", required=True, help="tag records JSONL")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--history", help="loss history CSV (default: <out>.history.csv)")
    _add_config_flags(p, training=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="zero-shot classification report")
    p.add_argument("--model", help="trained model JSON")
    p.add_argument("--features", help="CSV id,f0..fN (with --model)")
    p.add_argument("--embeddings", help="precomputed audio embeddings CSV")
    p.add_argument("--queries", help="comma-separated class labels")
    p.add_argument("--query-embeddings", dest="query_embeddings", help="precomputed query embeddings CSV (ids are class names)")
    p.add_argument("--labels", required=True, help="CSV id,label with ground truth")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--predictions-csv", dest="predictions_csv", help="optional per-sample predictions CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--sizes", help="e.g. B=2,d=3 or B=2,d=3;B=8,d=16")
    p.add_argument("--corrupt-gradient", dest="corrupt_gradient", action="store_true", help=argparse.SUPPRESS)
    _add_config_flags(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("sweep", help="train and evaluate over a gamma/beta grid")
    p.add_argument("--features", required=True, help="CSV id,f0..fN")
    p.add_argument("--tags", required=True, help="tag records JSONL")
    p.add_argument("--labels", required=True, help="CSV id,label with ground truth")
    p.add_argument("--gamma-grid", dest="gamma_grid", default="0.5", help="comma-separated gamma values")
    p.add_argument("--beta-grid", dest="beta_grid", default="0.1,0.3,0.5,0.7,0.9", help="comma-separated beta values")
    p.add_argument("--out", required=True, help="output CSV gamma,beta,uar,final_loss")
    _add_config_flags(p, training=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def _setup_logging() -> None:
    name = os.environ.get("SMOOTHCLAP_LOG", "warn").lower()
    levels = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }
    level = levels.get(name)
    if level is None:
        level = logging.WARNING
        print(f"warning: unknown SMOOTHCLAP_LOG level {name!r}", file=sys.stderr)
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", force=True
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code is None else int(exc.code)
    _setup_logging()
    try:
        return int(args.func(args))
    except NonFiniteLoss as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SmoothClapError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    """Console-script entry point."""
    raise SystemExit(main())


if __name__ == "__main__":
    run()
