import json

import numpy as np
import pytest

from helpers import (
    run_cli,
    write_cluster_fixture_files,
    write_embeddings_csv,
    write_labels_csv,
)
from smoothclap.evaluation import load_report
from smoothclap.fixtures import make_cluster_fixture, synth_tone, write_wav
from smoothclap.trainer import embed_audio, embed_query_labels, load_model, train
from smoothclap.cli import train_config_from_values, resolve_run_config


def read_jsonl_records(path):
    records = []
    for line in path.read_text().splitlines():
        obj = json.loads(line)
        if "_meta" not in obj:
            records.append(obj)
    return records


def read_meta(path):
    first = json.loads(path.read_text().splitlines()[0])
    return first["_meta"]


# --- extract ---

def make_wavs(directory, n=3):
    entries = []
    for i in range(n):
        name = f"t{i}.wav"
        write_wav(directory / name, synth_tone(180.0 + 40 * i, 0.5, 0.5))
        entries.append({"id": f"t{i}", "wav": name})
    return entries


def write_manifest(path, entries):
    path.write_text("".join(json.dumps(e) + "\n" for e in entries))
    return path


def test_extract_three_wavs(tmp_path, capsys):
    entries = make_wavs(tmp_path)
    manifest = write_manifest(tmp_path / "manifest.jsonl", entries)
    out = tmp_path / "profiles.jsonl"
    assert run_cli("extract", "--manifest", str(manifest), "--out", str(out)) == 0
    records = read_jsonl_records(out)
    assert [r["id"] for r in records] == ["t0", "t1", "t2"]
    assert all("pitch_mean_hz" in r for r in records)
    meta = read_meta(out)
    assert meta["seed"] == 0 and "config" in meta


def test_extract_in_dir(tmp_path):
    make_wavs(tmp_path)
    out = tmp_path / "profiles.jsonl"
    assert run_cli("extract", "--in-dir", str(tmp_path), "--out", str(out)) == 0
    assert len(read_jsonl_records(out)) == 3


def test_extract_corrupt_file_policy(tmp_path, capsys):
    entries = make_wavs(tmp_path)
    (tmp_path / "t1.wav").write_bytes(b"garbage not audio")
    manifest = write_manifest(tmp_path / "manifest.jsonl", entries)
    out = tmp_path / "profiles.jsonl"

    assert run_cli("extract", "--manifest", str(manifest), "--out", str(out)) == 0
    assert len(read_jsonl_records(out)) == 2
    assert "failed" in capsys.readouterr().err

    assert (
        run_cli("extract", "--manifest", str(manifest), "--out", str(out), "--strict")
        == 1
    )


def test_extract_unreadable_manifest(tmp_path):
    out = tmp_path / "profiles.jsonl"
    code = run_cli("extract", "--manifest", str(tmp_path / "missing.jsonl"), "--out", str(out))
    assert code == 2


# --- tags ---

def write_profiles(path, n=10):
    # distinct values per feature so occupancy is exactly 3/4/3
    lines = []
    for i in range(n):
        lines.append(
            json.dumps(
                {
                    "id": f"u{i}",
                    "pitch_mean_hz": 100.0 + 20 * i,
                    "pitch_std_hz": 1.0,
                    "intensity_mean_db": -40.0 + 3 * i,
                    "intensity_std_db": 1.0,
                    "jitter": 0.001 * (i + 1),
                    "shimmer": 0.01 * (i + 1),
                    "duration_s": 0.5 + 0.25 * i,
                    "voiced_fraction": 1.0,
                    "flags": [],
                }
            )
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def write_label_entries(path, n=10):
    lines = []
    for i in range(n):
        lines.append(
            json.dumps(
                {
                    "id": f"u{i}",
                    "emotion": "happy" if i % 2 else "sad",
                    "gender": "female" if i % 3 else "male",
                    "arousal": i / 10.0,
                }
            )
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def test_tags_fit_mode_occupancy(tmp_path):
    profiles = write_profiles(tmp_path / "profiles.jsonl")
    labels = write_label_entries(tmp_path / "labels.jsonl")
    out = tmp_path / "tags.jsonl"
    thresholds_path = tmp_path / "thresholds.json"
    code = run_cli(
        "tags", "--profiles", str(profiles), "--labels", str(labels),
        "--thresholds-out", str(thresholds_path), "--out", str(out),
    )
    assert code == 0
    records = read_jsonl_records(out)
    assert len(records) == 10
    doc = json.loads(thresholds_path.read_text())
    for feature in ("pitch", "intensity", "jitter", "shimmer", "duration", "arousal"):
        assert feature in doc
        counts = {"low": 0, "mid": 0, "high": 0}
        for r in records:
            counts[r["bins"][feature]] += 1
        assert counts == {"low": 3, "mid": 4, "high": 3}
    # labels render verbatim and first
    assert records[0]["tags"][0] == "sad"


def test_tags_apply_mode_reuses_thresholds(tmp_path):
    profiles = write_profiles(tmp_path / "profiles.jsonl")
    labels = write_label_entries(tmp_path / "labels.jsonl")
    out1 = tmp_path / "tags1.jsonl"
    out2 = tmp_path / "tags2.jsonl"
    thresholds_path = tmp_path / "thresholds.json"
    run_cli("tags", "--profiles", str(profiles), "--labels", str(labels),
            "--thresholds-out", str(thresholds_path), "--out", str(out1))
    code = run_cli("tags", "--profiles", str(profiles), "--labels", str(labels),
                   "--thresholds-in", str(thresholds_path), "--out", str(out2))
    assert code == 0
    assert read_jsonl_records(out1) == read_jsonl_records(out2)


def test_tags_without_labels_is_acoustic_only(tmp_path):
    profiles = write_profiles(tmp_path / "profiles.jsonl")
    out = tmp_path / "tags.jsonl"
    assert run_cli("tags", "--profiles", str(profiles), "--out", str(out)) == 0
    records = read_jsonl_records(out)
    assert all(
        all(t.split()[-1] in ("pitch", "intensity", "jitter", "shimmer", "duration")
            for t in r["tags"])
        for r in records
    )


# --- train ---

def cluster_files(tmp_path, seed=6, n_per_class=16):
    return write_cluster_fixture_files(tmp_path, make_cluster_fixture(seed, n_per_class))


def test_train_byte_identical_across_runs(tmp_path):
    files = cluster_files(tmp_path)
    args = [
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--seed", "7", "--epochs", "3", "--batch-size", "16", "--embed-dim", "8",
    ]
    m1 = tmp_path / "m1.json"
    m2 = tmp_path / "m2.json"
    assert run_cli(*args, "--out", str(m1)) == 0
    assert run_cli(*args, "--out", str(m2)) == 0
    assert m1.read_bytes() == m2.read_bytes()
    h1 = (tmp_path / "m1.json.history.csv").read_bytes()
    h2 = (tmp_path / "m2.json.history.csv").read_bytes()
    assert h1 == h2


def test_train_prints_final_loss(tmp_path, capsys):
    files = cluster_files(tmp_path)
    model_path = tmp_path / "model.json"
    code = run_cli(
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--seed", "1", "--epochs", "2", "--batch-size", "16", "--out", str(model_path),
    )
    assert code == 0
    assert "final epoch loss:" in capsys.readouterr().out


def test_train_clap_equals_smooth_beta0_forward(tmp_path):
    files = cluster_files(tmp_path)
    common = [
        "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--seed", "2", "--epochs", "3", "--batch-size", "16",
    ]
    m_clap = tmp_path / "clap.json"
    m_soft = tmp_path / "soft.json"
    assert run_cli("train", *common, "--objective", "clap", "--out", str(m_clap)) == 0
    assert run_cli(
        "train", *common, "--objective", "smooth", "--beta", "0",
        "--kl-mode", "forward", "--out", str(m_soft),
    ) == 0

    def history(path):
        lines = path.read_text().splitlines()
        return [float(line.split(",")[1]) for line in lines[2:]]

    h_clap = history(tmp_path / "clap.json.history.csv")
    h_soft = history(tmp_path / "soft.json.history.csv")
    assert len(h_clap) == len(h_soft) == 3
    for a, b in zip(h_clap, h_soft):
        assert a == pytest.approx(b, abs=1e-9)


def test_train_rejects_beta0_symmetric(tmp_path):
    files = cluster_files(tmp_path)
    model_path = tmp_path / "model.json"
    code = run_cli(
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--beta", "0", "--kl-mode", "symmetric", "--out", str(model_path),
    )
    assert code == 2
    assert not model_path.exists()


# --- eval ---

def test_eval_perfect_fixture(tmp_path, capsys):
    queries = np.eye(2)
    audio = np.vstack([np.tile(queries[0], (4, 1)), np.tile(queries[1], (4, 1))])
    ids = [f"s{i}" for i in range(8)]
    emb_path = write_embeddings_csv(tmp_path / "emb.csv", ids, audio)
    q_path = write_embeddings_csv(tmp_path / "q.csv", ["a", "b"], queries)
    labels_path = write_labels_csv(tmp_path / "labels.csv", ids, ["a"] * 4 + ["b"] * 4)
    report_path = tmp_path / "report.json"
    code = run_cli(
        "eval", "--embeddings", str(emb_path), "--query-embeddings", str(q_path),
        "--labels", str(labels_path), "--out", str(report_path),
    )
    assert code == 0
    assert "UAR: 1.000" in capsys.readouterr().out
    assert load_report(report_path).uar == 1.0


def test_eval_confusion_8246_fixture(tmp_path, capsys):
    queries = np.eye(2)
    rows = []
    rows += [queries[0]] * 8 + [queries[1]] * 2  # true a
    rows += [queries[0]] * 4 + [queries[1]] * 6  # true b
    ids = [f"s{i}" for i in range(20)]
    emb_path = write_embeddings_csv(tmp_path / "emb.csv", ids, np.array(rows))
    q_path = write_embeddings_csv(tmp_path / "q.csv", ["a", "b"], queries)
    labels_path = write_labels_csv(tmp_path / "labels.csv", ids, ["a"] * 10 + ["b"] * 10)
    report_path = tmp_path / "report.json"
    predictions_path = tmp_path / "predictions.csv"
    code = run_cli(
        "eval", "--embeddings", str(emb_path), "--query-embeddings", str(q_path),
        "--labels", str(labels_path), "--out", str(report_path),
        "--predictions-csv", str(predictions_path),
    )
    assert code == 0
    report = load_report(report_path)
    assert report.confusion == [[8, 2], [4, 6]]
    assert report.uar == pytest.approx(0.7)
    assert "UAR: 0.700" in capsys.readouterr().out
    assert predictions_path.read_text().count("\n") == 22  # meta + header + 20 rows


def test_eval_model_and_external_paths_agree(tmp_path):
    fixture = make_cluster_fixture(seed=4, n_per_class=16)
    files = write_cluster_fixture_files(tmp_path, fixture)
    model_path = tmp_path / "model.json"
    assert run_cli(
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--seed", "4", "--epochs", "4", "--batch-size", "16", "--out", str(model_path),
    ) == 0

    report_a = tmp_path / "a.json"
    assert run_cli(
        "eval", "--model", str(model_path), "--features", str(files["features"]),
        "--labels", str(files["labels"]), "--out", str(report_a),
    ) == 0

    model = load_model(model_path)
    emb = embed_audio(model, fixture.features)
    q = embed_query_labels(model, sorted(set(fixture.labels)))
    emb_path = write_embeddings_csv(tmp_path / "emb.csv", fixture.ids, emb)
    q_path = write_embeddings_csv(tmp_path / "q.csv", sorted(set(fixture.labels)), q)
    report_b = tmp_path / "b.json"
    assert run_cli(
        "eval", "--embeddings", str(emb_path), "--query-embeddings", str(q_path),
        "--labels", str(files["labels"]), "--out", str(report_b),
    ) == 0

    ra = load_report(report_a)
    rb = load_report(report_b)
    assert ra.confusion == rb.confusion
    assert ra.uar == rb.uar
    assert [p.predicted_label for p in ra.predictions] == [
        p.predicted_label for p in rb.predictions
    ]


def test_eval_unknown_query_label(tmp_path):
    fixture = make_cluster_fixture(seed=4, n_per_class=16)
    files = write_cluster_fixture_files(tmp_path, fixture)
    model_path = tmp_path / "model.json"
    run_cli(
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--seed", "4", "--epochs", "2", "--batch-size", "16", "--out", str(model_path),
    )
    code = run_cli(
        "eval", "--model", str(model_path), "--features", str(files["features"]),
        "--labels", str(files["labels"]), "--queries", "angry,bogus",
        "--out", str(tmp_path / "r.json"),
    )
    assert code == 2


# --- gradcheck ---

def test_gradcheck_small_sizes(capsys):
    assert run_cli("gradcheck", "--sizes", "B=2,d=3") == 0
    assert "max relative error" in capsys.readouterr().out


def test_gradcheck_corrupted_gradient_fails():
    assert run_cli("gradcheck", "--sizes", "B=2,d=3", "--corrupt-gradient") == 1


def test_gradcheck_bad_sizes():
    assert run_cli("gradcheck", "--sizes", "nope") == 2


# --- sweep ---

def test_sweep_grid_shape_and_determinism(tmp_path):
    files = cluster_files(tmp_path)
    args = [
        "sweep", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--labels", str(files["labels"]), "--gamma-grid", "0.2,0.5,0.8",
        "--beta-grid", "0.1,0.5,0.9", "--seed", "3", "--epochs", "2",
        "--batch-size", "16",
    ]
    out1 = tmp_path / "sweep1.csv"
    out2 = tmp_path / "sweep2.csv"
    assert run_cli(*args, "--out", str(out1)) == 0
    assert run_cli(*args, "--out", str(out2)) == 0
    lines = out1.read_text().splitlines()
    assert lines[1] == "gamma,beta,uar,final_loss"
    assert len(lines) == 2 + 9
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_rejects_grid_outside_open_interval(tmp_path):
    files = cluster_files(tmp_path)
    code = run_cli(
        "sweep", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--labels", str(files["labels"]), "--beta-grid", "0.0,0.5",
        "--out", str(tmp_path / "s.csv"),
    )
    assert code == 2


# --- flags and config files ---

def test_unknown_flag_exits_2(tmp_path, capsys):
    assert run_cli("train", "--does-not-exist", "x") == 2


def test_missing_subcommand_exits_2():
    assert run_cli() == 2


def test_unknown_config_key_is_an_error(tmp_path):
    files = cluster_files(tmp_path)
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"gamma": 0.4, "mystery_knob": 1}))
    code = run_cli(
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--config", str(config), "--out", str(tmp_path / "m.json"),
    )
    assert code == 2


def test_log_level_env_var(tmp_path, monkeypatch, capsys):
    import logging

    monkeypatch.setenv("SMOOTHCLAP_LOG", "debug")
    run_cli("gradcheck", "--sizes", "B=2,d=3")
    assert logging.getLogger().level == logging.DEBUG
    monkeypatch.setenv("SMOOTHCLAP_LOG", "bogus")
    run_cli("gradcheck", "--sizes", "B=2,d=3")
    assert "unknown SMOOTHCLAP_LOG" in capsys.readouterr().err
    assert logging.getLogger().level == logging.WARNING


def test_nonfinite_loss_maps_to_exit_1(tmp_path, monkeypatch):
    from smoothclap.errors import NonFiniteLoss
    import smoothclap.cli as cli_mod

    files = cluster_files(tmp_path)

    def explode(*args, **kwargs):
        raise NonFiniteLoss("boom")

    monkeypatch.setattr(cli_mod, "train", explode)
    code = run_cli(
        "train", "--features", str(files["features"]), "--tags", str(files["tags"]),
        "--batch-size", "16", "--out", str(tmp_path / "m.json"),
    )
    assert code == 1


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"smoothing": {"gamma": 0.4}, "epochs": 9}))

    class Args:
        pass

    args = Args()
    args.config = str(config)
    for flag in ("seed", "gamma", "beta", "tau_a2a", "tau_t2t", "tau_pred", "kl_mode",
                 "floor", "batch_size", "epochs", "lr", "lr_text", "embed_dim",
                 "objective", "clap_mix_lambda"):
        setattr(args, flag, None)
    args.gamma = 0.9
    values = resolve_run_config(args)
    assert values["smoothing.gamma"] == 0.9  # flag wins
    assert values["train.epochs"] == 9  # file survives where no flag given
    config_obj = train_config_from_values(values)
    assert config_obj.smoothing.gamma == 0.9
    assert config_obj.epochs == 9
