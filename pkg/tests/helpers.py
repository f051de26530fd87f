"""Shared helpers for the test suite: fixture file writers and a CLI runner."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from smoothclap.cli import main
from smoothclap.fixtures import ClusterFixture


def run_cli(*argv: str) -> int:
    return main(list(argv))


def write_features_csv(path, ids, matrix) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"f{i}" for i in range(matrix.shape[1])])
        for row_id, row in zip(ids, matrix):
            writer.writerow([row_id] + [repr(float(v)) for v in row])
    return path


def write_tags_jsonl(path, ids, tag_lists) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for utt_id, tags in zip(ids, tag_lists):
            fh.write(json.dumps({"id": utt_id, "tags": list(tags), "bins": {}}) + "\n")
    return path


def write_labels_csv(path, ids, labels) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"])
        for utt_id, label in zip(ids, labels):
            writer.writerow([utt_id, label])
    return path


def write_cluster_fixture_files(directory, fixture: ClusterFixture) -> dict[str, Path]:
    directory = Path(directory)
    return {
        "features": write_features_csv(
            directory / "features.csv", fixture.ids, fixture.features
        ),
        "tags": write_tags_jsonl(directory / "tags.jsonl", fixture.ids, fixture.tag_lists),
        "labels": write_labels_csv(directory / "labels.csv", fixture.ids, fixture.labels),
    }


def write_embeddings_csv(path, ids, matrix) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"e{i}" for i in range(matrix.shape[1])])
        for row_id, row in zip(ids, matrix):
            writer.writerow([row_id] + [repr(float(v)) for v in row])
    return path


def random_unit_rows(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    m = rng.standard_normal((rows, cols))
    return m / np.linalg.norm(m, axis=1, keepdims=True)
