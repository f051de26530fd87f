"""Desk-scale training of audio/text projections and the prediction temperature.

The frozen encoders of the full-scale system are stood in for by identity
over precomputed audio feature rows (which double as the pooled local
features) and by a multi-hot tag featurizer on the text side. Everything in
the loss path is preserved: projections, row normalization, soft targets,
and the learnable log-temperature. Training is bit-deterministic for a
given (data, config, seed) triple.
"""
from __future__ import annotations

import base64
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyVocabulary,
    InsufficientData,
    LengthMismatch,
    NonFiniteLoss,
    ShapeMismatch,
    UnknownQueryLabel,
    ZeroRow,
)
from .numeric import as_matrix, l2_normalize_rows
from .objective import (
    EmbeddingBatch,
    KLMode,
    ObjectiveKind,
    SmoothingConfig,
    loss_and_grad,
    with_tau_pred,
)

logger = logging.getLogger(__name__)

# Philox streams: 0 = parameter init, 1 + epoch = per-epoch shuffles
_INIT_STREAM = 0
_EPOCH_STREAM_BASE = 1


def _stream_rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def featurize_text(tags, vocabulary) -> np.ndarray:
    """Unit-norm multi-hot vector over a fixed, sorted tag vocabulary.

    Unknown tags are ignored (counted and logged); a tag list with no known
    tags yields the zero vector, which the normalization rejects.
    """
    if len(vocabulary) == 0:
        raise EmptyVocabulary("tag vocabulary is empty")
    index = {tag: i for i, tag in enumerate(vocabulary)}
    vec = np.zeros(len(vocabulary))
    unknown = 0
    for tag in tags:
        pos = index.get(tag)
        if pos is None:
            unknown += 1
        else:
            vec[pos] = 1.0
    if unknown:
        logger.warning("ignored %d tag(s) outside the vocabulary", unknown)
    return l2_normalize_rows(vec[None, :])[0]


@dataclass
class ProjectionParams:
    """Affine map into the shared embedding space."""

    weights: np.ndarray
    bias: np.ndarray

    def project(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.bias

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]


def init_projection(in_dim: int, out_dim: int, rng: np.random.Generator) -> ProjectionParams:
    bound = 1.0 / math.sqrt(in_dim)
    return ProjectionParams(
        weights=rng.uniform(-bound, bound, size=(in_dim, out_dim)),
        bias=rng.uniform(-bound, bound, size=out_dim),
    )


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter tensor."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, param: np.ndarray) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param))


def adam_step(
    params: np.ndarray, grads: np.ndarray, state: AdamState, lr: float
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ShapeMismatch(
            f"params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    updated = params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return updated, AdamState(
        m=m, v=v, step=step, beta1=state.beta1, beta2=state.beta2, eps=state.eps
    )


@dataclass(frozen=True)
class TrainConfig:
    """Everything the training loop needs besides the data."""

    batch_size: int = 32
    epochs: int = 10
    lr_projection: float = 1e-3
    # reserved for a trainable text featurizer; the multi-hot stand-in has no
    # parameters, so this knob is currently inert
    lr_text: float = 1e-5
    seed: int = 0
    embed_dim: int = 16
    clap_mix_lambda: float = 0.0
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)
    objective: ObjectiveKind = ObjectiveKind.SMOOTH

    def __post_init__(self) -> None:
        if self.batch_size < 2:
            raise ValueError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        # zero is allowed so a frozen run can serve as a no-learning baseline
        if self.lr_projection < 0.0 or self.lr_text < 0.0:
            raise ValueError("learning rates must be non-negative")
        if self.embed_dim < 2:
            raise ValueError(f"embed_dim must be >= 2, got {self.embed_dim}")
        if not 0.0 <= self.clap_mix_lambda <= 1.0:
            raise ValueError("clap_mix_lambda must lie in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "lr_projection": self.lr_projection,
            "lr_text": self.lr_text,
            "seed": self.seed,
            "embed_dim": self.embed_dim,
            "clap_mix_lambda": self.clap_mix_lambda,
            "objective": self.objective.value,
            "smoothing": {
                "gamma": self.smoothing.gamma,
                "beta": self.smoothing.beta,
                "tau_a2a": self.smoothing.tau_a2a,
                "tau_t2t": self.smoothing.tau_t2t,
                "tau_pred": self.smoothing.tau_pred,
                "kl_mode": self.smoothing.kl_mode.value,
                "floor": self.smoothing.floor,
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TrainConfig":
        s = d.get("smoothing", {})
        return cls(
            batch_size=int(d.get("batch_size", 32)),
            epochs=int(d.get("epochs", 10)),
            lr_projection=float(d.get("lr_projection", 1e-3)),
            lr_text=float(d.get("lr_text", 1e-5)),
            seed=int(d.get("seed", 0)),
            embed_dim=int(d.get("embed_dim", 16)),
            clap_mix_lambda=float(d.get("clap_mix_lambda", 0.0)),
            objective=ObjectiveKind(d.get("objective", "smooth")),
            smoothing=SmoothingConfig(
                gamma=float(s.get("gamma", 0.5)),
                beta=float(s.get("beta", 0.1)),
                tau_a2a=float(s.get("tau_a2a", 1.0)),
                tau_t2t=float(s.get("tau_t2t", 1.0)),
                tau_pred=float(s.get("tau_pred", 1.0)),
                kl_mode=KLMode(s.get("kl_mode", "symmetric")),
                floor=float(s.get("floor", 1e-8)),
            ),
        )


@dataclass
class TrainedModel:
    """Trained projections, temperature, vocabulary, and training history."""

    audio_projection: ProjectionParams
    text_projection: ProjectionParams
    log_tau_pred: float
    vocabulary: list[str]
    config: TrainConfig
    history: list[float] = field(default_factory=list)

    @property
    def tau_pred(self) -> float:
        return math.exp(self.log_tau_pred)


def embed_audio(model: TrainedModel, features) -> np.ndarray:
    """Project raw audio feature rows and normalize to unit length."""
    x = as_matrix(features, "features")
    return l2_normalize_rows(model.audio_projection.project(x))


def embed_tag_lists(model: TrainedModel, tag_lists) -> np.ndarray:
    """Featurize and project a list of tag lists."""
    feats = np.stack([featurize_text(tags, model.vocabulary) for tags in tag_lists])
    return l2_normalize_rows(model.text_projection.project(feats))


def embed_query_labels(model: TrainedModel, labels) -> np.ndarray:
    """Embed bare label strings as single-tag queries.

    Raises UnknownQueryLabel naming every label missing from the model
    vocabulary.
    """
    known = set(model.vocabulary)
    missing = [lab for lab in labels if lab not in known]
    if missing:
        raise UnknownQueryLabel(
            "labels not in the model vocabulary: " + ", ".join(sorted(missing))
        )
    return embed_tag_lists(model, [[lab] for lab in labels])


def _row_norms_checked(m: np.ndarray, what: str) -> np.ndarray:
    norms = np.sqrt(np.sum(m * m, axis=1))
    if np.any(norms < 1e-12):
        raise ZeroRow(f"{what} produced a zero row")
    return norms


def train(audio_features, tag_lists, config: TrainConfig) -> TrainedModel:
    """Fit the two projections and log(tau_pred) on one in-memory dataset.

    The audio feature rows stand in for both the frozen encoder output and
    the pooled local features (the latter enter only the target branch).
    The final incomplete batch of each epoch is dropped; shuffling uses a
    counter-based generator keyed by (seed, epoch), so results are
    reproducible bit for bit.
    """
    x = as_matrix(audio_features, "audio_features")
    n = x.shape[0]
    if len(tag_lists) != n:
        raise LengthMismatch(f"{n} feature rows but {len(tag_lists)} tag lists")
    if n < config.batch_size:
        raise InsufficientData(
            f"{n} samples cannot fill one batch of {config.batch_size}"
        )
    vocabulary = sorted({tag for tags in tag_lists for tag in tags})
    if not vocabulary:
        raise EmptyVocabulary("no tags present in the training data")
    text_feats = np.stack([featurize_text(tags, vocabulary) for tags in tag_lists])
    local = l2_normalize_rows(x)

    init_rng = _stream_rng(config.seed, _INIT_STREAM)
    proj_a = init_projection(x.shape[1], config.embed_dim, init_rng)
    proj_t = init_projection(len(vocabulary), config.embed_dim, init_rng)
    log_tau = math.log(config.smoothing.tau_pred)

    states = {
        "wa": AdamState.zeros_like(proj_a.weights),
        "ba": AdamState.zeros_like(proj_a.bias),
        "wt": AdamState.zeros_like(proj_t.weights),
        "bt": AdamState.zeros_like(proj_t.bias),
        "lt": AdamState.zeros_like(np.zeros(())),
    }

    b = config.batch_size
    history: list[float] = []
    for epoch in range(config.epochs):
        rng = _stream_rng(config.seed, _EPOCH_STREAM_BASE + epoch)
        perm = rng.permutation(n)
        losses: list[float] = []
        for start in range(0, n - b + 1, b):
            idx = perm[start : start + b]
            xa = x[idx]
            xt = text_feats[idx]
            za = proj_a.project(xa)
            zt = proj_t.project(xt)
            ra = _row_norms_checked(za, "audio projection")
            rt = _row_norms_checked(zt, "text projection")
            cfg_step = with_tau_pred(config.smoothing, math.exp(log_tau))
            batch = EmbeddingBatch(audio=za, text=zt, local_audio=local[idx])
            out = loss_and_grad(batch, cfg_step, config.objective)
            value = out.value
            grad_audio = out.grad_audio
            grad_text = out.grad_text
            grad_lt = out.grad_log_tau_pred
            lam = config.clap_mix_lambda
            if lam > 0.0 and config.objective is ObjectiveKind.SMOOTH:
                hard = loss_and_grad(batch, cfg_step, ObjectiveKind.CLAP)
                value = lam * hard.value + (1.0 - lam) * value
                grad_audio = lam * hard.grad_audio + (1.0 - lam) * grad_audio
                grad_text = lam * hard.grad_text + (1.0 - lam) * grad_text
                grad_lt = lam * hard.grad_log_tau_pred + (1.0 - lam) * grad_lt
            if not np.isfinite(value):
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}, batch start {start}"
                )
            # undo the unit-norm evaluation point: d/dz = d/de / ||z||
            dza = grad_audio / ra[:, None]
            dzt = grad_text / rt[:, None]
            g_wa = xa.T @ dza
            g_ba = dza.sum(axis=0)
            g_wt = xt.T @ dzt
            g_bt = dzt.sum(axis=0)

            lr = config.lr_projection
            proj_a.weights, states["wa"] = adam_step(proj_a.weights, g_wa, states["wa"], lr)
            proj_a.bias, states["ba"] = adam_step(proj_a.bias, g_ba, states["ba"], lr)
            proj_t.weights, states["wt"] = adam_step(proj_t.weights, g_wt, states["wt"], lr)
            proj_t.bias, states["bt"] = adam_step(proj_t.bias, g_bt, states["bt"], lr)
            new_lt, states["lt"] = adam_step(
                np.asarray(log_tau), np.asarray(grad_lt), states["lt"], lr
            )
            log_tau = float(new_lt)
            losses.append(value)
        history.append(float(np.mean(losses)))
    return TrainedModel(
        audio_projection=proj_a,
        text_projection=proj_t,
        log_tau_pred=log_tau,
        vocabulary=vocabulary,
        config=config,
        history=history,
    )


# --- serialization ------------------------------------------------------------

def _encode_tensor(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype=np.float64)
    return {
        "shape": list(a.shape),
        "dtype": "float64",
        "data_b64": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _decode_tensor(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data_b64"])
    return np.frombuffer(raw, dtype=np.float64).reshape(d["shape"]).copy()


def model_to_json_dict(model: TrainedModel) -> dict:
    return {
        "kind": "smoothclap-model",
        "format_version": 1,
        "config": model.config.to_json_dict(),
        "vocabulary": list(model.vocabulary),
        "log_tau_pred": model.log_tau_pred,
        "audio_projection": {
            "weights": _encode_tensor(model.audio_projection.weights),
            "bias": _encode_tensor(model.audio_projection.bias),
        },
        "text_projection": {
            "weights": _encode_tensor(model.text_projection.weights),
            "bias": _encode_tensor(model.text_projection.bias),
        },
    }


def model_from_json_dict(d: dict) -> TrainedModel:
    if d.get("kind") != "smoothclap-model":
        raise ValueError("not a model document")
    return TrainedModel(
        audio_projection=ProjectionParams(
            weights=_decode_tensor(d["audio_projection"]["weights"]),
            bias=_decode_tensor(d["audio_projection"]["bias"]),
        ),
        text_projection=ProjectionParams(
            weights=_decode_tensor(d["text_projection"]["weights"]),
            bias=_decode_tensor(d["text_projection"]["bias"]),
        ),
        log_tau_pred=float(d["log_tau_pred"]),
        vocabulary=list(d["vocabulary"]),
        config=TrainConfig.from_json_dict(d["config"]),
    )


def save_model(path, model: TrainedModel, extra_meta: dict | None = None) -> None:
    doc = model_to_json_dict(model)
    if extra_meta:
        doc["_meta"] = extra_meta
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(path) -> TrainedModel:
    return model_from_json_dict(json.loads(Path(path).read_text()))
