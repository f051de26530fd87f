"""Central finite-difference verification of the analytic gradients.

The numeric side perturbs the stored embedding matrices entry by entry and
re-evaluates the forward loss with the target distribution held fixed,
matching the stop-gradient contract of the analytic path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objective import (
    EmbeddingBatch,
    KLMode,
    ObjectiveKind,
    SmoothingConfig,
    build_targets,
    loss_and_grad,
    loss_with_fixed_targets,
    with_tau_pred,
)

DEFAULT_SIZES = ((2, 3), (2, 16), (4, 3), (4, 16), (8, 3), (8, 16))
GAMMA_GRID = (0.0, 0.5, 1.0)
BETA_GRID = (0.1, 0.5, 1.0)
TAU_PRED_CYCLE = (0.5, 1.0, 2.0)


def finite_difference_grads(
    batch: EmbeddingBatch,
    cfg: SmoothingConfig,
    objective: ObjectiveKind,
    h: float = 1e-5,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Central differences for both embedding matrices and log(tau_pred)."""
    targets = None
    if objective is ObjectiveKind.SMOOTH:
        targets = build_targets(batch, cfg)

    def f(audio: np.ndarray, text: np.ndarray, tau: float) -> float:
        return loss_with_fixed_targets(audio, text, targets, with_tau_pred(cfg, tau), objective)

    num_audio = np.zeros_like(batch.audio)
    num_text = np.zeros_like(batch.text)
    for m, out, other_first in (
        (batch.audio, num_audio, True),
        (batch.text, num_text, False),
    ):
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                plus = m.copy()
                plus[i, j] += h
                minus = m.copy()
                minus[i, j] -= h
                if other_first:
                    f_plus = f(plus, batch.text, cfg.tau_pred)
                    f_minus = f(minus, batch.text, cfg.tau_pred)
                else:
                    f_plus = f(batch.audio, plus, cfg.tau_pred)
                    f_minus = f(batch.audio, minus, cfg.tau_pred)
                out[i, j] = (f_plus - f_minus) / (2.0 * h)

    log_tau = math.log(cfg.tau_pred)
    f_plus = f(batch.audio, batch.text, math.exp(log_tau + h))
    f_minus = f(batch.audio, batch.text, math.exp(log_tau - h))
    num_log_tau = (f_plus - f_minus) / (2.0 * h)
    return num_audio, num_text, num_log_tau


def max_relative_error(analytic, numeric) -> float:
    """Componentwise |a - n| / max(1, |a|, |n|), reduced by max.

    The unit floor in the denominator turns the comparison into an absolute
    one for components much smaller than the loss scale, where central
    differences are dominated by roundoff.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(n)))
    return float(np.max(np.abs(a - n) / denom))


@dataclass
class GradCheckCase:
    batch_size: int
    dim: int
    objective: ObjectiveKind
    config: SmoothingConfig
    error: float

    def describe(self) -> str:
        c = self.config
        return (
            f"B={self.batch_size} d={self.dim} objective={self.objective.value} "
            f"gamma={c.gamma} beta={c.beta} kl_mode={c.kl_mode.value} "
            f"tau_pred={c.tau_pred} -> rel_err={self.error:.3e}"
        )


@dataclass
class GradCheckReport:
    max_error: float
    n_cases: int
    worst: GradCheckCase

    @property
    def passed(self) -> bool:
        return self.max_error < 1e-5


def _case_configs() -> list[tuple[ObjectiveKind, SmoothingConfig]]:
    configs: list[tuple[ObjectiveKind, SmoothingConfig]] = []
    k = 0
    for gamma in GAMMA_GRID:
        for beta in BETA_GRID:
            for mode in (KLMode.SYMMETRIC, KLMode.FORWARD):
                cfg = SmoothingConfig(
                    gamma=gamma,
                    beta=beta,
                    tau_a2a=0.7,
                    tau_t2t=1.3,
                    tau_pred=TAU_PRED_CYCLE[k % len(TAU_PRED_CYCLE)],
                    kl_mode=mode,
                )
                configs.append((ObjectiveKind.SMOOTH, cfg))
                k += 1
    configs.append((ObjectiveKind.CLAP, SmoothingConfig(kl_mode=KLMode.FORWARD, beta=0.0)))
    return configs


def run_gradcheck_suite(
    seed: int = 0,
    sizes: tuple[tuple[int, int], ...] = DEFAULT_SIZES,
    h: float = 1e-5,
    corrupt_gradient: bool = False,
) -> GradCheckReport:
    """Sweep batch sizes, dimensions, and objective configurations.

    ``corrupt_gradient`` injects a deliberate error into one analytic
    component; it exists so the harness can prove it would catch a bad
    gradient.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst: GradCheckCase | None = None
    n_cases = 0
    for b, d in sizes:
        for objective, cfg in _case_configs():
            batch = EmbeddingBatch(
                audio=rng.standard_normal((b, d)),
                text=rng.standard_normal((b, d)),
                local_audio=rng.standard_normal((b, d + 1)),
            )
            out = loss_and_grad(batch, cfg, objective)
            if corrupt_gradient:
                out.grad_audio[0, 0] += 1e-3
            num_a, num_t, num_lt = finite_difference_grads(batch, cfg, objective, h=h)
            err = max(
                max_relative_error(out.grad_audio, num_a),
                max_relative_error(out.grad_text, num_t),
                max_relative_error(out.grad_log_tau_pred, num_lt),
            )
            case = GradCheckCase(b, d, objective, cfg, err)
            if worst is None or err > worst.error:
                worst = case
            n_cases += 1
    assert worst is not None
    return GradCheckReport(max_error=worst.error, n_cases=n_cases, worst=worst)
