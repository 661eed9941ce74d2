"""Cooperative generator/discriminator training and the capacity readout.

The discriminator maximises

    J = alpha * mean log D(x, y) - mean D(x, y~)

over paired samples ``(x, y)`` and unpaired samples whose outputs were
deranged across the batch.  At the optimum ``D = alpha * p(x,y) / (p(x)p(y))``
and ``J = alpha * (I(X;Y) + ln alpha - 1)``, so the mutual information of the
current input law is ``J / alpha + 1 - ln alpha``.  The generator ascends the
same value (minus constraint penalties) with the discriminator frozen.
"""

from __future__ import annotations

import contextlib
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng as rngmod
from .channels import ChannelModel, ConstraintSpec, channel_apply, constraint_penalty, project_peak
from .nn import (
    Mlp,
    MlpConfig,
    NonFiniteError,
    Tensor,
    adam_new,
    adam_step,
    as_tensor,
    clip_gradients,
    concat,
    forward,
    grad,
    mlp_new,
)

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-8


class TrainingDivergence(RuntimeError):
    def __init__(self, step: int, what: str):
        super().__init__(f"non-finite {what} at generator step {step}")
        self.step = step


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 5000
    disc_steps: int = 10
    batch: int = 512
    alpha: float = 1.0
    latent_dim: int | None = None
    seed: int = 0
    capacity_window: int = 200
    lr_disc: float = 2e-4
    lr_gen: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float = 10.0
    dtype: str = "float32"

    def __post_init__(self):
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.disc_steps < 1:
            raise ValueError("need at least one discriminator step")
        if self.batch < 2:
            raise ValueError("batch must have at least 2 rows for a derangement")
        if self.steps < 1 or self.capacity_window < 1:
            raise ValueError("steps and capacity_window must be positive")
        if self.latent_dim is not None and self.latent_dim < 1:
            raise ValueError("latent_dim must be positive")


@dataclass
class CapacityTrace:
    alpha: float
    window: int
    value: list[float] = field(default_factory=list)
    capacity: list[float] = field(default_factory=list)
    penalty: list[float] = field(default_factory=list)

    def record(self, value: float, penalty: float) -> None:
        self.value.append(value)
        self.capacity.append(estimate_capacity(value, self.alpha))
        self.penalty.append(penalty)

    @property
    def final_capacity(self) -> float:
        """Mean of the trailing ``window`` capacity readouts, in nats."""
        if not self.capacity:
            return float("nan")
        return float(np.mean(self.capacity[-self.window:]))

    def __len__(self) -> int:
        return len(self.value)


def estimate_capacity(value: float, alpha: float) -> float:
    """Mutual information (nats) implied by a value-function reading."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return value / alpha + 1.0 - math.log(alpha)


def derange(m: int, rng: np.random.Generator) -> np.ndarray:
    """A fixed-point-free permutation of ``range(m)``: a cyclic shift by 1..m-1."""
    if m < 2:
        raise ValueError("a derangement needs at least 2 elements")
    k = int(rng.integers(1, m))
    return (np.arange(m) + k) % m


@contextlib.contextmanager
def frozen(net: Mlp):
    params = net.parameters()
    saved = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad = False
    try:
        yield net
    finally:
        for p, s in zip(params, saved):
            p.requires_grad = s


def _evaluate(D, pairs: Tensor) -> Tensor:
    if isinstance(D, Mlp):
        return forward(D, pairs)
    return as_tensor(D(pairs))


def discriminator_objective(D, x, y_paired, y_unpaired, alpha: float) -> Tensor:
    """``alpha * mean log D(x, y) - mean D(x, y~)`` as a differentiable scalar.

    ``D`` is an :class:`Mlp` or any callable taking the ``[x | y]`` row batch.
    """
    x, y, yu = as_tensor(x), as_tensor(y_paired), as_tensor(y_unpaired)
    m = x.shape[0]
    if y.shape[0] != m or yu.shape[0] != m:
        raise ValueError("x, paired and unpaired batches must be row-aligned")
    pairs = concat([concat([x, y], axis=1), concat([x, yu], axis=1)], axis=0)
    out = _evaluate(D, pairs)
    if out.data.shape[-1] != 1 and out.data.ndim == 2:
        raise ValueError("discriminator must output one value per row")
    out = out.reshape(-1)
    if np.any(out.data < 0) or not np.all(np.isfinite(out.data)):
        raise NonFiniteError("discriminator produced a negative or non-finite output")
    joint = out[:m].clamp_min(LOG_FLOOR).log().mean()
    product = out[m:].mean()
    return joint * alpha - product


def generate(G: Mlp, z, spec: ConstraintSpec | None) -> Tensor:
    x = forward(G, z)
    if spec is not None and spec.project:
        x = project_peak(x, spec.peak, spec.gains)
    return x


def generator_objective(G: Mlp, D, model: ChannelModel, z, alpha: float,
                        spec: ConstraintSpec, channel_rng: np.random.Generator,
                        derange_rng: np.random.Generator, parts: bool = False):
    """Constrained value function on one latent batch.

    Returns the scalar objective, or ``(objective, value, penalty)`` with ``parts``.
    """
    z = as_tensor(z)
    if z.data.ndim != 2 or z.shape[1] != G.config.input_dim:
        raise ValueError(f"latent batch must have {G.config.input_dim} columns")
    x = generate(G, z, spec)
    y = channel_apply(model, x, channel_rng)
    perm = derange(x.shape[0], derange_rng)
    value = discriminator_objective(D, x, y, y[perm], alpha)
    penalty = constraint_penalty(x, spec)
    objective = value - penalty
    if parts:
        return objective, value, penalty
    return objective


def default_mlp_configs(model: ChannelModel, latent_dim: int | None = None,
                        gen_head: str | None = None, hidden=(64, 64)):
    """Generator and discriminator configs for ``model``."""
    if gen_head is None:
        gen_head = "sigmoid" if model.kind == "rayleigh_equiv" else "identity"
    g_cfg = MlpConfig(latent_dim or model.input_dim, hidden, model.input_dim, "relu", gen_head)
    d_cfg = MlpConfig(model.input_dim + model.output_dim, hidden, 1, "relu", "softplus")
    return g_cfg, d_cfg


def _ascend(net: Mlp, objective: Tensor, state, clip_norm: float) -> None:
    grads = grad(objective, net.parameters())
    grads, _ = clip_gradients(grads, clip_norm)
    adam_step(net, grads, state, maximize=True)


def train(config: TrainConfig, model: ChannelModel, spec: ConstraintSpec,
          g_cfg: MlpConfig | None = None, d_cfg: MlpConfig | None = None,
          callback: Callable[[int, CapacityTrace, Mlp], None] | None = None):
    """Alternate ``disc_steps`` discriminator ascents with one generator ascent.

    Returns ``(G, D, trace)``.  Raises :class:`TrainingDivergence` with the
    failing step on a non-finite loss.
    """
    if not spec.active:
        raise ValueError("capacity training needs at least one input constraint")
    dg, dd = default_mlp_configs(model, config.latent_dim)
    g_cfg = g_cfg or dg
    d_cfg = d_cfg or dd
    if g_cfg.output_dim != model.input_dim:
        raise ValueError("generator output width must match the channel input")
    if d_cfg.input_dim != g_cfg.output_dim + model.output_dim:
        raise ValueError("discriminator input width must be generator output + channel output")
    if d_cfg.output_activation not in ("softplus", "sigmoid"):
        raise ValueError("discriminator needs a positive output head")

    streams = rngmod.split(config.seed)
    g_seed, d_seed = streams.init_seeds(2)
    dtype = np.dtype(config.dtype)
    G = mlp_new(g_cfg, g_seed, dtype)
    D = mlp_new(d_cfg, d_seed, dtype)
    opt_g = adam_new(G, config.lr_gen, config.beta1, config.beta2, config.epsilon)
    opt_d = adam_new(D, config.lr_disc, config.beta1, config.beta2, config.epsilon)
    trace = CapacityTrace(alpha=config.alpha, window=config.capacity_window)
    m, latent = config.batch, g_cfg.input_dim

    for step in range(config.steps):
        try:
            for _ in range(config.disc_steps):
                z = streams.latent.standard_normal((m, latent)).astype(dtype)
                with frozen(G):
                    x = generate(G, z, spec).data
                y = channel_apply(model, x, streams.channel).data
                perm = derange(m, streams.derangement)
                value = discriminator_objective(D, x, y, y[perm], config.alpha)
                _ascend(D, value, opt_d, config.clip_norm)

            z = streams.latent.standard_normal((m, latent)).astype(dtype)
            with frozen(D):
                objective, value, penalty = generator_objective(
                    G, D, model, z, config.alpha, spec,
                    streams.channel, streams.derangement, parts=True,
                )
                _ascend(G, objective, opt_g, config.clip_norm)
        except (NonFiniteError, FloatingPointError) as exc:
            raise TrainingDivergence(step, str(exc)) from exc
        v, p = value.item(), penalty.item()
        if not (math.isfinite(v) and math.isfinite(p)):
            raise TrainingDivergence(step, "value function")
        trace.record(v, p)
        if callback is not None:
            callback(step, trace, G)
        if log.isEnabledFor(logging.DEBUG) and step % 500 == 0:
            log.debug("step %d  J=%.4f  C=%.4f  pen=%.4g", step, v, trace.capacity[-1], p)
    return G, D, trace


def sample_inputs(G: Mlp, n: int, rng: np.random.Generator,
                  spec: ConstraintSpec | None = None) -> np.ndarray:
    """Draw ``n`` channel inputs from a trained generator."""
    with frozen(G):
        z = rng.standard_normal((n, G.config.input_dim))
        return generate(G, z, spec).data.copy()


def train_discriminator(sampler: Callable[[int, np.random.Generator], tuple[np.ndarray, np.ndarray]],
                        d_cfg: MlpConfig, steps: int = 4000, batch: int = 512,
                        alpha: float = 1.0, seed: int = 0, eval_batch: int = 100_000,
                        lr: float = 2e-4, beta1: float = 0.5, clip_norm: float = 10.0,
                        dtype: str = "float32"):
    """Fit only the discriminator on a fixed joint law and read out the MI.

    ``sampler(m, rng)`` returns row-aligned ``(x, y)`` draws from the joint.
    Returns ``(D, mi_estimate)`` where the estimate uses a fresh evaluation
    batch of ``eval_batch`` pairs.
    """
    streams = rngmod.split(seed)
    dt = np.dtype(dtype)
    D = mlp_new(d_cfg, streams.init_seeds(1)[0], dt)
    opt = adam_new(D, lr, beta1)
    for step in range(steps):
        x, y = sampler(batch, streams.latent)
        x, y = x.astype(dt), y.astype(dt)
        perm = derange(batch, streams.derangement)
        value = discriminator_objective(D, x, y, y[perm], alpha)
        if not math.isfinite(value.item()):
            raise TrainingDivergence(step, "discriminator value")
        _ascend(D, value, opt, clip_norm)
    x, y = sampler(eval_batch, streams.eval)
    x, y = x.astype(dt), y.astype(dt)
    perm = derange(eval_batch, streams.eval)
    with frozen(D):
        value = discriminator_objective(D, x, y, y[perm], alpha).item()
    return D, estimate_capacity(value, alpha)
