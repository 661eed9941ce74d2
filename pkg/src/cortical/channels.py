"""Memoryless channel samplers and input constraints.

Each channel maps a row batch of inputs to a row batch of outputs with fresh
noise.  The maps are written with :class:`~cortical.nn.Tensor` operations so
the generator can be trained through them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .nn import NonFiniteError, Tensor, as_tensor, row_norm_sq

KINDS = ("awgn", "mimo", "cauchy", "rayleigh_equiv")


class DomainError(ValueError):
    """Channel input outside the model's domain."""


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    dim: int = 1
    gamma: float = 1.0
    # diagonal of the MIMO channel matrix
    gains: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("channel dimension must be positive")
        if self.kind == "cauchy" and not self.gamma > 0:
            raise ValueError("Cauchy scale gamma must be positive")
        if self.kind == "rayleigh_equiv" and self.dim != 1:
            raise ValueError("the Rayleigh-equivalent channel is scalar")
        if self.kind == "mimo":
            if self.gains is None or len(self.gains) != self.dim:
                raise ValueError("mimo needs one gain per dimension")
            object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))

    @property
    def input_dim(self) -> int:
        return self.dim

    @property
    def output_dim(self) -> int:
        return self.dim

    @property
    def matrix(self) -> np.ndarray:
        if self.kind != "mimo":
            return np.eye(self.dim)
        return np.diag(self.gains)


def awgn(d: int = 1) -> ChannelModel:
    return ChannelModel("awgn", dim=d)


def mimo(gains=(1.0, 1.0)) -> ChannelModel:
    return ChannelModel("mimo", dim=len(gains), gains=tuple(gains))


def cauchy(gamma: float = 1.0) -> ChannelModel:
    return ChannelModel("cauchy", dim=1, gamma=gamma)


def rayleigh_equiv() -> ChannelModel:
    return ChannelModel("rayleigh_equiv", dim=1)


def sample_noise(model: ChannelModel, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the noise that :func:`channel_apply` consumes for ``m`` rows."""
    shape = (m, model.dim)
    if model.kind in ("awgn", "mimo"):
        return rng.standard_normal(shape)
    if model.kind == "cauchy":
        return model.gamma * np.tan(np.pi * (rng.random(shape) - 0.5))
    return rng.standard_exponential(shape)


def channel_apply(model: ChannelModel, x, rng: np.random.Generator, noise=None) -> Tensor:
    """Pass a row batch through the channel.

    ``noise`` overrides the internal draw (same layout as :func:`sample_noise`).
    """
    x = as_tensor(x)
    if x.data.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(f"expected inputs of shape (m, {model.input_dim}), got {x.shape}")
    if not np.all(np.isfinite(x.data)):
        raise NonFiniteError("channel input is not finite")
    if noise is None:
        noise = sample_noise(model, x.shape[0], rng)
    noise = np.asarray(noise, dtype=x.data.dtype)
    if model.kind in ("awgn", "cauchy"):
        return x + noise
    if model.kind == "mimo":
        return x * np.asarray(model.gains, dtype=x.data.dtype)[None, :] + noise
    s = x.data
    if np.any(s <= 0) or np.any(s > 1):
        raise DomainError("Rayleigh-equivalent input must lie in (0, 1]")
    # V ~ Exp(rate s)  <=>  V = E / s with E ~ Exp(1)
    return as_tensor(noise) / x


def conditional_cdf(model: ChannelModel, y, x) -> np.ndarray:
    """F(y | x) for the scalar channels, broadcasting ``y`` against ``x``."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if model.kind == "awgn" and model.dim == 1:
        return special.ndtr(y - x)
    if model.kind == "cauchy":
        return 0.5 + np.arctan((y - x) / model.gamma) / np.pi
    if model.kind == "rayleigh_equiv":
        return np.where(y > 0, -np.expm1(-x * np.clip(y, 0, None)), 0.0)
    raise ValueError(f"no closed-form conditional CDF for {model.kind} (dim {model.dim})")


@dataclass(frozen=True)
class ConstraintSpec:
    """Input constraints together with the hinge switches of the penalty.

    ``peak`` bounds ``||gains * x||`` (plain Euclidean norm when ``gains`` is
    absent).  With ``project`` the peak bound is enforced by radial scaling
    instead of the hinge.
    """

    peak: float | None = None
    lambda_peak: int = 0
    average: float | None = None
    lambda_average: int = 0
    log_power: tuple[float, float] | None = None
    rayleigh_average: float | None = None
    project: bool = False
    gains: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.lambda_peak not in (0, 1) or self.lambda_average not in (0, 1):
            raise ValueError("hinge switches must be 0 or 1")
        if self.lambda_peak and (self.peak is None or self.project):
            raise ValueError("lambda_peak=1 needs a peak bound enforced by penalty")
        if self.peak is not None and not self.project and not self.lambda_peak:
            raise ValueError("a penalised peak bound needs lambda_peak=1")
        if (self.average is None) != (self.lambda_average == 0):
            raise ValueError("lambda_average must be 1 exactly when an average bound is set")
        if self.peak is not None and not self.peak > 0:
            raise ValueError("peak bound must be positive")
        if self.project and self.peak is None:
            raise ValueError("projection needs a peak bound")
        if self.log_power is not None:
            a, g = self.log_power
            if not (a >= g > 0):
                raise ValueError("log-power constraint needs A >= gamma > 0")
        if self.rayleigh_average is not None and not self.rayleigh_average > 0:
            raise ValueError("Rayleigh average bound must be positive")

    @property
    def active(self) -> bool:
        return any(
            v is not None for v in (self.peak, self.average, self.log_power, self.rayleigh_average)
        )


def peak_constraint(A: float, project: bool = True, gains=None) -> ConstraintSpec:
    return ConstraintSpec(
        peak=A,
        lambda_peak=0 if project else 1,
        project=project,
        gains=None if gains is None else tuple(float(g) for g in gains),
    )


def _weighted_norm_sq(x: Tensor, gains) -> Tensor:
    if gains is not None:
        x = x * np.asarray(gains, dtype=x.data.dtype)[None, :]
    return row_norm_sq(x)


def constraint_penalty(x, spec: ConstraintSpec) -> Tensor:
    """Sum of hinge penalties for every active constraint, as a scalar tensor."""
    x = as_tensor(x)
    total = Tensor(np.zeros((), dtype=x.data.dtype))
    if spec.peak is not None and spec.lambda_peak:
        excess = _weighted_norm_sq(x, spec.gains) - spec.peak**2
        total = total + excess.hinge().mean()
    if spec.average is not None and spec.lambda_average:
        total = total + (_weighted_norm_sq(x, spec.gains).mean() - spec.average).hinge()
    if spec.log_power is not None:
        a, g = spec.log_power
        cost = (((x * (1.0 / a)).square() + ((a + g) / a) ** 2).log()).mean()
        total = total + (cost - math.log(4.0)).hinge()
    if spec.rayleigh_average is not None:
        cost = (1.0 / x - 1.0).mean()
        total = total + (cost - spec.rayleigh_average).hinge()
    return total


def project_peak(x, A: float, gains=None) -> Tensor:
    """Radially scale rows with ``||gains * x|| > A`` back onto the boundary."""
    if not A > 0:
        raise ValueError("peak bound A must be positive")
    x = as_tensor(x)
    norm = _weighted_norm_sq(x, gains).sqrt()
    scale = A / norm.clamp_min(A)
    return x * scale.reshape(-1, 1)
