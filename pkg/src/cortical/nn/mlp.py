"""Feed-forward networks used for the generator and the discriminator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import NonFiniteError, Tensor, as_tensor, linear, parameter

HIDDEN_ACTIVATIONS = ("relu", "tanh")
OUTPUT_ACTIVATIONS = ("identity", "softplus", "sigmoid", "tanh-scaled")


class ConfigError(ValueError):
    """Invalid network or optimizer configuration."""


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    hidden_layers: tuple[int, ...]
    output_dim: int
    hidden_activation: str = "relu"
    output_activation: str = "identity"
    # only used by the tanh-scaled head
    output_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ConfigError("input_dim and output_dim must be positive")
        if not self.hidden_layers:
            raise ConfigError("an MLP needs at least one hidden layer")
        if any(h < 1 for h in self.hidden_layers):
            raise ConfigError(f"hidden widths must be >= 1, got {self.hidden_layers}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ConfigError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ConfigError(f"unknown output activation {self.output_activation!r}")
        if self.output_scale <= 0:
            raise ConfigError("output_scale must be positive")

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_layers, self.output_dim)


@dataclass
class Mlp:
    config: MlpConfig
    weights: list[Tensor] = field(default_factory=list)
    biases: list[Tensor] = field(default_factory=list)

    def parameters(self) -> list[Tensor]:
        """Parameters in a fixed order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def state(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.parameters()]

    def load_state(self, arrays) -> None:
        for p, a in zip(self.parameters(), arrays, strict=True):
            if p.shape != np.shape(a):
                raise ValueError(f"shape mismatch {p.shape} vs {np.shape(a)}")
            p.data = np.array(a, dtype=p.data.dtype)

    @property
    def dtype(self):
        return self.weights[0].data.dtype

    def __call__(self, batch) -> Tensor:
        return forward(self, batch)


def mlp_new(config: MlpConfig, seed: int, dtype=np.float64) -> Mlp:
    """Build an MLP with fan-in-scaled uniform weights and biases.

    Every parameter of a layer with ``fan_in`` inputs is drawn from
    ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``.  Random biases spread the ReLU
    breakpoints, which matters for the one-dimensional generator.  Draws are
    made in float64 and then cast, so a float32 network is the rounded copy
    of the float64 one for the same seed.
    """
    if not isinstance(config, MlpConfig):
        raise ConfigError("config must be an MlpConfig")
    rng = np.random.default_rng(seed)
    net = Mlp(config)
    widths = config.widths
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, (fan_in, fan_out)).astype(dtype)
        b = rng.uniform(-bound, bound, fan_out).astype(dtype)
        net.weights.append(parameter(w, f"W{i}"))
        net.biases.append(parameter(b, f"b{i}"))
    return net


def forward(mlp: Mlp, batch) -> Tensor:
    """Evaluate ``mlp`` on a row batch, recording the graph for :func:`grad`."""
    x = as_tensor(batch)
    if x.data.dtype != mlp.dtype and not x.requires_grad:
        x = Tensor(x.data.astype(mlp.dtype))
    cfg = mlp.config
    if x.data.ndim != 2 or x.shape[1] != cfg.input_dim:
        raise ValueError(f"expected batch of shape (m, {cfg.input_dim}), got {x.shape}")
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        x = linear(x, w, b)
        if i < last:
            x = x.relu() if cfg.hidden_activation == "relu" else x.tanh()
    head = cfg.output_activation
    if head == "softplus":
        x = x.softplus()
    elif head == "sigmoid":
        x = x.sigmoid()
    elif head == "tanh-scaled":
        x = x.tanh() * cfg.output_scale
    if not np.all(np.isfinite(x.data)):
        raise NonFiniteError("network output is not finite")
    return x
