from .autodiff import (
    GraphError,
    NonFiniteError,
    Tensor,
    as_tensor,
    concat,
    grad,
    linear,
    parameter,
    row_norm_sq,
)
from .gradcheck import finite_diff_check
from .mlp import ConfigError, Mlp, MlpConfig, forward, mlp_new
from .optim import AdamState, adam_new, adam_step, clip_gradients

backward = grad

__all__ = [
    "AdamState",
    "ConfigError",
    "GraphError",
    "Mlp",
    "MlpConfig",
    "NonFiniteError",
    "Tensor",
    "adam_new",
    "adam_step",
    "as_tensor",
    "backward",
    "clip_gradients",
    "concat",
    "finite_diff_check",
    "forward",
    "grad",
    "linear",
    "mlp_new",
    "parameter",
    "row_norm_sq",
]
