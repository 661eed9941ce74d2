from __future__ import annotations

from typing import Callable

import numpy as np

from .autodiff import Tensor, grad
from .mlp import Mlp


def finite_diff_check(mlp: Mlp, loss_fn: Callable[[Mlp], Tensor], step: float = 1e-4) -> float:
    """Largest relative gap between backprop and central-difference gradients.

    ``loss_fn`` must rebuild the loss from the network's current parameters on
    every call.  The relative gap of one entry is
    ``|analytic - numeric| / (|numeric| + 1e-12)``.
    """
    if not step > 0:
        raise ValueError("finite-difference step must be positive")
    params = mlp.parameters()
    analytic = grad(loss_fn(mlp), params)
    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_fn(mlp).item()
            flat[i] = orig - step
            down = loss_fn(mlp).item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            err = abs(g.reshape(-1)[i] - numeric) / (abs(numeric) + 1e-12)
            worst = max(worst, err)
    return worst
