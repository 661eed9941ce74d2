"""Reference capacities: discretised Blahut-Arimoto and closed forms.

All capacities are in nats unless the function name or docstring says bits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .channels import ChannelModel, conditional_cdf

LN2 = math.log(2.0)


@dataclass(frozen=True)
class DiscretizedChannel:
    input_grid: np.ndarray
    output_edges: np.ndarray
    transition: np.ndarray

    def __post_init__(self):
        t = self.transition
        if t.shape != (len(self.input_grid), len(self.output_edges) - 1):
            raise ValueError("transition shape does not match the grids")
        if np.any(t < 0):
            raise ValueError("transition probabilities must be nonnegative")
        if np.max(np.abs(t.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("transition rows must sum to 1")

    @property
    def output_centers(self) -> np.ndarray:
        e = self.output_edges
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True)
class BAResult:
    capacity: float
    pmf: np.ndarray
    lower: float
    upper: float
    iterations: int
    converged: bool
    multiplier: float = 0.0
    cost: float | None = None


def from_matrix(transition, input_grid=None) -> DiscretizedChannel:
    """Wrap an explicit row-stochastic matrix (e.g. a BSC)."""
    t = np.asarray(transition, dtype=np.float64)
    n_in, n_out = t.shape
    grid = np.arange(n_in, dtype=float) if input_grid is None else np.asarray(input_grid, float)
    return DiscretizedChannel(grid, np.arange(n_out + 1, dtype=float), t)


def bsc(p: float) -> DiscretizedChannel:
    return from_matrix([[1 - p, p], [p, 1 - p]])


def discretize_channel(model: ChannelModel, input_grid, output_edges,
                       feasible: Callable[[np.ndarray], np.ndarray] | None = None
                       ) -> DiscretizedChannel:
    """Integrate the conditional law of ``model`` over output cells.

    ``output_edges`` are cell boundaries; the two outermost cells absorb the
    tails so every row sums to one.  ``feasible`` masks the input grid.
    """
    if model.kind == "mimo" or model.dim != 1:
        raise ValueError(f"discretisation supports scalar awgn/cauchy/rayleigh_equiv, not {model.kind}")
    x = np.asarray(input_grid, dtype=np.float64)
    edges = np.asarray(output_edges, dtype=np.float64)
    for name, g in (("input grid", x), ("output edges", edges)):
        if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ValueError(f"{name} must be strictly increasing")
    if feasible is not None:
        x = x[np.asarray(feasible(x), dtype=bool)]
        if len(x) == 0:
            raise ValueError("no feasible input grid points")
    cdf = conditional_cdf(model, edges[None, :], x[:, None])
    cdf[:, 0] = 0.0
    cdf[:, -1] = 1.0
    t = np.clip(np.diff(cdf, axis=1), 0.0, None)
    t /= t.sum(axis=1, keepdims=True)
    return DiscretizedChannel(x, edges, t)


def _divergences(t: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(t_i || q) for each row, with 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(t > 0, np.log(t) - np.log(np.where(q > 0, q, 1.0))[None, :], 0.0)
    return np.sum(t * ratio, axis=1)


def mutual_information(pmf, channel: DiscretizedChannel) -> float:
    p = np.asarray(pmf, dtype=np.float64)
    q = p @ channel.transition
    return float(p @ _divergences(channel.transition, q))


def _ba_fixed_multiplier(t, cost, lam, tol, max_iter, p0=None):
    n = t.shape[0]
    p = np.full(n, 1.0 / n) if p0 is None else p0.copy()
    # D(t_i || q) = sum_j t_ij log t_ij - sum_j t_ij log q_j
    positive = t > 0
    neg_entropy = np.sum(np.where(positive, t * np.log(np.where(positive, t, 1.0)), 0.0), axis=1)
    lower = upper = 0.0
    for it in range(1, max_iter + 1):
        q = p @ t
        d = neg_entropy - t @ np.log(np.maximum(q, 1e-300)) - lam * cost
        # I - lam*E[cost] is bracketed by [log sum p e^d, max d]
        shift = d.max()
        w = p * np.exp(d - shift)
        total = w.sum()
        lower = math.log(total) + shift
        upper = shift
        # floor keeps vanishing masses out of denormal range
        p = np.maximum(w / total, 1e-200)
        p /= p.sum()
        if upper - lower < tol:
            return p, lower, upper, it, True
    return p, lower, upper, max_iter, False


def blahut_arimoto(channel: DiscretizedChannel, tol: float = 1e-7,
                   max_iter: int = 100_000) -> BAResult:
    """Capacity and optimal input PMF of a discrete memoryless channel.

    Stops when the gap between the standard lower and upper capacity bounds
    drops below ``tol``.  If ``max_iter`` runs out first, the best bracket is
    returned with ``converged=False`` and a warning.
    """
    t = channel.transition
    p, lower, upper, it, ok = _ba_fixed_multiplier(t, np.zeros(len(t)), 0.0, tol, max_iter)
    if not ok:
        warnings.warn(f"Blahut-Arimoto stopped after {it} iterations (gap {upper - lower:.3g})",
                      RuntimeWarning, stacklevel=2)
    return BAResult(mutual_information(p, channel), p, lower, upper, it, ok)


def blahut_arimoto_cost(channel: DiscretizedChannel, cost, budget: float, tol: float = 1e-5,
                        max_iter: int = 100_000, bisect_tol: float = 1e-4,
                        inner_tol: float = 1e-4, inner_max_iter: int = 3000) -> BAResult:
    """Capacity under an average cost constraint ``E[cost(X)] <= budget``.

    For a multiplier ``lam`` the iteration maximises ``I - lam * E[cost]``;
    ``lam`` is bisected (warm-started, at ``inner_tol``) until the optimal
    input meets the budget, then refined at ``tol``.  Inner solves are capped
    at ``inner_max_iter`` iterations; they only steer the multiplier.
    """
    t = channel.transition
    cost = np.asarray(cost, dtype=np.float64)
    if cost.shape != (t.shape[0],):
        raise ValueError("one cost per input grid point required")

    def solve(lam, p0, eps):
        p, lo, up, it, ok = _ba_fixed_multiplier(t, cost, lam, eps, inner_max_iter, p0)
        return p, float(p @ cost)

    p, spent = solve(0.0, None, inner_tol)
    lam = 0.0
    if spent > budget:
        lo_lam, hi_lam = 0.0, 1.0
        p, spent = solve(hi_lam, p, inner_tol)
        while spent > budget:
            lo_lam, hi_lam = hi_lam, 2.0 * hi_lam
            if hi_lam > 1e6:
                raise RuntimeError("cannot meet the cost budget on this grid")
            p, spent = solve(hi_lam, p, inner_tol)
        while hi_lam - lo_lam > bisect_tol:
            mid = 0.5 * (lo_lam + hi_lam)
            p, spent = solve(mid, p, inner_tol)
            if spent > budget:
                lo_lam = mid
            else:
                hi_lam = mid
        lam = hi_lam
    p, lo, up, it, ok = _ba_fixed_multiplier(t, cost, lam, tol, max_iter, p)
    spent = float(p @ cost)
    if not ok:
        warnings.warn("cost-constrained Blahut-Arimoto did not converge", RuntimeWarning,
                      stacklevel=2)
    # dual value max_p(I - lam E[cost]) + lam * budget; tight at the optimal multiplier
    capacity = lo + lam * budget if lam > 0 else mutual_information(p, channel)
    return BAResult(capacity, p, lo + lam * budget, up + lam * budget, it, ok, lam, spent)


# -- oracle set-ups used by the experiments ------------------------------------------


def awgn_peak_channel(A: float, n_inputs: int = 201, n_edges: int = 1601,
                      pad: float = 8.0) -> DiscretizedChannel:
    from .channels import awgn

    grid = np.linspace(-A, A, n_inputs)
    edges = np.linspace(-A - pad, A + pad, n_edges)
    return discretize_channel(awgn(1), grid, edges, feasible=lambda x: np.abs(x) <= A + 1e-12)


ORACLE_TOL = 1e-5


def ba_awgn_peak(A: float, tol: float = ORACLE_TOL, **grid) -> BAResult:
    """Oracle capacity of the scalar unit-variance Gaussian channel with |X| <= A."""
    return blahut_arimoto(awgn_peak_channel(A, **grid), tol=tol)


def cauchy_peak_channel(A: float, gamma: float = 1.0, n_inputs: int = 201,
                        n_edges: int = 1601, tail: float = 0.9995) -> DiscretizedChannel:
    from .channels import cauchy

    reach = gamma * math.tan(math.pi * (tail - 0.5))
    grid = np.linspace(-A, A, n_inputs)
    edges = np.linspace(-A - reach, A + reach, n_edges)
    return discretize_channel(cauchy(gamma), grid, edges)


def ba_cauchy_peak(A: float, gamma: float = 1.0, tol: float = ORACLE_TOL, **grid) -> BAResult:
    return blahut_arimoto(cauchy_peak_channel(A, gamma, **grid), tol=tol)


def rayleigh_channel(n_inputs: int = 201, n_edges: int = 1601, v_min: float = 1e-6,
                     tail: float = 0.9995) -> DiscretizedChannel:
    """S-parameterised grid on (0, 1] with log-spaced output cells."""
    from .channels import rayleigh_equiv

    s = np.linspace(0.0, 1.0, n_inputs + 1)[1:]
    v_max = -math.log1p(-tail) / s[0]
    edges = np.concatenate([[0.0], np.geomspace(v_min, v_max, n_edges - 1)])
    return discretize_channel(rayleigh_equiv(), s, edges)


def ba_rayleigh(a: float = 1.0, **grid) -> BAResult:
    """Oracle capacity of the S-channel under ``E[1/S - 1] <= a``."""
    ch = rayleigh_channel(**grid)
    return blahut_arimoto_cost(ch, 1.0 / ch.input_grid - 1.0, a)


# -- closed forms ------------------------------------------------------------------


def shannon_awgn_bound(A: float, d: int = 1) -> float:
    """(d/2) log2(1 + A^2/d), in bits."""
    if not A > 0 or d < 1:
        raise ValueError("need A > 0 and d >= 1")
    return 0.5 * d * math.log2(1.0 + A * A / d)


def mckellips_bound(A: float) -> float:
    """Tighter scalar peak-power upper bound, in bits."""
    if not A > 0:
        raise ValueError("need A > 0")
    return min(
        math.log2(1.0 + 2.0 * A / math.sqrt(2.0 * math.pi * math.e)),
        0.5 * math.log2(1.0 + A * A),
    )


def cauchy_capacity(A: float, gamma: float = 1.0) -> float:
    """Capacity in nats of the Cauchy channel under the logarithmic constraint."""
    if not (gamma > 0 and A >= gamma):
        raise ValueError("need A >= gamma > 0")
    return math.log(A / gamma)


def gaussian_mi_analytic(rho: float) -> float:
    """I(X;Y) in nats for a bivariate normal with correlation ``rho``."""
    if not abs(rho) < 1:
        raise ValueError("correlation must satisfy |rho| < 1")
    return -0.5 * math.log1p(-rho * rho)


def nats_to_bits(x: float) -> float:
    return x / LN2


def bits_to_nats(x: float) -> float:
    return x * LN2


def gaussian_input_awgn_mi(P: float) -> float:
    """Mutual information of Gaussian input with power P on unit AWGN, in nats."""
    return 0.5 * math.log1p(P)


def normal_cdf(x):
    return special.ndtr(x)
