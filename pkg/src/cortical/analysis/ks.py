from __future__ import annotations

import math

import numpy as np

# asymptotic one-sample Kolmogorov-Smirnov coefficients c(level); critical = c / sqrt(n)
KS_COEFFICIENTS = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}
MIN_KS_SAMPLES = 100


def ks_statistic(samples, cdf) -> tuple[float, dict[float, float]]:
    """Sup-distance between the empirical CDF of ``samples`` and ``cdf``.

    Returns the statistic and the critical values at the 10%, 5% and 1% levels.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n < MIN_KS_SAMPLES:
        raise ValueError(f"need at least {MIN_KS_SAMPLES} samples, got {n}")
    f = np.asarray(cdf(x), dtype=np.float64)
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("reference CDF is not monotone on the sample range")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    crit = {level: c / math.sqrt(n) for level, c in KS_COEFFICIENTS.items()}
    return float(max(d_plus, d_minus)), crit


def cauchy_cdf(scale: float = 1.0, loc: float = 0.0):
    return lambda t: 0.5 + np.arctan((np.asarray(t) - loc) / scale) / np.pi
