"""Recover discrete input laws from generator samples."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .ks import KS_COEFFICIENTS, ks_statistic

MIN_SAMPLES = 1000
MASS_FLOOR = 0.005


@dataclass(frozen=True)
class Pmf:
    """Support points (sorted) with positive masses summing to one."""

    support: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.float64)
        mass = np.asarray(self.mass, dtype=np.float64)
        if support.shape != mass.shape or support.ndim != 1:
            raise ValueError("support and mass must be 1-D arrays of equal length")
        if np.any(mass <= 0):
            raise ValueError("masses must be positive")
        if len(mass) and abs(mass.sum() - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {mass.sum()!r}, not 1")
        if np.any(np.diff(support) < 0):
            raise ValueError("support must be sorted")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)

    def __len__(self) -> int:
        return len(self.support)

    @property
    def n_atoms(self) -> int:
        return len(self.support)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(self.support, size=n, p=self.mass)

    def map(self, fn) -> Pmf:
        """Push the support through a monotone map, keeping the support sorted."""
        support = np.asarray(fn(self.support), dtype=np.float64)
        order = np.argsort(support, kind="stable")
        return Pmf(support[order], self.mass[order])


def default_merge_tol(samples: np.ndarray, max_atoms: int = 10, floor: float = 0.05) -> float:
    span = float(np.ptp(samples)) if len(samples) else 0.0
    return max(0.1 * span / max_atoms, floor)


def _dense_mask(sorted_x: np.ndarray, radius: float, min_count: float) -> np.ndarray:
    lo = np.searchsorted(sorted_x, sorted_x - radius, side="left")
    hi = np.searchsorted(sorted_x, sorted_x + radius, side="right")
    return (hi - lo) >= min_count


def extract_pmf(samples, merge_tol: float | None = None, min_mass: float = MASS_FLOOR) -> Pmf:
    """Group 1-D samples into atoms.

    Samples whose ``merge_tol`` neighbourhood holds less than ``min_mass`` of
    the draws are treated as strays and dropped.  The rest are sorted and split
    wherever consecutive samples are more than ``merge_tol`` apart.  Each
    group becomes one atom at its mean; groups lighter than ``min_mass`` are
    discarded and the masses renormalised.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("no samples")
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if merge_tol is None:
        merge_tol = default_merge_tol(x)
    if not merge_tol > 0:
        raise ValueError("merge_tol must be positive")
    n = x.size
    keep = _dense_mask(x, merge_tol, min_mass * n)
    kept = x[keep] if keep.any() else x
    cuts = np.flatnonzero(np.diff(kept) > merge_tol) + 1
    groups = np.split(kept, cuts)
    support = np.array([g.mean() for g in groups])
    mass = np.array([g.size / n for g in groups])
    heavy = mass >= min_mass
    if not heavy.any():
        heavy = mass == mass.max()
    support, mass = support[heavy], mass[heavy]
    return Pmf(support, mass / mass.sum())


@dataclass(frozen=True)
class Clusters:
    """Planar atoms: centres (k x 2) and masses."""

    centers: np.ndarray
    mass: np.ndarray

    def __len__(self) -> int:
        return len(self.mass)


def cluster_points(points, merge_tol: float | None = None, min_mass: float = MASS_FLOOR) -> Clusters:
    """The 2-D analogue of :func:`extract_pmf`.

    Points link when closer than ``merge_tol``; strays are filtered the same
    way, connected components become clusters.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty (n, d) array")
    if len(pts) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} points, got {len(pts)}")
    n = len(pts)
    if merge_tol is None:
        span = float(np.max(np.ptp(pts, axis=0)))
        merge_tol = max(0.1 * span / 10, 0.05)
    tree = cKDTree(pts)
    counts = np.array([len(nb) for nb in tree.query_ball_point(pts, merge_tol)])
    keep = counts >= min_mass * n
    if not keep.any():
        keep[:] = True
    kept = pts[keep]
    sub = cKDTree(kept)
    graph = sub.sparse_distance_matrix(sub, merge_tol, output_type="coo_matrix")
    n_comp, labels = connected_components(graph, directed=False)
    centers, mass = [], []
    for k in range(n_comp):
        members = kept[labels == k]
        if members.shape[0] / n >= min_mass:
            centers.append(members.mean(axis=0))
            mass.append(members.shape[0] / n)
    if not mass:
        raise ValueError("no cluster reaches the mass floor")
    mass = np.array(mass)
    centers = np.array(centers)
    order = np.lexsort(centers.T[::-1])
    return Clusters(centers[order], mass[order] / mass.sum())


@dataclass(frozen=True)
class RadialProfile:
    magnitude: Pmf
    phase_ks: float
    n: int

    def phase_critical(self, level: float = 0.05) -> float:
        return ks_critical(self.n, level)


def ks_critical(n: int, level: float) -> float:
    return KS_COEFFICIENTS[level] / math.sqrt(n)


def radial_profile(points, matrix=None, merge_tol: float | None = None) -> RadialProfile:
    """Magnitude atoms and phase uniformity of planar samples.

    With ``matrix`` the magnitude is measured as ``||H x||``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("radial_profile needs (n, 2) points")
    if len(pts) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} points, got {len(pts)}")
    mapped = pts if matrix is None else pts @ np.asarray(matrix, dtype=np.float64).T
    radius = np.hypot(mapped[:, 0], mapped[:, 1])
    if np.all(radius == 0):
        raise ValueError("all points are at the origin")
    angle = np.arctan2(pts[:, 1], pts[:, 0])
    stat, _ = ks_statistic(angle, lambda t: (np.asarray(t) + np.pi) / (2 * np.pi))
    return RadialProfile(extract_pmf(radius, merge_tol), stat, len(pts))


def rayleigh_amplitude(s):
    """Amplitude U = sqrt(1/S - 1) for S in (0, 1]."""
    s = np.asarray(s, dtype=np.float64)
    return np.sqrt(np.clip(1.0 / s - 1.0, 0.0, None))
