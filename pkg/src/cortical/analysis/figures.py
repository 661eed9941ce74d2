"""Raster figures rendered with matplotlib (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .pmf import Pmf  # noqa: E402
from .tables import ArtifactError, SweepResult  # noqa: E402

DPI = 100


def _save(fig, path) -> Path:
    path = Path(path)
    try:
        fig.savefig(path, dpi=DPI)
    except OSError as exc:
        raise ArtifactError(f"{path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)
    return path


def pmf_figure(pmf: Pmf, path, xlabel: str = "x", title: str = "learned input PMF") -> Path:
    fig, ax = plt.subplots(figsize=(8, 6))
    ax.vlines(pmf.support, 0, pmf.mass, color="C0")
    ax.scatter(pmf.support, pmf.mass, s=400 * pmf.mass, color="C0", zorder=3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mass")
    ax.set_ylim(0, max(1.05 * pmf.mass.max(), 0.1))
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def samples_figure(samples, path, reference_pdf=None, bins: int = 200,
                   title: str = "generated inputs", xlim=None) -> Path:
    """Histogram of 1-D generator samples, optionally against a reference density."""
    x = np.asarray(samples, float).ravel()
    fig, ax = plt.subplots(figsize=(8, 6))
    rng = xlim if xlim is not None else (np.quantile(x, 0.005), np.quantile(x, 0.995))
    ax.hist(x, bins=bins, range=rng, density=True, color="C0", alpha=0.6, label="samples")
    if reference_pdf is not None:
        t = np.linspace(*rng, 400)
        ax.plot(t, reference_pdf(t), color="C3", label="reference")
        ax.legend()
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(title)
    return _save(fig, path)


def scatter_figure(points, path, title: str = "generated inputs") -> Path:
    pts = np.asarray(points, float)
    fig, ax = plt.subplots(figsize=(7, 7))
    ax.scatter(pts[:, 0], pts[:, 1], s=2, alpha=0.3)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(title)
    return _save(fig, path)


def sweep_figure(result: SweepResult, path) -> Path:
    """Two panels: atom locations against A, and capacity against both bounds."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(12, 5))
    for e in result:
        if e.pmf is not None:
            left.scatter(np.full(e.pmf.n_atoms, e.A), e.pmf.support, s=300 * e.pmf.mass, color="C0")
    left.set_xlabel("A")
    left.set_ylabel("support point")
    left.set_title("input support")
    a = np.array(result.A, float)
    if len(a):
        right.plot(a, [e.shannon_bits for e in result], "C3-", label="Shannon bound")
        right.plot(a, [e.mckellips_bits for e in result], "C2-", label="McKellips bound")
        right.plot(a, [e.capacity_bits for e in result], "C0o", label="estimate")
        right.legend()
    right.set_xlabel("A")
    right.set_ylabel("bits per channel use")
    right.set_title("capacity")
    fig.tight_layout()
    return _save(fig, path)


def trace_figure(capacity, path, reference: float | None = None) -> Path:
    c = np.asarray(capacity, float)
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(np.arange(len(c)), c, lw=0.8, label="estimate")
    if reference is not None:
        ax.axhline(reference, color="C3", ls="--", label="reference")
    ax.set_xlabel("generator step")
    ax.set_ylabel("nats")
    ax.legend()
    return _save(fig, path)
