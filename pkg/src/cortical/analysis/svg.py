"""Dependency-free SVG 1.1 plots on a fixed 800x600 canvas."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .pmf import Pmf
from .tables import ArtifactError, SweepResult

WIDTH, HEIGHT = 800, 600
MARGIN = (80, 40, 40, 70)  # left, right, top, bottom
N_TICKS = 5
MAX_RADIUS = 14.0
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt_tick(v: float) -> str:
    return f"{v:.3g}"


def _pad_range(lo: float, hi: float) -> tuple[float, float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return 0.0, 1.0
    if hi - lo < 1e-12:
        return lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class Canvas:
    """Linear axes mapping data coordinates to the plotting area."""

    def __init__(self, xlim, ylim, title="", xlabel="", ylabel=""):
        self.x0, self.x1 = _pad_range(*xlim)
        self.y0, self.y1 = _pad_range(*ylim)
        self.items: list[str] = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        left, right, top, bottom = MARGIN
        self.px0, self.px1 = left, WIDTH - right
        self.py0, self.py1 = HEIGHT - bottom, top

    def sx(self, x):
        return self.px0 + (np.asarray(x, float) - self.x0) / (self.x1 - self.x0) * (self.px1 - self.px0)

    def sy(self, y):
        return self.py0 + (np.asarray(y, float) - self.y0) / (self.y1 - self.y0) * (self.py1 - self.py0)

    def markers(self, x, y, radius, color, cls="marker"):
        for cx, cy, r in zip(self.sx(x), self.sy(y), np.broadcast_to(radius, np.shape(x))):
            self.items.append(
                f'<circle class="{cls}" cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
                f'fill="{color}" fill-opacity="0.7" stroke="{color}"/>'
            )

    def line(self, x, y, color, cls="curve", label=None):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(self.sx(x), self.sy(y)))
        self.items.append(
            f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        if label:
            self.legend(label, color)

    def legend(self, label, color):
        k = sum(1 for s in self.items if 'class="legend"' in s)
        y = MARGIN[2] + 15 + 18 * k
        x = self.px1 - 180
        self.items.append(
            f'<text class="legend" x="{x + 24}" y="{y + 4}" font-size="13">{escape(label)}</text>'
            f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{color}" stroke-width="3"/>'
        )

    def _axes(self) -> list[str]:
        out = [
            f'<line class="axis" x1="{self.px0}" y1="{self.py0}" x2="{self.px1}" y2="{self.py0}" stroke="black"/>',
            f'<line class="axis" x1="{self.px0}" y1="{self.py0}" x2="{self.px0}" y2="{self.py1}" stroke="black"/>',
        ]
        for v in np.linspace(self.x0, self.x1, N_TICKS):
            x = float(self.sx(v))
            out.append(f'<line class="xtick" x1="{x:.2f}" y1="{self.py0}" x2="{x:.2f}" y2="{self.py0 + 6}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{self.py0 + 22}" font-size="12" text-anchor="middle">{_fmt_tick(v)}</text>')
        for v in np.linspace(self.y0, self.y1, N_TICKS):
            y = float(self.sy(v))
            out.append(f'<line class="ytick" x1="{self.px0 - 6}" y1="{y:.2f}" x2="{self.px0}" y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{self.px0 - 10}" y="{y + 4:.2f}" font-size="12" text-anchor="end">{_fmt_tick(v)}</text>')
        cx = (self.px0 + self.px1) / 2
        cy = (self.py0 + self.py1) / 2
        out.append(f'<text x="{cx}" y="{HEIGHT - 20}" font-size="14" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="20" y="{cy}" font-size="14" text-anchor="middle" '
                   f'transform="rotate(-90 20 {cy})">{escape(self.ylabel)}</text>')
        out.append(f'<text x="{cx}" y="24" font-size="16" text-anchor="middle">{escape(self.title)}</text>')
        return out

    def render(self) -> str:
        body = "\n".join(self._axes() + self.items)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n{body}\n</svg>\n'
        )

    def save(self, path) -> Path:
        path = Path(path)
        try:
            path.write_text(self.render())
        except OSError as exc:
            raise ArtifactError(f"{path}: {exc.strerror or exc}") from exc
        return path


def _radius(mass) -> np.ndarray:
    return 3.0 + MAX_RADIUS * np.sqrt(np.asarray(mass, float))


def pmf_svg(pmf: Pmf, path, title="learned input PMF", xlabel="x") -> Path:
    cv = Canvas((pmf.support.min(), pmf.support.max()), (0.0, max(pmf.mass.max(), 0.1)),
                title, xlabel, "mass")
    for s, m in zip(pmf.support, pmf.mass):
        cv.line([s, s], [0.0, m], COLORS[0], cls="stem")
    cv.markers(pmf.support, pmf.mass, _radius(pmf.mass), COLORS[0])
    return cv.save(path)


def sweep_svg(result: SweepResult, path) -> Path:
    """Capacity markers against both upper-bound curves, in bits."""
    a = np.array(result.A, float)
    cap = np.array([e.capacity_bits for e in result])
    sh = np.array([e.shannon_bits for e in result])
    mk = np.array([e.mckellips_bits for e in result])
    finite = np.concatenate([v[np.isfinite(v)] for v in (cap, sh, mk)] + [np.zeros(1)])
    xl = (a.min(), a.max()) if len(a) else (0.0, 1.0)
    cv = Canvas(xl, (0.0, finite.max()), "capacity vs peak amplitude", "A", "bits per channel use")
    if len(a):
        cv.line(a, sh, COLORS[1], cls="bound", label="Shannon bound")
        cv.line(a, mk, COLORS[2], cls="bound", label="McKellips bound")
        ok = np.isfinite(cap)
        cv.markers(a[ok], cap[ok], 6.0, COLORS[0], cls="capacity")
        cv.legend("estimate", COLORS[0])
    return cv.save(path)


def bifurcation_svg(result: SweepResult, path) -> Path:
    """Atom locations versus A, marker size following the mass."""
    pts = [(e.A, s, m) for e in result if e.pmf is not None for s, m in zip(e.pmf.support, e.pmf.mass)]
    arr = np.array(pts, float).reshape(-1, 3)
    if len(arr):
        xl, yl = (arr[:, 0].min(), arr[:, 0].max()), (arr[:, 1].min(), arr[:, 1].max())
    else:
        xl, yl = (0.0, 1.0), (-1.0, 1.0)
    cv = Canvas(xl, yl, "input support vs peak amplitude", "A", "support point")
    if len(arr):
        cv.markers(arr[:, 0], arr[:, 1], _radius(arr[:, 2]), COLORS[0], cls="atom")
    return cv.save(path)


def trace_svg(capacity, path, reference: float | None = None) -> Path:
    c = np.asarray(capacity, float)
    steps = np.arange(len(c))
    lo = min(float(np.nanmin(c)) if len(c) else 0.0, reference if reference is not None else np.inf)
    hi = max(float(np.nanmax(c)) if len(c) else 1.0, reference if reference is not None else -np.inf)
    cv = Canvas((0, max(len(c) - 1, 1)), (lo, hi), "capacity estimate during training",
                "generator step", "nats")
    if len(c):
        cv.line(steps, c, COLORS[0], label="estimate")
    if reference is not None:
        cv.line([0, max(len(c) - 1, 1)], [reference, reference], COLORS[1], cls="reference",
                label="reference")
    return cv.save(path)


def emit_svg(result, path) -> Path:
    if isinstance(result, Pmf):
        return pmf_svg(result, path)
    if isinstance(result, SweepResult):
        return sweep_svg(result, path)
    return trace_svg(result, path)
