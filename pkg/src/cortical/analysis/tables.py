"""Delimited artifacts: ``pmf.csv``, ``sweep.csv``, ``trace.csv``.

Floats are written with 17 significant digits so a write/read round trip is
exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pmf import Pmf

PMF_HEADER = ("support", "mass")
SWEEP_HEADER = ("A", "capacity_nats", "capacity_bits", "shannon_bits", "mckellips_bits",
                "n_atoms", "status")
SWEEP_PMF_HEADER = ("A", "support", "mass")
TRACE_HEADER = ("step", "J", "capacity_nats", "penalty")


class ArtifactError(OSError):
    """Writing or reading an artifact failed; the message names the path."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class SweepEntry:
    A: float
    capacity_nats: float
    shannon_bits: float
    mckellips_bits: float
    pmf: Pmf | None = None
    status: str = "ok"
    n_atoms_override: int | None = None

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / math.log(2.0)

    @property
    def n_atoms(self) -> int:
        if self.pmf is not None:
            return self.pmf.n_atoms
        return self.n_atoms_override if self.n_atoms_override is not None else 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class SweepResult:
    entries: list[SweepEntry] = field(default_factory=list)

    def __post_init__(self):
        a = [e.A for e in self.entries]
        if any(b <= c for c, b in zip(a, a[1:])):
            raise ValueError("sweep A values must be strictly increasing")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def A(self) -> list[float]:
        return [e.A for e in self.entries]

    @property
    def n_atoms(self) -> list[int]:
        return [e.n_atoms for e in self.entries]


def _open(path, mode):
    path = Path(path)
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise ArtifactError(f"{path}: {exc.strerror or exc}") from exc


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    try:
        with _open(path, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except ArtifactError:
        raise
    except OSError as exc:
        raise ArtifactError(f"{path}: {exc}") from exc
    return path


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with _open(path, "r") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ArtifactError(f"{path}: empty file")
    return rows[0], rows[1:]


def write_pmf(pmf: Pmf | None, path) -> Path:
    rows = [] if pmf is None else [(fmt(s), fmt(m)) for s, m in zip(pmf.support, pmf.mass)]
    return write_rows(path, PMF_HEADER, rows)


def read_pmf(path) -> Pmf:
    header, rows = read_rows(path)
    if tuple(header) != PMF_HEADER:
        raise ArtifactError(f"{path}: unexpected header {header}")
    support = np.array([float(r[0]) for r in rows])
    mass = np.array([float(r[1]) for r in rows])
    return Pmf(support, mass)


def write_sweep(result: SweepResult, path) -> Path:
    rows = [
        (fmt(e.A), fmt(e.capacity_nats), fmt(e.capacity_bits), fmt(e.shannon_bits),
         fmt(e.mckellips_bits), str(e.n_atoms), e.status)
        for e in result
    ]
    return write_rows(path, SWEEP_HEADER, rows)


def write_sweep_pmfs(result: SweepResult, path) -> Path:
    rows = [
        (fmt(e.A), fmt(s), fmt(m))
        for e in result if e.pmf is not None
        for s, m in zip(e.pmf.support, e.pmf.mass)
    ]
    return write_rows(path, SWEEP_PMF_HEADER, rows)


def read_sweep(path, pmf_path=None) -> SweepResult:
    header, rows = read_rows(path)
    if tuple(header) != SWEEP_HEADER:
        raise ArtifactError(f"{path}: unexpected header {header}")
    pmfs: dict[float, list[tuple[float, float]]] = {}
    if pmf_path is not None:
        _, prow = read_rows(pmf_path)
        for a, s, m in prow:
            pmfs.setdefault(float(a), []).append((float(s), float(m)))
    entries = []
    for r in rows:
        a = float(r[0])
        pmf = None
        if a in pmfs:
            sm = np.array(pmfs[a])
            pmf = Pmf(sm[:, 0], sm[:, 1])
        entries.append(SweepEntry(a, float(r[1]), float(r[3]), float(r[4]), pmf=pmf,
                                  status=r[6], n_atoms_override=int(r[5])))
    return SweepResult(entries)


def write_trace(trace, path) -> Path:
    rows = (
        (str(i), fmt(v), fmt(c), fmt(p))
        for i, (v, c, p) in enumerate(zip(trace.value, trace.capacity, trace.penalty))
    )
    return write_rows(path, TRACE_HEADER, rows)


def read_trace(path) -> dict[str, np.ndarray]:
    header, rows = read_rows(path)
    if tuple(header) != TRACE_HEADER:
        raise ArtifactError(f"{path}: unexpected header {header}")
    arr = np.array([[float(v) for v in r] for r in rows]).reshape(-1, 4)
    return {name: arr[:, i] for i, name in enumerate(TRACE_HEADER)}
