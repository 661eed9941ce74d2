"""Named experiments: channel, constraint and analysis for each scenario."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from . import rng as rngmod
from .analysis.ks import cauchy_cdf, ks_statistic
from .analysis.pmf import Clusters, Pmf, RadialProfile, cluster_points, extract_pmf, radial_profile, rayleigh_amplitude
from .analysis.tables import SweepEntry, SweepResult
from .channels import ChannelModel, ConstraintSpec, awgn, cauchy, mimo, peak_constraint, rayleigh_equiv
from .config import ExperimentConfig
from .trainer import CapacityTrace, TrainingDivergence, default_mlp_configs, sample_inputs, train

log = logging.getLogger(__name__)

# constrained Blahut-Arimoto value for the Rayleigh-equivalent channel at a=1,
# recomputed by the test suite from baselines.ba_rayleigh
RAYLEIGH_BA_A1 = 0.19554


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trace: CapacityTrace
    samples: np.ndarray
    pmf: Pmf | None = None
    bounds: dict[str, float] = field(default_factory=dict)
    extra: dict[str, object] = field(default_factory=dict)
    clusters: Clusters | None = None
    radial: RadialProfile | None = None
    s_pmf: Pmf | None = None
    wall_time: float = 0.0

    @property
    def capacity_nats(self) -> float:
        return self.trace.final_capacity

    @property
    def capacity_bits(self) -> float:
        return baselines.nats_to_bits(self.capacity_nats)

    @property
    def n_atoms(self) -> int | None:
        if self.config.experiment == "mimo-peak":
            return len(self.clusters) if self.clusters is not None else None
        return self.pmf.n_atoms if self.pmf is not None else None


def build_channel(cfg: ExperimentConfig) -> tuple[ChannelModel, ConstraintSpec]:
    p = cfg.params
    name = cfg.experiment
    if name == "awgn-peak":
        return awgn(1), peak_constraint(p["A"])
    if name == "mimo-peak":
        gains = (1.0, p["r2"])
        return mimo(gains), peak_constraint(p["A"], gains=gains)
    if name == "cauchy-log":
        return cauchy(p["gamma"]), ConstraintSpec(log_power=(p["A"], p["gamma"]))
    if name == "cauchy-peak":
        return cauchy(p["gamma"]), peak_constraint(p["A"])
    if name == "rayleigh":
        return rayleigh_equiv(), ConstraintSpec(rayleigh_average=p["a"])
    raise ValueError(f"unknown experiment {name!r}")


def reference_values(cfg: ExperimentConfig) -> dict[str, float]:
    """Closed-form bounds and references (nats and bits) for the summary."""
    p = cfg.params
    name = cfg.experiment
    out: dict[str, float] = {}
    if name == "awgn-peak":
        out["shannon_bits"] = baselines.shannon_awgn_bound(p["A"], 1)
        out["mckellips_bits"] = baselines.mckellips_bound(p["A"])
    elif name == "mimo-peak":
        # ||Hx|| <= A bounds the received signal power per dimension by A^2 / 2
        out["shannon_bits"] = baselines.shannon_awgn_bound(p["A"], 2)
    elif name == "cauchy-log":
        out["capacity_nats"] = baselines.cauchy_capacity(p["A"], p["gamma"])
        out["capacity_bits"] = baselines.nats_to_bits(out["capacity_nats"])
    elif name == "rayleigh" and p["a"] == 1.0:
        out["ba_nats"] = RAYLEIGH_BA_A1
        out["ba_bits"] = baselines.nats_to_bits(RAYLEIGH_BA_A1)
    return out


def analyse(cfg: ExperimentConfig, samples: np.ndarray, result: ExperimentResult) -> None:
    name = cfg.experiment
    tol = cfg.merge_tol
    if name in ("awgn-peak", "cauchy-peak"):
        result.pmf = extract_pmf(samples[:, 0], tol)
    elif name == "mimo-peak":
        gains = np.diag([1.0, cfg.params["r2"]])
        result.radial = radial_profile(samples, gains, tol)
        result.clusters = cluster_points(samples, tol)
        result.pmf = result.radial.magnitude
        result.extra["phase_ks"] = result.radial.phase_ks
        result.extra["phase_ks_critical_5pct"] = result.radial.phase_critical(0.05)
        result.extra["n_clusters"] = len(result.clusters)
        result.extra["n_magnitude_atoms"] = result.radial.magnitude.n_atoms
    elif name == "cauchy-log":
        scale = cfg.params["A"] - cfg.params["gamma"]
        if scale > 0:
            stat, crit = ks_statistic(samples[:, 0], cauchy_cdf(scale))
            result.extra["ks_statistic"] = stat
            result.extra["ks_critical_1pct"] = crit[0.01]
            result.extra["ks_reference_scale"] = scale
    elif name == "rayleigh":
        result.s_pmf = extract_pmf(samples[:, 0], tol)
        result.pmf = result.s_pmf.map(rayleigh_amplitude)


def run_experiment(cfg: ExperimentConfig, callback=None) -> ExperimentResult:
    """Train once per ``cfg`` and analyse the generator's samples.

    Raises :class:`TrainingDivergence` if training produces a non-finite loss.
    """
    t0 = time.perf_counter()
    model, spec = build_channel(cfg)
    g_cfg, d_cfg = default_mlp_configs(model, cfg.train.latent_dim, hidden=cfg.hidden)
    G, _, trace = train(cfg.train, model, spec, g_cfg, d_cfg, callback=callback)
    streams = rngmod.split(cfg.seed)
    samples = sample_inputs(G, cfg.eval_samples, streams.eval, spec).astype(np.float64)
    result = ExperimentResult(cfg, trace, samples, bounds=reference_values(cfg))
    analyse(cfg, samples, result)
    result.wall_time = time.perf_counter() - t0
    return result


def bifurcation_sweep(grid, cfg: ExperimentConfig, callback=None) -> tuple[SweepResult, list]:
    """One independent run per peak amplitude.

    Seeds come from the master seed's sweep stream.  A diverged run is
    recorded with ``status`` set and NaN capacity; the sweep continues.
    Returns the sweep and the per-point :class:`ExperimentResult` (or None).
    """
    grid = [float(a) for a in grid]
    if not grid or any(a <= 0 for a in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("A values must be positive and strictly increasing")
    if "A" not in cfg.params:
        raise ValueError(f"experiment {cfg.experiment!r} has no peak amplitude to sweep")
    seeds = rngmod.sub_seeds(cfg.seed, len(grid))
    entries, runs = [], []
    for A, seed in zip(grid, seeds):
        point = cfg.with_params(A=A).with_seed(seed)
        shannon = baselines.shannon_awgn_bound(A, 2 if cfg.experiment == "mimo-peak" else 1)
        mck = baselines.mckellips_bound(A) if cfg.experiment == "awgn-peak" else math.nan
        try:
            res = run_experiment(point, callback)
        except TrainingDivergence as exc:
            log.warning("A=%g diverged: %s", A, exc)
            entries.append(SweepEntry(A, math.nan, shannon, mck, None, status=f"diverged@{exc.step}"))
            runs.append(None)
            continue
        except ValueError as exc:
            log.warning("A=%g analysis failed: %s", A, exc)
            entries.append(SweepEntry(A, math.nan, shannon, mck, None, status="analysis-failed"))
            runs.append(None)
            continue
        entries.append(SweepEntry(A, res.capacity_nats, shannon, mck, res.pmf))
        runs.append(res)
    return SweepResult(entries), runs
