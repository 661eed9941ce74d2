"""Command-line entry point: ``cortical run|sweep|baseline|check``.

Exit codes: 0 success, 1 check failure, 2 configuration error,
3 training divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, config
from .analysis import figures, svg, tables
from .trainer import TrainingDivergence

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("cortical")


class UsageError(Exception):
    pass


def _split_params(tokens: list[str]) -> tuple[str | None, dict[str, str]]:
    """Separate an optional leading name/path from ``key=value`` and ``--key value`` tokens."""
    head = None
    params: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("--"):
            key = tok[2:]
            if "=" in key:
                key, value = key.split("=", 1)
            else:
                if i + 1 >= len(tokens):
                    raise config.ConfigError(f"option --{key} needs a value", key)
                value = tokens[i + 1]
                i += 1
            params[key.replace("-", "_") if key not in ("out", "seed") else key] = value
        elif "=" in tok:
            key, value = tok.split("=", 1)
            params[key.strip()] = value.strip()
        elif head is None:
            head = tok
        else:
            raise config.ConfigError(f"unexpected argument {tok!r}")
        i += 1
    return head, params


def _experiment_config(tokens: list[str]) -> tuple[config.ExperimentConfig, Path]:
    head, params = _split_params(tokens)
    out = Path(params.pop("out", "out"))
    path, name = None, None
    if head is not None:
        if head in config.EXPERIMENTS:
            name = head
        else:
            path = head
    return config.load(path, params, experiment=name), out


def _prepare_dir(out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise tables.ArtifactError(f"{out}: {exc.strerror or exc}") from exc
    return out


def _summary(res, cfg, wall_time) -> dict:
    bits = baselines.nats_to_bits
    out = {
        "experiment": cfg.experiment,
        "params": cfg.params,
        "seed": cfg.seed,
        "steps": cfg.train.steps,
        "alpha": cfg.train.alpha,
        "capacity_nats": res.capacity_nats,
        "capacity_bits": bits(res.capacity_nats),
        "bits_per_nat": 1.0 / math.log(2.0),
        "bounds": res.bounds,
        "n_atoms": res.n_atoms,
        "wall_time_s": wall_time,
    }
    out.update({k: v for k, v in res.extra.items()})
    return out


def _write_json(data, path: Path) -> Path:
    try:
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise tables.ArtifactError(f"{path}: {exc.strerror or exc}") from exc
    return path


def write_run_artifacts(res, out: Path) -> list[Path]:
    cfg = res.config
    written = [tables.write_trace(res.trace, out / "trace.csv")]
    ref = res.bounds.get("capacity_nats", res.bounds.get("ba_nats"))
    written.append(svg.trace_svg(res.trace.capacity, out / "trace.svg", ref))
    written.append(figures.trace_figure(res.trace.capacity, out / "trace.png", ref))
    if res.pmf is not None:
        label = {"mimo-peak": "|Hx|", "rayleigh": "U"}.get(cfg.experiment, "x")
        written.append(tables.write_pmf(res.pmf, out / "pmf.csv"))
        written.append(svg.pmf_svg(res.pmf, out / "pmf.svg", xlabel=label))
        written.append(figures.pmf_figure(res.pmf, out / "pmf.png", xlabel=label))
    if res.s_pmf is not None:
        written.append(tables.write_pmf(res.s_pmf, out / "pmf_s.csv"))
    if res.clusters is not None:
        rows = [(tables.fmt(c[0]), tables.fmt(c[1]), tables.fmt(m))
                for c, m in zip(res.clusters.centers, res.clusters.mass)]
        written.append(tables.write_rows(out / "clusters.csv", ("x1", "x2", "mass"), rows))
        written.append(figures.scatter_figure(res.samples, out / "inputs.png"))
    if cfg.experiment == "cauchy-log":
        scale = cfg.params["A"] - cfg.params["gamma"]
        pdf = (lambda t: scale / (np.pi * (t ** 2 + scale ** 2))) if scale > 0 else None
        written.append(figures.samples_figure(res.samples, out / "inputs.png", pdf, xlim=(-10, 10)))
    elif res.samples.shape[1] == 1:
        written.append(figures.samples_figure(res.samples, out / "inputs.png"))
    return written


def cmd_run(tokens: list[str]) -> int:
    from .experiments import run_experiment

    cfg, out = _experiment_config(tokens)
    _prepare_dir(out)
    t0 = time.perf_counter()
    res = run_experiment(cfg)
    wall = time.perf_counter() - t0
    write_run_artifacts(res, out)
    summary = _summary(res, cfg, wall)
    _write_json(summary, out / "summary.json")
    print(f"capacity_nats,{tables.fmt(res.capacity_nats)}")
    print(f"capacity_bits,{tables.fmt(res.capacity_bits)}")
    print(f"n_atoms,{res.n_atoms}")
    for k, v in res.extra.items():
        print(f"{k},{v}")
    print(f"artifacts,{out}")
    return EXIT_OK


def cmd_sweep(tokens: list[str]) -> int:
    from .experiments import bifurcation_sweep

    cfg, out = _experiment_config(tokens)
    grid = cfg.grid if cfg.grid is not None else (cfg.params["A"],) if "A" in cfg.params else None
    if grid is None:
        raise config.ConfigError(f"experiment {cfg.experiment!r} cannot be swept", "grid")
    _prepare_dir(out)
    result, runs = bifurcation_sweep(grid, cfg)
    tables.write_sweep(result, out / "sweep.csv")
    tables.write_sweep_pmfs(result, out / "sweep_pmf.csv")
    svg.sweep_svg(result, out / "capacity.svg")
    svg.bifurcation_svg(result, out / "bifurcation.svg")
    figures.sweep_figure(result, out / "sweep.png")
    for e, res in zip(result, runs):
        if res is not None:
            point = _prepare_dir(out / f"A_{e.A:g}")
            tables.write_pmf(res.pmf, point / "pmf.csv")
            tables.write_trace(res.trace, point / "trace.csv")
    print(",".join(tables.SWEEP_HEADER))
    for e in result:
        print(",".join([tables.fmt(e.A), f"{e.capacity_nats:.6f}", f"{e.capacity_bits:.6f}",
                        f"{e.shannon_bits:.6f}", f"{e.mckellips_bits:.6f}", str(e.n_atoms), e.status]))
    return EXIT_OK


def _parse_kv(tokens: list[str], allowed: dict[str, float]) -> dict[str, float]:
    out = dict(allowed)
    for tok in tokens:
        if "=" not in tok:
            raise config.ConfigError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        if k not in allowed:
            raise config.ConfigError(f"unknown parameter {k!r}", k)
        try:
            out[k] = float(v)
        except ValueError:
            raise config.ConfigError(f"{k}: cannot parse {v!r} as float", k) from None
    return out


def cmd_baseline(args: list[str]) -> int:
    if not args:
        raise config.ConfigError("baseline needs a subcommand: ba or bounds")
    sub, rest = args[0], args[1:]
    if sub == "bounds":
        p = _parse_kv(rest, {"A": 1.0, "d": 1.0})
        sh = baselines.shannon_awgn_bound(p["A"], int(p["d"]))
        print(f"shannon_bits,{sh:.6f}")
        if int(p["d"]) == 1:
            print(f"mckellips_bits,{baselines.mckellips_bound(p['A']):.6f}")
        return EXIT_OK
    if sub != "ba":
        raise config.ConfigError(f"unknown baseline subcommand {sub!r}")
    if not rest:
        raise config.ConfigError("baseline ba needs a channel: bsc, awgn-peak, cauchy-peak, rayleigh")
    channel, kv = rest[0], rest[1:]
    if channel == "bsc":
        p = _parse_kv(kv, {"p": 0.1})
        res = baselines.blahut_arimoto(baselines.bsc(p["p"]))
    elif channel == "awgn-peak":
        p = _parse_kv(kv, {"A": 1.0})
        res = baselines.ba_awgn_peak(p["A"])
    elif channel == "cauchy-peak":
        p = _parse_kv(kv, {"A": 1.0, "gamma": 1.0})
        res = baselines.ba_cauchy_peak(p["A"], p["gamma"])
    elif channel == "rayleigh":
        p = _parse_kv(kv, {"a": 1.0})
        res = baselines.ba_rayleigh(p["a"])
    elif channel in ("mimo", "mimo-peak"):
        raise config.ConfigError("Blahut-Arimoto is not supported for the MIMO channel", "channel")
    else:
        raise config.ConfigError(f"unknown channel {channel!r}", "channel")
    print(f"capacity_nats,{res.capacity:.6f}")
    print(f"capacity_bits,{baselines.nats_to_bits(res.capacity):.6f}")
    print(f"bracket_nats,{res.lower:.6f},{res.upper:.6f}")
    print(f"iterations,{res.iterations}")
    return EXIT_OK


def check_grad(n_arch: int = 20, seed: int = 0, tol: float = 1e-4) -> tuple[bool, list[str]]:
    """Finite-difference check over randomized architectures and both activations."""
    from .nn import MlpConfig, finite_diff_check, forward, mlp_new

    rng = np.random.default_rng(seed)
    lines, ok = [], True
    for i in range(n_arch):
        act = ("relu", "tanh")[i % 2]
        head = ("identity", "softplus", "sigmoid", "tanh-scaled")[int(rng.integers(4))]
        hidden = tuple(int(h) for h in rng.integers(1, 9, size=int(rng.integers(1, 4))))
        cfg = MlpConfig(int(rng.integers(1, 4)), hidden, int(rng.integers(1, 3)), act, head, 1.5)
        net = mlp_new(cfg, int(rng.integers(2**31)))
        # random biases keep ReLU pre-activations away from the kink at 0
        for b in net.biases:
            b.data = rng.normal(0, 0.5, b.shape)
        batch = rng.normal(size=(5, cfg.input_dim))
        target = rng.normal(size=(5, cfg.output_dim))

        def loss(net=net, batch=batch, target=target):
            return ((forward(net, batch) - target).square()).mean()

        err = finite_diff_check(net, loss)
        ok &= err < tol
        lines.append(f"arch {i:2d} {act:4s} {head:11s} widths={cfg.widths} max_rel_err={err:.2e} "
                     f"{'ok' if err < tol else 'FAIL'}")
    return ok, lines


def check_discriminator(rho: float, seed: int = 0, steps: int = 6000) -> tuple[bool, str]:
    from .nn import MlpConfig
    from .trainer import train_discriminator

    if not -1 < rho < 1:
        raise config.ConfigError("rho must lie in (-1, 1)", "rho")
    c = math.sqrt(1 - rho * rho)

    def sampler(m, rng):
        x = rng.standard_normal((m, 1))
        return x, rho * x + c * rng.standard_normal((m, 1))

    d_cfg = MlpConfig(2, (64, 64), 1, "relu", "softplus")
    _, est = train_discriminator(sampler, d_cfg, steps=steps, seed=seed)
    truth = baselines.gaussian_mi_analytic(rho)
    ok = abs(est) < 0.01 if rho == 0 else abs(est - truth) <= 0.05 * truth
    return ok, f"rho={rho:g} estimate_nats={est:.4f} analytic_nats={truth:.4f} {'ok' if ok else 'FAIL'}"


def cmd_check(args: list[str]) -> int:
    if not args:
        raise config.ConfigError("check needs a subcommand: grad or discriminator")
    sub, rest = args[0], args[1:]
    if sub == "grad":
        p = _parse_kv(rest, {"n": 20.0, "seed": 0.0})
        ok, lines = check_grad(int(p["n"]), int(p["seed"]))
        print("\n".join(lines))
    elif sub == "discriminator":
        p = _parse_kv(rest, {"rho": 0.5, "seed": 0.0, "steps": 6000.0})
        ok, line = check_discriminator(p["rho"], int(p["seed"]), int(p["steps"]))
        print(line)
    else:
        raise config.ConfigError(f"unknown check {sub!r}")
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "baseline": cmd_baseline, "check": cmd_check}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cortical",
        description="Learn capacity-achieving input distributions and check them against baselines.",
        epilog="examples: cortical run awgn-peak A=1 --seed 1 --out out/awgn | "
               "cortical sweep awgn-peak grid=0.5,1,1.5,2,2.5 | cortical baseline ba bsc p=0.1 | "
               "cortical check grad",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("-v", "--verbose", action="store_true")
    ns, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[ns.command](rest)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDivergence as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
