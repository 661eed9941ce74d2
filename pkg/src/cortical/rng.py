"""Named, independent random streams derived from one master seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAMS = ("init", "latent", "channel", "derangement", "sweep", "eval")


@dataclass
class Streams:
    init: np.random.Generator
    latent: np.random.Generator
    channel: np.random.Generator
    derangement: np.random.Generator
    sweep: np.random.Generator
    eval: np.random.Generator
    seed: int

    def init_seeds(self, n: int = 2) -> list[int]:
        """Integer seeds for network initialisation (generator, discriminator)."""
        return [int(s) for s in self.init.integers(0, 2**63 - 1, size=n)]


def split(seed: int) -> Streams:
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    gens = {name: np.random.Generator(np.random.PCG64(c)) for name, c in zip(STREAMS, children)}
    return Streams(seed=int(seed), **gens)


def sub_seeds(seed: int, n: int) -> list[int]:
    """Deterministic per-point seeds for sweeps."""
    ss = np.random.SeedSequence([int(seed), 0x5EED])
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> 1) for c in ss.spawn(n)]
