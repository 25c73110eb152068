"""Seeded, worker-count-independent Monte-Carlo plumbing.

A run is cut into *units* whose shapes depend only on the experiment
parameters.  Each unit draws from its own Philox substream keyed by
``(stream_id, *unit_key)`` under the master seed, and the per-unit results
are integer/float sums reduced in unit order.  Serial and parallel runs
therefore produce bit-identical estimates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngSpec", "SimEstimate", "substream", "run_units", "plan_blocks"]

# upper bound on (ensembles x trials x points) held in memory by one unit
ELEMENT_BUDGET = 1 << 19


@dataclass(frozen=True)
class RngSpec:
    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def child(self, stream_id: int) -> "RngSpec":
        """Same master seed, different stream (e.g. one per SNR point)."""
        return RngSpec(self.master_seed, stream_id)


def substream(rng: RngSpec, *key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(rng.master_seed, spawn_key=(rng.stream_id, *key))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class SimEstimate:
    """Monte-Carlo error-rate estimate.

    For direct counting ``errors`` is an integer count.  For conditional
    (Rao-Blackwellized) estimators it is the sum of the per-sample
    conditional error probabilities, and ``ci95_halfwidth`` comes from the
    sample variance instead of the binomial approximation.
    """

    error_rate: float
    trials: int
    errors: float
    ensembles: int
    ci95_halfwidth: float
    method: str = "direct"
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_counts(cls, errors: int, trials: int, ensembles: int, **extra):
        p = errors / trials
        half = 1.96 * math.sqrt(p * (1.0 - p) / trials)
        return cls(p, trials, errors, ensembles, half, "direct", extra)

    @classmethod
    def from_moments(cls, total: float, total_sq: float, samples: int, **extra):
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        if samples > 1:
            var *= samples / (samples - 1)
        half = 1.96 * math.sqrt(var / samples)
        return cls(mean, samples, total, samples, half, "conditional", extra)


def plan_blocks(ensembles: int, trials: int, points: int,
                budget: int = ELEMENT_BUDGET):
    """Deterministic (ensembles-per-batch, trials-per-block) for a run."""
    trial_block = min(trials, max(1, budget // max(points, 1)))
    ens_batch = min(ensembles, max(1, budget // (trial_block * max(points, 1))))
    return ens_batch, trial_block


def iter_units(ensembles: int, trials: int, ens_batch: int, trial_block: int):
    """Yield (batch_index, ens_lo, ens_hi, block_index, trials_in_block)."""
    for j, lo in enumerate(range(0, ensembles, ens_batch)):
        hi = min(ensembles, lo + ens_batch)
        for b, t0 in enumerate(range(0, trials, trial_block)):
            yield j, lo, hi, b, min(trial_block, trials - t0)


def run_units(fn, units, workers: int = 1):
    """Map ``fn`` over ``units`` preserving order; ``fn`` must be picklable."""
    units = list(units)
    if workers <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    chunk = max(1, len(units) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, units, chunksize=chunk))
