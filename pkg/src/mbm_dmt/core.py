"""MBM constellations, the AWGN receive model, ML detection and SER simulation.

Conventions
-----------
A constellation stores *normalized* channel gains ``g_m`` (i.i.d. unit
variance entries); the receive signal for message ``m`` is
``sqrt(snr) * g_m + z`` with unit-variance noise per real dimension.  With
``n`` real receive dimensions there are ``N_r = n / 2`` complex receive
antennas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import special

from .montecarlo import (RngSpec, SimEstimate, iter_units, plan_blocks, run_units,
                         substream)

__all__ = [
    "Constellation",
    "SnrSpec",
    "InsufficientDataError",
    "sample_constellation",
    "transmit",
    "ml_detect",
    "simulate_ser",
    "simulate_ser_conditional",
    "rate_schedule",
    "estimate_diversity_slope",
    "db_to_linear",
    "linear_to_db",
]


class InsufficientDataError(ValueError):
    """Not enough usable points to fit or interpolate an error-rate curve."""


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def _check_dims(n):
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f"receive dimension n must be an even integer >= 2, got {n}")


@dataclass(frozen=True, eq=False)
class Constellation:
    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 2:
            raise ValueError("gains must be an M x n matrix")
        if g.shape[0] < 2:
            raise ValueError(f"need at least 2 constellation points, got {g.shape[0]}")
        _check_dims(g.shape[1])
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def m_count(self) -> int:
        return self.gains.shape[0]

    @property
    def dims(self) -> int:
        return self.gains.shape[1]

    @property
    def n_r(self) -> int:
        return self.dims // 2

    def energies(self) -> np.ndarray:
        """Normalized energy ``||g_m||^2`` of every point."""
        return np.einsum("ij,ij->i", self.gains, self.gains)


@dataclass(frozen=True)
class SnrSpec:
    snr: float

    def __post_init__(self):
        if not (self.snr > 0 and math.isfinite(self.snr)):
            raise ValueError(f"snr must be finite and positive, got {self.snr}")

    @classmethod
    def from_db(cls, snr_db: float) -> "SnrSpec":
        return cls(float(10.0 ** (snr_db / 10.0)))

    @property
    def c(self) -> float:
        return self.snr / 2.0

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.snr)


def _snr_value(snr) -> float:
    return snr.snr if isinstance(snr, SnrSpec) else SnrSpec(float(snr)).snr


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        return substream(rng)
    raise TypeError("rng must be an RngSpec or numpy Generator")


def sample_constellation(M: int, n: int, rng) -> Constellation:
    """Draw ``M`` i.i.d. standard normal points in ``n`` real dimensions."""
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    _check_dims(n)
    return Constellation(_generator(rng).standard_normal((M, n)))


def transmit(const: Constellation, m: int, snr, rng, noise_scale: float = 1.0) -> np.ndarray:
    if not 0 <= m < const.m_count:
        raise IndexError(f"message index {m} outside [0, {const.m_count})")
    z = _generator(rng).standard_normal(const.dims)
    return math.sqrt(_snr_value(snr)) * const.gains[m] + noise_scale * z


def ml_detect(const: Constellation, y, snr):
    """Nearest-point (ML) decision; ties go to the lowest index.

    ``y`` may be a single receive vector or a stack of shape ``(..., n)``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != const.dims:
        raise ValueError(f"receive vector has length {y.shape[-1]}, expected {const.dims}")
    pts = math.sqrt(_snr_value(snr)) * const.gains
    d2 = np.sum((y[..., None, :] - pts) ** 2, axis=-1)
    out = np.argmin(d2, axis=-1)
    return int(out) if out.ndim == 0 else out


def rate_schedule(snr: float, r: float) -> int:
    """Number of messages realizing rate ``r log snr``: max(2, round(snr^r))."""
    if r < 0:
        raise ValueError("multiplexing gain must be nonnegative")
    return max(2, int(round(float(snr) ** r)))


# -- direct Monte Carlo -----------------------------------------------------

def _draw_pruned(gen, shape, prune_energy):
    """Draw constellations, redrawing any that keep fewer than two points."""
    g = gen.standard_normal(shape)
    if prune_energy is None:
        return g, np.ones(shape[:2], dtype=bool), 0
    n = shape[2]
    threshold = n * prune_energy
    keep = np.einsum("bmi,bmi->bm", g, g) >= threshold
    redraws = 0
    bad = np.flatnonzero(keep.sum(axis=1) < 2)
    while bad.size:
        redraws += bad.size
        g[bad] = gen.standard_normal((bad.size,) + shape[1:])
        keep[bad] = np.einsum("bmi,bmi->bm", g[bad], g[bad]) >= threshold
        bad = bad[keep[bad].sum(axis=1) < 2]
    return g, keep, redraws


def _ser_unit(unit, *, n, M, snr, rng, prune_energy, noise_scale):
    j, lo, hi, b, trials = unit
    eb = hi - lo
    g, keep, redraws = _draw_pruned(substream(rng, 0, j), (eb, M, n), prune_energy)
    gen = substream(rng, 1, j, b)
    survivors = keep.sum(axis=1)
    u = gen.random((eb, trials))
    rank = np.minimum((u * survivors[:, None]).astype(np.int64), survivors[:, None] - 1)
    if prune_energy is None:
        sent = rank
    else:
        # position of the (rank+1)-th surviving point in each ensemble
        csum = np.cumsum(keep, axis=1)
        sent = np.count_nonzero(csum[:, None, :] <= rank[..., None], axis=2)
    z = gen.standard_normal((eb, trials, n))
    a = math.sqrt(snr)
    tx = np.take_along_axis(g, sent[..., None], axis=1)
    y = a * tx + noise_scale * z
    # ||y - a g||^2 = ||y||^2 + a (a ||g||^2 - 2 y.g); the first term is common
    metric = a * np.einsum("bmi,bmi->bm", g, g)[:, None, :] - 2.0 * np.matmul(
        y, g.transpose(0, 2, 1))
    if prune_energy is not None:
        metric = np.where(keep[:, None, :], metric, np.inf)
    detected = np.argmin(metric, axis=2)
    # only the first trial block of a batch reports its redraws
    return int(np.count_nonzero(detected != sent)), eb * trials, redraws if b == 0 else 0


def simulate_ser(n: int, M: int, snr, trials_per_ensemble: int, ensembles: int,
                 rng: RngSpec, workers: int = 1, prune_energy: float | None = None,
                 noise_scale: float = 1.0) -> SimEstimate:
    """Ensemble-averaged ML symbol error rate by direct error counting.

    Every ensemble draws a fresh constellation; messages are uniform over the
    (surviving) points.  With ``prune_energy=E`` points whose normalized
    energy is below ``n * E`` are removed first; ensembles left with fewer
    than two points are redrawn and counted in ``extra["redraws"]``.
    ``noise_scale`` exists for zero-noise sanity checks.
    """
    _check_dims(n)
    if M < 2:
        raise ValueError("M must be >= 2")
    if trials_per_ensemble < 1 or ensembles < 1:
        raise ValueError("trial and ensemble counts must be >= 1")
    if prune_energy is not None and not prune_energy > 0:
        raise ValueError("prune_energy must be positive")
    s = _snr_value(snr)
    ens_batch, trial_block = plan_blocks(ensembles, trials_per_ensemble, M * max(1, n // 4))
    fn = partial(_ser_unit, n=n, M=M, snr=s, rng=rng, prune_energy=prune_energy,
                 noise_scale=noise_scale)
    parts = run_units(fn, iter_units(ensembles, trials_per_ensemble, ens_batch, trial_block),
                      workers)
    errors = sum(p[0] for p in parts)
    trials = sum(p[1] for p in parts)
    redraws = sum(p[2] for p in parts)
    return SimEstimate.from_counts(errors, trials, ensembles, redraws=redraws)


# -- conditional Monte Carlo ------------------------------------------------

def ncx2_cdf_small(t: np.ndarray, k: float, lam: np.ndarray) -> np.ndarray:
    """Vectorized noncentral chi-squared CDF with full relative accuracy.

    Poisson mixture of regularized lower incomplete gammas.  The gammas are
    generated by the downward recurrence
    P(a, x) = P(a + 1, x) + x^a e^(-x) / Gamma(a + 1), which only adds
    positive terms and so stays accurate when the CDF is tiny.
    """
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    half = 0.5 * lam
    x = 0.5 * t
    hmax = float(np.max(half)) if half.size else 0.0
    top = int(math.ceil(hmax + 12.0 * math.sqrt(hmax) + 30.0))
    a0 = 0.5 * k
    p = special.gammainc(a0 + top, x)
    ln_x = np.log(np.where(x > 0, x, 1.0))
    total = np.zeros_like(x)
    for idx in range(top, -1, -1):
        a = a0 + idx
        ln_w = special.xlogy(idx, half) - half - special.gammaln(idx + 1.0)
        total += np.exp(ln_w) * p
        if idx:
            # P(a - 1, x) = P(a, x) + x^(a-1) e^(-x) / Gamma(a)
            step = np.where(x > 0, np.exp((a - 1.0) * ln_x - x - special.gammaln(a)), 0.0)
            p = p + step
    return np.minimum(total, 1.0)


def _conditional_unit(unit, *, n, M, snr, rng):
    j, count = unit
    gen = substream(rng, 2, j)
    g0 = gen.standard_normal((count, n))
    z = gen.standard_normal((count, n))
    a = math.sqrt(snr)
    mu = g0 + z / a
    lam = np.einsum("ij,ij->i", mu, mu)
    t = np.einsum("ij,ij->i", z, z) / snr
    f = ncx2_cdf_small(t, n, lam)
    p = -np.expm1((M - 1) * np.log1p(-f))
    return float(np.sum(p)), float(np.sum(p * p)), count


def simulate_ser_conditional(n: int, M: int, snr, samples: int, rng: RngSpec,
                             workers: int = 1, block: int = 4096) -> SimEstimate:
    """Ensemble-averaged ML SER by conditional Monte Carlo.

    Draws the transmitted point and the noise, then integrates the ``M - 1``
    i.i.d. competitors out exactly: a competitor ``g'`` wins when
    ``||g' - y/sqrt(snr)||^2 <= ||z||^2 / snr``, a noncentral chi-squared
    event.  Each sample is a fresh constellation, so the estimate targets
    the same quantity as :func:`simulate_ser` with a relative variance that
    stays bounded as the SNR grows.
    """
    _check_dims(n)
    if M < 2:
        raise ValueError("M must be >= 2")
    if samples < 2:
        raise ValueError("need at least two samples")
    s = _snr_value(snr)
    units = [(j, min(block, samples - lo)) for j, lo in enumerate(range(0, samples, block))]
    fn = partial(_conditional_unit, n=n, M=M, snr=s, rng=rng)
    parts = run_units(fn, units, workers)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    return SimEstimate.from_moments(total, total_sq, samples)


# -- curve analysis ---------------------------------------------------------

def estimate_diversity_slope(curve) -> float:
    """Least-squares slope of log10(P) against log10(snr) over the upper half.

    ``curve`` is a sequence of ``(snr_linear, error_rate)`` pairs.  The
    returned value is negative; diversity is its magnitude.
    """
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise InsufficientDataError("need at least 4 (snr, error_rate) points")
    snr, p = pts[:, 0], pts[:, 1]
    if np.any(np.diff(snr) <= 0):
        raise InsufficientDataError("snr values must be strictly increasing")
    window = slice(pts.shape[0] - (pts.shape[0] + 1) // 2, None)
    if np.any(p[window] <= 0):
        raise InsufficientDataError("zero error rate inside the fitting window")
    slope, _ = np.polyfit(np.log10(snr[window]), np.log10(p[window]), 1)
    return float(slope)
