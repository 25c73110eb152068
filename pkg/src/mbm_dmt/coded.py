"""Coded MBM: MDS codewords sent as sequences of constellation points.

Coordinate ``i`` of a codeword selects a point from the ``i``-th block of
``q`` constellation rows, so identical symbols in different coordinates
land on different points.  Decoding is exhaustive ML over the codebook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .analysis import pep_exact
from .core import Constellation, _snr_value, ncx2_cdf_small
from .gf import ENUMERATION_BUDGET, MdsCode, codebook, next_prime_power
from .montecarlo import RngSpec, SimEstimate, iter_units, plan_blocks, run_units, substream

__all__ = [
    "CodedMapper",
    "CodedFrame",
    "ChainBound",
    "build_mapper",
    "encode_frame",
    "ml_decode_coded",
    "simulate_wer",
    "simulate_wer_conditional",
    "coded_word_error_bound",
    "coded_union_bound_chain",
    "field_size_rule",
]


@dataclass(frozen=True, eq=False)
class CodedMapper:
    constellation: Constellation
    N: int
    q: int

    def rows(self, codeword) -> np.ndarray:
        """Constellation row used by every coordinate of ``codeword``."""
        u = np.asarray(codeword, dtype=np.int64)
        return np.arange(self.N) * self.q + u

    def block(self, i: int) -> range:
        return range(i * self.q, (i + 1) * self.q)

    def points(self, codeword) -> np.ndarray:
        return self.constellation.gains[self.rows(codeword)]


@dataclass(frozen=True, eq=False)
class CodedFrame:
    codeword: np.ndarray
    mapped: np.ndarray
    received: np.ndarray


def build_mapper(const: Constellation, code: MdsCode) -> CodedMapper:
    if const.m_count < code.N * code.q:
        raise ValueError(f"constellation has {const.m_count} points, coded mapping "
                         f"needs at least N*q = {code.N * code.q}")
    return CodedMapper(const, code.N, code.q)


def encode_frame(mapper: CodedMapper, codeword, snr, rng: np.random.Generator,
                 noise_scale: float = 1.0) -> CodedFrame:
    mapped = mapper.points(codeword)
    y = math.sqrt(_snr_value(snr)) * mapped + noise_scale * rng.standard_normal(mapped.shape)
    return CodedFrame(np.asarray(codeword), mapped, y)


def _block_distances(y, gains, N, q, a):
    """d[..., i, v] = ||y_i - a g_{iq+v}||^2 for y of shape (..., N, n)."""
    pts = a * gains[..., : N * q, :].reshape(gains.shape[:-2] + (N, q, gains.shape[-1]))
    if pts.ndim == 3:
        diff = y[..., :, None, :] - pts
    else:
        diff = y[..., :, None, :] - pts[:, None]
    return np.einsum("...k,...k->...", diff, diff)


def ml_decode_coded(mapper: CodedMapper, code: MdsCode, y, snr,
                    budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """Exhaustive ML codeword; ties resolve to the lexicographically smallest."""
    words = codebook(code, budget)
    y = np.asarray(y, dtype=float)
    if y.shape != (code.N, mapper.constellation.dims):
        raise ValueError(f"received frame must have shape {(code.N, mapper.constellation.dims)}")
    d = _block_distances(y, mapper.constellation.gains, code.N, code.q,
                         math.sqrt(_snr_value(snr)))
    metric = d[np.arange(code.N), words].sum(axis=1)
    return words[int(np.argmin(metric))].copy()


def _wer_unit(unit, *, code, words, n, snr, rng, noise_scale):
    j, lo, hi, b, trials = unit
    eb = hi - lo
    N, q = code.N, code.q
    g = substream(rng, 0, j).standard_normal((eb, N * q, n))
    gen = substream(rng, 1, j, b)
    sent = gen.integers(0, words.shape[0], size=(eb, trials))
    rows = np.arange(N) * q + words[sent]                      # (eb, T, N)
    tx = np.take_along_axis(g[:, None], rows[..., None], axis=2)  # (eb, T, N, n)
    a = math.sqrt(snr)
    y = a * tx + noise_scale * gen.standard_normal(tx.shape)
    d = _block_distances(y, g, N, q, a)                        # (eb, T, N, q)
    metric = np.zeros((eb, trials, words.shape[0]))
    for i in range(N):
        metric += d[:, :, i, words[:, i]]
    decoded = np.argmin(metric, axis=2)
    return int(np.count_nonzero(decoded != sent)), eb * trials


def simulate_wer(code: MdsCode, n: int, snr, trials: int, ensembles: int, rng: RngSpec,
                 workers: int = 1, noise_scale: float = 1.0,
                 budget: int = ENUMERATION_BUDGET) -> SimEstimate:
    """Word error rate of exhaustive ML decoding, by direct counting.

    Each ensemble draws a fresh ``N q``-point constellation that stays fixed
    for all words in that ensemble; codewords are uniform.
    """
    words = codebook(code, budget)
    s = _snr_value(snr)
    if trials < 1 or ensembles < 1:
        raise ValueError("trial and ensemble counts must be >= 1")
    per_trial = words.shape[0] + code.N * code.q
    ens_batch, trial_block = plan_blocks(ensembles, trials, per_trial)
    fn = partial(_wer_unit, code=code, words=words, n=n, snr=s, rng=rng,
                 noise_scale=noise_scale)
    parts = run_units(fn, iter_units(ensembles, trials, ens_batch, trial_block), workers)
    return SimEstimate.from_counts(sum(p[0] for p in parts), sum(p[1] for p in parts),
                                   ensembles)


def _conditional_wer_unit(unit, *, dims, competitors, snr, rng):
    j, count = unit
    gen = substream(rng, 2, j)
    g0 = gen.standard_normal((count, dims))
    z = gen.standard_normal((count, dims))
    a = math.sqrt(snr)
    mu = g0 + z / a
    f = ncx2_cdf_small(np.einsum("ij,ij->i", z, z) / snr, dims,
                       np.einsum("ij,ij->i", mu, mu))
    p = -np.expm1(competitors * np.log1p(-f))
    return float(p.sum()), float((p * p).sum())


def simulate_wer_conditional(code: MdsCode, n: int, snr, samples: int, rng: RngSpec,
                             workers: int = 1, block: int = 4096) -> SimEstimate:
    """Conditional Monte Carlo WER for codes whose distinct words differ everywhere.

    When ``D = N`` (``K = 1``) every pair of codewords disagrees in all
    coordinates, so the images of the ``q^K - 1`` competitors use disjoint
    constellation rows and are i.i.d. Gaussian in ``n N`` dimensions.  The
    competitors are then integrated out exactly given the sent frame and the
    noise, exactly as for the uncoded conditional SER estimator.
    """
    if code.D != code.N:
        raise ValueError("conditional WER estimator requires D = N (K = 1)")
    s = _snr_value(snr)
    units = [(j, min(block, samples - lo)) for j, lo in enumerate(range(0, samples, block))]
    fn = partial(_conditional_wer_unit, dims=n * code.N, competitors=code.size - 1,
                 snr=s, rng=rng)
    parts = run_units(fn, units, workers)
    return SimEstimate.from_moments(sum(p[0] for p in parts), sum(p[1] for p in parts),
                                    samples)


# -- analytic word-error bounds ---------------------------------------------

def coded_word_error_bound(N: int, n_r: float, D: int, r: float, tau: float,
                           c: float) -> float:
    """P_w <= 2^N / sqrt(2 pi N_r) (1 + c)^-(D N_r - r/tau), clamped to 1."""
    if not 0 < tau <= 1:
        raise ValueError("code rate tau must lie in (0, 1]")
    if not 0 <= r / tau < n_r:
        raise ValueError(f"need 0 <= r/tau < N_r, got {r / tau}")
    if not c > 0 or D < 1 or N < D:
        raise ValueError("need c > 0 and 1 <= D <= N")
    ln_val = N * math.log(2.0) - 0.5 * math.log(2.0 * math.pi * n_r) \
        - (D * n_r - r / tau) * math.log1p(c)
    return min(1.0, math.exp(ln_val))


@dataclass(frozen=True)
class ChainBound:
    value: float
    dominant: bool

    def __float__(self):
        return self.value


def coded_union_bound_chain(code: MdsCode, n: int, c: float) -> ChainBound:
    """sum_{i=D}^N C(N, i) q^(i-D+1) PEP(c, n i), with exact PEPs.

    ``dominant`` is False when q >= (1+c)^(n/2), i.e. outside the regime in
    which the i = D term dominates and the looser closed form follows.
    """
    N, D, q = code.N, code.D, code.q
    total = 0.0
    for i in range(D, N + 1):
        total += math.comb(N, i) * float(q) ** (i - D + 1) * pep_exact(c, n * i).value
    dominant = math.log(q) < 0.5 * n * math.log1p(c)
    return ChainBound(min(total, 1.0), dominant)


def field_size_rule(r: float, tau: float, snr: float):
    """Field size for rate ``r``: (smallest prime power >= q_real, q_real)."""
    if not 0 < tau <= 1:
        raise ValueError("code rate tau must lie in (0, 1]")
    if r < 0:
        raise ValueError("r must be nonnegative")
    q_real = (1.0 + snr / 2.0) ** (r / tau)
    return next_prime_power(max(2.0, q_real)), q_real
