"""Selection gain from pruning low-energy constellation points.

Energies are normalized (``E ||g||^2 = n``); a threshold ``E`` removes every
point with ``||g||^2 < n E``.  The removed fraction is therefore the
chi-squared lower tail ``F(nE; n)`` and the extra mirrors needed to keep the
rate are ``-log2(1 - F(nE; n))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import specfun
from .core import InsufficientDataError, simulate_ser
from .montecarlo import RngSpec, substream

__all__ = [
    "SelectionSpec",
    "SelectionReport",
    "SelectionGainResult",
    "selection_gain_analytic",
    "removed_fraction",
    "extra_mirrors",
    "selection_report",
    "pe_given_energy",
    "pe_given_energy_oracle",
    "pe_after_pruning",
    "pe_after_pruning_mc",
    "simulate_selection_gain",
    "snr_at_target",
]


@dataclass(frozen=True)
class SelectionSpec:
    E: float
    n: int

    def __post_init__(self):
        _check(self.E, self.n)


@dataclass(frozen=True)
class SelectionReport:
    gamma_c: float
    gamma_c_db: float
    removed_fraction: float
    extra_mirrors: float


def _check(E, n):
    if not (E > 0 and math.isfinite(E)):
        raise ValueError(f"energy threshold E must be finite and positive, got {E}")
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f"n must be an even integer >= 2, got {n}")


def selection_gain_analytic(E: float, n: int) -> float:
    """gamma_c = (Gamma(n/2, nE/2) / Gamma(n/2, nE))^(2/n), in log space."""
    _check(E, n)
    a = 0.5 * n
    ln_ratio = (specfun.ln_upper_incomplete_gamma(a, 0.5 * n * E)
                - specfun.ln_upper_incomplete_gamma(a, n * E))
    return math.exp(2.0 / n * ln_ratio)


def removed_fraction(E: float, n: int) -> float:
    _check(E, n)
    return specfun.chi2_cdf(n * E, n)


def extra_mirrors(E: float, n: int) -> float:
    """-log2 of the surviving fraction; log-space, so finite for any finite E."""
    _check(E, n)
    a = 0.5 * n
    ln_survive = specfun.ln_upper_incomplete_gamma(a, 0.5 * n * E) - math.lgamma(a)
    return -ln_survive / math.log(2.0)


def selection_report(E: float, n: int) -> SelectionReport:
    g = selection_gain_analytic(E, n)
    return SelectionReport(g, 10.0 * math.log10(g), removed_fraction(E, n),
                           extra_mirrors(E, n))


# -- conditional error probability given the point energy ---------------------

def pe_given_energy(lam: float, snr: float, n: int, variant: str = "final") -> float:
    """High-SNR pairwise error probability for a point of energy ``lam``.

    ``variant`` selects a stage of the approximation chain:

    * ``"onef1"`` -- Gamma((n+1)/2) / (2 sqrt(pi) Gamma((n+2)/2)) e^(-lam/2)
      (1 + snr/4)^(-n/2) 1F1((n+1)/2; (n+2)/2; lam / (2 (1 + snr/4)))
    * ``"linear"`` -- 1F1 replaced by 1 + lam / (2 (1 + snr/4)) and the gamma
      ratio by 1/sqrt(2 pi n)
    * ``"final"`` -- e^(-lam/2) (1 + snr/4)^(-n/2) / sqrt(2 pi n)
    """
    if lam < 0:
        raise ValueError("energy must be nonnegative")
    if not snr > 2:
        raise ValueError(f"high-SNR approximation needs snr > 2, got {snr}")
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    base = math.exp(-0.5 * lam - 0.5 * n * math.log1p(snr / 4.0))
    z = lam / (2.0 * (1.0 + snr / 4.0))
    if variant == "final":
        return base / math.sqrt(2.0 * math.pi * n)
    if variant == "linear":
        return base * (1.0 + z) / math.sqrt(2.0 * math.pi * n)
    if variant == "onef1":
        pref = math.exp(math.lgamma(0.5 * (n + 1)) - math.lgamma(0.5 * (n + 2))) \
            / (2.0 * math.sqrt(math.pi))
        return pref * base * specfun.confluent_1f1(0.5 * (n + 1), 0.5 * (n + 2), z)
    raise ValueError(f"unknown variant {variant!r}")


def pe_given_energy_oracle(lam: float, snr: float, n: int) -> float:
    """E[Q(sqrt(snr Z / 4))] with Z noncentral chi-squared(n, lam), by quadrature."""
    if lam < 0 or not snr > 0:
        raise ValueError("need lam >= 0 and snr > 0")

    def integrand(zv):
        if zv == 0.0:
            return 0.0 if n != 2 else 0.5 * specfun.noncentral_chi2_pdf(0.0, n, lam)
        return specfun.q_function(math.sqrt(snr * zv / 4.0)) * \
            specfun.noncentral_chi2_pdf(zv, n, lam)

    # the Q factor decays on the scale z ~ 4/snr; the density lives near n + lam
    top = n + lam + 40.0 * math.sqrt(2.0 * (n + 2.0 * lam)) + 40.0
    breaks = sorted({0.0, *(s * 4.0 / snr for s in (0.5, 2.0, 8.0, 32.0, 128.0)),
                     float(n + lam), top})
    breaks = [b for b in breaks if b <= top]
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        total += integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-11, limit=200)[0]
    return total


def pe_after_pruning(E: float, snr: float, n: int, variant: str = "final") -> float:
    """Average pairwise error after removing points with energy below ``nE``.

    ``"final"`` uses (snr/2)^(-n/2); ``"pre"`` keeps the preceding
    2^(-n/2) (1 + snr/4)^(-n/2) form.
    """
    _check(E, n)
    if not snr > 2:
        raise ValueError(f"high-SNR approximation needs snr > 2, got {snr}")
    a = 0.5 * n
    ln_ratio = (specfun.ln_upper_incomplete_gamma(a, n * E)
                - specfun.ln_upper_incomplete_gamma(a, 0.5 * n * E))
    if variant == "final":
        ln_snr = -a * math.log(snr / 2.0)
    elif variant == "pre":
        ln_snr = -a * math.log(2.0) - a * math.log1p(snr / 4.0)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return math.exp(ln_ratio + ln_snr) / math.sqrt(2.0 * math.pi * n)


def pe_after_pruning_mc(E: float, snr: float, n: int, samples: int, rng: RngSpec,
                        block: int = 1 << 16):
    """Conditional Monte Carlo of E[Q(sqrt(snr) ||h - h'|| / 2) | ||h||^2 >= nE].

    ``h`` is drawn from the pruned ensemble, the competitor ``h'`` from the
    unpruned one; the noise is integrated out through Q.  Returns
    ``(mean, ci95_halfwidth)``.
    """
    _check(E, n)
    thr = n * E
    total = total_sq = 0.0
    done = 0
    j = 0
    while done < samples:
        gen = substream(rng, 3, j)
        count = min(block, samples - done)
        # inverse-CDF sampling of the truncated energy, uniform direction
        lo = specfun.chi2_cdf(thr, n)
        u = lo + (1.0 - lo) * gen.random(count)
        lam = 2.0 * special.gammaincinv(0.5 * n, u)
        direction = gen.standard_normal((count, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        h = direction * np.sqrt(lam)[:, None]
        d = np.linalg.norm(h - gen.standard_normal((count, n)), axis=1)
        v = 0.5 * special.erfc(math.sqrt(snr) * d / 2.0 / math.sqrt(2.0))
        total += v.sum()
        total_sq += (v * v).sum()
        done += count
        j += 1
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, 1.96 * math.sqrt(var / samples)


# -- simulated selection gain ---------------------------------------------------

def snr_at_target(snr_db, ser, target: float) -> float:
    """SNR (dB) where the curve first crosses ``target``, log-log interpolated."""
    snr_db = np.asarray(snr_db, dtype=float)
    ser = np.asarray(ser, dtype=float)
    for k in range(len(ser) - 1):
        hi, lo = ser[k], ser[k + 1]
        if hi >= target > lo or hi > target >= lo:
            if lo <= 0:
                raise InsufficientDataError("zero error rate at the crossing point")
            # dB is already a log scale of snr
            x0, x1 = snr_db[k], snr_db[k + 1]
            y0, y1 = math.log10(hi), math.log10(lo)
            return float(x0 + (math.log10(target) - y0) * (x1 - x0) / (y1 - y0))
    raise InsufficientDataError(f"target {target:g} outside the simulated range "
                                f"[{ser.min():g}, {ser.max():g}]")


@dataclass(frozen=True)
class SelectionGainResult:
    gain_db: float
    ci_db: float
    snr_db: tuple
    ser_full: tuple
    ser_pruned: tuple
    ci_full: tuple = field(default=())
    ci_pruned: tuple = field(default=())
    redraws: int = 0


def _crossing_ci_db(snr_db, ser, ci, target):
    """Delta-method CI (dB) of the crossing SNR from the SER CI near the target."""
    snr_db = np.asarray(snr_db)
    ser = np.asarray(ser)
    k = int(np.argmin(np.abs(np.log10(np.maximum(ser, 1e-300)) - math.log10(target))))
    k = min(max(k, 0), len(ser) - 2)
    slope = (math.log10(max(ser[k + 1], 1e-300)) - math.log10(max(ser[k], 1e-300))) \
        / ((snr_db[k + 1] - snr_db[k]) / 10.0)
    if slope == 0:
        return math.inf
    k_near = int(np.argmin(np.abs(ser - target)))
    rel = ci[k_near] / max(ser[k_near], 1e-300)
    return abs(10.0 * math.log10(1.0 + rel) / slope)


def simulate_selection_gain(n: int, M: int, E: float, target_ser: float, snr_grid_db,
                            trials: int, ensembles: int, rng: RngSpec,
                            workers: int = 1) -> SelectionGainResult:
    """Simulated SNR saving (dB) at ``target_ser`` from pruning below ``nE``.

    Both curves keep ``M`` drawn points; the pruned one sends uniformly over
    the survivors.  Each SNR point uses its own substream.
    """
    _check(E, n)
    grid = [float(s) for s in snr_grid_db]
    full, pruned, cf, cp = [], [], [], []
    redraws = 0
    for k, sdb in enumerate(grid):
        snr = 10.0 ** (sdb / 10.0)
        a = simulate_ser(n, M, snr, trials, ensembles, rng.child(2 * k), workers)
        b = simulate_ser(n, M, snr, trials, ensembles, rng.child(2 * k + 1), workers,
                         prune_energy=E)
        full.append(a.error_rate)
        cf.append(a.ci95_halfwidth)
        pruned.append(b.error_rate)
        cp.append(b.ci95_halfwidth)
        redraws += b.extra.get("redraws", 0)
    s_full = snr_at_target(grid, full, target_ser)
    s_pruned = snr_at_target(grid, pruned, target_ser)
    ci = math.hypot(_crossing_ci_db(grid, full, cf, target_ser),
                    _crossing_ci_db(grid, pruned, cp, target_ser))
    return SelectionGainResult(s_full - s_pruned, ci, tuple(grid), tuple(full),
                               tuple(pruned), tuple(cf), tuple(cp), redraws)
