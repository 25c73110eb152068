"""Closed-form pairwise error probabilities, bounds and DMT curves (uncoded).

All PEP functions are ensemble averages over i.i.d. Gaussian constellation
pairs with ``n`` real receive dimensions and ``c = snr / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import specfun

__all__ = [
    "PepResult",
    "DmtPoint",
    "pep_exact",
    "pep_quadrature",
    "pep_hypergeometric",
    "pep_upper_bound",
    "union_bound_ser",
    "high_snr_ser_approx",
    "dmt_uncoded",
    "dmt_coded",
    "dmt_mimo_legacy",
]


@dataclass(frozen=True)
class PepResult:
    value: float
    method: str
    terms_used: int = 0
    abs_error: float = 0.0

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class DmtPoint:
    r: float
    d: float

    def __post_init__(self):
        if self.r < 0 or self.d < 0:
            raise ValueError(f"DMT point must satisfy r, d >= 0, got ({self.r}, {self.d})")


def _check_c(c):
    if not (c > 0 and math.isfinite(c)):
        raise ValueError(f"c must be finite and positive, got {c}")


def _check_even(n):
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f"n must be an even integer >= 2, got {n}")


def _ln_gamma_ratio(n):
    """ln[ Gamma((n+1)/2) / Gamma((n+2)/2) ]."""
    return math.lgamma(0.5 * (n + 1)) - math.lgamma(0.5 * (n + 2))


def pep_exact(c: float, n: int) -> PepResult:
    """Finite-sum closed form, evaluated in log space so large ``n`` is safe."""
    _check_c(c)
    _check_even(n)
    half = n // 2
    s = math.sqrt(c / (1.0 + c))
    # 1 - s = (1/(1+c)) / (1 + s) avoids cancellation at large c
    ln_p = math.log(0.5) - math.log1p(c) - math.log1p(s)
    ln_1mp = math.log(0.5) + math.log1p(s)
    k = np.arange(half)
    ln_binom = (np.vectorize(math.lgamma)(half + k) - math.lgamma(half)
                - np.vectorize(math.lgamma)(k + 1.0))
    terms = ln_binom + k * ln_1mp
    top = terms.max()
    ln_sum = top + math.log(np.exp(terms - top).sum())
    return PepResult(math.exp(half * ln_p + ln_sum), "closed_form", half)


def _chi2_upper_cut(n, mass=1e-14):
    """Smallest x (coarsely) with chi-squared tail mass below ``mass``."""
    x = max(2.0 * n, 10.0)
    while specfun.chi2_sf(x, n) > mass:
        x *= 1.25
    return x


def pep_quadrature(snr: float, n: int, abs_tol: float = 1e-10) -> PepResult:
    """Adaptive quadrature of E[Q(sqrt(snr X / 2))], X ~ chi-squared(n).

    Independent of the closed forms; used as their oracle.  The domain is
    truncated where the chi-squared tail mass drops below 1e-14 and split at
    the scales where the Q factor decays so the integrand is resolved at
    every SNR.
    """
    if not (snr > 0 and math.isfinite(snr)):
        raise ValueError(f"snr must be finite and positive, got {snr}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    x_max = _chi2_upper_cut(n)

    def integrand(x):
        if x == 0.0:
            return 0.5 * specfun.chi2_pdf(0.0, n) if n >= 2 else 0.0
        return specfun.q_function(math.sqrt(snr * x / 2.0)) * specfun.chi2_pdf(x, n)

    # Q(sqrt(snr x/2)) falls off on the scale x ~ 1/snr
    breaks = sorted({b for b in (0.0, *(s / snr for s in (0.5, 2.0, 8.0, 32.0, 128.0)),
                                 float(n), x_max) if 0.0 <= b <= x_max})
    total = 0.0
    err = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, e, info = integrate.quad(integrand, lo, hi, epsabs=abs_tol * 1e-3,
                                      epsrel=1e-12, limit=200, full_output=1)[:3]
        total += val
        err += e
    if err > abs_tol:
        raise specfun.ConvergenceError(f"quadrature error estimate {err:.3g} above {abs_tol}",
                                       total)
    return PepResult(total, "quadrature", 0, err)


def pep_hypergeometric(c: float, n: int,
                       control: specfun.SeriesControl = specfun.DEFAULT_CONTROL) -> PepResult:
    """Gauss-hypergeometric form with argument 1/(1+c)."""
    _check_c(c)
    _check_even(n)
    f, info = specfun.gauss_2f1(1.0, 0.5 * (n + 1), 0.5 * (n + 2), 1.0 / (1.0 + c),
                                control, full_output=True)
    ln_pref = (0.5 * math.log(c / math.pi) + _ln_gamma_ratio(n) - math.log(2.0)
               - 0.5 * (n + 1) * math.log1p(c))
    return PepResult(math.exp(ln_pref) * f, "hypergeometric", info.terms)


def pep_upper_bound(c: float, n: int) -> PepResult:
    """Closed-form upper bound on the PEP; valid in the large-``c`` regime."""
    _check_c(c)
    _check_even(n)
    ln_val = (_ln_gamma_ratio(n) - math.log(2.0 * math.sqrt(math.pi))
              - 0.5 * n * math.log1p(c))
    return PepResult(math.exp(ln_val) * (1.0 + (n + 1) / ((n + 2) * c)), "bound")


def union_bound_ser(M: int, c: float, n: int) -> float:
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if M == 1:
        return 0.0
    return min(1.0, (M - 1) * pep_upper_bound(c, n).value)


def high_snr_ser_approx(snr: float, n: int, r: float) -> float:
    """Power-law SER approximation with rate ``log M = r log snr``.

    Implements the published prefactor 2^(n/2) Gamma((n+1)/2) /
    (sqrt(pi) Gamma((n+2)/2)).  Note this is twice the high-SNR limit of
    :func:`union_bound_ser` with ``M = snr^r``, which carries 1/(2 sqrt(pi)).
    """
    if not snr > 2:
        raise ValueError(f"high-SNR approximation needs snr > 2, got {snr}")
    _check_even(n)
    if r < 0:
        raise ValueError("r must be nonnegative")
    ln_val = (0.5 * n * math.log(2.0) + _ln_gamma_ratio(n) - 0.5 * math.log(math.pi)
              - (0.5 * n - r) * math.log(snr))
    return math.exp(ln_val)


# -- diversity-multiplexing trade-off ---------------------------------------

def dmt_uncoded(n_r: float, r: float) -> DmtPoint:
    if not 0 <= r <= n_r:
        raise ValueError(f"need 0 <= r <= N_r, got r={r}, N_r={n_r}")
    return DmtPoint(r, n_r - r)


def dmt_coded(n_r: float, r: float, D: int, tau: float) -> DmtPoint:
    """Coded MBM trade-off d = D N_r - r / tau."""
    if not 0 < tau <= 1:
        raise ValueError(f"code rate must lie in (0, 1], got {tau}")
    if D < 1:
        raise ValueError(f"minimum distance must be >= 1, got {D}")
    # the endpoint r/tau = N_r is kept, as for the uncoded curve
    if not 0 <= r / tau <= n_r:
        raise ValueError(f"need 0 <= r/tau <= N_r, got r/tau={r / tau}, N_r={n_r}")
    return DmtPoint(r, D * n_r - r / tau)


def dmt_mimo_legacy(n_t: int, n_r: int, r: float) -> DmtPoint:
    """Optimal legacy MIMO trade-off: linear between (k, (N_t-k)(N_r-k))."""
    kmax = min(n_t, n_r)
    if not 0 <= r <= kmax:
        raise ValueError(f"need 0 <= r <= min(N_t, N_r) = {kmax}, got {r}")
    k = min(int(math.floor(r)), kmax - 1) if kmax > 0 else 0
    d0 = (n_t - k) * (n_r - k)
    d1 = (n_t - k - 1) * (n_r - k - 1)
    return DmtPoint(r, d0 + (r - k) * (d1 - d0))
