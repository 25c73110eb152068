"""Scalar special functions used by the analytic error expressions.

Everything here is a pure function of its arguments.  Series evaluations
accept a :class:`SeriesControl` and, with ``full_output=True``, return a
``(value, SeriesInfo)`` pair so callers can inspect how many terms were
summed and which relative tolerance was actually reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SeriesControl",
    "SeriesInfo",
    "DomainError",
    "ConvergenceError",
    "q_function",
    "ln_gamma",
    "upper_incomplete_gamma",
    "ln_upper_incomplete_gamma",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "chi2_cdf",
    "chi2_sf",
    "chi2_pdf",
    "noncentral_chi2_pdf",
    "noncentral_chi2_cdf",
    "gauss_2f1",
    "confluent_1f1",
]

_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class ConvergenceError(ArithmeticError):
    """A series or continued fraction did not converge within its budget."""

    def __init__(self, message, partial_sum=math.nan, terms=0):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


@dataclass(frozen=True)
class SeriesInfo:
    terms: int
    achieved_tol: float


DEFAULT_CONTROL = SeriesControl()


def _finite(name, x):
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")


def q_function(x: float) -> float:
    """Upper tail P(Z > x) of a standard normal variable."""
    _finite("x", x)
    # erfc keeps full relative accuracy in the far tail; underflows to 0.
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def ln_gamma(x: float) -> float:
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"ln_gamma requires finite x > 0, got {x}")
    return math.lgamma(x)


# -- incomplete gamma -------------------------------------------------------

def _gamma_series(a, x, control):
    """Lower series: returns (ln of prefactor-free sum, terms)."""
    ap = a
    term = 1.0 / a
    total = term
    for k in range(1, control.max_terms + 1):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) <= abs(total) * control.rel_tol * 0.1:
            return total, k, abs(term / total)
    raise ConvergenceError("incomplete gamma series did not converge",
                           total, control.max_terms)


def _gamma_cf(a, x, control):
    """Modified Lentz evaluation of the upper continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, control.max_terms + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= control.rel_tol * 0.1:
            return h, i, abs(delta - 1.0)
    raise ConvergenceError("incomplete gamma continued fraction did not converge",
                           h, control.max_terms)


def _check_gamma_args(a, x):
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"shape a must be finite and positive, got {a}")
    if not (x >= 0):
        raise DomainError(f"x must be nonnegative, got {x}")


def _ln_incomplete(a, x, control):
    """Return (ln lower, ln upper, info)."""
    lg = math.lgamma(a)
    if x == 0:
        return -math.inf, lg, SeriesInfo(0, 0.0)
    if math.isinf(x):
        return lg, -math.inf, SeriesInfo(0, 0.0)
    ln_pref = -x + a * math.log(x)
    if x < a + 1.0:
        s, k, tol = _gamma_series(a, x, control)
        ln_lower = ln_pref + math.log(s)
        p = math.exp(ln_lower - lg)
        ln_upper = lg + math.log1p(-p) if p < 1.0 else -math.inf
        return ln_lower, ln_upper, SeriesInfo(k, tol)
    h, k, tol = _gamma_cf(a, x, control)
    ln_upper = ln_pref + math.log(h)
    q = math.exp(ln_upper - lg)
    ln_lower = lg + math.log1p(-q) if q < 1.0 else -math.inf
    return ln_lower, ln_upper, SeriesInfo(k, tol)


def ln_upper_incomplete_gamma(a: float, x: float,
                              control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Natural log of the non-regularized upper incomplete gamma Γ(a, x)."""
    _check_gamma_args(a, x)
    return _ln_incomplete(a, x, control)[1]


def upper_incomplete_gamma(a: float, x: float,
                           control: SeriesControl = DEFAULT_CONTROL,
                           full_output: bool = False):
    """Non-regularized upper incomplete gamma, ∫_x^∞ t^(a-1) e^(-t) dt."""
    _check_gamma_args(a, x)
    _, ln_up, info = _ln_incomplete(a, x, control)
    value = math.exp(ln_up)
    return (value, info) if full_output else value


def regularized_gamma_p(a: float, x: float,
                        control: SeriesControl = DEFAULT_CONTROL) -> float:
    _check_gamma_args(a, x)
    ln_lo, _, _ = _ln_incomplete(a, x, control)
    return math.exp(ln_lo - math.lgamma(a))


def regularized_gamma_q(a: float, x: float,
                        control: SeriesControl = DEFAULT_CONTROL) -> float:
    _check_gamma_args(a, x)
    _, ln_up, _ = _ln_incomplete(a, x, control)
    return math.exp(ln_up - math.lgamma(a))


def _check_dof(k):
    if not (k >= 1 and float(k).is_integer()):
        raise DomainError(f"degrees of freedom must be a positive integer, got {k}")


def chi2_cdf(x: float, k: int, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Chi-squared CDF with ``k`` degrees of freedom."""
    _check_dof(k)
    if not x >= 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return regularized_gamma_p(0.5 * k, 0.5 * x, control)


def chi2_sf(x: float, k: int, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Chi-squared survival function, accurate when the tail is tiny."""
    _check_dof(k)
    if not x >= 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return regularized_gamma_q(0.5 * k, 0.5 * x, control)


def _chi2_pdf_positive_dof(x, k):
    # k may be any positive real here (used by the Poisson mixture)
    if x == 0:
        if k < 2:
            raise DomainError("chi-squared density is singular at x=0 for k < 2")
        return 0.5 if k == 2 else 0.0
    half = 0.5 * k
    return math.exp((half - 1.0) * math.log(x) - 0.5 * x
                    - half * math.log(2.0) - math.lgamma(half))


def chi2_pdf(x: float, k: int) -> float:
    _check_dof(k)
    if not x >= 0 or not math.isfinite(x):
        raise DomainError(f"x must be finite and nonnegative, got {x}")
    return _chi2_pdf_positive_dof(x, k)


def _poisson_mixture(fn, lam, decreasing_from, control, name):
    """Σ_i Pois(i; lam/2) fn(i).

    Summed upward from the Poisson mode and downward to zero.  Past both the
    Poisson mode and ``decreasing_from`` the terms shrink with a shrinking
    ratio, so the upward tail is bounded by a geometric series.
    """
    half = 0.5 * lam
    peak = int(half)
    ln_w0 = -half + (peak * math.log(half) if peak else 0.0) - math.lgamma(peak + 1)
    w = math.exp(ln_w0)
    prev = w * fn(peak)
    total = prev
    terms = 1
    i = peak
    achieved = math.inf
    while True:
        i += 1
        w *= half / i
        term = w * fn(i)
        total += term
        terms += 1
        if i > half and i > decreasing_from:
            if term == 0.0:
                achieved = 0.0
                break
            r = term / prev
            if r < 1.0:
                achieved = term * r / (1.0 - r) / total
                if achieved <= control.rel_tol:
                    break
        if terms >= control.max_terms:
            raise ConvergenceError(f"{name} Poisson mixture did not converge",
                                   total, terms)
        prev = term
    w = math.exp(ln_w0)
    for j in range(peak - 1, -1, -1):
        w *= (j + 1) / half
        total += w * fn(j)
        terms += 1
    return total, SeriesInfo(terms, achieved)


def noncentral_chi2_pdf(x: float, k: int, lam: float,
                        control: SeriesControl = DEFAULT_CONTROL,
                        full_output: bool = False):
    """Noncentral chi-squared density as a Poisson mixture of central densities."""
    _check_dof(k)
    if not lam >= 0 or not math.isfinite(lam):
        raise DomainError(f"noncentrality must be finite and nonnegative, got {lam}")
    if not x >= 0 or not math.isfinite(x):
        raise DomainError(f"x must be finite and nonnegative, got {x}")
    if lam == 0:
        value = chi2_pdf(x, k)
        return (value, SeriesInfo(1, 0.0)) if full_output else value
    value, info = _poisson_mixture(lambda i: _chi2_pdf_positive_dof(x, k + 2 * i),
                                   lam, 0.5 * (x - k) + 1.0, control,
                                   "noncentral chi-squared density")
    return (value, info) if full_output else value


def noncentral_chi2_cdf(x: float, k: int, lam: float,
                        control: SeriesControl = DEFAULT_CONTROL) -> float:
    _check_dof(k)
    if not lam >= 0 or not math.isfinite(lam):
        raise DomainError(f"noncentrality must be finite and nonnegative, got {lam}")
    if not x >= 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if lam == 0:
        return chi2_cdf(x, k, control)
    value, _ = _poisson_mixture(
        lambda i: regularized_gamma_p(0.5 * k + i, 0.5 * x, control),
        lam, 0, control, "noncentral chi-squared CDF")
    return value


# -- hypergeometric series --------------------------------------------------

def _sum_series(ratio, control, name):
    """Sum Σ t_k with t_0 = 1 and t_{k+1} = t_k * ratio(k).

    Stops once the geometric tail bound t_k r/(1-r) falls below
    rel_tol * |sum|, where r is the current term ratio.
    """
    term = 1.0
    total = 1.0
    for k in range(control.max_terms):
        r = ratio(k)
        term *= r
        total += term
        if term == 0.0:
            return total, SeriesInfo(k + 1, 0.0)
        r_next = abs(ratio(k + 1))
        if r_next < 1.0:
            tail = abs(term) * r_next / (1.0 - r_next)
            achieved = tail / abs(total)
            if achieved <= control.rel_tol:
                return total, SeriesInfo(k + 1, achieved)
    raise ConvergenceError(f"{name} series did not converge in {control.max_terms} terms",
                           total, control.max_terms)


def gauss_2f1(a: float, b: float, c: float, z: float,
              control: SeriesControl = DEFAULT_CONTROL, full_output: bool = False):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real 0 <= z < 1."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if not 0 <= z < 1:
        raise DomainError(f"z must lie in [0, 1), got {z}")
    if z == 0:
        return (1.0, SeriesInfo(0, 0.0)) if full_output else 1.0
    value, info = _sum_series(
        lambda k: (a + k) * (b + k) / ((c + k) * (k + 1)) * z, control, "2F1")
    return (value, info) if full_output else value


def confluent_1f1(a: float, b: float, z: float,
                  control: SeriesControl = DEFAULT_CONTROL, full_output: bool = False):
    """Kummer's confluent hypergeometric function 1F1(a; b; z)."""
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    _finite("z", z)
    if z == 0:
        return (1.0, SeriesInfo(0, 0.0)) if full_output else 1.0
    value, info = _sum_series(lambda k: (a + k) / ((b + k) * (k + 1)) * z,
                              control, "1F1")
    return (value, info) if full_output else value
