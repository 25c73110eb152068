"""Fast invariant checks backing the ``selfcheck`` subcommand."""

from __future__ import annotations

import itertools
import math

from . import specfun
from .analysis import (dmt_coded, dmt_mimo_legacy, dmt_uncoded, pep_exact,
                       pep_hypergeometric, pep_quadrature, pep_upper_bound)
from .gf import (Field, MdsCode, check_information_sets, count_support_subset,
                 min_distance_exhaustive)
from .selection import pe_given_energy, pe_given_energy_oracle, selection_gain_analytic

C_GRID = (0.1, 0.5, 1.0, 5.0, 10.0, 100.0, 1000.0)
N_GRID = (2, 4, 8, 16, 32)


def _pep_equivalence():
    worst = 0.0
    for c, n in itertools.product(C_GRID, N_GRID):
        a = pep_exact(c, n).value
        worst = max(worst, abs(a - pep_hypergeometric(c, n).value),
                    abs(a - pep_quadrature(2.0 * c, n).value))
    return worst <= 1e-8, f"max |diff| = {worst:.3g}"


def _bound_dominance():
    bad = [(c, n) for c, n in itertools.product(C_GRID, N_GRID)
           if c >= 0.5 and pep_upper_bound(c, n).value < pep_exact(c, n).value]
    return not bad, f"violations: {bad}" if bad else "c >= 0.5 grid"


def _special_functions():
    errs = []
    for x in (0.0, 0.3, 1.7, 5.0):
        errs.append(abs(specfun.q_function(x) + specfun.q_function(-x) - 1.0))
    for a in (0.5, 1.0, 3.5, 10.0):
        errs.append(abs(specfun.upper_incomplete_gamma(a, 0.0) / math.gamma(a) - 1.0))
    # the lambda = 0 noncentral density is the central one
    for x, k in ((0.7, 2), (3.0, 4), (9.0, 8)):
        errs.append(abs(specfun.noncentral_chi2_pdf(x, k, 0.0) - specfun.chi2_pdf(x, k)))
    worst = max(errs)
    return worst <= 1e-12, f"max deviation {worst:.3g}"


def _field_axioms():
    for q in (2, 3, 4, 5, 7, 8, 9, 16):
        F = Field.of_order(q)
        for a, b in itertools.product(range(q), repeat=2):
            if F.add(a, b) != F.add(b, a) or F.mul(a, b) != F.mul(b, a):
                return False, f"commutativity fails in GF({q})"
            if F.add(a, F.neg(a)) != 0:
                return False, f"additive inverse fails in GF({q})"
            for c in range(q):
                if F.mul(a, F.add(b, c)) != F.add(F.mul(a, b), F.mul(a, c)):
                    return False, f"distributivity fails in GF({q})"
        for a in range(1, q):
            if F.mul(a, F.inv(a)) != 1:
                return False, f"inverse fails in GF({q})"
    return True, "GF(q), q in {2,3,4,5,7,8,9,16}"


def _mds_structure():
    code = MdsCode.reed_solomon(5, 4, 2)
    dmin = min_distance_exhaustive(code)
    if dmin != code.D:
        return False, f"min distance {dmin} != {code.D}"
    for size in range(1, code.N + 1):
        for I in itertools.combinations(range(code.N), size):
            if count_support_subset(code, I) > code.q ** (size - code.D + 1):
                return False, f"|Delta({I})| exceeds its bound"
    if not check_information_sets(code):
        return False, "some K positions are not an information set"
    return True, "RS(4,2) over GF(5)"


def _selection_identity():
    worst = max(abs(selection_gain_analytic(E, 2) / math.exp(E) - 1.0)
                for E in (0.1, 0.5, 1.0, 2.0, 4.0))
    return worst <= 1e-12, f"max rel. deviation {worst:.3g}"


def _appendix_chain():
    worst = 1.0
    for snr, n, lam in itertools.product((100.0, 1000.0), (2, 4, 8), (0.0, 1.0, 4.0, 8.0)):
        ratio = pe_given_energy(lam, snr, n) / pe_given_energy_oracle(lam, snr, n)
        worst = max(worst, ratio, 1.0 / ratio)
    return worst <= 1.5, f"worst ratio {worst:.3f}"


def _dmt_curves():
    for k in range(0, 9):
        if dmt_mimo_legacy(8, 8, k).d != (8 - k) ** 2:
            return False, f"MIMO corner at k={k}"
    if dmt_uncoded(4, 1.5).d != 2.5 or dmt_coded(1, 0.25, 8, 0.5).d != 7.5:
        return False, "coded/uncoded formula"
    return True, "corners and formulas"


CHECKS = (
    ("pep closed forms agree", _pep_equivalence),
    ("pep bound dominates", _bound_dominance),
    ("special-function identities", _special_functions),
    ("finite-field axioms", _field_axioms),
    ("MDS support counts", _mds_structure),
    ("selection gain at n=2", _selection_identity),
    ("energy-conditioned error chain", _appendix_chain),
    ("DMT curves", _dmt_curves),
)


def run_selfcheck(stream) -> bool:
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        stream.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    return ok_all
