"""End-to-end acceptance checks, one test per criterion.

Each test reports a single PASS/FAIL line (collected in the terminal
summary) before asserting, so a failing criterion still shows its numbers.
"""

import io
import itertools
import math
import time
from fractions import Fraction

import numpy as np

from mbm_dmt import (MdsCode, RngSpec, coded_word_error_bound, count_support_subset,
                     dmt_coded, dmt_mimo_legacy, dmt_uncoded, estimate_diversity_slope,
                     min_distance_exhaustive, pe_given_energy, pe_given_energy_oracle,
                     pep_exact, pep_hypergeometric, pep_quadrature, pep_upper_bound,
                     rate_schedule, selection_gain_analytic, simulate_selection_gain,
                     simulate_ser, simulate_ser_conditional, simulate_wer_conditional,
                     union_bound_ser)
from mbm_dmt.cli import run

C_GRID = (0.1, 0.5, 1.0, 5.0, 10.0, 100.0, 1000.0)
N_GRID = (2, 4, 8, 16, 32)


def db_grid(lo, hi, step):
    return [lo + k * step for k in range(int(round((hi - lo) / step)) + 1)]


def test_closed_form_equivalence(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for c, n in itertools.product(C_GRID, N_GRID):
        a = pep_exact(c, n).value
        worst = max(worst, abs(a - pep_hypergeometric(c, n).value),
                    abs(a - pep_quadrature(2 * c, n).value))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 1.0
    criterion(1, ok, f"max |diff| {worst:.2e} (<= 1e-8), {elapsed:.2f} s (< 1 s)")
    assert ok


def test_bound_dominance(criterion):
    t0 = time.perf_counter()
    bad = [(c, n) for c, n in itertools.product(C_GRID, N_GRID)
           if c >= 0.5 and pep_upper_bound(c, n).value < pep_exact(c, n).value]
    # 10^6 trials in each of 20 ensembles; each ensemble has its own stream so
    # the spread across constellations enters the standard error
    M, n, trials, ensembles = 16, 8, 10 ** 6, 20
    rows = []
    for k, snr in enumerate((20.0, 50.0, 100.0)):
        per = np.array([simulate_ser(n, M, snr, trials, 1, RngSpec(2024, 100 * k + e))
                        .error_rate for e in range(ensembles)])
        ser = per.mean()
        sigma = max(per.std(ddof=1) / math.sqrt(ensembles),
                    math.sqrt(ser * (1 - ser) / (trials * ensembles)))
        ub = union_bound_ser(M, snr / 2, n)
        rows.append((snr, ser, sigma, ub, ser - 3 * sigma <= ub))
    elapsed = time.perf_counter() - t0
    ok = not bad and all(r[-1] for r in rows) and elapsed < 300
    detail = "; ".join(f"snr={s:g}: SER {p:.3e}+-{3 * sg:.1e} vs UB {u:.3e}"
                       for s, p, sg, u, _ in rows)
    criterion(2, ok, f"PEP bound violations {len(bad)}; {detail}; {elapsed:.0f} s (< 300 s)")
    assert ok


def _slope(M_of_snr, seed, samples=200_000):
    curve = []
    for k, sdb in enumerate(db_grid(15, 35, 2)):
        snr = 10 ** (sdb / 10)
        est = simulate_ser_conditional(8, M_of_snr(snr), snr, samples, RngSpec(seed, k))
        curve.append((snr, est.error_rate))
    return estimate_diversity_slope(curve)


def test_uncoded_diversity_slope(criterion):
    fixed = _slope(lambda s: 4, 31)
    scaled = _slope(lambda s: rate_schedule(s, 1.0), 32)
    ok = abs(fixed + 4.0) <= 0.5 and abs(scaled + 3.0) <= 0.7
    criterion(3, ok, f"M=4 slope {fixed:.3f} (-4 +- 0.5); M=round(snr) slope {scaled:.3f} "
                     f"(-3 +- 0.7)")
    assert ok


def test_coded_diversity(criterion):
    t0 = time.perf_counter()
    code = MdsCode.reed_solomon(5, 3, 1)
    n, n_r = 4, 2
    curve, checks = [], []
    for k, sdb in enumerate(db_grid(15, 35, 2)):
        snr = 10 ** (sdb / 10)
        c = snr / 2
        est = simulate_wer_conditional(code, n, snr, 100_000, RngSpec(4040, k))
        r_over_tau = math.log(code.q) / math.log1p(c)
        bound = coded_word_error_bound(code.N, n_r, code.D, r_over_tau * code.rate,
                                       code.rate, c)
        checks.append(est.error_rate - est.ci95_halfwidth <= bound)
        curve.append((snr, est.error_rate))
    top = np.array([p for p in curve if p[0] >= 10 ** 2.5])   # top decade: 25-35 dB
    slope = np.polyfit(np.log10(top[:, 0]), np.log10(top[:, 1]), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = abs(slope + 6.0) <= 0.75 and all(checks) and elapsed < 600
    criterion(4, ok, f"WER slope {slope:.3f} (-6 +- 0.75); WER <= bound at "
                     f"{sum(checks)}/{len(checks)} points; {elapsed:.1f} s (< 600 s)")
    assert ok


def test_mds_structure(criterion):
    t0 = time.perf_counter()
    code = MdsCode.reed_solomon(5, 4, 2)
    dmin = min_distance_exhaustive(code)
    violations = 0
    subsets = 0
    for size in range(1, code.N + 1):
        for I in itertools.combinations(range(code.N), size):
            subsets += 1
            bound = Fraction(code.q) ** (size - code.D + 1)
            if count_support_subset(code, I) > bound:
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = dmin == 3 and subsets == 15 and violations == 0 and elapsed < 1.0
    criterion(5, ok, f"min distance {dmin}; {violations} violations over {subsets} subsets; "
                     f"{elapsed:.3f} s (< 1 s)")
    assert ok


def test_dmt_table(criterion):
    out = io.StringIO()
    assert run(["dmt", "--nr", "8", "--nt", "8", "--code", "64,57,64", "--r-step", "0.125"],
               stdout=out) == 0
    lines = [l for l in out.getvalue().splitlines() if not l.startswith("#")]
    rows = [dict(zip(lines[0].split(","), l.split(","))) for l in lines[1:]]
    N_r, D, tau = 8, 8, Fraction(57, 64)
    mismatches, dominated = 0, 0
    for row in rows:
        r = Fraction(row["r"])
        d_unc = dmt_uncoded(N_r, r).d
        d_mimo = dmt_mimo_legacy(8, N_r, r).d
        k = min(int(r), 7)
        corner = Fraction((8 - k) * (N_r - k))
        exp_mimo = corner + (r - k) * (Fraction((7 - k) * (N_r - k - 1)) - corner)
        mismatches += d_unc != N_r - r or d_mimo != exp_mimo
        mismatches += row["d_uncoded"] != format(float(N_r - r), ".9g")
        mismatches += row["d_mimo"] != format(float(exp_mimo), ".9g")
        if r / tau <= N_r:
            d_cod = dmt_coded(N_r, r, D, tau).d
            mismatches += d_cod != D * N_r - r / tau
            mismatches += row["d_coded"] != format(float(D * N_r - r / tau), ".9g")
            if r <= 7:
                # equality only at r = 0, where both curves sit at D N_r = N_t N_r
                dominated += not (d_cod > d_mimo or (r == 0 and d_cod == d_mimo))
        else:
            mismatches += row["d_coded"] != "nan"
    ok = mismatches == 0 and dominated == 0 and len(rows) == 65
    criterion(6, ok, f"{len(rows)} rows, {mismatches} formula mismatches, "
                     f"{dominated} points where MIMO is not dominated on [0, 7]")
    assert ok


# constellation size and grid for the selection-gain run; the finite-snr excess
# of the simulated gain over the asymptotic value shrinks as M grows
SELECTION_M = 512
SELECTION_GRID = [23, 24, 25, 26, 27, 28, 29]


def test_selection_gain(criterion):
    t0 = time.perf_counter()
    identity = max(abs(selection_gain_analytic(E, 2) / math.exp(E) - 1)
                   for E in (0.1, 0.5, 1.0, 2.0, 5.0))
    target = 10 * math.log10(math.sqrt(3 * math.exp(-2) / (5 * math.exp(-4))))
    res = simulate_selection_gain(4, SELECTION_M, 1.0, 1e-3, SELECTION_GRID, 8, 100_000,
                                  RngSpec(11))
    elapsed = time.perf_counter() - t0
    ok = abs(res.gain_db - target) <= 0.5 and identity <= 1e-12 and elapsed < 600
    criterion(7, ok, f"simulated gain {res.gain_db:.2f} +- {res.ci_db:.2f} dB vs "
                     f"{target:.2f} dB (+- 0.5) at M={SELECTION_M}; n=2 identity error "
                     f"{identity:.1e}; {elapsed:.0f} s (< 600 s)")
    assert ok


def test_appendix_chain(criterion):
    worst = 1.0
    for snr, n, lam in itertools.product((100.0, 1e3, 1e4), (2, 4, 8), (0.0, 1.0, 4.0, 8.0)):
        ratio = pe_given_energy(lam, snr, n) / pe_given_energy_oracle(lam, snr, n)
        worst = max(worst, ratio, 1 / ratio)
    red = 0.0
    for snr, n in itertools.product((100.0, 1e3, 1e4), (2, 4, 8)):
        closed = (1 + snr / 4) ** (-n / 2) / math.sqrt(2 * math.pi * n)
        red = max(red, abs(pe_given_energy(0.0, snr, n) - closed),
                  abs(pe_given_energy_oracle(0.0, snr, n) - pep_quadrature(snr / 2, n).value))
    ok = worst <= 1.5 and red <= 1e-9
    criterion(8, ok, f"worst ratio to oracle {worst:.3f} (<= 1.5); lambda=0 reduction error "
                     f"{red:.1e} (<= 1e-9)")
    assert ok


REPRO_RUNS = [
    ["pep", "--nr", "3", "--snr-db-from", "-5", "--snr-db-to", "30", "--snr-db-step", "2.5"],
    ["uncoded", "--nr", "2", "--m", "16", "--trials", "2000", "--ensembles", "40",
     "--snr-db-from", "0", "--snr-db-to", "12", "--snr-db-step", "3", "--seed", "5"],
    ["uncoded", "--nr", "4", "--rate-sweep", "0,1", "--estimator", "conditional",
     "--trials", "2000", "--ensembles", "10", "--snr-db-from", "15", "--snr-db-to", "35",
     "--snr-db-step", "5", "--seed", "6"],
    ["coded", "--code", "4,2,5", "--estimator", "direct", "--trials", "200",
     "--ensembles", "20", "--snr-db-from", "0", "--snr-db-to", "6", "--snr-db-step", "3"],
    ["coded", "--snr-db-from", "15", "--snr-db-to", "30", "--snr-db-step", "5",
     "--trials", "500", "--ensembles", "20", "--seed", "8"],
    ["selection", "--simulate", "1", "--energy-e", "0.5,1", "--m", "16", "--trials", "4",
     "--ensembles", "3000", "--target-ser", "1e-2", "--snr-db-from", "6", "--snr-db-to", "22",
     "--snr-db-step", "2"],
    ["dmt", "--nr", "4", "--code", "8,4,8"],
]


def test_reproducibility(criterion, tmp_path):
    mismatched = []
    files = 0
    for k, argv in enumerate(REPRO_RUNS):
        first = tmp_path / f"run{k}.csv"
        assert run(argv + ["--out", str(first)]) == 0
        originals = sorted(tmp_path.glob(f"run{k}*.csv"))
        for workers in (1, 8):
            again = tmp_path / f"re{k}_{workers}.csv"
            assert run([argv[0], "--config", str(first), "--out", str(again),
                        "--workers", str(workers)]) == 0
            for orig in originals:
                copy = again.with_name(again.stem + orig.stem[len(first.stem):] + ".csv")
                files += 1
                if copy.read_bytes() != orig.read_bytes():
                    mismatched.append((argv[0], workers, orig.name))
    ok = not mismatched
    criterion(9, ok, f"{files} regenerated files byte-compared at workers 1 and 8, "
                     f"{len(mismatched)} mismatches")
    assert ok
