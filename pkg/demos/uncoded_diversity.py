"""Uncoded SER slope with a fixed and a snr-scaled constellation size."""

from mbm_dmt import (RngSpec, estimate_diversity_slope, rate_schedule,
                     simulate_ser_conditional, union_bound_ser)

n = 8
grid = [10 ** (db / 10) for db in range(15, 36, 4)]
for r in (0.0, 1.0):
    curve = []
    for k, snr in enumerate(grid):
        M = 4 if r == 0 else rate_schedule(snr, r)
        est = simulate_ser_conditional(n, M, snr, 50_000, RngSpec(3, 10 * int(r) + k))
        curve.append((snr, est.error_rate))
        print(f"r={r:g} snr={snr:9.1f} M={M:5d} SER={est.error_rate:.3e} "
              f"union={union_bound_ser(M, snr / 2, n):.3e}")
    print(f"r={r:g} fitted slope {estimate_diversity_slope(curve):.2f}, "
          f"expected {-(n // 2 - r):g}\n")
