"""Diversity-multiplexing curves for uncoded MBM, coded MBM and legacy MIMO."""

from mbm_dmt import dmt_coded, dmt_mimo_legacy, dmt_uncoded

n_r, D, tau = 8, 8, 57 / 64
print(f"{'r':>5} {'uncoded':>8} {'coded':>8} {'mimo':>8}")
for k in range(0, 33):
    r = k / 4
    coded = dmt_coded(n_r, r, D, tau).d if r / tau <= n_r else float("nan")
    print(f"{r:5.2f} {dmt_uncoded(n_r, r).d:8.3f} {coded:8.3f} {dmt_mimo_legacy(8, n_r, r).d:8.3f}")
