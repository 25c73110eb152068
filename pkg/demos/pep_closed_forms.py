"""Pairwise error probability: three closed forms and the Chernoff-style bound."""

from mbm_dmt import pep_exact, pep_hypergeometric, pep_quadrature, pep_upper_bound

print(f"{'c':>8} {'n':>3} {'exact':>12} {'2F1':>12} {'quadrature':>12} {'bound':>12}")
for n in (2, 4, 8):
    for c in (0.5, 5.0, 50.0, 500.0):
        print(f"{c:8g} {n:3d} {pep_exact(c, n).value:12.5e} "
              f"{pep_hypergeometric(c, n).value:12.5e} "
              f"{pep_quadrature(2 * c, n).value:12.5e} {pep_upper_bound(c, n).value:12.5e}")
