"""A length-3 Reed-Solomon code over GF(5) triples the uncoded diversity."""

import math

from mbm_dmt import (MdsCode, RngSpec, coded_union_bound_chain, coded_word_error_bound,
                     simulate_wer_conditional)

code = MdsCode.reed_solomon(5, 3, 1)
n, n_r = 4, 2
print(code.describe())
for k, db in enumerate(range(15, 36, 5)):
    snr = 10 ** (db / 10)
    c = snr / 2
    est = simulate_wer_conditional(code, n, snr, 50_000, RngSpec(9, k))
    chain = coded_union_bound_chain(code, n, c)
    r_over_tau = math.log(code.q) / math.log1p(c)
    closed = coded_word_error_bound(code.N, n_r, code.D, r_over_tau * code.rate, code.rate, c)
    print(f"{db:3d} dB  WER {est.error_rate:.3e} +- {est.ci95_halfwidth:.1e}  "
          f"chain {chain.value:.3e}  closed {closed:.3e}")
