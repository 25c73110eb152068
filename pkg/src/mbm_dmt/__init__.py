"""Media-based modulation over Rayleigh channels: error analysis and simulation.

Submodules:

* :mod:`~mbm_dmt.specfun` -- incomplete gamma, chi-squared, hypergeometric series
* :mod:`~mbm_dmt.core` -- random constellations, ML detection, SER simulation
* :mod:`~mbm_dmt.analysis` -- pairwise error probabilities, bounds, DMT curves
* :mod:`~mbm_dmt.gf` -- finite fields and Reed-Solomon (MDS) codes
* :mod:`~mbm_dmt.coded` -- coded MBM mapping, decoding, word-error bounds
* :mod:`~mbm_dmt.selection` -- constellation pruning and selection gain
"""

__version__ = "0.1.0"

from .analysis import (DmtPoint, PepResult, dmt_coded, dmt_mimo_legacy, dmt_uncoded,
                       high_snr_ser_approx, pep_exact, pep_hypergeometric, pep_quadrature,
                       pep_upper_bound, union_bound_ser)
from .coded import (ChainBound, CodedFrame, CodedMapper, build_mapper,
                    coded_union_bound_chain, coded_word_error_bound, encode_frame,
                    field_size_rule, simulate_wer, simulate_wer_conditional)
from .core import (Constellation, InsufficientDataError, SnrSpec, db_to_linear,
                   estimate_diversity_slope, linear_to_db, ml_detect, rate_schedule,
                   sample_constellation, simulate_ser, simulate_ser_conditional, transmit)
from .gf import (BudgetError, Field, MdsCode, check_information_sets, codebook,
                 count_support_subset, min_distance_exhaustive, rs_encode)
from .montecarlo import RngSpec, SimEstimate
from .selection import (SelectionGainResult, SelectionReport, SelectionSpec, extra_mirrors,
                        pe_after_pruning, pe_after_pruning_mc, pe_given_energy,
                        pe_given_energy_oracle, removed_fraction, selection_gain_analytic,
                        selection_report, simulate_selection_gain)
from .specfun import ConvergenceError, DomainError, SeriesControl
