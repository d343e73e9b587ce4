"""Ordinal-pattern estimation of Kolmogorov-Sinai entropy for interval maps."""
from .errors import InsufficientData, InvalidInput, OrdentError, UnsupportedSystem
from .ordinal import (
    D_MAX, Pattern, PatternIndex, alpha_decomposition, index_to_pattern,
    ordinal_pattern, pattern_restriction, pattern_to_index,
)
from .partition import (
    EmpiricalPartition, SymbolSequence, join, k_blocks, refines,
    shift_refinement_check, symbolize, symbolize_multi,
)
from .dynamics import (
    ObservableSpec, SystemSpec, lyapunov, noninjectivity_fraction, orbit,
    sample_invariant,
)
from .entropy import EntropyTable, entropy_rate_table, ks_table, permutation_entropy, shannon
from .cdf import (
    LevelSetForm, StepCdf, empirical_cdf, level_set_form, q_bounds,
    rank_convergence_report, rank_statistic,
)

__version__ = '0.1.0'
