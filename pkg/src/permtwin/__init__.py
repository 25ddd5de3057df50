"""Twins in permutations: exact and heuristic finders, bound certificates and
reproducible Monte Carlo trials."""
__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .bounds import (
    DEFAULT_SCHEDULE,
    VARIANT_SCHEDULE,
    CertificateReport,
    CertificateRow,
    Schedule,
    ScheduleError,
    block_lll_n,
    count_avoiders,
    edge_distribution,
    edge_prob,
    gawron_first_moment,
    lll_symmetric_block,
    lll_tight_certificate,
    tau_first_moment,
    tight_event_prob,
)
from .exact import (
    BlockTwins,
    CostGuardError,
    SearchStatus,
    TightScanReport,
    TwinSearchResult,
    contains_pattern,
    exact_block_twins,
    exact_twins,
    exact_twins_avoiding,
    extremal_search,
    oracle_twins_3color,
    tight_block_scan,
    tight_twins_scan,
    tight_window_split,
)
from .experiments import (
    ExperimentConfig,
    TrialRecord,
    fit_loglog,
    pigeonhole_block_finder,
    run_trials,
    theory_ratio_bt,
    write_csv,
)
from .heuristic import (
    BipartiteBlockGraph,
    MatchingStrategy,
    build_block_graph,
    default_block_size,
    es_split_twins,
    match_block_graph,
    matching_twins,
)
from .perm import (
    MonotoneRun,
    PatternKey,
    Permutation,
    PermutationError,
    Symmetry,
    TwinPair,
    apply_symmetry,
    derive_seed,
    is_similar,
    longest_monotone,
    parse_permutation,
    pattern_key,
    random_permutation,
    verify_twin_pair,
)
