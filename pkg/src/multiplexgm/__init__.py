"""Multiplex graph matching: padded Frank-Wolfe solver (M-FAQ), the
random-restart matched filter (M-GMMF), random multiplex generators and a
matchability lab."""

from .assignment import (
    assignment_value,
    complete_rectangular,
    solve_lap_max,
    solve_lap_max_constrained,
)
from .errors import *  # noqa: F401,F403
from .faq import (
    SeedSpec,
    SolverConfig,
    SolveTrace,
    flat_start,
    gradient,
    is_doubly_stochastic,
    line_search_alpha,
    mfaq,
    random_ds_start,
    relaxed_objective,
    seeded_start,
    sinkhorn,
    soft_seed_start,
    trace_objective,
)
from .generators import (
    CorrelatedErSpec,
    ErrorFilter,
    MeModelSpec,
    MsModelSpec,
    apply_error_channel,
    gen_correlated_er_pair,
    gen_me_instance,
    gen_ms_instance,
    plant_template,
    shuffle_background,
)
from .io import read_mx, read_truth, write_mx, write_truth
from .matched_filter import (
    MatchEntry,
    MatchRanking,
    dedup_matchings,
    induced_match_quality,
    mgmmf,
    recovered_signal_stats,
)
from .multiplex import (
    CENTERED,
    NAIVE,
    Channel,
    MultiplexGraph,
    PaddedMultiplex,
    PaddingKind,
    PaddingScheme,
    Role,
    channel_weights,
    from_adjacency,
    objective,
    pad,
    perm_matrix,
    validate_multiplex,
)

__version__ = "0.1.0"
