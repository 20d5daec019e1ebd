"""Structural refinement of Bayesian-network CPTs.

Approximate a conditional probability table through pruning, divorcing,
simple canonical models, ICI or SICI structures, fit the reduced parameter
set against a known truth under sum of row-wise total variation distances,
and account for the parameter savings.
"""

from .cpt import (
    CountTable,
    Cpt,
    Grouping,
    ParentConfig,
    Variable,
    config_of,
    config_table,
    expand_grouped,
    fit_grouping,
    kl_row,
    median_lad,
    mle_from_counts,
    param_count,
    row_index,
    score_sum_kl,
    score_sum_tvd,
    tvd_row,
)
from .errors import CptRefineError, SearchSpaceError, ShapeMismatchError, ValidationError
from .io import ReportRow, load_cpt, save_cpt
from .optimizer import (
    GaConfig,
    Genome,
    GenomeShape,
    SearchResult,
    SiciSweep,
    enumerate_bipartitions,
    enumerate_set_partitions,
    ga_optimize,
    optimize_ici,
    optimize_scm_ga,
    optimize_sici,
    optimize_sici_partition,
    scm_bruteforce,
)
from .refine import (
    ApproxResult,
    DivorceSpec,
    IciSpec,
    PruneSpec,
    ScmSpec,
    SiciSpec,
    default_binarization,
    divorce_best,
    divorce_groups,
    ds_sici_evaluate,
    evaluate_spec,
    ici_evaluate,
    noisy_average_lower,
    noisy_or,
    noisy_or_closed_form,
    param_savings,
    pici_evaluate,
    prune_best,
    prune_groups,
    scm_fit,
    us_sici_evaluate,
)

__version__ = "0.1.0"
