"""Fair division of indivisible goods among groups, via combinatorial discrepancy."""

from .discrepancy import (
    brute_min_bicolor,
    brute_min_multicolor,
    color_deviations,
    eval_bicolor,
    eval_multicolor,
    reduce_columns,
    solve_linear_disc,
    solve_multicolor,
)
from .instances import (
    GadgetBundle,
    SetSystem,
    gen_cd_lower_instance,
    gen_hardness_fairdiv,
    gen_prop_lower_instance,
    gen_setsplit_gadget,
    gen_wdisc_lower,
    hadamard_amplify,
    planted_hardness_instance,
    planted_setsplit,
    random_instance,
    random_rational_instance,
    split_coloring_from_solution,
    sylvester_hadamard,
    w_matrix,
)
from .model import (
    Allocation,
    FairnessReport,
    Instance,
    Notion,
    OptimumResult,
    cdc_of,
    certify,
    efc_of,
    exhaustive_optimum,
    min_removals,
    propc_of,
)
from .solver import ReductionMatrix, SolveOutcome, SolveParams, build_reduction, solve_consensus, solve_for_notion

__version__ = "0.1.0"

__all__ = [
    "Allocation", "FairnessReport", "GadgetBundle", "Instance", "Notion", "OptimumResult",
    "ReductionMatrix", "SetSystem", "SolveOutcome", "SolveParams",
    "brute_min_bicolor", "brute_min_multicolor", "build_reduction", "cdc_of", "certify",
    "color_deviations", "efc_of", "eval_bicolor", "eval_multicolor", "exhaustive_optimum",
    "gen_cd_lower_instance", "gen_hardness_fairdiv", "gen_prop_lower_instance",
    "gen_setsplit_gadget", "gen_wdisc_lower", "hadamard_amplify", "min_removals",
    "planted_hardness_instance", "planted_setsplit", "propc_of", "random_instance",
    "random_rational_instance", "reduce_columns", "solve_consensus", "solve_for_notion",
    "solve_linear_disc", "solve_multicolor", "split_coloring_from_solution",
    "sylvester_hadamard", "w_matrix",
]
