"""Strategyproof assignment mechanisms without money on private bipartite graphs."""

__version__ = "0.1.0"

from .core import (
    Assignment,
    EdgeSet,
    FractionalAssignment,
    InfeasibleError,
    Instance,
    InstanceError,
    OutcomeLottery,
    Variant,
    VariantError,
    canonical_edge_order,
    utility,
    validate,
    welfare,
)
from .lpsolve import LinearProgram, build_gap_lp, lex_refine, solve_lp
from .mech_match import mbm_mechanism, mwbm_greedy, mwbm_optimal_baseline
from .mech_frac import (
    dual_certificate,
    mkp_fractional,
    sigap_fractional_greedy,
    verify_2approx,
    vigap_fractional_greedy,
)
from .rounding import compose_mechanism, decompose_scaled, gap_mechanism, st_round
from .audit import MECHANISMS, GridSpec, audit_grid, audit_strategyproofness, brute_force_optimal
from .fixtures import fig2_a, fig2_b, fixtures, intro_instance
