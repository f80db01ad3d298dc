"""Swap-based facility location toolkit."""

from .assignment import (
    AssignmentState,
    SwapComponents,
    access_cost_total,
    apply_swap,
    build_assignment,
    swap_components,
)
from .instances import ProblemInstance, generate_synthetic, load_instance, save_instance
from .mflp import detect_conflicts, mflp_brute_force, solve_mflp, stage_one, stage_two_resolve
from .policy import PolicyParams, PolicySelector, init_params, load_checkpoint, save_checkpoint
from .swap_search import (
    EpisodeConfig,
    GreedyDeltaSelector,
    RandomSelector,
    Solution,
    TabuList,
    greedy_init,
    run_episode,
    wire,
)

__all__ = [
    "AssignmentState",
    "EpisodeConfig",
    "GreedyDeltaSelector",
    "PolicyParams",
    "PolicySelector",
    "ProblemInstance",
    "RandomSelector",
    "Solution",
    "SwapComponents",
    "TabuList",
    "access_cost_total",
    "apply_swap",
    "build_assignment",
    "detect_conflicts",
    "generate_synthetic",
    "greedy_init",
    "init_params",
    "load_checkpoint",
    "load_instance",
    "mflp_brute_force",
    "run_episode",
    "save_checkpoint",
    "save_instance",
    "solve_mflp",
    "stage_one",
    "stage_two_resolve",
    "swap_components",
    "wire",
]

__version__ = "0.1.0"
