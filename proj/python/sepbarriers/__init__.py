"""Exact and Monte Carlo Skorokhod embeddings with vh-barrier stopping rules."""

from sepbarriers._core import (
    CalibrationResult,
    ConvexOrderViolated,
    DiscreteMeasure,
    HitConvention,
    HLine,
    NonTerminating,
    NoProgress,
    PerkinsRule,
    StoppedLaw,
    VhBarrier,
    VLine,
    barrier_union,
    calibrate_perkins,
    convex_order,
    exact_stopped_law,
    example_instance,
    feasible_band,
    max_law_dominance,
    mc_stopped_law,
    meet,
    moment,
    monotonicity_audit,
    potential,
    random_convex_pair,
    render_barrier_svg,
    tv_distance,
    verify_embedding,
    vh_hit,
)

__all__ = [
    "CalibrationResult",
    "ConvexOrderViolated",
    "DiscreteMeasure",
    "HitConvention",
    "HLine",
    "NonTerminating",
    "NoProgress",
    "PerkinsRule",
    "StoppedLaw",
    "VhBarrier",
    "VLine",
    "barrier_union",
    "calibrate_perkins",
    "convex_order",
    "exact_stopped_law",
    "example_instance",
    "feasible_band",
    "max_law_dominance",
    "mc_stopped_law",
    "meet",
    "moment",
    "monotonicity_audit",
    "potential",
    "random_convex_pair",
    "render_barrier_svg",
    "tv_distance",
    "verify_embedding",
    "vh_hit",
]
