import logging
import sys

from .alpha import AlphaEstimate, AlphaMethod, bisect_alpha, estimate_alpha_star
from .catalog import (
    CatalogFunction,
    ExpressionFunction,
    FunctionHandle,
    GroundTruth,
    catalog_entries,
    catalog_lookup,
    catalog_names,
    from_expression,
)
from .checks import (
    RobustParams,
    check_condition_b,
    check_lsc_sampled,
    check_monotone,
    check_quasiconvex_primal,
    check_quasimonotone,
    check_robust_condition_b,
    check_robust_pairs,
    check_robust_primal,
)
from .exceptions import (
    AllSamplesInfinite,
    ArityError,
    ConfigError,
    DegenerateEndpoints,
    DegenerateSegment,
    DimensionError,
    ExpressionSyntaxError,
    PerturbationStillQuasiconvexAtScale,
    PointOutsideDomain,
    PreconditionViolated,
    QlabException,
    UnknownFunction,
    UnknownIdentifier,
    UserError,
)
from .exprlang import Expr, evaluate, format_expr, parse
from .geometry import Box, SamplePlan, SegmentNeighborhood, segment_points, unit_directions
from .lemmas import (
    ChainResult,
    LemmaVerdict,
    MvtTrace,
    RadialLimitResult,
    ThreePointsResult,
    TuacuctriTrace,
    bode2_chain_check,
    mvt_verify,
    radial_limit_check,
    three_points_witness,
    tuacuctri_construct,
)
from .report import Report, ReportEntry, write_plot_trace
from .run import CheckName, LemmaTask, RunConfig, run_suite
from .subdiff import (
    MembershipConfig,
    MembershipVerdict,
    PerturbedFunction,
    SubgradientSample,
    fd_gradient,
    frechet_membership,
    perturb,
    subgradients_at,
)
from .tracing import (
    CheckSpanData,
    CustomSpanData,
    EstimatorSpanData,
    LemmaSpanData,
    Span,
    SpanData,
    SpanError,
    Trace,
    add_trace_processor,
    check_span,
    custom_span,
    estimator_span,
    gen_span_id,
    gen_trace_id,
    get_current_span,
    get_current_trace,
    lemma_span,
    set_trace_processors,
    set_tracing_disabled,
    trace,
)
from .verdict import (
    CheckStatus,
    CheckVerdict,
    ConditionBViolation,
    LscViolation,
    MonotoneViolation,
    PairsViolation,
    QuasimonotoneViolation,
    RobustPrimalViolation,
    SegmentViolation,
    Witness,
    strict_tol,
)
from .version import __version__


def enable_verbose_stdout_logging():
    """Enables verbose logging to stdout. This is useful for debugging."""
    for name in ["qlab", "qlab.tracing"]:
        logger = logging.getLogger(name)
        logger.setLevel(logging.DEBUG)
        logger.addHandler(logging.StreamHandler(sys.stdout))


__all__ = [
    "__version__",
    "AlphaEstimate",
    "AlphaMethod",
    "bisect_alpha",
    "estimate_alpha_star",
    "CatalogFunction",
    "ExpressionFunction",
    "FunctionHandle",
    "GroundTruth",
    "catalog_entries",
    "catalog_lookup",
    "catalog_names",
    "from_expression",
    "RobustParams",
    "check_condition_b",
    "check_lsc_sampled",
    "check_monotone",
    "check_quasiconvex_primal",
    "check_quasimonotone",
    "check_robust_condition_b",
    "check_robust_pairs",
    "check_robust_primal",
    "AllSamplesInfinite",
    "ArityError",
    "ConfigError",
    "DegenerateEndpoints",
    "DegenerateSegment",
    "DimensionError",
    "ExpressionSyntaxError",
    "PerturbationStillQuasiconvexAtScale",
    "PointOutsideDomain",
    "PreconditionViolated",
    "QlabException",
    "UnknownFunction",
    "UnknownIdentifier",
    "UserError",
    "Expr",
    "evaluate",
    "format_expr",
    "parse",
    "Box",
    "SamplePlan",
    "SegmentNeighborhood",
    "segment_points",
    "unit_directions",
    "ChainResult",
    "LemmaVerdict",
    "MvtTrace",
    "RadialLimitResult",
    "ThreePointsResult",
    "TuacuctriTrace",
    "bode2_chain_check",
    "mvt_verify",
    "radial_limit_check",
    "three_points_witness",
    "tuacuctri_construct",
    "Report",
    "ReportEntry",
    "write_plot_trace",
    "CheckName",
    "LemmaTask",
    "RunConfig",
    "run_suite",
    "MembershipConfig",
    "MembershipVerdict",
    "PerturbedFunction",
    "SubgradientSample",
    "fd_gradient",
    "frechet_membership",
    "perturb",
    "subgradients_at",
    "CheckSpanData",
    "CustomSpanData",
    "EstimatorSpanData",
    "LemmaSpanData",
    "Span",
    "SpanData",
    "SpanError",
    "Trace",
    "add_trace_processor",
    "check_span",
    "custom_span",
    "estimator_span",
    "gen_span_id",
    "gen_trace_id",
    "get_current_span",
    "get_current_trace",
    "lemma_span",
    "set_trace_processors",
    "set_tracing_disabled",
    "trace",
    "CheckStatus",
    "CheckVerdict",
    "ConditionBViolation",
    "LscViolation",
    "MonotoneViolation",
    "PairsViolation",
    "QuasimonotoneViolation",
    "RobustPrimalViolation",
    "SegmentViolation",
    "Witness",
    "strict_tol",
    "enable_verbose_stdout_logging",
]
