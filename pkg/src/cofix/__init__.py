"""Common fixed points for families of contractive-type mappings.

The package is layered: metric spaces and axiom checks (``metric_core``),
the contractive conditions and coefficient synthesis (``contraction``),
the certified alternating iteration (``solver``), reduction of three- and
four-mapping problems to two (``reduction``), instance generation with
ground truth (``oracle``), JSON problem files (``problem``), and a
command line (``cli``).
"""

from .errors import (
    BoundViolation,
    CofixError,
    ConditionViolated,
    DomainError,
    ExhaustiveOnInfinite,
    ImageMismatch,
    Infeasible,
    IterationFailed,
    LiftDisagreement,
    LiftMismatch,
    NonInvertibleMapping,
    NonUniqueCoincidence,
    PreconditionError,
    RangeInclusionFailure,
    RepairFailure,
    SchemaError,
)
from .metric_core import (
    AxiomCheck,
    AxiomReport,
    Flavor,
    MetricSpace,
    Point,
    verify_metric_axioms,
)
from .contraction import (
    EXHAUSTIVE,
    AffineMapping,
    Arity,
    Coefficients,
    InclusionCheck,
    InclusionReport,
    MappingSet,
    SampledPairs,
    TableMapping,
    ViolationReport,
    check_condition_four,
    check_condition_three,
    check_condition_two,
    check_range_inclusions,
    identity_mapping,
    rhs_four,
    rhs_three,
    rhs_two,
    synthesize_coefficients,
    validate_coefficients,
)
from .solver import (
    IterationTrace,
    SolveReport,
    SolveStatus,
    UniquenessVerdict,
    apriori_error_bound,
    picard_solve,
    rate_constant,
    uniqueness_check,
)
from .reduction import (
    AffineSection,
    CoincidenceReport,
    CoincidenceSolutions,
    InducedPair,
    PipelineOptions,
    PipelineStatus,
    TableSection,
    WeakCompatibility,
    coincidence_points,
    induce_four,
    induce_three,
    injective_restriction,
    is_weakly_compatible,
    lift_to_common_fixed_point,
    pair_coincidence_points,
    require_lift_agreement,
    solve_four,
    solve_four_coincidence,
    solve_three,
    solve_three_coincidence,
)
from .oracle import (
    CoincidenceClass,
    FuzzSummary,
    GeneratedInstance,
    InstanceRecipe,
    MappingMode,
    MetricMode,
    OracleResult,
    enumerate_common_fixed_points,
    enumerate_fixed_points,
    generate_instance,
    metric_closure_repair,
    oracle_summary,
    run_fuzz,
)
from .problem import Problem, as_problem, load_problem, problem_to_dict

__version__ = "0.1.0"

__all__ = [
    "AffineMapping",
    "AffineSection",
    "Arity",
    "AxiomCheck",
    "AxiomReport",
    "BoundViolation",
    "Coefficients",
    "CofixError",
    "CoincidenceClass",
    "CoincidenceReport",
    "CoincidenceSolutions",
    "ConditionViolated",
    "DomainError",
    "EXHAUSTIVE",
    "ExhaustiveOnInfinite",
    "Flavor",
    "FuzzSummary",
    "GeneratedInstance",
    "ImageMismatch",
    "InclusionCheck",
    "InclusionReport",
    "InducedPair",
    "Infeasible",
    "InstanceRecipe",
    "IterationFailed",
    "IterationTrace",
    "LiftDisagreement",
    "LiftMismatch",
    "MappingMode",
    "MappingSet",
    "MetricMode",
    "MetricSpace",
    "NonInvertibleMapping",
    "NonUniqueCoincidence",
    "OracleResult",
    "PipelineOptions",
    "PipelineStatus",
    "Point",
    "PreconditionError",
    "Problem",
    "RangeInclusionFailure",
    "RepairFailure",
    "SampledPairs",
    "SchemaError",
    "SolveReport",
    "SolveStatus",
    "TableMapping",
    "TableSection",
    "UniquenessVerdict",
    "ViolationReport",
    "WeakCompatibility",
    "apriori_error_bound",
    "as_problem",
    "check_condition_four",
    "check_condition_three",
    "check_condition_two",
    "check_range_inclusions",
    "coincidence_points",
    "enumerate_common_fixed_points",
    "enumerate_fixed_points",
    "generate_instance",
    "identity_mapping",
    "induce_four",
    "induce_three",
    "injective_restriction",
    "is_weakly_compatible",
    "lift_to_common_fixed_point",
    "load_problem",
    "metric_closure_repair",
    "oracle_summary",
    "pair_coincidence_points",
    "picard_solve",
    "problem_to_dict",
    "rate_constant",
    "require_lift_agreement",
    "rhs_four",
    "rhs_three",
    "rhs_two",
    "run_fuzz",
    "solve_four",
    "solve_four_coincidence",
    "solve_three",
    "solve_three_coincidence",
    "synthesize_coefficients",
    "uniqueness_check",
    "validate_coefficients",
    "verify_metric_axioms",
]
