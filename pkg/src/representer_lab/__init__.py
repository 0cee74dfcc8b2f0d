"""Regularized interpolation in l^p spaces with checkable representer certificates."""

__version__ = "0.1.0"

from .admissibility import (
    AdmissibilityReport,
    Witness,
    WitnessReport,
    admissibility_verdict,
    check_radial_face_monotone,
    check_tangential_bound,
    verify_witness,
)
from .certificates import (
    Certificate,
    NotRepresentable,
    certificate_distance,
    certify_approx,
    certify_exact,
    counterexample_functional,
    run_counterexample,
)
from .errors import (
    BudgetExceeded,
    EkelandCheckFailed,
    GridTooCoarse,
    IndexOutOfRange,
    Infeasible,
    InvalidSpace,
    InvalidTailRule,
    NonRadialRegularizer,
    NormInflation,
    RankDeficientConstraints,
    RepresenterLabError,
    SchemaError,
    SolverDiverged,
    UnboundedBelowSuspected,
    ZeroFunctional,
    ZeroVector,
)
from .estimators import MinNormInterpolator, RegularizedInterpolator, TikhonovRegressor
from .geometry import (
    FaceDescriptor,
    KernelSubspace,
    Rotundity,
    exposed_face,
    face_min,
    kernel_basis,
    rotundity_profile,
    tangent_sample,
)
from .proximinality import (
    Conclusion,
    Method,
    ProximinalityReport,
    image_ball_closed,
    kernel_proximinal_single,
    reflexivity_note,
)
from .regularizers import Mollifier, PiecewiseLinear, RegularizerSpec, mollify_radial
from .serialization import ProblemFile, load_problem
from .solvers import (
    EkelandReport,
    ErrorSpec,
    InterpolationProblem,
    SolveResult,
    TikhonovConfig,
    TikhonovPath,
    approx_solve_l1,
    ekeland_descend,
    hb_extend,
    solve,
    solve_min_norm,
    solve_regularized,
    tikhonov_path,
)
from .spaces import (
    DualFunctional,
    DualitySetDescriptor,
    FiniteLp,
    PrimalVector,
    SequenceL1,
    SpaceSpec,
    dual_norm,
    duality_map,
    in_duality_set,
    norm,
    pair,
)
from .tails import Tail, TailRule

__all__ = [
    "__version__",
    "AdmissibilityReport",
    "Witness",
    "WitnessReport",
    "admissibility_verdict",
    "check_radial_face_monotone",
    "check_tangential_bound",
    "verify_witness",
    "Certificate",
    "NotRepresentable",
    "certificate_distance",
    "certify_approx",
    "certify_exact",
    "counterexample_functional",
    "run_counterexample",
    "BudgetExceeded",
    "EkelandCheckFailed",
    "GridTooCoarse",
    "IndexOutOfRange",
    "Infeasible",
    "InvalidSpace",
    "InvalidTailRule",
    "NonRadialRegularizer",
    "NormInflation",
    "RankDeficientConstraints",
    "RepresenterLabError",
    "SchemaError",
    "SolverDiverged",
    "UnboundedBelowSuspected",
    "ZeroFunctional",
    "ZeroVector",
    "MinNormInterpolator",
    "RegularizedInterpolator",
    "TikhonovRegressor",
    "FaceDescriptor",
    "KernelSubspace",
    "Rotundity",
    "exposed_face",
    "face_min",
    "kernel_basis",
    "rotundity_profile",
    "tangent_sample",
    "Conclusion",
    "Method",
    "ProximinalityReport",
    "image_ball_closed",
    "kernel_proximinal_single",
    "reflexivity_note",
    "Mollifier",
    "PiecewiseLinear",
    "RegularizerSpec",
    "mollify_radial",
    "ProblemFile",
    "load_problem",
    "EkelandReport",
    "ErrorSpec",
    "InterpolationProblem",
    "SolveResult",
    "TikhonovConfig",
    "TikhonovPath",
    "approx_solve_l1",
    "ekeland_descend",
    "hb_extend",
    "solve",
    "solve_min_norm",
    "solve_regularized",
    "tikhonov_path",
    "DualFunctional",
    "DualitySetDescriptor",
    "FiniteLp",
    "PrimalVector",
    "SequenceL1",
    "SpaceSpec",
    "dual_norm",
    "duality_map",
    "in_duality_set",
    "norm",
    "pair",
    "Tail",
    "TailRule",
]
