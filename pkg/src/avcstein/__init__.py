"""Exponents, geometry certificates, and simulations for adversarial hypothesis testing."""

__version__ = "0.1.0"

from .channels import (
    Channel,
    Distribution,
    HypothesisPair,
    StateChannelFamily,
    adaptive_extend_2,
    block_extend,
    mixture_channel,
    output_distribution,
    validate_pair,
)
from .divergence import cond_kl, kl, kl_joint_to_channel, mutual_info, phi_t
from .exponents import (
    BlockSolution,
    CurvePoint,
    CurveResult,
    DetSolution,
    SaddleSolution,
    d_opt_det,
    d_opt_shared,
    d_pvt_block,
    d_pvt_iid,
    min_kl_over_hulls,
    phi_star_shared,
    strong_converse_curve,
    weak_converse_bound,
)
from .errors import (
    AvcsteinError,
    BudgetExceededError,
    ConvergenceError,
    PairValidationError,
)
from .eta import (
    EtaTriple,
    FiveWayJoint,
    NoViolationFound,
    ViolationFound,
    eta_certified_from_gaps,
    eta_feasibility_check,
    eta_slack,
    pvt_lower_bound,
)
from .errors import CodebookError
from .geometry import (
    GapCertificate,
    hull_gap,
    hulls_intersect,
    is_trans_symmetrizable,
    transsym_gap,
)
from .types_tools import (
    Codebook,
    CodebookCheck,
    JointTypeTensor,
    detector_events,
    generate_codebook,
    joint_type,
    types_detector,
    verify_codebook,
)
from .sim import (
    AdaptiveDeterministic,
    AdaptivePolicy,
    BlockPrivate,
    CodebookUniform,
    ConverseAdversary,
    Deterministic,
    DetHullDivergence,
    DetLRT,
    DetTypesDetector,
    ExponentFit,
    IIDPrivate,
    IIDState,
    Memoryless,
    MimicHull,
    MonteCarloResult,
    SharedCodeword,
    TransSymAttack,
    converse_adversary,
    estimate_exponent,
    exact_errors,
    exact_output_law,
    monte_carlo,
    run_trial,
    transsym_attack_pair,
    wilson_interval,
)

__all__ = [
    "Channel",
    "Distribution",
    "HypothesisPair",
    "StateChannelFamily",
    "adaptive_extend_2",
    "block_extend",
    "mixture_channel",
    "output_distribution",
    "validate_pair",
    "kl",
    "cond_kl",
    "phi_t",
    "mutual_info",
    "kl_joint_to_channel",
    "SaddleSolution",
    "DetSolution",
    "BlockSolution",
    "CurvePoint",
    "CurveResult",
    "d_opt_shared",
    "d_opt_det",
    "d_pvt_iid",
    "d_pvt_block",
    "phi_star_shared",
    "strong_converse_curve",
    "weak_converse_bound",
    "GapCertificate",
    "hull_gap",
    "hulls_intersect",
    "is_trans_symmetrizable",
    "transsym_gap",
    "AvcsteinError",
    "PairValidationError",
    "ConvergenceError",
    "BudgetExceededError",
    "EtaTriple",
    "FiveWayJoint",
    "ViolationFound",
    "NoViolationFound",
    "eta_slack",
    "eta_certified_from_gaps",
    "eta_feasibility_check",
    "pvt_lower_bound",
    "JointTypeTensor",
    "Codebook",
    "CodebookCheck",
    "CodebookError",
    "joint_type",
    "types_detector",
    "detector_events",
    "generate_codebook",
    "verify_codebook",
    "min_kl_over_hulls",
    "Deterministic",
    "IIDPrivate",
    "BlockPrivate",
    "SharedCodeword",
    "CodebookUniform",
    "AdaptiveDeterministic",
    "IIDState",
    "Memoryless",
    "AdaptivePolicy",
    "TransSymAttack",
    "MimicHull",
    "DetLRT",
    "DetHullDivergence",
    "DetTypesDetector",
    "MonteCarloResult",
    "ExponentFit",
    "ConverseAdversary",
    "run_trial",
    "monte_carlo",
    "exact_errors",
    "exact_output_law",
    "estimate_exponent",
    "converse_adversary",
    "transsym_attack_pair",
    "wilson_interval",
    "__version__",
]
