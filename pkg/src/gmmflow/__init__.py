"""Training-free flow matching between Gaussian mixture models.

Method A blends linear mean/covariance interpolations at their closed-form
kinetic cost; method B uses exact Bures-Wasserstein geodesics.
"""
from .bounds import (
    GapBound,
    SegmentwiseBound,
    SplitPlan,
    bound_constants,
    cubic_gap_bound,
    min_segments,
    segmentwise_bound_sum,
    split_path,
)
from .errors import (
    DegenerateDensity,
    DomainError,
    GmmFlowError,
    LocalityViolated,
    NonFiniteState,
    NotSpd,
    NumericalError,
    NumericalUnderflow,
    OutOfRange,
    ParseError,
    ValidationError,
)
from .gaussian import (
    Gaussian,
    PairCostReport,
    ot_map,
    pair_report,
    quadratic_proxy,
    surrogate_cost,
    w2_squared,
)
from .io import load_gmm, save_gmm
from .mixture import (
    Coupling,
    Gmm,
    MixtureFlow,
    build_flow,
    cost_matrix,
    density_at,
    global_velocity,
    mixture_continuity_residual,
    responsibilities,
    sinkhorn,
)
from .paths import (
    AffineField,
    GaussianPath,
    PathKind,
    continuity_residual,
    field_at,
    flow_map,
    geodesic_path,
    kinetic_action,
    linear_path,
    path_at,
)
from .spd import (
    RegimeIndicators,
    SpdMatrix,
    SymMatrix,
    as_spd,
    normalized_commutator,
    phi,
    regime_indicators,
    spectral_apply,
    sym_inv_sqrt,
    sym_sqrt,
    whitened_perturbation,
)
from .trajectory import (
    IntegrationResult,
    IntegratorConfig,
    ParticleSet,
    PushforwardReport,
    empirical_action,
    integrate,
    pushforward_check,
    sample_source,
    sliced_w2,
)

__version__ = "0.1.0"
