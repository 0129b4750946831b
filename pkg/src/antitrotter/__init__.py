"""Limits of sandwiched matrix powers.

Spectral limits of (A^(p/2) B^p A^(p/2))^(1/p) as p grows, the matching
limit matrices, geometric-mean analogues, small-p Trotter-style limits,
log-majorization checks, and subspace metrics, for positive semidefinite
matrices of modest dimension.
"""

from .errors import *  # noqa: F401,F403
from .matnum import (  # noqa: F401
    LogValue,
    PsdMatrix,
    spectral_decompose,
    z_p_eigenvalues_numeric,
    z_p_matrix_numeric,
    g_p_eigenvalues_numeric,
    g_p_matrix_numeric,
    chain_eigenvalues_numeric,
    DEFAULT_P_SCHEDULE,
)
from .antisym import (  # noqa: F401
    IndexSet,
    WedgeVector,
    compound,
    enumerate_subsets,
    minor,
    subset_from_rank,
    subset_rank,
    subspace_from_decomposable,
    wedge,
)
from .limits import (  # noqa: F401
    EtaSequence,
    LimitReport,
    MaximalVerdict,
    SpectralGroup,
    check_maximal,
    delta_set,
    eta_sequence,
    limit_eigenvalues,
    limit_eigenvalues_multi,
    limit_matrix,
    limit_matrix_multi,
    maximal_limit,
)
from .majorize import (  # noqa: F401
    MonotonicityReport,
    SpectrumVector,
    check_alt_monotonicity,
    check_gm_monotonicity,
    gelfand_naimark_sandwich,
    log_majorizes,
)
from .grassmann import (  # noqa: F401
    ComparabilityReport,
    Frame,
    gap_distance,
    metric_comparability_probe,
    wedge_distance,
)
from .means import (  # noqa: F401
    G2Limit,
    GLimitEstimate,
    OperatorMeanSpec,
    SupportProjection,
    g_limit_estimate,
    g_p_limit_2x2,
    generalized_log,
    lie_trotter_limit,
    operator_mean,
    renyi_divergence,
    spectral_inf,
    spectral_sup,
    support_meet,
    weighted_lt_limit,
)
from .oracle import (  # noqa: F401
    ConvergenceTrace,
    ExtrapolationResult,
    brute_force_eta,
    collect_g_trace,
    collect_z_trace,
    extrapolate,
    random_psd,
)

__version__ = "0.1.0"
