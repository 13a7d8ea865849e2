"""Location-based selection of reflecting surfaces over planar Poisson
deployments: analytic distance distributions, outage and rate formulas,
limited-feedback variants, and an independent Monte Carlo cross-validator.
"""

from .analytic import (
    DEFAULT_QUADRATURE,
    DistCdf,
    RATE_CLOSED_FORM_CUTOFF,
    RateQuadrature,
    cdf_lambda_opt,
    cdf_upsilon_opt,
    half_disc_product_cdf,
    outage_exp,
    outage_exp_fb,
    outage_pow,
    outage_pow_fb,
    pdf_lambda_opt,
    pdf_upsilon_opt,
    pdf_y_exp,
    pdf_y_pow,
    pdf_y_pow_from_upsilon,
    rate_exp,
    rate_fading_closed,
    rate_fading_quad,
    rate_fading_ub,
    rate_pow,
    xi_exp,
    xi_pow,
)
from .channel import (
    GammaApprox,
    NetworkConfig,
    PathLossModel,
    ez2,
    gamma_params,
    mean_snr,
    pathloss_product,
    sample_z,
)
from .errors import (
    DomainError,
    NonConvergenceError,
    PoleError,
    QuadratureError,
    SingularityError,
    UnsupportedRegionError,
    WindowTooSmallError,
)
from .geometry import (
    AnchorPair,
    Point2,
    Realization,
    ScoreKind,
    critical_score,
    enclosing_radius,
    min_product_region_area,
    min_sum_region_area,
    s_exp,
    s_pow,
    sample_ppp,
    score_region_area,
    window_radius,
)
from .montecarlo import (
    EmpiricalDist,
    Estimate,
    coverage_radius,
    mc_distance_dist,
    mc_feedback_dist,
    mc_outage,
    mc_rate,
    poisson_gof,
    policy_scores,
)
from .policies import (
    PolicyKind,
    SelectionPolicy,
    feedback_count,
    feedback_filter,
    score_kind_for_model,
    select,
)
from .specfun import (
    SeriesControl,
    digamma,
    ellip_e,
    ellip_e_inc,
    ellip_f_inc,
    ellip_k,
    genhyp,
    log_gamma,
)

__version__ = "0.1.0"
