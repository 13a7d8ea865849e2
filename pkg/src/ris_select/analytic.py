"""Closed-form distributions, outage probabilities, feedback means, and
average-rate integrals for optimum two-anchor selection over a planar
Poisson process.

Everything rests on the void probability of the score sublevel regions:
the best product score Y and best sum score L achieved by any node satisfy

    P(Y > g) = exp(-lambda * area{s_pow <= g})
    P(L > g) = exp(-lambda * area{s_exp <= g})

which simultaneously gives the score CDFs and the Poisson mean of the
number of nodes below a feedback threshold.  Densities are the analytic
derivatives of those CDFs.  Rates average log2(1 + snr) over the gamma
approximation of the fading gain, either by a closed form
(log/digamma/hypergeometric terms) or by adaptive quadrature of the
defining integral; the quadrature form doubles as the in-repo oracle for
the closed form.

All quantities are strictly linear-scale; dB conversion belongs to the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .channel import NetworkConfig, PathLossModel, ez2, gamma_params
from .errors import (
    DomainError,
    PoleError,
    QuadratureError,
    SingularityError,
    UnsupportedRegionError,
)
from .geometry import (
    ScoreKind,
    critical_score,
    min_product_region_area,
    min_sum_region_area,
)
from .specfun import SeriesControl, digamma, ellip_e, ellip_k, genhyp, log_gamma

_LN2 = math.log(2.0)

# Below this value of avg_snr * y the closed-form rate loses too
# many digits to cancellation; integrate the defining form instead.
RATE_CLOSED_FORM_CUTOFF = 1.0e-2

_RATE_SERIES = SeriesControl(rel_tol=1e-14, max_terms=800)


@dataclass(frozen=True)
class DistCdf:
    """Parameters of an optimum-score distribution (which functional, the
    node density, and the anchor half-separation)."""

    model: ScoreKind
    intensity: float
    d: float

    def __post_init__(self) -> None:
        if self.intensity <= 0.0:
            raise ValueError(f"intensity must be > 0, got {self.intensity}")
        if self.d <= 0.0:
            raise ValueError(f"d must be > 0, got {self.d}")

    @classmethod
    def from_config(cls, cfg: NetworkConfig, model: ScoreKind) -> "DistCdf":
        return cls(model=model, intensity=cfg.intensity, d=cfg.d)


@dataclass(frozen=True)
class RateQuadrature:
    """Tolerances for the adaptive quadrature used by the rate integrals."""

    abs_tol: float = 1.0e-8
    rel_tol: float = 1.0e-8
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.abs_tol <= 1.0e-2:
            raise ValueError(f"abs_tol must be in (0, 1e-2], got {self.abs_tol}")
        if not 0.0 < self.rel_tol <= 1.0e-2:
            raise ValueError(f"rel_tol must be in (0, 1e-2], got {self.rel_tol}")
        if self.max_subdivisions < 50:
            raise ValueError(f"max_subdivisions must be >= 50, got {self.max_subdivisions}")


DEFAULT_QUADRATURE = RateQuadrature()


def _quad(f, lo, hi, q: RateQuadrature, points=None) -> float:
    kwargs = dict(epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions)
    if points is not None and not (math.isinf(lo) or math.isinf(hi)):
        kwargs["points"] = points
    value, err = integrate.quad(f, lo, hi, **kwargs)
    if err > 100.0 * max(q.abs_tol, q.rel_tol * abs(value)):
        raise QuadratureError(f"quadrature error estimate {err} too large for value {value}")
    return value


def _require(dist: DistCdf, model: ScoreKind) -> None:
    if dist.model is not model:
        raise ValueError(f"distribution parameterized for {dist.model}, needs {model}")


def _check_match(cfg: NetworkConfig, dist: DistCdf) -> None:
    if cfg.intensity != dist.intensity or cfg.d != dist.d:
        raise ValueError("NetworkConfig and DistCdf disagree on intensity or d")


# ---------------------------------------------------------------------------
# Feedback means (Poisson intensities of the sublevel regions)
# ---------------------------------------------------------------------------

def xi_pow(threshold: float, dist: DistCdf) -> float:
    """Mean number of nodes with distance product <= threshold.

    Two closed-form branches meet continuously at threshold = d^2 where
    both equal 2 * lambda * d^2.
    """
    _require(dist, ScoreKind.MIN_PRODUCT)
    if threshold < 0.0:
        raise DomainError(f"threshold must be >= 0, got {threshold}")
    return dist.intensity * min_product_region_area(threshold, dist.d)


def xi_exp(threshold: float, dist: DistCdf) -> float:
    """Mean number of nodes with distance sum <= threshold.

    Zero for threshold <= 2d; lambda * pi * T * sqrt(T^2 - 4 d^2) / 4 above.
    """
    _require(dist, ScoreKind.MIN_SUM)
    if threshold < 0.0:
        raise DomainError(f"threshold must be >= 0, got {threshold}")
    return dist.intensity * min_sum_region_area(threshold, dist.d)


# ---------------------------------------------------------------------------
# Optimum-score distributions
# ---------------------------------------------------------------------------

def cdf_upsilon_opt(gamma: float, dist: DistCdf) -> float:
    """CDF of the smallest distance product over the process: 1 - e^{-xi}."""
    _require(dist, ScoreKind.MIN_PRODUCT)
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    return -math.expm1(-dist.intensity * min_product_region_area(gamma, dist.d))


def pdf_upsilon_opt(gamma: float, dist: DistCdf) -> float:
    """Density of the smallest distance product.

    Analytic derivative of the CDF:

        (2 lam g / d^2) K(g^2/d^4) e^{-xi(g)}   for g <  d^2
        2 lam K(d^4/g^2) e^{-xi(g)}             for g >= d^2

    with a logarithmic divergence at g = d^2 (returned as inf there).
    """
    _require(dist, ScoreKind.MIN_PRODUCT)
    if gamma <= 0.0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    lam, d = dist.intensity, dist.d
    d2 = d * d
    if gamma < d2:
        u = (gamma / d2) ** 2
        slope = (2.0 * lam * gamma / d2) * ellip_k(u)
    else:
        m = (d2 / gamma) ** 2
        if m >= 1.0:
            return math.inf
        slope = 2.0 * lam * ellip_k(m)
    return slope * math.exp(-lam * min_product_region_area(gamma, d))


def cdf_lambda_opt(gamma: float, dist: DistCdf) -> float:
    """CDF of the smallest distance sum: 0 below 2d, 1 - e^{-xi} above."""
    _require(dist, ScoreKind.MIN_SUM)
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    return -math.expm1(-dist.intensity * min_sum_region_area(gamma, dist.d))


def pdf_lambda_opt(gamma: float, dist: DistCdf) -> float:
    """Density of the smallest distance sum.

        pi lam (g^2 - 2 d^2) / (2 sqrt(g^2 - 4 d^2)) * e^{-xi(g)},  g > 2d

    Zero below 2d; the inverse-square-root singularity exactly at 2d is
    reported as an error rather than an infinity.
    """
    _require(dist, ScoreKind.MIN_SUM)
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    lam, d = dist.intensity, dist.d
    if gamma == 2.0 * d:
        raise SingularityError(f"density of the minimum sum diverges at gamma = 2d = {gamma}")
    if gamma < 2.0 * d:
        return 0.0
    root = math.sqrt(gamma * gamma - 4.0 * d * d)
    slope = math.pi * lam * (gamma * gamma - 2.0 * d * d) / (2.0 * root)
    return slope * math.exp(-lam * min_sum_region_area(gamma, d))


# ---------------------------------------------------------------------------
# Outage probabilities
# ---------------------------------------------------------------------------

def _pow_score_threshold(cfg: NetworkConfig) -> float:
    """Largest distance product keeping the fading-averaged SNR above rho."""
    if cfg.target_snr == 0.0:
        return math.inf
    return (cfg.avg_snr * ez2(cfg.n_elements) / cfg.target_snr) ** (1.0 / cfg.eta)


def _exp_score_threshold(cfg: NetworkConfig) -> float:
    """Largest distance sum keeping the fading-averaged SNR above rho."""
    if cfg.target_snr == 0.0:
        return math.inf
    return math.log(cfg.avg_snr * ez2(cfg.n_elements) / cfg.target_snr) / cfg.alpha


def outage_pow(cfg: NetworkConfig, dist: DistCdf) -> float:
    """Outage of the optimum product-score policy under the power law."""
    if cfg.model is not PathLossModel.POWER_LAW:
        raise ValueError("outage_pow requires a power-law configuration")
    _check_match(cfg, dist)
    return 1.0 - cdf_upsilon_opt(_pow_score_threshold(cfg), dist)


def outage_exp(cfg: NetworkConfig, dist: DistCdf) -> float:
    """Outage of the optimum sum-score policy under the exponential law.

    When the SNR target is unreachable even at the minimum possible sum 2d
    (log argument <= e^{2 alpha d}), the CDF is evaluated below 2d and the
    outage is 1.
    """
    if cfg.model is not PathLossModel.EXP_LAW:
        raise ValueError("outage_exp requires an exponential-law configuration")
    _check_match(cfg, dist)
    level = _exp_score_threshold(cfg)
    if level < 0.0:
        return 1.0
    return 1.0 - cdf_lambda_opt(level, dist)


def outage_pow_fb(cfg: NetworkConfig, dist: DistCdf, threshold: float) -> float:
    """Outage with feedback limited to nodes with product score <= threshold.

    Equals 1 - F_Y(min(score threshold for rho, T)): when the SNR condition
    is loose the only failure mode is an empty feedback set, with
    probability e^{-xi(T)}; the two branches meet continuously where the
    SNR threshold crosses T.
    """
    if cfg.model is not PathLossModel.POWER_LAW:
        raise ValueError("outage_pow_fb requires a power-law configuration")
    _check_match(cfg, dist)
    if threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    return 1.0 - cdf_upsilon_opt(min(_pow_score_threshold(cfg), threshold), dist)


def outage_exp_fb(cfg: NetworkConfig, dist: DistCdf, threshold: float) -> float:
    """Outage with feedback limited to nodes with sum score <= threshold."""
    if cfg.model is not PathLossModel.EXP_LAW:
        raise ValueError("outage_exp_fb requires an exponential-law configuration")
    _check_match(cfg, dist)
    if threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    level = min(_exp_score_threshold(cfg), threshold)
    if level < 0.0:
        return 1.0
    return 1.0 - cdf_lambda_opt(level, dist)


# ---------------------------------------------------------------------------
# Fading-averaged rate for a fixed inverse path loss y
# ---------------------------------------------------------------------------

def rate_fading_quad(y: float, cfg: NetworkConfig, q: RateQuadrature = DEFAULT_QUADRATURE) -> float:
    """E[log2(1 + avg_snr * y * Z^2)] with Z gamma-approximated, by quadrature.

    This is the defining integral of the fading-averaged rate and serves as
    the in-repo oracle for the closed form.
    """
    if y < 0.0:
        raise DomainError(f"y must be >= 0, got {y}")
    c = cfg.avg_snr * y
    if c == 0.0:
        return 0.0
    ga = gamma_params(cfg.n_elements)
    k, theta = ga.k, ga.theta
    log_norm = -log_gamma(k) - k * math.log(theta)

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        return math.log1p(c * x * x) * math.exp((k - 1.0) * math.log(x) - x / theta + log_norm)

    mode = k * theta
    value = _quad(integrand, 0.0, mode, q) + _quad(integrand, mode, math.inf, q)
    return value / _LN2


def rate_fading_closed(y: float, cfg: NetworkConfig) -> float:
    """Closed form for E[log2(1 + avg_snr * y * Z^2)] under the gamma model.

    Combines log and digamma terms with one 2F3 and two 1F2 series; the
    trigonometric csc/sec prefactors have poles whenever the gamma shape k
    sits on an integer, and the whole expression suffers catastrophic
    cancellation once avg_snr * y drops below RATE_CLOSED_FORM_CUTOFF, so
    both situations are rejected (use rate_fading_quad there).
    """
    if y <= 0.0:
        raise DomainError(f"y must be > 0, got {y}")
    c = cfg.avg_snr * y
    if c < RATE_CLOSED_FORM_CUTOFF:
        raise DomainError(
            f"closed form unreliable for avg_snr*y = {c} < {RATE_CLOSED_FORM_CUTOFF}; "
            "use rate_fading_quad"
        )
    ga = gamma_params(cfg.n_elements)
    k, theta = ga.k, ga.theta
    if abs(k - round(k)) < 1e-6 and round(k) >= 1:
        raise PoleError(f"rate closed form has poles at integer shape values, got k={k}")

    x = 1.0 / (4.0 * theta * theta * c)
    half = 0.5 * math.pi * k

    bracket = 2.0 * math.log(theta) + math.log(c) + 2.0 * digamma(k)
    bracket += genhyp([1.0, 1.0], [2.0, 0.5 * (3.0 - k), 0.5 * (4.0 - k)], -x, _RATE_SERIES) / (
        theta * theta * c * (k - 1.0) * (k - 2.0)
    )
    log_pref = math.log(math.pi) - 0.5 * k * math.log(c) - k * math.log(theta) - log_gamma(k + 1.0)
    pref = math.exp(log_pref)
    term_a = (1.0 / math.sin(half)) * genhyp([0.5 * k], [0.5, 0.5 * k + 1.0], -x, _RATE_SERIES)
    term_b = (
        k
        / math.cos(half)
        / (math.sqrt(c) * theta * (1.0 + k))
        * genhyp([0.5 * (k + 1.0)], [1.5, 0.5 * (k + 3.0)], -x, _RATE_SERIES)
    )
    bracket += pref * (term_a - term_b)
    return bracket / _LN2


def rate_fading_ub(y: float, cfg: NetworkConfig) -> float:
    """Jensen upper bound log2(1 + avg_snr * y * E[Z^2]) on the rate."""
    if y < 0.0:
        raise DomainError(f"y must be >= 0, got {y}")
    return math.log1p(cfg.avg_snr * y * ez2(cfg.n_elements)) / _LN2


def _rate_of_y(y: float, cfg: NetworkConfig, q: RateQuadrature) -> float:
    if cfg.avg_snr * y < RATE_CLOSED_FORM_CUTOFF:
        return rate_fading_quad(y, cfg, q)
    return rate_fading_closed(y, cfg)


# ---------------------------------------------------------------------------
# Densities of the inverse path loss Y of the selected node
# ---------------------------------------------------------------------------

def pdf_y_pow(y: float, cfg: NetworkConfig, dist: DistCdf) -> float:
    """Density of Y = (best distance product)^(-eta), written directly in y.

    Piecewise via the substitution g = y^(-1/eta):

        0 < y <= d^(-2 eta):  (2 lam / eta) e^{-2 lam g E(d^4/g^2)}
                              * y^(-1-1/eta) K(d^4 y^(2/eta))
        y >= d^(-2 eta):      (2 lam / (d^2 eta)) y^(-1-2/eta)
                              * K(g^2/d^4) e^{-xi(g)}

    Must agree with pdf_y_pow_from_upsilon (change of variables applied to
    the score density) everywhere.
    """
    if cfg.model is not PathLossModel.POWER_LAW:
        raise ValueError("pdf_y_pow requires a power-law configuration")
    _check_match(cfg, dist)
    _require(dist, ScoreKind.MIN_PRODUCT)
    if y <= 0.0:
        raise DomainError(f"y must be > 0, got {y}")
    lam, d, eta = dist.intensity, dist.d, cfg.eta
    d2 = d * d
    boundary = d2 ** (-eta)  # y value where the score crosses d^2
    if y <= boundary:
        m = d2 * d2 * y ** (2.0 / eta)
        if m >= 1.0:
            return math.inf
        g = y ** (-1.0 / eta)
        return (
            (2.0 * lam / eta)
            * math.exp(-2.0 * lam * g * ellip_e(m))
            * y ** (-1.0 - 1.0 / eta)
            * ellip_k(m)
        )
    u = y ** (-2.0 / eta) / (d2 * d2)
    g = y ** (-1.0 / eta)
    return (
        (2.0 * lam / (d2 * eta))
        * y ** (-1.0 - 2.0 / eta)
        * ellip_k(u)
        * math.exp(-lam * min_product_region_area(g, d))
    )


def pdf_y_pow_from_upsilon(y: float, cfg: NetworkConfig, dist: DistCdf) -> float:
    """Same density obtained by transforming the score density directly."""
    if y <= 0.0:
        raise DomainError(f"y must be > 0, got {y}")
    g = y ** (-1.0 / cfg.eta)
    return pdf_upsilon_opt(g, dist) * g / (cfg.eta * y)


def pdf_y_exp(y: float, cfg: NetworkConfig, dist: DistCdf) -> float:
    """Density of Y = exp(-alpha * best distance sum).

    Supported on (0, e^{-2 alpha d}] with an integrable inverse-square-root
    singularity at the upper endpoint (returned as inf exactly there);
    zero above it.
    """
    if cfg.model is not PathLossModel.EXP_LAW:
        raise ValueError("pdf_y_exp requires an exponential-law configuration")
    _check_match(cfg, dist)
    _require(dist, ScoreKind.MIN_SUM)
    if y <= 0.0:
        raise DomainError(f"y must be > 0, got {y}")
    alpha, d = cfg.alpha, dist.d
    level = math.log(1.0 / y) / alpha
    if level < 2.0 * d:
        return 0.0
    if level == 2.0 * d:
        return math.inf
    return pdf_lambda_opt(level, dist) / (alpha * y)


# ---------------------------------------------------------------------------
# Average rate over the point process
# ---------------------------------------------------------------------------

def rate_pow(
    cfg: NetworkConfig,
    dist: DistCdf,
    q: RateQuadrature = DEFAULT_QUADRATURE,
    t_threshold: float | None = None,
    use_upper_bound: bool = False,
) -> float:
    """Average rate of the (optionally feedback-limited) product policy.

    Integrates rate(Y) against the density of the best product score; the
    integration runs in score space, where the branch-1/branch-2 split is
    the point g = d^2 and the tail decays like e^{-pi lam g}.  A feedback
    threshold T truncates the score at T (no transmission beyond it), which
    for T < d^2 simply empties the large-score branch.
    """
    if cfg.model is not PathLossModel.POWER_LAW:
        raise ValueError("rate_pow requires a power-law configuration")
    _check_match(cfg, dist)
    _require(dist, ScoreKind.MIN_PRODUCT)
    if t_threshold is not None and t_threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {t_threshold}")
    rate_of_y = rate_fading_ub if use_upper_bound else (lambda y, c: _rate_of_y(y, c, q))

    def integrand(g: float) -> float:
        dens = pdf_upsilon_opt(g, dist)
        if dens == 0.0 or math.isinf(dens):
            return 0.0
        y = g ** (-cfg.eta)
        if not math.isfinite(y):
            return 0.0
        return rate_of_y(y, cfg) * dens

    d2 = dist.d * dist.d
    cap = math.inf if t_threshold is None else t_threshold
    # beyond this level the survival function is below ~1e-14; integrating
    # further only starves the quadrature of nodes where the mass lives
    tail = max(critical_score(ScoreKind.MIN_PRODUCT, dist.intensity, dist.d, 1e-14), 2.0 * d2)
    total = 0.0
    low_hi = min(cap, d2)
    if low_hi > 0.0:
        total += _quad(integrand, 0.0, low_hi, q)
    if cap > d2:
        total += _quad(integrand, d2, min(cap, tail), q)
    return total


def rate_exp(
    cfg: NetworkConfig,
    dist: DistCdf,
    q: RateQuadrature = DEFAULT_QUADRATURE,
    t_threshold: float | None = None,
    use_upper_bound: bool = False,
) -> float:
    """Average rate of the (optionally feedback-limited) sum policy.

    The score density has an inverse-square-root singularity at 2d, removed
    by the substitution u = sqrt(g^2 - 4 d^2); a threshold T <= 2d admits
    no feedback at all and yields rate 0.
    """
    if cfg.model is not PathLossModel.EXP_LAW:
        raise ValueError("rate_exp requires an exponential-law configuration")
    _check_match(cfg, dist)
    _require(dist, ScoreKind.MIN_SUM)
    if t_threshold is not None and t_threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {t_threshold}")
    d, lam, alpha = dist.d, dist.intensity, cfg.alpha
    if t_threshold is not None and t_threshold <= 2.0 * d:
        return 0.0
    rate_of_y = rate_fading_ub if use_upper_bound else (lambda y, c: _rate_of_y(y, c, q))

    def integrand(u: float) -> float:
        g = math.sqrt(u * u + 4.0 * d * d)
        weight = (
            math.pi
            * lam
            * (u * u + 2.0 * d * d)
            / (2.0 * g)
            * math.exp(-0.25 * math.pi * lam * g * u)
        )
        if weight == 0.0:
            return 0.0
        return rate_of_y(math.exp(-alpha * g), cfg) * weight

    u_hi = math.inf if t_threshold is None else math.sqrt(t_threshold**2 - 4.0 * d * d)
    g_tail = critical_score(ScoreKind.MIN_SUM, lam, d, 1e-14)
    u_tail = math.sqrt(max(g_tail * g_tail - 4.0 * d * d, 4.0 * d * d))
    return _quad(integrand, 0.0, min(u_hi, u_tail), q)


# ---------------------------------------------------------------------------
# Distance-product CDF for a single uniform node on a half disc
# ---------------------------------------------------------------------------

def half_disc_product_cdf(gamma: float, tau: float, d: float) -> float:
    """CDF of the distance product for one node uniform on the right half
    disc of radius tau.

    Closed forms exist for gamma <= d^2, d^2 < gamma <= tau^2 - d^2 and
    gamma > d^2 + tau^2; the transition band tau^2 - d^2 < gamma <=
    d^2 + tau^2 has no supported closed form and raises.  Requires
    tau^2 >= 2 d^2 so the branch boundaries are ordered.
    """
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if tau <= 0.0:
        raise DomainError(f"tau must be > 0, got {tau}")
    if tau * tau < 2.0 * d * d:
        raise DomainError(f"branch ordering needs tau^2 >= 2 d^2, got tau={tau}, d={d}")
    d2 = d * d
    tau2 = tau * tau
    if gamma > d2 + tau2:
        return 1.0
    if gamma > tau2 - d2:
        raise UnsupportedRegionError(
            f"no closed form on tau^2 - d^2 < gamma <= d^2 + tau^2 (gamma={gamma})"
        )
    # for gamma <= tau^2 - d^2 the whole sublevel region sits inside the
    # disc, where the CDF is just its area fraction (symmetric in halves)
    return min_product_region_area(gamma, d) / (math.pi * tau2)
