"""Brute-force estimators for every analytic quantity.

Each estimator draws realizations of the point process inside a finite
window sized so the probability that the infinite process' winner falls
outside is below a configurable epsilon, then evaluates the metric exactly
on the sample.  Trials are processed in fixed-size chunks, each with its
own deterministically spawned random stream, so results are identical
regardless of how many worker processes execute the chunks; merging is
plain count/sum/sum-of-squares.  Common random numbers across policies
only require passing the same seed and window, since stream consumption
never depends on the policy.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channel import NetworkConfig, PathLossModel, ez2
from .errors import WindowTooSmallError
from .geometry import ScoreKind, critical_score, enclosing_radius, window_radius
from .policies import PolicyKind, SelectionPolicy, score_kind_for_model, score_kind_for_policy

_CHUNK_TRIALS = 8192
_WINDOW_EPS = 1e-6


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate: sample mean, standard error, trial count."""

    mean: float
    std_error: float
    n_trials: int

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            raise ValueError(f"std_error must be >= 0, got {self.std_error}")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")

    @classmethod
    def from_moments(cls, n: int, total: float, total_sq: float) -> "Estimate":
        mean = total / n
        var = max(0.0, (total_sq - n * mean * mean) / (n - 1)) if n > 1 else 0.0
        return cls(mean=mean, std_error=math.sqrt(var / n), n_trials=n)


@dataclass
class EmpiricalDist:
    """Sorted sample with empirical-CDF queries and DKW confidence bands."""

    values: np.ndarray
    _sorted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        self.values = arr
        self._sorted = np.sort(arr)

    @property
    def n(self) -> int:
        return self.values.size

    def cdf(self, x) -> np.ndarray | float:
        out = np.searchsorted(self._sorted, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(x) == 0 else out

    def dkw_epsilon(self, confidence: float = 0.99) -> float:
        """Half-width of the distribution-free CDF confidence band."""
        if not 0.0 < confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {confidence}")
        return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * self.n))

    def mean(self) -> float:
        return float(self.values.mean())

    def std_error(self) -> float:
        if self.n < 2:
            return 0.0
        return float(self.values.std(ddof=1) / math.sqrt(self.n))


def _as_seed_source(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def coverage_radius(cfg: NetworkConfig, policy: SelectionPolicy, eps: float = _WINDOW_EPS) -> float:
    """Window radius so the policy's true winner escapes with prob <= eps.

    Optimum policies use the exact sublevel-set tail of their score; the
    heuristic policies use conservative disc bounds on the region where
    their criterion is below the eps-quantile level.  A feedback threshold
    can only shrink the region that matters.
    """
    lam, d = cfg.intensity, cfg.d
    need = math.log(1.0 / eps) / lam
    kind = policy.kind
    if kind in (PolicyKind.OPT_PRODUCT, PolicyKind.OPT_SUM):
        score_kind = score_kind_for_policy(kind)
        gamma = critical_score(score_kind, lam, d, eps)
        if policy.feedback_threshold is not None:
            gamma = min(gamma, policy.feedback_threshold)
        return max(enclosing_radius(score_kind, gamma, d), 0.5 * d)
    if kind is PolicyKind.MID_POINT:
        return math.sqrt(need / math.pi)
    if kind is PolicyKind.MIN_MIN:
        # union of two anchor discs covers at least one disc of the same radius
        return d + math.sqrt(need / math.pi)
    # MIN_MAX: {max distance <= c} is the lens of two radius-c anchor discs,
    # contained in the origin disc of radius sqrt(c^2 - d^2)
    def lens_area(c: float) -> float:
        if c <= d:
            return 0.0
        return 2.0 * c * c * math.acos(d / c) - 2.0 * d * math.sqrt(c * c - d * d)

    lo, hi = d, d + math.sqrt(need) + d
    while lens_area(hi) < need:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lens_area(mid) < need:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * hi:
            break
    return math.sqrt(hi * hi - d * d)


# ---------------------------------------------------------------------------
# Chunk kernels (top level so worker processes can unpickle them)
# ---------------------------------------------------------------------------

def _sample_batch(lam: float, d: float, radius: float, n: int, rng: np.random.Generator):
    """Vectorized batch of n realizations: anchor distances plus segment map."""
    counts = rng.poisson(lam * math.pi * radius * radius, n)
    total = int(counts.sum())
    r = radius * np.sqrt(rng.random(total))
    theta = rng.uniform(0.0, 2.0 * math.pi, total)
    x = r * np.cos(theta)
    y = r * np.sin(theta)
    ds = np.hypot(x + d, y)
    dd = np.hypot(x - d, y)
    return counts, ds, dd


def _criterion_values(kind: PolicyKind, ds: np.ndarray, dd: np.ndarray) -> np.ndarray:
    if kind is PolicyKind.OPT_PRODUCT:
        return ds * dd
    if kind is PolicyKind.OPT_SUM:
        return ds + dd
    if kind is PolicyKind.MIN_MIN:
        return np.minimum(ds, dd)
    if kind is PolicyKind.MIN_MAX:
        return np.maximum(ds, dd)
    # MID_POINT: squared distance to origin, monotone equivalent to distance
    return 0.5 * (ds * ds + dd * dd)


def _chunk_scores(
    cfg: NetworkConfig,
    policy: SelectionPolicy,
    score_kind: ScoreKind,
    radius: float,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-trial score (of kind score_kind) of the node the policy selects.

    +inf marks trials with no candidate (empty realization, or everything
    filtered out by the feedback threshold).
    """
    counts, ds, dd = _sample_batch(cfg.intensity, cfg.d, radius, n, rng)
    out = np.full(n, np.inf)
    if ds.size == 0:
        return out
    crit = _criterion_values(policy.kind, ds, dd)
    if policy.feedback_threshold is not None:
        fb_kind = score_kind_for_policy(policy.kind)
        fb_score = ds * dd if fb_kind is ScoreKind.MIN_PRODUCT else ds + dd
        crit = np.where(fb_score <= policy.feedback_threshold, crit, np.inf)
    score = ds * dd if score_kind is ScoreKind.MIN_PRODUCT else ds + dd

    seg = np.repeat(np.arange(n), counts)
    order = np.lexsort((crit, seg))
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    nonempty = counts > 0
    best = order[starts[nonempty]]
    chosen = np.where(np.isfinite(crit[best]), score[best], np.inf)
    out[nonempty] = chosen
    return out


def _chunk_feedback_counts(
    cfg: NetworkConfig, threshold: float, radius: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    counts, ds, dd = _sample_batch(cfg.intensity, cfg.d, radius, n, rng)
    out = np.zeros(n)
    if ds.size == 0:
        return out
    score = ds * dd if cfg.model is PathLossModel.POWER_LAW else ds + dd
    inside = (score <= threshold).astype(float)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    nonempty = counts > 0
    out[nonempty] = np.add.reduceat(inside, starts[nonempty])
    return out


def _rates_from_scores(
    cfg: NetworkConfig, scores: np.ndarray, m_fading: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-trial rate, averaging log2(1 + snr) over fresh fading draws.

    Fading is drawn for every trial (selected or not) so stream consumption
    stays policy-independent; empty trials contribute zero rate.
    """
    n = scores.size
    scale = 1.0 / math.sqrt(2.0)
    a = rng.rayleigh(scale, (n, m_fading, cfg.n_elements))
    b = rng.rayleigh(scale, (n, m_fading, cfg.n_elements))
    z = (a * b).sum(axis=-1)
    ok = np.isfinite(scores)
    if cfg.model is PathLossModel.POWER_LAW:
        y = np.where(ok, scores, 1.0) ** (-cfg.eta)
    else:
        y = np.exp(-cfg.alpha * np.where(ok, scores, 1.0))
    inst = cfg.avg_snr * y[:, None] * z * z
    rates = np.log1p(inst).mean(axis=1) / math.log(2.0)
    return np.where(ok, rates, 0.0)


def _run_chunk(task) -> object:
    op, cfg, payload, radius, n, rng = task
    if op == "scores":
        policy, score_kind = payload
        return _chunk_scores(cfg, policy, score_kind, radius, n, rng)
    if op == "feedback":
        return _chunk_feedback_counts(cfg, payload, radius, n, rng)
    if op == "outage":
        policy, score_kind, snr_score_cap = payload
        scores = _chunk_scores(cfg, policy, score_kind, radius, n, rng)
        outage = (~(scores < snr_score_cap)).astype(float)
        return np.array([n, outage.sum(), (outage * outage).sum()])
    if op == "rate":
        policy, score_kind, m_fading = payload
        scores = _chunk_scores(cfg, policy, score_kind, radius, n, rng)
        rates = _rates_from_scores(cfg, scores, m_fading, rng)
        return np.array([n, rates.sum(), (rates * rates).sum()])
    raise ValueError(f"unknown chunk op {op!r}")


def _map_chunks(op, cfg, payload, radius, n_trials, rng, workers):
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    source = _as_seed_source(rng)
    n_chunks = (n_trials + _CHUNK_TRIALS - 1) // _CHUNK_TRIALS
    streams = source.spawn(n_chunks)
    sizes = [_CHUNK_TRIALS] * (n_chunks - 1) + [n_trials - _CHUNK_TRIALS * (n_chunks - 1)]
    tasks = [(op, cfg, payload, radius, sz, st) for sz, st in zip(sizes, streams)]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_chunk, tasks))
    return [_run_chunk(t) for t in tasks]


def default_workers() -> int:
    """Worker cap from the RIS_SELECT_THREADS environment variable (>= 1)."""
    raw = os.environ.get("RIS_SELECT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Public estimators
# ---------------------------------------------------------------------------

def policy_scores(
    cfg: NetworkConfig,
    policy: SelectionPolicy,
    n_trials: int,
    rng,
    window_radius_override: float | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Model score of the selected node for each trial (+inf when none).

    Passing the same rng seed and the same window radius to several calls
    gives common random numbers: every policy then sees identical
    realizations, making pathwise comparisons exact.
    """
    _check_policy_model(cfg, policy)
    radius = window_radius_override or coverage_radius(cfg, policy)
    kind = score_kind_for_model(cfg.model)
    chunks = _map_chunks("scores", cfg, (policy, kind), radius, n_trials, rng, workers)
    return np.concatenate(chunks)


def _check_policy_model(cfg: NetworkConfig, policy: SelectionPolicy) -> None:
    if policy.feedback_threshold is None:
        return
    pairs_ok = (
        policy.kind is PolicyKind.OPT_PRODUCT and cfg.model is PathLossModel.POWER_LAW
    ) or (policy.kind is PolicyKind.OPT_SUM and cfg.model is PathLossModel.EXP_LAW)
    if not pairs_ok:
        raise ValueError(f"feedback policy {policy.kind} mismatches path-loss model {cfg.model}")


def mc_distance_dist(
    cfg: NetworkConfig,
    policy_kind: PolicyKind,
    n_trials: int,
    rng,
    workers: int = 1,
) -> EmpiricalDist:
    """Empirical distribution of the optimum score (min product or min sum)."""
    if policy_kind not in (PolicyKind.OPT_PRODUCT, PolicyKind.OPT_SUM):
        raise ValueError(f"distance distributions exist for optimum policies, got {policy_kind}")
    policy = SelectionPolicy(policy_kind)
    score_kind = score_kind_for_policy(policy_kind)
    radius = window_radius(score_kind, cfg.intensity, cfg.d, eps=_WINDOW_EPS)
    chunks = _map_chunks("scores", cfg, (policy, score_kind), radius, n_trials, rng, workers)
    return EmpiricalDist(np.concatenate(chunks))


def _snr_score_cap(cfg: NetworkConfig) -> float:
    """Score below which the fading-averaged SNR strictly exceeds the target."""
    if cfg.target_snr == 0.0:
        return math.inf
    ratio = cfg.avg_snr * ez2(cfg.n_elements) / cfg.target_snr
    if cfg.model is PathLossModel.POWER_LAW:
        return ratio ** (1.0 / cfg.eta)
    return math.log(ratio) / cfg.alpha if ratio > 0 else -math.inf


def mc_outage(
    cfg: NetworkConfig,
    policy: SelectionPolicy,
    n_trials: int,
    rng,
    window_radius_override: float | None = None,
    workers: int = 1,
) -> Estimate:
    """Fraction of realizations whose fading-averaged SNR is <= target.

    Randomness is over node locations only (the SNR is already averaged
    over fading); an empty selection counts as an outage.
    """
    _check_policy_model(cfg, policy)
    radius = window_radius_override or coverage_radius(cfg, policy)
    kind = score_kind_for_model(cfg.model)
    cap = _snr_score_cap(cfg)
    chunks = _map_chunks("outage", cfg, (policy, kind, cap), radius, n_trials, rng, workers)
    n, total, total_sq = np.sum(chunks, axis=0)
    return Estimate.from_moments(int(n), float(total), float(total_sq))


def mc_rate(
    cfg: NetworkConfig,
    policy: SelectionPolicy,
    n_trials: int,
    fading_draws_per_trial: int,
    rng,
    window_radius_override: float | None = None,
    workers: int = 1,
) -> Estimate:
    """Joint average of log2(1 + snr) over node locations and exact fading.

    Fading uses the exact cascaded Rayleigh draw, not the gamma surrogate,
    so agreement with the analytic rate also validates that approximation.
    """
    if fading_draws_per_trial < 1:
        raise ValueError(f"fading_draws_per_trial must be >= 1, got {fading_draws_per_trial}")
    _check_policy_model(cfg, policy)
    radius = window_radius_override or coverage_radius(cfg, policy)
    kind = score_kind_for_model(cfg.model)
    payload = (policy, kind, int(fading_draws_per_trial))
    chunks = _map_chunks("rate", cfg, payload, radius, n_trials, rng, workers)
    n, total, total_sq = np.sum(chunks, axis=0)
    return Estimate.from_moments(int(n), float(total), float(total_sq))


def mc_feedback_dist(
    cfg: NetworkConfig,
    model: PathLossModel,
    threshold: float,
    n_trials: int,
    rng,
    window_radius_override: float | None = None,
    workers: int = 1,
) -> EmpiricalDist:
    """Distribution of the number of nodes whose score is <= threshold.

    The window must contain the whole threshold region so counts are exact;
    an explicitly passed radius that does not is an error.
    """
    if threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    if model is not cfg.model:
        raise ValueError("model argument disagrees with cfg.model")
    kind = score_kind_for_model(model)
    needed = enclosing_radius(kind, threshold, cfg.d)
    radius = window_radius_override if window_radius_override is not None else max(needed, 0.5 * cfg.d)
    if radius < needed * (1.0 - 1e-12):
        raise WindowTooSmallError(
            f"window radius {radius} does not cover the score region (needs {needed})"
        )
    chunks = _map_chunks("feedback", cfg, threshold, radius, n_trials, rng, workers)
    return EmpiricalDist(np.concatenate(chunks))


def poisson_gof(dist: EmpiricalDist, mean: float, min_expected: float = 5.0):
    """Chi-square goodness of fit of integer samples against Poisson(mean).

    Bins with expected count below ``min_expected`` are merged into their
    neighbours.  Returns (statistic, dof, p_value).
    """
    if mean <= 0.0:
        raise ValueError(f"mean must be > 0, got {mean}")
    samples = dist.values.astype(int)
    n = samples.size
    lo = max(0, int(samples.min()) - 1)
    hi = int(samples.max()) + 1
    ks = np.arange(lo, hi + 1)
    pmf = stats.poisson.pmf(ks, mean)
    # open-ended tails so probabilities sum to one
    probs = pmf.copy()
    probs[0] = stats.poisson.cdf(lo, mean)
    probs[-1] = stats.poisson.sf(hi - 1, mean)
    observed = np.bincount(samples - lo, minlength=ks.size).astype(float)

    merged_obs, merged_exp = [], []
    acc_o = acc_e = 0.0
    for o, p in zip(observed, probs):
        acc_o += o
        acc_e += p * n
        if acc_e >= min_expected:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0.0 and merged_exp:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e
    obs = np.asarray(merged_obs)
    exp = np.asarray(merged_exp)
    if obs.size < 2:
        raise ValueError("too few bins with sufficient expected count for a chi-square test")
    stat = float(((obs - exp) ** 2 / exp).sum())
    dof = obs.size - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))
