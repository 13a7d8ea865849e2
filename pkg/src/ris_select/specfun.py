"""Scalar special-function kernel.

Complete and incomplete elliptic integrals, digamma, log-gamma, and the
generalized hypergeometric series.  Everything is plain float arithmetic
with no state, so all functions are safe to call concurrently.

Elliptic integrals use the *parameter* convention throughout: the argument
``m`` multiplies ``sin^2 t`` inside the defining integrals,

    K(m) = int_0^{pi/2} (1 - m sin^2 t)^(-1/2) dt
    E(m) = int_0^{pi/2} (1 - m sin^2 t)^(1/2)  dt

(i.e. ``m = k^2`` relative to the modulus convention).  Complete integrals
are evaluated with the arithmetic-geometric mean, incomplete ones with the
Carlson symmetric forms.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, NonConvergenceError, PoleError

_EPS = sys.float_info.epsilon
_CARLSON_ERRTOL = 1.0e-3  # duplication stopping point; tail error ~ ERRTOL^6


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for hypergeometric series evaluation.

    ``rel_tol`` is the relative size below which running terms are
    considered negligible; ``max_terms`` caps the number of terms before
    the evaluation is declared non-convergent.
    """

    rel_tol: float = 1.0e-14
    max_terms: int = 600

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol <= 1.0e-3:
            raise ValueError(f"rel_tol must be in (0, 1e-3], got {self.rel_tol}")
        if self.max_terms < 100:
            raise ValueError(f"max_terms must be >= 100, got {self.max_terms}")


DEFAULT_SERIES = SeriesControl()


def ellip_k(m: float) -> float:
    """Complete elliptic integral of the first kind, parameter convention.

    Defined for m < 1; diverges as m -> 1-.  Negative m is handled through
    the imaginary-modulus transformation K(m) = K(m/(m-1)) / sqrt(1-m).
    """
    if not m < 1.0:
        raise DomainError(f"ellip_k requires m < 1, got {m}")
    if m < 0.0:
        return ellip_k(m / (m - 1.0)) / math.sqrt(1.0 - m)
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(64):
        if abs(a - b) <= 4.0 * _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def ellip_e(m: float) -> float:
    """Complete elliptic integral of the second kind, parameter convention.

    Defined for m <= 1 with E(1) = 1.  Negative m uses
    E(m) = sqrt(1-m) * E(m/(m-1)).
    """
    if m > 1.0:
        raise DomainError(f"ellip_e requires m <= 1, got {m}")
    if m == 1.0:
        return 1.0
    if m < 0.0:
        return math.sqrt(1.0 - m) * ellip_e(m / (m - 1.0))
    # AGM with the classical deficit sum: E = K * (1 - sum 2^(n-1) c_n^2).
    a, b = 1.0, math.sqrt(1.0 - m)
    s = 0.5 * m
    weight = 0.5
    for _ in range(64):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        s += weight * c * c
        if abs(c) <= 2.0 * _EPS * a:
            break
    k_complete = math.pi / (a + b)
    return k_complete * (1.0 - s)


def _carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_F; arguments >= 0, at most one zero."""
    xt, yt, zt = x, y, z
    while True:
        sx, sy, sz = math.sqrt(xt), math.sqrt(yt), math.sqrt(zt)
        lam = sx * (sy + sz) + sy * sz
        xt, yt, zt = 0.25 * (xt + lam), 0.25 * (yt + lam), 0.25 * (zt + lam)
        mu = (xt + yt + zt) / 3.0
        dx, dy, dz = (mu - xt) / mu, (mu - yt) / mu, (mu - zt) / mu
        if max(abs(dx), abs(dy), abs(dz)) < _CARLSON_ERRTOL:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / math.sqrt(mu)


def _carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_D; x, y >= 0 (at most one zero), z > 0."""
    xt, yt, zt = x, y, z
    total = 0.0
    fac = 1.0
    while True:
        sx, sy, sz = math.sqrt(xt), math.sqrt(yt), math.sqrt(zt)
        lam = sx * (sy + sz) + sy * sz
        total += fac / (sz * (zt + lam))
        fac *= 0.25
        xt, yt, zt = 0.25 * (xt + lam), 0.25 * (yt + lam), 0.25 * (zt + lam)
        mu = 0.2 * (xt + yt + 3.0 * zt)
        dx, dy, dz = (mu - xt) / mu, (mu - yt) / mu, (mu - zt) / mu
        if max(abs(dx), abs(dy), abs(dz)) < _CARLSON_ERRTOL:
            break
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + ec + ec
    tail = 1.0 + ed * (-3.0 / 14.0 + (9.0 / 88.0) * ed - (4.5 / 26.0) * dz * ee) + dz * (
        ee / 6.0 + dz * (-(9.0 / 22.0) * ec + dz * (3.0 / 26.0) * ea)
    )
    return 3.0 * total + fac * tail / (mu * math.sqrt(mu))


def _check_phi(phi: float) -> None:
    if not 0.0 <= phi <= 0.5 * math.pi * (1.0 + 1e-12):
        raise DomainError(f"phi must lie in [0, pi/2], got {phi}")


def ellip_f_inc(phi: float, m: float) -> float:
    """Incomplete elliptic integral of the first kind F(phi | m).

    F(phi | m) = int_0^phi (1 - m sin^2 t)^(-1/2) dt, with 0 <= phi <= pi/2
    and m sin^2(phi) < 1.  F(pi/2 | m) = ellip_k(m).
    """
    _check_phi(phi)
    s = math.sin(phi)
    if s == 0.0:
        return 0.0
    y = 1.0 - m * s * s
    if y <= 0.0:
        raise DomainError(f"ellip_f_inc requires m*sin(phi)^2 < 1, got m={m}, phi={phi}")
    c2 = math.cos(phi) ** 2
    return s * _carlson_rf(c2, y, 1.0)


def ellip_e_inc(phi: float, m: float) -> float:
    """Incomplete elliptic integral of the second kind E(phi | m).

    E(phi | m) = int_0^phi (1 - m sin^2 t)^(1/2) dt, with 0 <= phi <= pi/2
    and m sin^2(phi) <= 1.  E(pi/2 | m) = ellip_e(m).
    """
    _check_phi(phi)
    s = math.sin(phi)
    if s == 0.0:
        return 0.0
    y = 1.0 - m * s * s
    if y < 0.0:
        raise DomainError(f"ellip_e_inc requires m*sin(phi)^2 <= 1, got m={m}, phi={phi}")
    if y == 0.0 and phi >= 0.5 * math.pi * (1.0 - 1e-12):
        return ellip_e(m)
    c2 = math.cos(phi) ** 2
    s3 = s * s * s
    return s * _carlson_rf(c2, y, 1.0) - (m / 3.0) * s3 * _carlson_rd(c2, y, 1.0)


def digamma(x: float) -> float:
    """Digamma function psi(x) for real x excluding the poles at 0, -1, -2...

    Uses the reflection formula for x < 1/2, upward recurrence into the
    asymptotic region, and the Bernoulli-number expansion there.
    """
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"digamma has a pole at {x}")
    if x < 0.5:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    shift = 0.0
    while x < 12.0:
        shift -= 1.0 / x
        x += 1.0
    v = 1.0 / (x * x)
    tail = v * (
        1.0 / 12.0
        - v * (1.0 / 120.0 - v * (1.0 / 252.0 - v * (1.0 / 240.0 - v * (1.0 / 132.0 - v * (691.0 / 32760.0 - v / 12.0)))))
    )
    return shift + math.log(x) - 0.5 / x - tail


def log_gamma(x: float) -> float:
    """log |Gamma(x)| with a pole error at the non-positive integers."""
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"log_gamma has a pole at {x}")
    return math.lgamma(x)


# --- double-double helpers -------------------------------------------------
# Alternating hypergeometric series can pass through term magnitudes many
# orders above their limit before converging; summing those in plain doubles
# voids the result.  The fallback below carries each term as an unevaluated
# pair of doubles (~31 significant digits, fixed precision).

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ca = _SPLITTER * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLITTER * b
    bh = cb - (cb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    s, e = _two_sum(xh, yh)
    e += xl + yl
    h = s + e
    return h, e - (h - s)


def _dd_mul_scalar(xh: float, xl: float, s: float) -> tuple[float, float]:
    p, e = _two_prod(xh, s)
    e += xl * s
    h = p + e
    return h, e - (h - p)


def _dd_div_scalar(xh: float, xl: float, s: float) -> tuple[float, float]:
    q1 = xh / s
    p, e = _two_prod(q1, s)
    rh, rl = _dd_add(xh, xl, -p, -e)
    q2 = (rh + rl) / s
    return _two_sum(q1, q2)


def _dd_mul(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    p, e = _two_prod(xh, yh)
    e += xh * yl + xl * yh
    h = p + e
    return h, e - (h - p)


def _dd_div(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    q1 = xh / yh
    th, tl = _dd_mul_scalar(yh, yl, q1)
    rh, rl = _dd_add(xh, xl, -th, -tl)
    q2 = (rh + rl) / yh
    th, tl = _dd_mul_scalar(yh, yl, q2)
    rh, rl = _dd_add(rh, rl, -th, -tl)
    q3 = (rh + rl) / yh
    h, l = _two_sum(q1, q2)
    l += q3
    h2 = h + l
    return h2, l - (h2 - h)


def _genhyp_sum(a, b, z, ctl: SeriesControl, floor_n: int, use_dd: bool):
    """One summation pass; returns (value, max |term| seen) or raises.

    In the double-double pass every shifted parameter a_i + n and b_j + n is
    kept as an exact sum-of-two-doubles pair: rounding those factors to
    single doubles leaves a coherent error across the whole tail of the
    series, which the cancellation amplifies right back to double precision.
    """
    term = (1.0, 0.0)
    total = (1.0, 0.0)
    max_term = 1.0
    small_streak = 0
    for n in range(ctl.max_terms):
        if use_dd:
            th, tl = _dd_mul_scalar(*term, z)
            for ai in a:
                th, tl = _dd_mul(th, tl, *_two_sum(ai, float(n)))
            for bj in b:
                th, tl = _dd_div(th, tl, *_two_sum(bj, float(n)))
            th, tl = _dd_div_scalar(th, tl, n + 1.0)
        else:
            th = term[0] * z
            for ai in a:
                th *= ai + n
            for bj in b:
                th /= bj + n
            th /= n + 1.0
            tl = 0.0
        term = (th, tl)
        if not math.isfinite(th):
            raise NonConvergenceError("hypergeometric term overflowed")
        total = _dd_add(*total, th, tl) if use_dd else (total[0] + th, 0.0)
        max_term = max(max_term, abs(th))
        if abs(th) <= ctl.rel_tol * abs(total[0]) and n >= floor_n:
            small_streak += 1
            if small_streak >= 3:
                return total[0] + total[1], max_term
        else:
            small_streak = 0
    raise NonConvergenceError(
        f"hypergeometric series did not converge within {ctl.max_terms} terms"
    )


def genhyp(
    p_params: Sequence[float],
    q_params: Sequence[float],
    z: float,
    ctl: SeriesControl = DEFAULT_SERIES,
) -> float:
    """Generalized hypergeometric series pFq(a_1..a_p; b_1..b_q; z).

    Direct term-by-term summation with the ratio recurrence

        t_{n+1} = t_n * prod(a_i + n) / prod(b_j + n) * z / (n + 1).

    Truncates once the running term has stayed below rel_tol * |partial sum|
    for three consecutive terms, but never before the index has passed every
    negative denominator parameter (those cause a transient dip-and-regrowth
    in the term magnitudes that must not trigger early truncation).  When the
    terms grow so far above the limit that plain double summation would lose
    the answer, the pass is redone in compensated double-double arithmetic.

    Denominator parameters within 1e-8 of a non-positive integer are
    rejected as poles rather than regularized.
    """
    a = [float(v) for v in p_params]
    b = [float(v) for v in q_params]
    for bj in b:
        nearest = round(bj)
        if nearest <= 0 and abs(bj - nearest) <= 1e-8:
            raise PoleError(f"denominator parameter {bj} is (nearly) a non-positive integer")
    if z == 0.0:
        return 1.0

    floor_n = 0
    for bj in b:
        if bj < 0.0:
            floor_n = max(floor_n, int(math.ceil(-bj)) + 2)

    value, max_term = _genhyp_sum(a, b, z, ctl, floor_n, use_dd=False)
    if max_term * 4.0 * _EPS > 1e-13 * max(abs(value), sys.float_info.min):
        value, max_term = _genhyp_sum(a, b, z, ctl, floor_n, use_dd=True)
        if max_term * 1e-31 > 1e-12 * abs(value):
            raise NonConvergenceError(
                "series cancellation exceeds double-double precision"
            )
    return value
