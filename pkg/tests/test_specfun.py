"""Special-function kernel against defining-integral and high-precision oracles."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate


def _quiet_quad(f, lo, hi):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-14, limit=400)
    return val

from ris_select.errors import DomainError, NonConvergenceError, PoleError
from ris_select.specfun import (
    SeriesControl,
    digamma,
    ellip_e,
    ellip_e_inc,
    ellip_f_inc,
    ellip_k,
    genhyp,
    log_gamma,
)


def quad_k(m):
    """Defining-integral oracle for the complete first-kind integral."""
    return _quiet_quad(lambda t: (1.0 - m * math.sin(t) ** 2) ** -0.5, 0.0, math.pi / 2)


def quad_e(m):
    return _quiet_quad(lambda t: math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, math.pi / 2)


def quad_f_inc(phi, m):
    return _quiet_quad(lambda t: (1.0 - m * math.sin(t) ** 2) ** -0.5, 0.0, phi)


def quad_e_inc(phi, m):
    return _quiet_quad(lambda t: math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, phi)


class TestCompleteElliptic:
    def test_k_zero(self):
        assert ellip_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)

    def test_k_half_against_quadrature(self):
        assert ellip_k(0.5) == pytest.approx(quad_k(0.5), rel=1e-12)
        # frozen 50-digit value: 1.8540746773013719184
        assert ellip_k(0.5) == pytest.approx(1.8540746773013719, rel=1e-14)

    def test_k_near_one(self):
        assert ellip_k(0.999) == pytest.approx(quad_k(0.999), rel=1e-9)
        assert ellip_k(0.999) == pytest.approx(4.841132560550297, rel=1e-13)

    @pytest.mark.parametrize("m", [-3.0, -0.5, 0.1, 0.2304, 0.7, 0.95])
    def test_k_grid_against_quadrature(self, m):
        assert ellip_k(m) == pytest.approx(quad_k(m), rel=1e-12)

    def test_k_domain(self):
        with pytest.raises(DomainError):
            ellip_k(1.0)
        with pytest.raises(DomainError):
            ellip_k(1.5)

    def test_e_trivial(self):
        assert ellip_e(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
        assert ellip_e(1.0) == 1.0

    @pytest.mark.parametrize("m", [-2.0, -0.3, 0.25, 0.5, 0.9, 0.999])
    def test_e_grid_against_quadrature(self, m):
        assert ellip_e(m) == pytest.approx(quad_e(m), rel=1e-12)

    def test_e_quarter_frozen(self):
        assert ellip_e(0.25) == pytest.approx(1.4674622093394272, rel=1e-14)

    def test_e_domain(self):
        with pytest.raises(DomainError):
            ellip_e(1.0 + 1e-12)

    def test_legendre_relation(self):
        for m in np.arange(0.1, 0.95, 0.1):
            lhs = (
                ellip_e(m) * ellip_k(1 - m)
                + ellip_e(1 - m) * ellip_k(m)
                - ellip_k(m) * ellip_k(1 - m)
            )
            assert abs(lhs - math.pi / 2) < 1e-10


class TestIncompleteElliptic:
    def test_zero_length(self):
        assert ellip_f_inc(0.0, 0.5) == 0.0
        assert ellip_e_inc(0.0, -1.0) == 0.0

    def test_completeness_identity(self):
        assert ellip_e_inc(math.pi / 2, 0.3) == pytest.approx(ellip_e(0.3), rel=1e-12)
        assert ellip_f_inc(math.pi / 2, 0.3) == pytest.approx(ellip_k(0.3), rel=1e-12)

    def test_against_quadrature(self):
        assert ellip_e_inc(0.7, 0.4) == pytest.approx(quad_e_inc(0.7, 0.4), rel=1e-12)
        assert ellip_f_inc(0.7, 0.4) == pytest.approx(quad_f_inc(0.7, 0.4), rel=1e-12)
        # frozen: F(0.7|0.4) = 0.72250536386696848, E(0.7|0.4) = 0.67870535600337449
        assert ellip_f_inc(0.7, 0.4) == pytest.approx(0.7225053638669685, rel=1e-13)
        assert ellip_e_inc(0.7, 0.4) == pytest.approx(0.6787053560033745, rel=1e-13)

    @pytest.mark.parametrize("phi,m", [(0.3, 0.9), (1.1, 0.6), (1.5, 0.2), (0.9, -1.5)])
    def test_grid(self, phi, m):
        assert ellip_f_inc(phi, m) == pytest.approx(quad_f_inc(phi, m), rel=1e-12)
        assert ellip_e_inc(phi, m) == pytest.approx(quad_e_inc(phi, m), rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            ellip_f_inc(-0.1, 0.5)
        with pytest.raises(DomainError):
            ellip_f_inc(1.2, 1.5)  # m sin^2(phi) > 1
        with pytest.raises(DomainError):
            ellip_e_inc(2.0, 0.5)  # phi beyond pi/2

    @settings(max_examples=40, deadline=None)
    @given(
        m=st.floats(min_value=0.05, max_value=0.95),
        lo=st.floats(min_value=0.01, max_value=1.5),
        step=st.floats(min_value=0.01, max_value=0.07),
    )
    def test_monotone_in_phi(self, m, lo, step):
        hi = min(lo + step, math.pi / 2)
        assert ellip_f_inc(hi, m) > ellip_f_inc(lo, m)
        assert ellip_e_inc(hi, m) > ellip_e_inc(lo, m)


class TestDigamma:
    def test_euler_mascheroni(self):
        # psi(1) = -euler_gamma = -0.57721566490153286061 (50-digit oracle)
        assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-12)

    def test_recurrence(self):
        assert digamma(2.0) == pytest.approx(digamma(1.0) + 1.0, abs=1e-12)
        x = 7.31
        assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, abs=1e-12)

    def test_gamma_shape_value(self):
        # frozen oracle: psi(25.758) = 3.229208231000961399
        assert digamma(25.758) == pytest.approx(3.2292082310009614, abs=1e-12)

    def test_negative_arguments(self):
        # reflection check: psi(1-x) - psi(x) = pi * cot(pi x)
        for x in (0.25, 0.8, 2.3):
            lhs = digamma(1.0 - x) - digamma(x)
            assert lhs == pytest.approx(math.pi / math.tan(math.pi * x), rel=1e-11)

    def test_poles(self):
        for x in (0.0, -1.0, -7.0):
            with pytest.raises(PoleError):
                digamma(x)

    def test_log_gamma(self):
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)
        with pytest.raises(PoleError):
            log_gamma(-2.0)


class TestGenhyp:
    def test_z_zero(self):
        assert genhyp([1.3, 4.0], [2.2], 0.0) == 1.0

    @settings(max_examples=30, deadline=None)
    @given(
        a=st.floats(min_value=0.1, max_value=5.0),
        b=st.floats(min_value=0.1, max_value=5.0),
    )
    def test_z_zero_any_params(self, a, b):
        assert genhyp([a], [b, b + 1.0], 0.0) == 1.0

    def test_cancelling_parameter(self):
        # 1F2(a; a, b; z) = 0F1(; b; z); oracle 0F1(;3;0.5) = 1.1774378937768537062
        got = genhyp([2.0], [2.0, 3.0], 0.5)
        assert got == pytest.approx(1.1774378937768537, rel=1e-13)

    def test_2f3_frozen(self):
        # 50-digit summation oracle: 0.98348069064544479067
        got = genhyp([1.0, 1.0], [2.0, 1.5, 2.0], -0.1)
        assert got == pytest.approx(0.9834806906454448, rel=1e-13)

    def test_large_negative_argument_with_negative_denominators(self):
        # worst case of the production rate formula (N=16 at the cutoff);
        # 60-digit oracle value of 2F3(1,1; 2, b2, b3; -105.047...)
        k = 16 * math.pi**2 / (16 - math.pi**2)
        theta = (16 - math.pi**2) / (4 * math.pi)
        z = -1.0 / (4 * theta * theta * 1e-2)
        got = genhyp([1.0, 1.0], [2.0, (3 - k) / 2, (4 - k) / 2], z, SeriesControl(1e-14, 800))
        import mpmath as mp

        mp.mp.dps = 60
        want = float(mp.hyper([1, 1], [2, (3 - k) / 2, (4 - k) / 2], mp.mpf(z)))
        assert got == pytest.approx(want, rel=1e-10)

    def test_partial_sums_bracket_limit(self):
        # alternating z: once terms decrease monotonically, consecutive
        # partial sums straddle the full sum
        a, b, z = [1.0], [2.0, 3.0], -2.0
        limit = genhyp(a, b, z)
        term, partial = 1.0, 1.0
        sums = [partial]
        for n in range(40):
            term *= (a[0] + n) * z / ((b[0] + n) * (b[1] + n) * (n + 1))
            partial += term
            sums.append(partial)
        for lo, hi in zip(sums[5:], sums[6:]):
            assert min(lo, hi) - 1e-15 <= limit <= max(lo, hi) + 1e-15

    def test_pole_parameters(self):
        with pytest.raises(PoleError):
            genhyp([1.0], [-2.0, 1.0], 0.5)
        with pytest.raises(PoleError):
            genhyp([1.0], [-3.0 + 5e-9, 1.0], 0.5)

    def test_non_convergence(self):
        with pytest.raises(NonConvergenceError):
            genhyp([5.0, 5.0, 5.0], [0.5], 40.0, SeriesControl(1e-12, 100))

    def test_series_control_validation(self):
        with pytest.raises(ValueError):
            SeriesControl(rel_tol=0.5)
        with pytest.raises(ValueError):
            SeriesControl(max_terms=10)
