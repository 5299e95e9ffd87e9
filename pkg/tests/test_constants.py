from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from onebit_dme.constants import (
    ALPHA_STAR_ROUNDED,
    HellingerCheckConfig,
    T_of_f,
    alpha_objective,
    alpha_star,
    check_eta_condition,
    check_hellinger_bound,
    constants_for,
    eta,
    find_h_star,
    h,
    h_inverse,
    h_inverse_inner,
    h_inverse_outer,
    h_prime,
    hellinger_ratios,
    hellinger_sq_bernoulli,
    t_integral_forms,
)
from onebit_dme.densities import GGD, HyperbolicSecant, Logistic, Sin2Custom
from onebit_dme.errors import BoundViolation, ConvergenceError, DomainError

FOUR = [GGD(1.5), Logistic(), HyperbolicSecant(), Sin2Custom()]
IDS = [d.label for d in FOUR]


def bisect(fn, lo, hi, tol=1e-13):
    """Plain bisection used as an oracle independent of scipy root finders."""
    flo = fn(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestH:
    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_zero_at_origin(self, d):
        assert h(d, 0.0) == 0.0

    def test_gaussian_value(self):
        d = GGD(2.0)
        assert h(d, 1.0) == pytest.approx(2 * math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-12)

    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_derivative_matches_finite_difference(self, d):
        x = np.linspace(0.05, 5, 60)
        step = 1e-6
        num = (h(d, x + step) - h(d, x - step)) / (2 * step)
        np.testing.assert_allclose(h_prime(d, x), num, rtol=1e-5, atol=1e-9)


class TestHStar:
    def test_gaussian_calculus(self):
        x_star, h_star = find_h_star(GGD(2.0))
        assert x_star == pytest.approx(1.0, abs=1e-9)
        assert h_star == pytest.approx(0.483941449, rel=1e-8)

    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_dense_grid_oracle(self, d):
        x = np.linspace(0, 10, 1_000_001)
        hv = h(d, x)
        i = int(np.argmax(hv))
        x_star, h_star = find_h_star(d)
        assert x_star == pytest.approx(x[i], abs=1e-4)
        assert h_star >= hv[i] - 1e-12
        assert h(d, x_star) == pytest.approx(h_star, rel=1e-14)

    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_stationary(self, d):
        x_star, _ = find_h_star(d)
        step = 1e-6
        assert abs((h(d, x_star + step) - h(d, x_star - step)) / (2 * step)) < 1e-8

    def test_sin2_reference(self):
        x_star, h_star = find_h_star(Sin2Custom())
        assert x_star == pytest.approx(0.4854, rel=5e-3)
        assert h_star == pytest.approx(0.4607, rel=5e-3)


class TestHInverse:
    def test_at_max(self):
        d = Logistic()
        x_star, h_star = find_h_star(d)
        assert h_inverse_outer(d, h_star) == pytest.approx(x_star, abs=1e-6)
        assert h_inverse_inner(d, h_star) == pytest.approx(x_star, abs=1e-6)

    def test_gaussian_outer_roundtrip(self):
        d = GGD(2.0)
        assert h_inverse_outer(d, h(d, 2.0)) == pytest.approx(2.0, abs=1e-9)
        assert h_inverse_inner(d, h(d, 0.3)) == pytest.approx(0.3, abs=1e-9)

    def test_sin2_half_height_bisection(self):
        d = Sin2Custom()
        x_star, h_star = find_h_star(d)
        t = 0.5 * h_star
        grid = np.linspace(x_star, 10, 100001)
        j = int(np.argmax(h(d, grid) < t))
        ref = bisect(lambda x: h(d, x) - t, grid[j - 1], grid[j])
        assert h_inverse_outer(d, t) == pytest.approx(ref, abs=1e-9)
        assert h_inverse_outer(d, t) > x_star

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_domain_low(self, t):
        with pytest.raises(DomainError):
            h_inverse(Logistic(), t)

    def test_domain_high(self):
        d = Logistic()
        with pytest.raises(DomainError):
            h_inverse(d, find_h_star(d)[1] * 1.001)

    def test_bad_branch(self):
        with pytest.raises(DomainError):
            h_inverse(Logistic(), 0.1, branch="middle")


@pytest.mark.parametrize("d", FOUR, ids=IDS)
@settings(max_examples=100, deadline=None)
@given(u=st.floats(min_value=1e-6, max_value=1.0))
def test_h_inverse_roundtrip(d, u):
    t = u * find_h_star(d)[1]
    for branch in ("inner", "outer"):
        assert h(d, h_inverse(d, t, branch)) == pytest.approx(t, abs=1e-8)


class TestT:
    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_two_forms_agree(self, d):
        direct, subst = t_integral_forms(d, "inner")
        assert direct == pytest.approx(subst, rel=1e-5)

    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_independent_quadrature(self, d):
        # integration by parts of the inner form: x* phi'(x*) h* - int_0^x* (phi' x)' h dx
        x_star, h_star = find_h_star(d)
        step = 1e-6

        def g(x):
            return (d.phi_prime(x + step) * (x + step) - d.phi_prime(x - step) * (x - step)) / (2 * step)

        inner, _ = integrate.quad(lambda x: g(x) * h(d, x), 1e-9, x_star, epsabs=1e-13, limit=200)
        ref = x_star * d.phi_prime(x_star) * h_star - inner
        assert T_of_f(d) == pytest.approx(ref, rel=1e-6)

    def test_sin2_reference(self):
        assert T_of_f(Sin2Custom()) == pytest.approx(0.0246, rel=5e-3)

    def test_ggd_reference(self):
        assert T_of_f(GGD(1.5)) == pytest.approx(0.040068, rel=2e-3)

    def test_logistic_reference(self):
        assert T_of_f(Logistic()) == pytest.approx(0.088992, rel=2e-3)

    @pytest.mark.parametrize("d", [GGD(1.5), Logistic(), HyperbolicSecant()], ids=lambda d: d.label)
    def test_outer_branch_forms_agree(self, d):
        direct, subst = t_integral_forms(d, "outer")
        assert direct == pytest.approx(subst, rel=1e-5)
        assert T_of_f(d, "outer") > 10 * T_of_f(d, "inner")

    def test_outer_branch_sin2_raises(self):
        # h is not monotone past x* for the rippled density, so the two forms part ways
        with pytest.raises(ConvergenceError):
            T_of_f(Sin2Custom(), "outer")


class TestAlphaStar:
    def test_value(self):
        t_star, a = alpha_star()
        assert a == pytest.approx(0.10340, abs=5e-5)
        assert abs(a - ALPHA_STAR_ROUNDED) < 5e-5

    def test_objective_zero(self):
        assert alpha_objective(0.0) == 0.0

    def test_local_max(self):
        t_star, a = alpha_star()
        assert alpha_objective(t_star - 1e-3) < a
        assert alpha_objective(t_star + 1e-3) < a

    def test_unimodal(self):
        t = np.arange(0, 5, 1e-4)
        dv = np.diff(alpha_objective(t))
        assert np.count_nonzero(np.diff(np.sign(dv)) != 0) == 1


class TestConstantsFor:
    @pytest.mark.parametrize("d", FOUR, ids=IDS)
    def test_invariants(self, d):
        c = constants_for(d)
        assert c.c_adapt == pytest.approx(1 / (4 * d.pdf(0.0) ** 2), rel=1e-14)
        assert c.c_non == pytest.approx(c.alpha_star / c.T, rel=1e-14)
        assert c.c_non_rounded == pytest.approx(ALPHA_STAR_ROUNDED / c.T, rel=1e-14)
        assert h(d, c.x_star) == pytest.approx(c.h_star, rel=1e-12)
        for v in (c.x_star, c.h_star, c.T, c.alpha_star, c.c_non, c.c_adapt, c.f0):
            assert math.isfinite(v) and v > 0

    def test_gaussian_c_adapt(self):
        assert constants_for(GGD(2.0)).c_adapt == pytest.approx(math.pi / 2, abs=1e-6)

    def test_hypsecant(self):
        c = constants_for(HyperbolicSecant())
        assert c.c_adapt == pytest.approx(1.0, rel=1e-12)
        assert c.c_non == pytest.approx(1.1239, rel=2e-3)

    def test_sin2(self):
        c = constants_for(Sin2Custom())
        assert c.c_non == pytest.approx(4.1982, rel=2e-3)
        assert c.c_adapt == pytest.approx(1.3868, rel=2e-3)
        assert c.ratio == pytest.approx(3.0272, rel=2e-3)
        assert c.z_std == pytest.approx(0.8665, rel=5e-3)

    def test_as_dict(self):
        d = constants_for(Logistic()).as_dict()
        assert d["dist"] == "logistic"
        assert d["ratio"] == pytest.approx(d["c_non"] / d["c_adapt"])


class TestEta:
    @pytest.mark.parametrize("d", FOUR + [GGD(3.0)], ids=lambda d: d.label)
    def test_origin_identity(self, d):
        assert eta(d, 0.0) == pytest.approx(4 * d.pdf(0.0) ** 2, rel=1e-14)

    @pytest.mark.parametrize("d", [GGD(1.2), GGD(1.5), GGD(2.0), Logistic(), HyperbolicSecant()],
                             ids=lambda d: d.label)
    def test_holds(self, d):
        res = check_eta_condition(d)
        assert res and res.violation is None

    def test_fails_for_light_tails(self):
        res = check_eta_condition(GGD(3.0))
        assert not res
        x1, x2 = res.violation
        assert x1 < x2 and eta(GGD(3.0), x2) > eta(GGD(3.0), x1)


class TestHellinger:
    def test_identical(self):
        assert hellinger_sq_bernoulli(0.3, 0.3) == pytest.approx(0.0, abs=1e-16)

    def test_disjoint(self):
        assert hellinger_sq_bernoulli(0.0, 1.0) == pytest.approx(1.0)

    def test_direct_formula(self):
        ref = 1 - (math.sqrt(0.30) + math.sqrt(0.20))
        summed = 0.5 * ((math.sqrt(0.5) - math.sqrt(0.6)) ** 2 + (math.sqrt(0.5) - math.sqrt(0.4)) ** 2)
        assert hellinger_sq_bernoulli(0.5, 0.6) == pytest.approx(ref, rel=1e-12)
        assert hellinger_sq_bernoulli(0.5, 0.6) == pytest.approx(summed, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(p=st.floats(0, 1), q=st.floats(0, 1))
    def test_symmetric_and_bounded(self, p, q):
        a, b = hellinger_sq_bernoulli(p, q), hellinger_sq_bernoulli(q, p)
        assert a == pytest.approx(b, abs=1e-15)
        assert -1e-15 <= a <= 1 + 1e-15
        if p != q:
            assert a > 0 or abs(p - q) < 1e-7

    def test_deep_tail_negligible(self):
        r = hellinger_ratios(Logistic(), 1e-3, np.array([-20.0, 20.0]))
        assert np.all(r < 1e-6)

    def test_epsilon_trend(self):
        d = Logistic()
        thetas = np.arange(-6, 6.005, 0.01)
        big = hellinger_ratios(d, 1e-2, thetas).max()
        small = hellinger_ratios(d, 1e-3, thetas).max()
        assert big >= small * (1 - 0.05)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            HellingerCheckConfig(epsilon=0.1)
        with pytest.raises(DomainError):
            HellingerCheckConfig(theta_grid=(0.0, 1.0))

    def test_threshold_at_origin_ratio(self):
        # Taylor expansion of H^2 for a threshold at 0 gives 2 f0^2 (derived independently here)
        d = Sin2Custom()
        r = hellinger_ratios(d, 1e-4, np.array([0.0]))[0]
        assert r == pytest.approx(2 * d.f0**2, rel=1e-3)

    def test_report_and_violation(self):
        d = Logistic()
        cfg = HellingerCheckConfig()
        rep = check_hellinger_bound(d, cfg, bound=T_of_f(d, "outer"))
        assert rep.passed and rep.max_ratio <= rep.bound
        with pytest.raises(BoundViolation) as exc:
            check_hellinger_bound(d, cfg)
        assert exc.value.ratio > exc.value.epsilon
