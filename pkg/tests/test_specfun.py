"""Special-function kernel: oracle values, identities, method agreement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from rislink.errors import DomainError, NumericError
from rislink.specfun import (
    CLOSED_IDENTITY,
    CONTOUR_QUADRATURE,
    RESIDUE_SERIES,
    EvalReport,
    MeijerGSpec,
    _contour_quadrature,
    _log_2f1_pfaff,
    _series_2f1,
    _try_residue_series,
    beta,
    digamma,
    gauss_2f1,
    ln_gamma,
    meijer_g,
    q_function,
)


def euler_gamma_oracle(n: int = 2000) -> float:
    """Euler-Mascheroni constant from the harmonic series tail expansion."""
    h = sum(1.0 / k for k in range(1, n + 1))
    return h - math.log(n) - 1.0 / (2 * n) + 1.0 / (12 * n**2)


class TestLnGamma:
    def test_at_one(self):
        assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-14)

    def test_factorial_oracle(self):
        assert ln_gamma(5.0) == pytest.approx(math.log(math.factorial(4)), rel=1e-13)

    def test_half(self):
        assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-13)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("nan"), float("inf")])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            ln_gamma(x)

    @given(st.floats(min_value=0.5, max_value=50.0))
    @settings(max_examples=60, deadline=None)
    def test_recurrence(self, x):
        assert abs(ln_gamma(x + 1.0) - ln_gamma(x) - math.log(x)) <= 1e-12


class TestDigamma:
    def test_euler_mascheroni(self):
        assert digamma(1.0) == pytest.approx(-euler_gamma_oracle(), abs=1e-11)

    def test_harmonic_shift(self):
        want = digamma(1.0) + 1.0 + 0.5 + 1.0 / 3.0 + 0.25
        assert digamma(5.0) == pytest.approx(want, abs=1e-12)
        assert digamma(5.0) == pytest.approx(1.5061176684318003, abs=1e-10)

    def test_recurrence_at_two(self):
        assert digamma(2.0) == pytest.approx(digamma(1.0) + 1.0, abs=1e-12)

    @given(st.floats(min_value=0.1, max_value=100.0))
    @settings(max_examples=60, deadline=None)
    def test_recurrence(self, x):
        assert abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(-2.0)


class TestBeta:
    def test_ones(self):
        assert beta(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)

    def test_one_n(self):
        assert beta(1.0, 5.0) == pytest.approx(0.2, rel=1e-13)

    def test_factorials(self):
        # B(2,3) = 1!*2!/4! = 1/12
        assert beta(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)

    def test_no_overflow(self):
        v = beta(500.0, 500.0)
        assert 0.0 < v < 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            beta(0.0, 1.0)


class TestQFunction:
    def test_zero(self):
        assert q_function(0.0) == 0.5

    def test_far_tail_underflows_gracefully(self):
        assert q_function(40.0) == pytest.approx(0.0, abs=1e-300)

    def test_inverse_normal_oracle(self):
        x = float(norm.isf(0.1))
        assert q_function(x) == pytest.approx(0.1, rel=1e-12)
        assert x == pytest.approx(1.2815515655, abs=1e-9)

    @given(st.floats(min_value=-8.0, max_value=8.0))
    @settings(max_examples=80, deadline=None)
    def test_symmetry(self, x):
        assert abs(q_function(x) + q_function(-x) - 1.0) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            q_function(float("nan"))


class TestGauss2F1:
    def test_empty_series(self):
        assert gauss_2f1(3.7, 1.2, 2.5, 0.0) == 1.0

    def test_log_identity_inside_disk(self):
        # 2F1(1,1;2;z) = -ln(1-z)/z
        assert gauss_2f1(1.0, 1.0, 2.0, -1.0) == pytest.approx(math.log(2.0), rel=1e-13)

    def test_log_identity_pfaff_region(self):
        assert gauss_2f1(1.0, 1.0, 2.0, -4.0) == pytest.approx(
            math.log(5.0) / 4.0, rel=1e-13
        )

    @pytest.mark.parametrize("z", [-0.05, -0.2, -0.5, -0.8, -0.95])
    def test_direct_vs_pfaff_agree(self, z):
        direct, _, _ = _series_2f1(1.3, 0.7, 2.1, z)
        via_pfaff = math.exp(_log_2f1_pfaff(1.3, 0.7, 2.1, z))
        assert via_pfaff == pytest.approx(direct, rel=1e-10)

    @pytest.mark.parametrize("z", [-0.3, -0.9, -2.0, -7.5, -40.0])
    def test_scipy_cross_check(self, z):
        from scipy.special import hyp2f1

        assert gauss_2f1(2.2, 1.4, 3.1, z) == pytest.approx(
            float(hyp2f1(2.2, 1.4, 3.1, z)), rel=1e-10
        )

    def test_large_params_stable(self):
        # alternating direct series would cancel catastrophically here
        from scipy.special import hyp2f1

        got = gauss_2f1(288.0, 128.0, 129.0, -0.5)
        assert got == pytest.approx(float(hyp2f1(288.0, 128.0, 129.0, -0.5)), rel=1e-9)

    def test_c_pole_rejected(self):
        with pytest.raises(DomainError):
            gauss_2f1(1.0, 1.0, -3.0, -0.5)

    def test_positive_argument_rejected(self):
        with pytest.raises(DomainError):
            gauss_2f1(1.0, 1.0, 2.0, 0.5)

    def test_term_cap_is_loud(self):
        with pytest.raises(NumericError):
            gauss_2f1(1.0, 1.0, 2.0, -1e9)


def g11_spec(a: float, b: float, z: float) -> MeijerGSpec:
    return MeijerGSpec([a], [], [b], [], z)


def log_spec(z: float) -> MeijerGSpec:
    return MeijerGSpec([1.0, 1.0], [], [1.0], [0.0], z)


def erfc_spec(z: float) -> MeijerGSpec:
    return MeijerGSpec([], [1.0], [0.0, 0.5], [], z)


class TestMeijerGSpec:
    def test_collision_rejected(self):
        with pytest.raises(DomainError):
            MeijerGSpec([1.0], [], [0.0], [], 1.0)

    def test_collision_larger_integer_rejected(self):
        with pytest.raises(DomainError):
            MeijerGSpec([2.0], [], [0.0], [0.5], 1.0)

    def test_zero_difference_allowed(self):
        MeijerGSpec([1.0], [], [1.0], [], 1.0)

    def test_nonpositive_argument_rejected(self):
        with pytest.raises(DomainError):
            g11_spec(-1.0, 1.0, 0.0)

    def test_shape_properties(self):
        s = MeijerGSpec([0.1, 0.2], [0.3], [1.5], [2.5, 3.5], 1.0)
        assert (s.m, s.n, s.p, s.q) == (1, 2, 3, 3)


class TestMeijerGIdentities:
    def test_binomial_kernel_example(self):
        # a = 1 - 2, b = 1, z = 1: Gamma(3) * 1 * 2^-3
        r = meijer_g(g11_spec(-1.0, 1.0, 1.0))
        assert r.method == CLOSED_IDENTITY
        assert r.value == pytest.approx(0.25, rel=1e-12)

    @pytest.mark.parametrize("m,m_s,z", [(1.0, 2.0, 0.7), (2.5, 5.0, 3.0), (0.5, 1.5, 10.0)])
    def test_binomial_kernel_general(self, m, m_s, z):
        r = meijer_g(g11_spec(1.0 - m_s, m, z))
        want = math.gamma(m + m_s) * z**m * (1.0 + z) ** (-(m + m_s))
        assert r.value == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("z", [0.1, 1.0, 10.0, 100.0])
    def test_log_kernel(self, z):
        r = meijer_g(log_spec(z))
        assert r.value == pytest.approx(math.log1p(z), rel=1e-9)

    @pytest.mark.parametrize("z", [0.01, 1.0, 4.0])
    def test_erfc_kernel(self, z):
        from scipy.special import erfc

        r = meijer_g(erfc_spec(z))
        want = math.sqrt(math.pi) * float(erfc(math.sqrt(z)))
        assert r.value == pytest.approx(want, rel=1e-9)
        assert z != 1.0 or r.value == pytest.approx(0.2788055852806619, rel=1e-9)

    def test_report_invariants(self):
        for spec in (g11_spec(-1.0, 1.0, 1.0), log_spec(5.0), erfc_spec(1.0)):
            r = meijer_g(spec)
            assert isinstance(r, EvalReport)
            assert np.isfinite(r.abs_error_estimate)
            assert r.abs_error_estimate >= 0.0
            assert r.sign in (-1.0, 0.0, 1.0)
            assert r.value == pytest.approx(
                r.sign * math.exp(r.log_abs_value), rel=1e-12
            )

    def test_methods_agree_within_estimates(self):
        # the erfc kernel admits both the series and the contour
        spec = erfc_spec(1.0)
        series = _try_residue_series(spec)
        contour = _contour_quadrature(spec)
        assert series is not None and series.method == RESIDUE_SERIES
        assert contour.method == CONTOUR_QUADRATURE
        gap = abs(series.value - contour.value)
        assert gap <= series.abs_error_estimate + contour.abs_error_estimate

    def test_methods_agree_log_kernel(self):
        spec = log_spec(0.25)
        series = _try_residue_series(spec)
        contour = _contour_quadrature(spec)
        assert series is not None
        gap = abs(series.value - contour.value)
        assert gap <= series.abs_error_estimate + contour.abs_error_estimate

    def test_cancelling_pole_families_fall_through_to_contour(self):
        # two far-apart lower parameters make the residue families cancel
        # each other dozens of digits deep; the series guard must reject
        # and the contour must carry the value
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        spec = MeijerGSpec(
            [1.0, 1.0, -53.537], [], [74.403, 1.0], [0.0], 0.40405797979240027
        )
        got = meijer_g(spec)
        assert got.method == CONTOUR_QUADRATURE
        ref = complex(
            mp.meijerg(
                [[1.0, 1.0, -53.537], []],
                [[74.403, 1.0], [0.0]],
                mp.mpf("0.40405797979240027"),
            )
        )
        assert got.sign * math.exp(got.log_abs_value - math.log(abs(ref.real))) \
            == pytest.approx(1.0, rel=1e-9)

    def test_family_hump_not_truncated_early(self):
        # terms of the lower-parameter families decay, regrow around the
        # gamma zero crossings, then decay for good; stopping in the
        # valley must not happen
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 25
        spec = MeijerGSpec([0.2], [], [12.5, 0.0], [], 0.3)
        got = meijer_g(spec)
        ref = complex(mp.meijerg([[0.2], []], [[12.5, 0.0], []], 0.3))
        assert got.value == pytest.approx(ref.real, rel=1e-9)

    def test_no_separating_contour_is_loud(self):
        # coincident right poles block the series, overlapping families
        # block the contour
        spec = MeijerGSpec([3.2], [], [0.5, 1.5], [], 0.5)
        with pytest.raises(DomainError):
            meijer_g(spec)

    @pytest.mark.parametrize(
        "spec,mp_args",
        [
            (
                MeijerGSpec([0.0, -0.5, -10.0, 0.0], [], [1.0], [0.0, -1.0], 0.01),
                ([[0.0, -0.5, -10.0, 0.0], []], [[1.0], [0.0, -1.0]], 0.01),
            ),
            (
                MeijerGSpec([0.3], [1.2], [0.7, 1.9], [0.1], 2.5),
                ([[0.3], [1.2]], [[0.7, 1.9], [0.1]], 2.5),
            ),
            (
                MeijerGSpec([1.0, 1.0, -3.0], [], [8.0, 1.0], [0.0], 40.0),
                ([[1.0, 1.0, -3.0], []], [[8.0, 1.0], [0.0]], 40.0),
            ),
        ],
    )
    def test_mpmath_cross_check(self, spec, mp_args):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 25
        ref = complex(mp.meijerg(*mp_args))
        assert abs(ref.imag) <= 1e-12 * abs(ref.real)
        got = meijer_g(spec)
        assert got.value == pytest.approx(ref.real, rel=1e-9)
