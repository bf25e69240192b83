"""Oracles: quadrature routes, Monte-Carlo estimators, KS machinery."""

import math

import numpy as np
import pytest

from rislink.errors import DomainError
from rislink.fading import MODEL_DRAW, PHYSICAL_DRAW, FadingParams
from rislink.metrics import LinkConfig, avg_ber, avg_capacity, outage
from rislink.validation import (
    BER,
    CAPACITY,
    OUTAGE,
    CiEstimate,
    McConfig,
    ks_statistic,
    mc_metric,
    physical_model_capacity_gap,
    quad_ber,
    quad_capacity,
    quad_outage,
    run_oracle_grid,
)

F15 = FadingParams(1.0, 5.0)


def cfg_eta(eta, fading=F15, n=1, lam=1.0):
    return LinkConfig.from_eta(eta, fading, n, lambda_mod=lam)


class TestMcConfig:
    def test_minimum_samples(self):
        with pytest.raises(DomainError):
            McConfig(n_samples=5000, seed=1)

    def test_mode_validated(self):
        with pytest.raises(DomainError):
            McConfig(n_samples=10_000, seed=1, mode="nope")


class TestQuadCapacity:
    def test_vanishing_power(self):
        r = quad_capacity(cfg_eta(1e-12))
        assert 0.0 <= r.value <= 1e-9 * 10

    def test_agrees_with_closed_form(self):
        for n, m, m_s, eta in [(1, 1.0, 5.0, 100.0), (8, 4.0, 2.0, 10.0), (32, 1.0, 5.0, 1e3)]:
            cfg = cfg_eta(eta, FadingParams(m, m_s), n)
            q = quad_capacity(cfg).value
            c = avg_capacity(cfg).value
            assert abs(c - q) / q <= 1e-6

    def test_near_asymptote_point(self):
        assert quad_capacity(cfg_eta(100.0)).value == pytest.approx(5.9597, abs=0.08)


class TestQuadBer:
    def test_deep_noise(self):
        assert quad_ber(cfg_eta(1e-13)).value == pytest.approx(0.5, abs=1e-6)
        assert quad_ber(cfg_eta(1e-9)).value == pytest.approx(
            avg_ber(cfg_eta(1e-9)).value, rel=1e-6
        )

    def test_never_exceeds_half(self):
        for eta in (1e-6, 1e-2, 1.0, 1e2, 1e4):
            assert quad_ber(cfg_eta(eta, F15, 4)).value <= 0.5

    def test_agrees_with_closed_form_in_logs(self):
        for n, m, m_s, eta in [(1, 1.0, 5.0, 100.0), (16, 1.0, 2.0, 100.0), (32, 4.0, 5.0, 1e4)]:
            cfg = cfg_eta(eta, FadingParams(m, m_s), n)
            lq = quad_ber(cfg).diagnostics["log_value"]
            lc = avg_ber(cfg).diagnostics["log_value"]
            assert abs(math.expm1(lc - lq)) <= 1e-6


class TestQuadOutage:
    def test_agrees_with_closed_form_in_logs(self):
        for n, m, m_s, eta, gth in [
            (1, 1.0, 5.0, 100.0, 1.0),
            (8, 1.0, 5.0, 100.0, 2.0),
            (32, 4.0, 2.0, 1e3, 2.0),
        ]:
            cfg = cfg_eta(eta, FadingParams(m, m_s), n)
            lq = quad_outage(cfg, gth).diagnostics["log_value"]
            lc = outage(cfg, gth).diagnostics["log_value"]
            assert abs(math.expm1(lc - lq)) <= 1e-6

    def test_relative_accuracy_near_certain_outage(self):
        # the scaled integral is ~1e-25 here; quadrature must stay
        # relatively accurate rather than bottoming out on epsabs
        cfg = cfg_eta(0.0076, FadingParams(3.737, 4.233), 2)
        lq = quad_outage(cfg, 6.382).diagnostics["log_value"]
        lc = outage(cfg, 6.382).diagnostics["log_value"]
        assert abs(math.expm1(lc - lq)) <= 1e-6

    def test_domain(self):
        with pytest.raises(DomainError):
            quad_outage(cfg_eta(1.0), -2.0)


class TestMcMetric:
    def test_outage_at_negligible_threshold(self):
        est = mc_metric(cfg_eta(100.0), OUTAGE, McConfig(10_000, 3), gamma_th=1e-200)
        assert est.mean == 0.0 and est.std_error == 0.0

    def test_capacity_band(self):
        cfg = cfg_eta(100.0)
        est = mc_metric(cfg, CAPACITY, McConfig(1_000_000, 11))
        closed = avg_capacity(cfg).value
        assert abs(est.mean - closed) <= 3.0 * est.std_error

    def test_ber_modes_agree_at_n1(self):
        # matched mean power makes the two draw modes identical in law
        m_s = 5.0
        fading = FadingParams(1.0, m_s, g_bar=m_s / (m_s - 1.0))
        cfg = cfg_eta(10.0, fading, 1)
        a = mc_metric(cfg, BER, McConfig(200_000, 21, MODEL_DRAW))
        b = mc_metric(cfg, BER, McConfig(200_000, 22, PHYSICAL_DRAW))
        combined = math.hypot(a.std_error, b.std_error)
        assert abs(a.mean - b.mean) <= 3.0 * combined

    def test_deterministic(self):
        cfg = cfg_eta(50.0, F15, 4)
        mc = McConfig(50_000, 1234)
        a = mc_metric(cfg, CAPACITY, mc)
        b = mc_metric(cfg, CAPACITY, mc)
        assert a == b  # bit-identical dataclass equality

    def test_requires_threshold_for_outage(self):
        with pytest.raises(DomainError):
            mc_metric(cfg_eta(1.0), OUTAGE, McConfig(10_000, 5))

    def test_unknown_metric(self):
        with pytest.raises(DomainError):
            mc_metric(cfg_eta(1.0), "snr", McConfig(10_000, 5))


class TestKsStatistic:
    def test_self_consistency(self):
        rng = np.random.default_rng(60)
        n = 10**5
        x = rng.standard_normal(n)
        from scipy.stats import norm

        stat = ks_statistic(x, norm.cdf)
        assert stat < 1.63 / math.sqrt(n)

    def test_scipy_agreement(self):
        from scipy.stats import kstest, norm

        rng = np.random.default_rng(61)
        x = rng.standard_normal(2000)
        ours = ks_statistic(x, norm.cdf)
        theirs = float(kstest(x, norm.cdf).statistic)
        assert ours == pytest.approx(theirs, abs=1e-12)

    def test_degenerate_mass(self):
        x = np.full(500, 0.5)
        from scipy.stats import norm

        assert ks_statistic(x, norm.cdf) >= 0.5

    def test_permutation_invariance(self):
        rng = np.random.default_rng(62)
        x = rng.exponential(size=1000)
        from scipy.stats import expon

        a = ks_statistic(x, expon.cdf)
        b = ks_statistic(rng.permutation(x), expon.cdf)
        assert a == b

    def test_minimum_size(self):
        with pytest.raises(DomainError):
            ks_statistic(np.arange(10), lambda v: v)


class TestOracleGrid:
    def test_smoke_grid_green(self):
        checks = run_oracle_grid("smoke", master_seed=42)
        assert len(checks) == 40  # 8 points x (1 cap + 2 ber + 2 outage)
        assert all(c.ok for c in checks)
        worst = max(c.rel_gap_quad for c in checks)
        assert worst <= 1e-6

    def test_thread_invariance(self):
        from rislink.cli import _check_row

        a = run_oracle_grid("smoke", master_seed=7, n_samples=10_000)
        b = run_oracle_grid("smoke", master_seed=7, n_samples=10_000, max_workers=4)
        assert [_check_row(c) for c in a] == [_check_row(c) for c in b]

    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            run_oracle_grid("quick")


class TestModeGap:
    def test_capacity_gap_small_for_many_cells(self):
        diag = physical_model_capacity_gap(8, F15, eta=100.0, seed=5)
        assert diag["rel_gap"] < 0.03
