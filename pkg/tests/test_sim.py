import math

import numpy as np
import pytest
from scipy import special as sp

from xbxreg.errors import DomainError
from xbxreg.sim import (PAPER_MU_INTERVALS, PAPER_PHI_INTERVALS, PAPER_U_GRID,
                        SimSetting, desk_settings, gen_dataset,
                        implied_coefficients, paper_settings, results_to_csv,
                        run_comparison, setting_filter, summarize,
                        summary_to_csv)


# ---------------------------------------------------------------------------
# implied coefficients
# ---------------------------------------------------------------------------

def test_implied_coefficients_reference_values():
    beta, gamma = implied_coefficients((0.05, 0.50), (0.5, 10.0))
    assert beta[0] == pytest.approx(-1.472, abs=5e-4)
    assert beta[1] == pytest.approx(1.472, abs=5e-4)
    assert gamma[0] == pytest.approx(0.805, abs=5e-4)
    assert gamma[1] == pytest.approx(1.498, abs=5e-4)


def test_implied_coefficients_asymmetric_interval():
    beta, _ = implied_coefficients((0.05, 0.25), (1.0, 1.0))
    assert beta[0] == pytest.approx((sp.logit(0.05) + sp.logit(0.25)) / 2)
    assert beta[1] == pytest.approx((sp.logit(0.25) - sp.logit(0.05)) / 2)
    assert beta[0] == pytest.approx(-2.022, abs=5e-4)
    assert beta[1] == pytest.approx(0.923, abs=5e-4)


def test_implied_coefficients_constant_mean_has_zero_slope():
    beta, gamma = implied_coefficients((0.3, 0.3), (7.0, 7.0))
    assert beta[1] == 0.0
    assert gamma[1] == 0.0
    assert gamma[0] == pytest.approx(math.log(7.0))


def test_implied_coefficients_roundtrip_at_grid_ends():
    for mu_iv in PAPER_MU_INTERVALS:
        for phi_iv in PAPER_PHI_INTERVALS:
            beta, gamma = implied_coefficients(mu_iv, phi_iv)
            assert sp.expit(beta[0] - beta[1]) == pytest.approx(
                mu_iv[0], abs=1e-12)
            assert sp.expit(beta[0] + beta[1]) == pytest.approx(
                mu_iv[1], abs=1e-12)
            assert math.exp(gamma[0] - gamma[1]) == pytest.approx(
                phi_iv[0], rel=1e-12)
            assert math.exp(gamma[0] + gamma[1]) == pytest.approx(
                phi_iv[1], rel=1e-12)


def test_implied_coefficients_domain_errors():
    with pytest.raises(DomainError):
        implied_coefficients((0.0, 0.5), (1.0, 2.0))
    with pytest.raises(DomainError):
        implied_coefficients((0.1, 1.0), (1.0, 2.0))
    with pytest.raises(DomainError):
        implied_coefficients((0.1, 0.5), (0.0, 2.0))


# ---------------------------------------------------------------------------
# settings and data generation
# ---------------------------------------------------------------------------

def test_setting_validation():
    with pytest.raises(DomainError):
        SimSetting((0.5, 0.2), (1.0, 2.0), 0.1)
    with pytest.raises(DomainError):
        SimSetting((0.2, 0.5), (1.0, 2.0), -0.1)
    with pytest.raises(DomainError):
        SimSetting((0.2, 0.5), (1.0, 2.0), 0.1, n=1)


def test_grid_endpoints():
    s = SimSetting((0.05, 0.50), (0.5, 10.0), 0.1, n=2)
    x, mu, phi = s.grid()
    assert x.tolist() == [-1.0, 1.0]
    assert mu[0] == pytest.approx(0.05, abs=1e-12)
    assert mu[1] == pytest.approx(0.50, abs=1e-12)
    assert phi[0] == pytest.approx(0.5, rel=1e-12)
    assert phi[1] == pytest.approx(10.0, rel=1e-12)


def test_gen_dataset_deterministic():
    s = SimSetting((0.25, 0.75), (5.0, 100.0), 0.25, n=40)
    d1, t1 = gen_dataset(s, 123)
    d2, t2 = gen_dataset(s, 123)
    assert np.array_equal(d1.y, d2.y)
    assert np.array_equal(t1, t2)
    d3, _ = gen_dataset(s, 124)
    assert not np.array_equal(d1.y, d3.y)
    # train and test draws are independent samples
    assert not np.array_equal(d1.y, t1)


def test_gen_dataset_zero_exceedance_has_no_boundaries():
    s = SimSetting((0.25, 0.75), (5.0, 100.0), 0.0, n=60)
    d, t = gen_dataset(s, 5)
    assert np.all((d.y > 0.0) & (d.y < 1.0))
    assert np.all((t > 0.0) & (t < 1.0))


def test_setting_filter_examples():
    # uniform latent mean/precision with huge exceedance: interior
    # probability for XB(0.5, 2, 2) stays above 5%
    assert setting_filter(SimSetting((0.5, 0.5), (2.0, 2.0), 2.0, n=20))
    # extreme mean with large exceedance: almost everything is censored
    assert not setting_filter(
        SimSetting((0.999, 0.999), (100.0, 100.0), 2.0, n=20))
    # zero exceedance always passes
    assert setting_filter(SimSetting((0.999, 0.999), (100.0, 100.0), 0.0,
                                     n=20))


def test_paper_and_desk_setting_counts():
    assert len(PAPER_MU_INTERVALS) == 10
    assert len(PAPER_PHI_INTERVALS) == 7
    assert len(PAPER_U_GRID) == 8
    assert PAPER_U_GRID[0] == 2.0 ** -6
    assert PAPER_U_GRID[-1] == 2.0
    assert len(paper_settings()) == 70
    assert len(desk_settings()) == 4
    for s in desk_settings():
        assert s.n == 500


# ---------------------------------------------------------------------------
# comparison runs
# ---------------------------------------------------------------------------

def _small_run(seed0=42):
    settings = [SimSetting((0.25, 0.75), (5.0, 100.0), 0.0, n=120)]
    return run_comparison(settings, u_grid=(0.0, 0.25), replications=2,
                          seed0=seed0)


def test_run_comparison_deterministic():
    r1 = _small_run()
    r2 = _small_run()
    assert results_to_csv(r1) == results_to_csv(r2)
    r3 = _small_run(seed0=43)
    assert results_to_csv(r1) != results_to_csv(r3)


def test_run_comparison_scores_positive():
    rows = _small_run()
    assert len(rows) == 4  # 1 setting x 2 u values x 2 replications
    for r in rows:
        assert not r.failed
        assert r.S_xbx > 0.0 and r.S_cn > 0.0
        assert r.rel_change == pytest.approx(r.S_cn / r.S_xbx - 1.0,
                                             rel=1e-12)
        assert 0.0 <= r.boundary_fraction <= 1.0


def test_run_comparison_zero_u_has_no_boundaries():
    rows = [r for r in _small_run() if r.setting.u == 0.0]
    assert rows and all(r.boundary_fraction == 0.0 for r in rows)


def test_results_csv_format():
    rows = _small_run()
    text = results_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ("setting_id,mu1,mun,phi1,phin,u,replication,seed,"
                        "S_xbx,S_cn,rel_change,boundary_fraction,"
                        "xbx_converged,cn_converged")
    assert len(lines) == len(rows) + 1


def test_summary_csv_format():
    rows = _small_run()
    summary = summarize(rows)
    text = summary_to_csv(summary)
    lines = text.splitlines()
    assert lines[0] == ("setting_id,u,n_ok,n_failed,"
                        "mean_rel_change,se_rel_change")
    # one summary row per (setting, u) cell
    assert len(lines) == 3
