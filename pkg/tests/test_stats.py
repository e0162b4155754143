"""Statistics engine: descriptives, tests, special functions, oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from signalsim.records import load_fixture_runs
from signalsim.stats import (
    Sample,
    describe,
    f_sf,
    levene,
    log_reg_incomplete_beta,
    normal_cdf,
    normal_quantile,
    pooled_sd,
    reg_incomplete_beta,
    run_full_comparison,
    shapiro_wilk,
    student_t_sf,
    student_t_test,
    welch_t_test,
)


@pytest.fixture(scope="module")
def reference_samples():
    fixed = load_fixture_runs("fixed")
    marl = load_fixture_runs("marl")
    return {
        "fixed_vehicles": Sample.of([r.vehicles_passed for r in fixed]),
        "marl_vehicles": Sample.of([r.vehicles_passed for r in marl]),
        "fixed_wait": Sample.of([r.total_wait for r in fixed]),
        "marl_wait": Sample.of([r.total_wait for r in marl]),
    }


# -- descriptives --------------------------------------------------------------

def test_describe_reference_vehicles(reference_samples):
    d = describe(reference_samples["fixed_vehicles"])
    assert d.mean == pytest.approx(1146.40, abs=0.01)
    assert d.std == pytest.approx(1.54, abs=0.01)
    assert d.variance == pytest.approx(2.36, abs=0.01)
    assert d.minimum == 1143 and d.maximum == 1149
    assert d.median == pytest.approx(1146.00, abs=0.01)


def test_describe_reference_wait(reference_samples):
    d = describe(reference_samples["marl_wait"])
    assert d.mean == pytest.approx(1144.77, abs=0.01)
    assert d.variance == pytest.approx(694.74, abs=0.01)
    assert d.median == pytest.approx(1146.71, abs=0.01)


def test_describe_singleton_flags_undefined_std():
    d = describe(Sample.of([5.0]))
    assert (d.mean, d.std, d.median) == (5.0, 0.0, 5.0)
    assert not d.std_defined


def test_describe_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        Sample.of([])
    with pytest.raises(ValueError):
        Sample.of([1.0, math.nan])


def test_median_even_and_odd():
    assert describe(Sample.of([4, 1, 3, 2])).median == 2.5
    assert describe(Sample.of([4, 1, 3])).median == 3


# -- pooled sd -----------------------------------------------------------------

def _with_variance(var: float, n: int) -> list[float]:
    """Zero-mean sample of size n with exact n-1 variance ``var``."""
    base = [-1.0, 1.0] * (n // 2)
    scale = math.sqrt(var * (n - 1) / sum(v * v for v in base))
    return [v * scale for v in base]


def test_pooled_sd_from_reference_variances():
    a = Sample.of(_with_variance(2.36, 20))
    b = Sample.of(_with_variance(1.71, 20))
    assert a.variance == pytest.approx(2.36, rel=1e-12)
    assert pooled_sd(a, b) == pytest.approx(1.4266, abs=2e-4)


def test_pooled_sd_identical_samples():
    s = Sample.of([1.0, 2.0, 3.0, 4.0])
    assert pooled_sd(s, s) == pytest.approx(s.std)


def test_pooled_sd_constant_samples():
    s = Sample.of([2.0, 2.0, 2.0])
    assert pooled_sd(s, s) == 0.0


def test_pooled_sd_rejects_degenerate_sizes():
    with pytest.raises(ValueError):
        pooled_sd(Sample.of([1.0]), Sample.of([1.0, 2.0]))


# -- Student t -------------------------------------------------------------------

def test_student_t_reference_vehicles(reference_samples):
    r = student_t_test(
        reference_samples["marl_vehicles"], reference_samples["fixed_vehicles"], "greater"
    )
    assert r.t == pytest.approx(14.96, abs=0.01)
    assert r.df == 38
    assert r.cohens_d == pytest.approx(4.73, abs=0.01)
    assert r.log10_p == pytest.approx(-17.09, abs=0.5)
    assert r.p == pytest.approx(8.20e-18, rel=0.05)


def test_student_t_identical_samples_half_p():
    s = Sample.of([1.0, 2.0, 3.0, 4.0, 5.0])
    r = student_t_test(s, s, "greater")
    assert r.t == 0.0
    assert r.p == pytest.approx(0.5)


def test_student_t_antisymmetric_under_swap():
    a = Sample.of([1.0, 2.0, 3.5, 4.0])
    b = Sample.of([2.0, 2.5, 3.0, 6.0])
    p_ab = student_t_test(a, b, "greater").p
    p_ba = student_t_test(b, a, "less").p
    assert p_ab == pytest.approx(p_ba, rel=1e-12)


def test_student_t_directs_unequal_sizes_to_welch():
    with pytest.raises(ValueError, match="welch"):
        student_t_test(Sample.of([1, 2, 3]), Sample.of([1, 2, 3, 4]))


def test_student_t_brute_force_oracle():
    # Independent formula with explicit sums, no shared helpers.
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(5, 30))
        a = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 3), size=n)
        b = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 3), size=n)
        mean_a = sum(a) / n
        mean_b = sum(b) / n
        var_a = sum((v - mean_a) ** 2 for v in a) / (n - 1)
        var_b = sum((v - mean_b) ** 2 for v in b) / (n - 1)
        sp = math.sqrt(((n - 1) * var_a + (n - 1) * var_b) / (2 * n - 2))
        expected_t = (mean_a - mean_b) / (sp * math.sqrt(2.0 / n))
        r = student_t_test(Sample.of(a), Sample.of(b), "greater")
        assert r.t == pytest.approx(expected_t, rel=1e-12)
        assert r.cohens_d == pytest.approx((mean_a - mean_b) / sp, rel=1e-12)


def test_one_tailed_p_monotone_in_t():
    df = 14.0
    ts = np.linspace(-6, 6, 40)
    ps = [student_t_sf(t, df) for t in ts]
    assert all(b < a for a, b in zip(ps, ps[1:]))
    assert student_t_sf(0.0, df) == pytest.approx(0.5)


def test_cohens_d_sign_matches_mean_difference():
    rng = np.random.default_rng(9)
    for _ in range(50):
        a = Sample.of(rng.normal(rng.uniform(-2, 2), 1.0, size=12))
        b = Sample.of(rng.normal(rng.uniform(-2, 2), 1.0, size=12))
        r = student_t_test(a, b, "greater")
        if a.mean != b.mean:
            assert math.copysign(1, r.cohens_d) == math.copysign(1, a.mean - b.mean)


# -- Welch t ---------------------------------------------------------------------

def test_welch_reference_wait(reference_samples):
    r = welch_t_test(
        reference_samples["marl_wait"], reference_samples["fixed_wait"], "less"
    )
    assert r.t == pytest.approx(-209.11, abs=0.05)
    assert r.df == pytest.approx(22.70, abs=0.05)
    assert r.cohens_d == pytest.approx(-66.13, abs=0.05)
    assert r.log10_p == pytest.approx(-38.37, abs=0.5)
    assert r.pooled_sd is None


def test_welch_reduces_to_student_for_equal_variances():
    a = Sample.of([1.0, 2.0, 3.0, 4.0, 5.0])
    b = Sample.of([2.0, 3.0, 4.0, 5.0, 6.0])
    w = welch_t_test(a, b, "greater")
    s = student_t_test(a, b, "greater")
    assert w.t == pytest.approx(s.t, rel=1e-12)
    assert w.df == pytest.approx(s.df, rel=1e-12)
    assert w.p == pytest.approx(s.p, rel=1e-12)


def test_welch_df_bounds_property():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n1 = int(rng.integers(3, 25))
        n2 = int(rng.integers(3, 25))
        a = Sample.of(rng.normal(0, rng.uniform(0.5, 4), n1))
        b = Sample.of(rng.normal(0, rng.uniform(0.5, 4), n2))
        r = welch_t_test(a, b, "greater")
        assert min(n1, n2) - 1 <= r.df + 1e-9
        assert r.df <= n1 + n2 - 2 + 1e-9


def test_welch_degenerate_zero_variance():
    same = Sample.of([3.0, 3.0, 3.0, 3.0])
    r = welch_t_test(same, same, "greater")
    assert r.p == 0.5 and r.degenerate
    higher = Sample.of([4.0, 4.0, 4.0, 4.0])
    r = welch_t_test(higher, same, "greater")
    assert r.p == 0.0 and r.degenerate
    r = welch_t_test(higher, same, "less")
    assert r.p == 1.0 and r.degenerate


# -- Shapiro-Wilk ------------------------------------------------------------------

def test_shapiro_reference_values(reference_samples):
    checks = [
        ("fixed_vehicles", 0.939, 0.225),
        ("marl_vehicles", 0.906, 0.053),
        ("fixed_wait", 0.960, 0.537),
        ("marl_wait", 0.966, 0.679),
    ]
    for key, w_expected, p_expected in checks:
        r = shapiro_wilk(reference_samples[key])
        assert r.W == pytest.approx(w_expected, abs=0.005), key
        assert r.p == pytest.approx(p_expected, abs=0.02), key


def test_shapiro_affine_invariance():
    rng = np.random.default_rng(8)
    x = rng.normal(3.0, 2.0, size=25)
    base = shapiro_wilk(Sample.of(x))
    moved = shapiro_wilk(Sample.of(2.0 * x + 7.0))
    assert moved.W == pytest.approx(base.W, rel=1e-9)
    assert moved.p == pytest.approx(base.p, rel=1e-9)


def test_shapiro_outlier_lowers_w():
    rng = np.random.default_rng(12)
    x = list(rng.normal(0, 1, size=30))
    clean = shapiro_wilk(Sample.of(x)).W
    dirty = shapiro_wilk(Sample.of(x + [25.0])).W
    assert dirty < clean


def test_shapiro_against_scipy_across_sizes():
    from scipy import stats as sstats

    rng = np.random.default_rng(77)
    for n in (3, 4, 6, 11, 12, 20, 50, 120):
        x = rng.normal(size=n)
        mine = shapiro_wilk(Sample.of(x))
        W, p = sstats.shapiro(x)
        assert mine.W == pytest.approx(W, abs=5e-4), n
        assert mine.p == pytest.approx(p, abs=5e-3), n


def test_shapiro_domain_errors():
    with pytest.raises(ValueError):
        shapiro_wilk(Sample.of([1.0, 2.0]))
    with pytest.raises(ValueError):
        shapiro_wilk(Sample.of([2.0] * 10))


# -- Levene -------------------------------------------------------------------------

def test_levene_reference_values(reference_samples):
    r = levene(reference_samples["marl_vehicles"], reference_samples["fixed_vehicles"])
    assert r.F == pytest.approx(0.221, abs=0.05)
    assert r.p == pytest.approx(0.641, abs=0.02)
    r = levene(reference_samples["marl_wait"], reference_samples["fixed_wait"])
    assert r.F == pytest.approx(15.43, abs=0.3)
    assert math.log10(r.p) == pytest.approx(math.log10(3.5e-4), abs=0.5)


def test_levene_shift_invariance():
    rng = np.random.default_rng(3)
    a = rng.normal(0, 1, 15)
    b = rng.normal(0, 2, 15)
    base = levene(Sample.of(a), Sample.of(b))
    moved = levene(Sample.of(a + 100.0), Sample.of(b + 100.0))
    assert moved.F == pytest.approx(base.F, rel=1e-9)


def test_levene_identical_groups_zero():
    s = Sample.of([1.0, 2.0, 3.0, 4.0])
    assert levene(s, s).F == 0.0


def test_levene_mean_centred_variant():
    from scipy import stats as sstats

    rng = np.random.default_rng(6)
    a = rng.normal(0, 1, 20)
    b = rng.normal(0, 3, 20)
    mine = levene(Sample.of(a), Sample.of(b), center="mean")
    F, p = sstats.levene(a, b, center="mean")
    assert mine.F == pytest.approx(F, rel=1e-9)
    assert mine.p == pytest.approx(p, rel=1e-6)


# -- special functions -----------------------------------------------------------

def test_incomplete_beta_boundaries():
    assert reg_incomplete_beta(0.0, 2.0, 3.0) == 0.0
    assert reg_incomplete_beta(1.0, 2.0, 3.0) == 1.0
    assert reg_incomplete_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_incomplete_beta_domain_errors():
    with pytest.raises(ValueError):
        reg_incomplete_beta(-0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        reg_incomplete_beta(0.5, 0.0, 1.0)


def test_incomplete_beta_symmetry_identity():
    rng = np.random.default_rng(101)
    for _ in range(200):
        x = float(rng.uniform(0, 1))
        a = float(rng.uniform(0.1, 30))
        b = float(rng.uniform(0.1, 30))
        lhs = reg_incomplete_beta(x, a, b) + reg_incomplete_beta(1.0 - x, b, a)
        assert lhs == pytest.approx(1.0, abs=1e-12)


def test_incomplete_beta_quadrature_oracle():
    rng = np.random.default_rng(55)
    for _ in range(50):
        x = float(rng.uniform(0.02, 0.98))
        a = float(rng.uniform(0.5, 20))
        b = float(rng.uniform(0.5, 20))
        norm = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b))
        density = lambda u: norm * u ** (a - 1) * (1 - u) ** (b - 1)
        expected, err = integrate.quad(density, 0.0, x, limit=500, epsabs=1e-13, epsrel=1e-13)
        assert err < 1e-11
        assert reg_incomplete_beta(x, a, b) == pytest.approx(expected, abs=1e-9)


def test_log_incomplete_beta_matches_linear_scale():
    rng = np.random.default_rng(66)
    for _ in range(100):
        x = float(rng.uniform(0.01, 0.99))
        a = float(rng.uniform(0.5, 15))
        b = float(rng.uniform(0.5, 15))
        lin = reg_incomplete_beta(x, a, b)
        assert log_reg_incomplete_beta(x, a, b) == pytest.approx(math.log(lin), rel=1e-9)


def test_log_tail_survives_float_underflow():
    from signalsim.stats import log_student_t_sf

    t = 1e10  # the plain tail is below the smallest positive double
    assert student_t_sf(t, 38.0) == 0.0
    log10_p = log_student_t_sf(t, 38.0) / math.log(10)
    assert math.isfinite(log10_p)
    assert log10_p < -300


def test_normal_quantile_roundtrip():
    for p in (1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1 - 1e-9):
        assert normal_cdf(normal_quantile(p)) == pytest.approx(p, rel=1e-10, abs=1e-14)


def test_f_sf_against_scipy():
    from scipy import stats as sstats

    rng = np.random.default_rng(88)
    for _ in range(50):
        f = float(rng.uniform(0.01, 30))
        d1 = float(rng.integers(1, 10))
        d2 = float(rng.integers(2, 60))
        assert f_sf(f, d1, d2) == pytest.approx(sstats.f.sf(f, d1, d2), rel=1e-9, abs=1e-12)


def test_t_sf_against_scipy():
    from scipy import stats as sstats

    rng = np.random.default_rng(99)
    for _ in range(60):
        t = float(rng.uniform(-40, 40))
        df = float(rng.uniform(2, 60))
        assert student_t_sf(t, df) == pytest.approx(sstats.t.sf(t, df), rel=1e-9, abs=1e-300)


# -- full comparison -------------------------------------------------------------

def test_full_comparison_reproduces_reference_analysis():
    fixed = load_fixture_runs("fixed")
    marl = load_fixture_runs("marl")
    report = run_full_comparison(fixed, marl)

    veh = report.vehicles
    assert veh.test_used == "student"
    assert veh.equal_variances
    assert veh.ttest.t == pytest.approx(14.96, abs=0.01)
    assert veh.reject_null

    wait = report.wait
    assert wait.test_used == "welch"
    assert not wait.equal_variances
    assert wait.ttest.t == pytest.approx(-209.11, abs=0.05)
    assert wait.reject_null

    payload = report.to_dict()
    assert payload["metrics"]["vehicles_passed"]["test_used"] == "student"
    assert payload["metrics"]["wait_time_s"]["test_used"] == "welch"
    text = report.render_text()
    assert "student" in text and "welch" in text


def test_full_comparison_self_vs_self_retains_null():
    fixed = load_fixture_runs("fixed")
    report = run_full_comparison(fixed, fixed)
    assert not report.vehicles.reject_null
    assert not report.wait.reject_null
    assert report.vehicles.ttest.p == pytest.approx(0.5)
    assert report.wait.ttest.p == pytest.approx(0.5)


def test_full_comparison_requires_three_runs():
    fixed = load_fixture_runs("fixed")
    with pytest.raises(ValueError):
        run_full_comparison(fixed[:2], fixed)
