"""Ensemble determinism, fluctuation statistics, oracles, and audits."""

import itertools
import math

import numpy as np
import pytest

from syklab.errors import ResourceGuardError
from syklab.clifford import product_trace
from syklab.hamiltonian import GAUSSIAN, RADEMACHER, UNIFORM_SCALED, enumerate_index_set
from syklab.harness import (
    ExperimentConfig,
    batch_means_se,
    config_from_dict,
    config_hash,
    config_to_dict,
    effective_a,
    empirical_covariance,
    exact_covariance_oracle,
    gaussian_variance_constant,
    known_linear_statistic_mean,
    lipschitz_concentration_audit,
    lipschitz_menu,
    normality_test,
    recompute_summary,
    run_ensemble,
    scaled_fluctuations,
    variance_bound_audit,
)
from syklab.spectrum import Polynomial

X2 = Polynomial((0.0, 0.0, 1.0))


@pytest.fixture(scope="module")
def small_gaussian_record():
    cfg = ExperimentConfig(12, 4, GAUSSIAN, X2, 400, seed=31, parallel_width=1)
    return run_ensemble(cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(9, 2, GAUSSIAN, X2, 10, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(8, 0, GAUSSIAN, X2, 10, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(8, 2, GAUSSIAN, X2, 1, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(8, 2, GAUSSIAN, X2, 10, -1)


def test_resource_guard_fires_before_work():
    cfg = ExperimentConfig(24, 2, GAUSSIAN, X2, 10, 0)
    with pytest.raises(ResourceGuardError):
        run_ensemble(cfg)


def test_determinism_across_widths():
    base = dict(n=10, q=4, dist=GAUSSIAN, f=X2, samples=16, seed=99)
    r1 = run_ensemble(ExperimentConfig(**base, parallel_width=1))
    r2 = run_ensemble(ExperimentConfig(**base, parallel_width=2))
    assert np.array_equal(r1.values, r2.values)
    assert np.array_equal(r1.moments, r2.moments)
    assert r1.summary == r2.summary


def test_rademacher_square_statistic_is_constant():
    cfg = ExperimentConfig(10, 4, RADEMACHER, X2, 64, seed=5)
    rec = run_ensemble(cfg)
    assert np.max(np.abs(rec.values - 1.0)) < 1e-12
    assert rec.summary["scaled_variance"] < 1e-18
    assert np.max(np.abs(scaled_fluctuations(rec))) < 1e-10


def test_scaled_fluctuations_use_known_mean(small_gaussian_record):
    rec = small_gaussian_record
    assert known_linear_statistic_mean(rec.config.f) == 1.0
    fl = scaled_fluctuations(rec)
    binom = rec.config.binom
    assert np.allclose(fl, math.sqrt(binom) * (rec.values - 1.0))


def test_known_mean_only_for_low_degree():
    assert known_linear_statistic_mean(Polynomial((2.0, 1.0))) == 2.0
    assert known_linear_statistic_mean(Polynomial((0.0, 0.0, 0.0, 1.0))) is None
    assert known_linear_statistic_mean(lipschitz_menu("clipped_abs")) is None


@pytest.mark.parametrize(
    "dist", [GAUSSIAN, UNIFORM_SCALED, RADEMACHER], ids=["gauss", "unif", "rad"]
)
def test_scaled_variance_approaches_gamma_minus_one(dist):
    cfg = ExperimentConfig(12, 4, dist, X2, 400, seed=17, parallel_width=1)
    rec = run_ensemble(cfg)
    target = dist.gamma - 1.0
    se = rec.summary["scaled_variance_se"]
    if target == 0.0:
        assert rec.summary["scaled_variance"] < 1e-18
    else:
        assert abs(rec.summary["scaled_variance"] - target) <= 3.0 * se


def test_summary_recomputable_from_rows(small_gaussian_record):
    rec = small_gaussian_record
    redone = recompute_summary(rec.config, rec.values.copy(), rec.moments.copy())
    for key, val in rec.summary.items():
        if isinstance(val, float):
            assert redone[key] == pytest.approx(val, abs=1e-12)
        else:
            assert redone[key] == val


def test_empirical_covariance_square_case(small_gaussian_record):
    rec = small_gaussian_record
    cov22 = empirical_covariance(rec, 2, 2)
    assert cov22 == pytest.approx(rec.summary["scaled_variance"], rel=1e-12)
    se = rec.summary["scaled_variance_se"]
    assert abs(cov22 - 2.0) <= 3.0 * se


def test_empirical_covariance_odd_pairs_near_zero(small_gaussian_record):
    rec = small_gaussian_record
    cov23 = empirical_covariance(rec, 2, 3)
    binom = rec.config.binom
    se = batch_means_se(
        np.arange(rec.config.samples),
        lambda idx: binom * float(np.cov(rec.moments[idx, 1], rec.moments[idx, 2], ddof=1)[0, 1]),
    )
    assert abs(cov23) <= 4.0 * se


def test_normality_calibration_synthetic():
    rng = np.random.default_rng(404)
    passes = 0
    for _ in range(50):
        draws = rng.normal(0.0, math.sqrt(2.0), 5000)
        if normality_test(draws, 2.0, alpha=0.01).passed:
            passes += 1
    assert passes >= 49


def test_normality_degenerate_cases():
    zeros = np.zeros(600)
    res = normality_test(zeros, 0.0)
    assert res.passed and res.statistic == 0.0
    res = normality_test(np.linspace(0, 1, 600), 0.0)
    assert not res.passed and "zero-variance" in res.detail
    with pytest.raises(ValueError):
        normality_test(np.zeros(100), 1.0)
    with pytest.raises(ValueError):
        normality_test(zeros, -1.0)


def test_normality_rejects_wrong_variance():
    rng = np.random.default_rng(7)
    draws = rng.normal(0.0, 1.0, 5000)
    assert not normality_test(draws, 4.0).passed


# ---------------------------------------------------------------------------
# exact covariance oracle
# ---------------------------------------------------------------------------


def naive_covariance_oracle(n, q, k, kp):
    sets = enumerate_index_set(n, q)
    ni = len(sets)
    K = k + kp
    g = GAUSSIAN.moment
    total = 0j
    for tup in itertools.product(range(ni), repeat=K):
        m_all, m_1, m_2 = {}, {}, {}
        for p, i in enumerate(tup):
            m_all[i] = m_all.get(i, 0) + 1
            part = m_1 if p < k else m_2
            part[i] = part.get(i, 0) + 1
        w = math.prod(g(m) for m in m_all.values()) - math.prod(
            g(m) for m in m_1.values()
        ) * math.prod(g(m) for m in m_2.values())
        if w == 0.0:
            continue
        total += w * product_trace([sets[i] for i in tup[:k]]) * product_trace(
            [sets[i] for i in tup[k:]]
        )
    value = (1j) ** ((q // 2) * K) * total * ni ** (1 - K / 2)
    assert abs(value.imag) < 1e-12
    return value.real


def test_oracle_square_case_exact():
    assert exact_covariance_oracle(8, 2, 2, 2) == pytest.approx(2.0, abs=1e-12)
    assert exact_covariance_oracle(10, 4, 2, 2) == pytest.approx(2.0, abs=1e-12)


def test_oracle_odd_parity_vanishes():
    assert exact_covariance_oracle(8, 2, 2, 3) == 0.0
    assert exact_covariance_oracle(8, 2, 1, 4) == 0.0


@pytest.mark.parametrize("k,kp", [(2, 2), (2, 4), (3, 3), (1, 3)])
def test_oracle_matches_naive_enumeration(k, kp):
    assert exact_covariance_oracle(4, 2, k, kp) == pytest.approx(
        naive_covariance_oracle(4, 2, k, kp), abs=1e-12
    )


def test_oracle_matches_naive_for_odd_q():
    for k, kp in [(2, 2), (2, 4)]:
        assert exact_covariance_oracle(4, 3, k, kp) == pytest.approx(
            naive_covariance_oracle(4, 3, k, kp), abs=1e-12
        )


def test_oracle_matches_monte_carlo():
    n, q = 6, 2
    exact = exact_covariance_oracle(n, q, 2, 4)
    cfg = ExperimentConfig(n, q, GAUSSIAN, X2, 3000, seed=88, parallel_width=1)
    rec = run_ensemble(cfg)
    emp = empirical_covariance(rec, 2, 4)
    binom = cfg.binom
    se = batch_means_se(
        np.arange(cfg.samples),
        lambda idx: binom * float(np.cov(rec.moments[idx, 1], rec.moments[idx, 3], ddof=1)[0, 1]),
    )
    assert abs(emp - exact) <= 3.0 * se


def test_oracle_budget_guard():
    with pytest.raises(ResourceGuardError):
        exact_covariance_oracle(20, 4, 4, 4)


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------


def test_variance_bound_audit_k1_vanishes(small_gaussian_record):
    audit = variance_bound_audit(12, 4, 1, GAUSSIAN, 400, record=small_gaussian_record)
    assert audit.ratio < 1e-15
    assert audit.passed


def test_variance_bound_audit_k2(small_gaussian_record):
    audit = variance_bound_audit(12, 4, 2, GAUSSIAN, 400, record=small_gaussian_record)
    assert audit.bound == 32.0
    assert audit.ratio == pytest.approx(audit.scaled_variance / 32.0)
    assert audit.ratio < 0.2
    assert audit.passed


def test_variance_bound_audit_fresh_run_matches_record(small_gaussian_record):
    fresh = variance_bound_audit(12, 4, 2, GAUSSIAN, 400, seed=31)
    reused = variance_bound_audit(12, 4, 2, GAUSSIAN, 400, record=small_gaussian_record)
    assert fresh.scaled_variance == pytest.approx(reused.scaled_variance, rel=1e-12)


def test_variance_bound_audit_requires_gaussian():
    with pytest.raises(ValueError):
        variance_bound_audit(12, 4, 2, RADEMACHER, 100)


def test_gaussian_variance_constants():
    assert gaussian_variance_constant(2) == 32
    assert gaussian_variance_constant(4) == 6144


def test_lipschitz_audit_passes_for_menu():
    cfg = ExperimentConfig(10, 4, GAUSSIAN, lipschitz_menu("clipped_abs"), 300, seed=2)
    audit = lipschitz_concentration_audit(cfg)
    assert audit.bound == 8.0
    assert audit.scaled_variance <= audit.bound
    assert audit.passed
    assert len(audit.tail_levels) == 3
    assert all(0.0 <= fr <= 1.0 for fr in audit.tail_frequencies)


def test_lipschitz_audit_requires_gaussian_and_constant():
    cfg = ExperimentConfig(10, 4, RADEMACHER, lipschitz_menu("clipped_abs"), 50, seed=2)
    with pytest.raises(ValueError):
        lipschitz_concentration_audit(cfg)
    cfg = ExperimentConfig(10, 4, GAUSSIAN, X2, 50, seed=2)
    with pytest.raises(ValueError):
        lipschitz_concentration_audit(cfg)  # polynomials declare no Lipschitz constant


# ---------------------------------------------------------------------------
# config (de)serialization
# ---------------------------------------------------------------------------


def test_config_roundtrip():
    cfg = ExperimentConfig(12, 4, UNIFORM_SCALED, X2, 50, seed=3, parallel_width=2)
    back = config_from_dict(config_to_dict(cfg))
    assert back == cfg


def test_config_roundtrip_tabulated():
    cfg = ExperimentConfig(12, 4, GAUSSIAN, lipschitz_menu("sine"), 50, seed=3)
    back = config_from_dict(config_to_dict(cfg))
    assert isinstance(back.f, type(cfg.f))
    assert np.array_equal(back.f.xs, cfg.f.xs)
    assert np.array_equal(back.f.ys, cfg.f.ys)


def test_config_hash_ignores_execution_fields():
    a = ExperimentConfig(12, 4, GAUSSIAN, X2, 50, seed=3, parallel_width=1)
    b = ExperimentConfig(12, 4, GAUSSIAN, X2, 50, seed=3, parallel_width=4,
                         dump_eigenvalues=True)
    c = ExperimentConfig(12, 4, GAUSSIAN, X2, 50, seed=4)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)


def test_effective_a_reflection():
    assert effective_a(16, 4) == 1.0
    assert effective_a(16, 12) == 1.0
    assert effective_a(400, 20) == 1.0
