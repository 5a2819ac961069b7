"""Behavior of the fixed-policy statistical test helpers."""

import numpy as np
import pytest

from cgmlab.rng import RngSpec, exp_from_uniform
from cgmlab.stats import (DEFAULT_ALPHA, KS_MIN_N, binomial_atom_test,
                          chi_square_pmf, correlation_test, ks_distance,
                          ks_one_sample, ks_two_sample)


def exp1_cdf(x):
    return -np.expm1(-np.asarray(x))


def test_report_json_schema_is_fixed():
    rep = ks_one_sample(np.linspace(0.001, 5.0, 2500), exp1_cdf, "demo", 7,
                        claim="ref")
    d = rep.to_json_dict()
    assert set(d) == {"name", "statistic", "threshold", "n", "seed", "pass",
                      "paper_ref"}
    assert d["name"] == "demo"
    assert d["seed"] == 7
    assert d["paper_ref"] == "ref"
    assert isinstance(d["pass"], bool)
    assert "PASS" in str(rep) or "FAIL" in str(rep)


def test_ks_distance_known_value():
    # empirical cdf of a single point mass at the median of Exp(1)
    d = ks_distance(np.full(100, np.log(2.0)), exp1_cdf)
    assert d == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        ks_distance(np.array([]), exp1_cdf)


def test_ks_refuses_small_samples():
    with pytest.raises(ValueError):
        ks_one_sample(np.ones(KS_MIN_N - 1), exp1_cdf, "small", 0)
    with pytest.raises(ValueError):
        ks_two_sample(np.ones(10), np.ones(5000), "small", 0)


def test_ks_self_calibration():
    # correct-law samples must pass essentially always at alpha 0.001
    passed = 0
    for s in range(100):
        u = RngSpec(60, "cal", replica=s).generator().random(3000)
        rep = ks_one_sample(exp_from_uniform(u, 1.0), exp1_cdf, "cal", s)
        passed += rep.passed
    assert passed >= 99


def test_ks_detects_wrong_scale():
    u = RngSpec(61, "wrong").generator().random(10000)
    sample = exp_from_uniform(u, 1.0)
    rep = ks_one_sample(sample, lambda x: -np.expm1(-np.asarray(x) / 2.0),
                        "wrong-scale", 61)
    assert not rep.passed
    assert rep.statistic > 2.0 * rep.threshold


def test_ks_two_sample_calibration_and_power():
    gen = RngSpec(62, "two").generator()
    a = exp_from_uniform(gen.random(5000), 1.0)
    b = exp_from_uniform(gen.random(5000), 1.0)
    c = exp_from_uniform(gen.random(5000), 1.3)
    assert ks_two_sample(a, b, "same", 62).passed
    assert not ks_two_sample(a, c, "shifted", 62).passed


def test_chi_square_merges_sparse_tail():
    gen = RngSpec(63, "chi").generator()
    probs = np.array([0.5, 0.3, 0.15, 0.04, 0.009, 0.001])
    draws = gen.choice(len(probs), size=2000, p=probs)
    counts = np.bincount(draws, minlength=len(probs))
    rep = chi_square_pmf(counts, probs, "merge", 63)
    assert rep.passed, rep
    # expected counts [1000, 600, 300, 80, 18, 2]: exactly one merge
    assert rep.metadata["bins"] == 5
    assert rep.metadata["df"] == rep.metadata["bins"] - 1
    assert 0.0 <= rep.metadata["p_value"] <= 1.0


def test_chi_square_validation():
    with pytest.raises(ValueError):
        chi_square_pmf([10, 20], [0.5, 0.4], "bad-sum", 0)
    with pytest.raises(ValueError):
        chi_square_pmf([10, 20, 30], [0.5, 0.5], "shape", 0)
    with pytest.raises(ValueError):
        chi_square_pmf([1, 1], [0.5, 0.5], "tiny", 0)


def test_chi_square_detects_wrong_pmf():
    gen = RngSpec(64, "chibad").generator()
    draws = gen.choice(3, size=5000, p=[0.5, 0.3, 0.2])
    counts = np.bincount(draws, minlength=3)
    rep = chi_square_pmf(counts, np.array([0.4, 0.4, 0.2]), "off", 64)
    assert not rep.passed


def test_binomial_atom_bounds():
    rep = binomial_atom_test(5000, 10000, 0.5, "fair", 0)
    assert rep.passed and rep.threshold == 3.0
    assert rep.metadata["hits"] == 5000
    rep = binomial_atom_test(5300, 10000, 0.5, "biased", 0)
    assert not rep.passed
    with pytest.raises(ValueError):
        binomial_atom_test(1, 0, 0.5, "n", 0)
    with pytest.raises(ValueError):
        binomial_atom_test(1, 10, 1.0, "p", 0)


def test_correlation_bound_and_errors():
    gen = RngSpec(65, "corr").generator()
    x = gen.random(10000)
    y = gen.random(10000)
    rep = correlation_test(x, y, "indep", 65)
    assert rep.passed
    assert rep.threshold == pytest.approx(4.0 / np.sqrt(10000))
    rep = correlation_test(x, 0.5 * x + 0.5 * y, "coupled", 65)
    assert not rep.passed
    with pytest.raises(ValueError):
        correlation_test(x[:10], y[:10], "few", 65)
    with pytest.raises(ValueError):
        correlation_test(np.ones(100), y[:100], "flat", 65)
    with pytest.raises(ValueError):
        correlation_test(x[:100], y[:200], "shape", 65)
