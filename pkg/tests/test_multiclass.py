"""Multiline and coupled chain updates, stationary sampling, intertwining."""

import numpy as np
import pytest

from cgmlab.rng import RngSpec, SeqWindow, sample_exp_window
from cgmlab.queueing import BoundaryPolicy, queue_D
from cgmlab.multiclass import (MultiConfig, build_triangular_arrays,
                               check_independence_structure,
                               check_intertwining_dynamics, coupled_step, dmap,
                               multiline_step, sample_mu_rho)
from cgmlab.stats import correlation_test, ks_one_sample, ks_two_sample

BURN = BoundaryPolicy.burn_in(0.2)


def exp_cdf(mean):
    return lambda x: -np.expm1(-np.asarray(x) / mean)


def random_config(spec, means=(1.6, 2.5, 4.0), length=300):
    lines = [sample_exp_window(1, length, m, spec.sub(f"L{i}"))
             for i, m in enumerate(means)]
    return MultiConfig.from_lines(lines, rates=means)


def test_config_accessors_and_validation():
    cfg = random_config(RngSpec(1, "cfg"))
    assert cfg.n_lines == 3
    assert cfg.length == 300
    assert cfg.end == 301
    assert cfg.line(1).offset == 1
    with pytest.raises(ValueError):
        MultiConfig.from_lines([SeqWindow(0, [1.0]), SeqWindow(1, [1.0])])
    with pytest.raises(ValueError):
        MultiConfig(0, np.ones(3))


def test_single_line_step_is_departure_map():
    spec = RngSpec(2, "one")
    line = sample_exp_window(1, 200, 2.0, spec.sub("I"))
    svc = sample_exp_window(1, 200, 1.0, spec.sub("w"))
    cfg = MultiConfig.from_lines([line])
    stepped = multiline_step(cfg, svc, BoundaryPolicy.given(0.0))
    dep = queue_D(line, svc, BoundaryPolicy.given(0.0))
    np.testing.assert_allclose(stepped.values[0], dep.values, atol=1e-12)
    coupled = coupled_step(cfg, svc, BoundaryPolicy.given(0.0))
    np.testing.assert_allclose(coupled.values[0], dep.values, atol=1e-12)


def test_dmap_warns_when_means_not_increasing():
    spec = RngSpec(3, "warn")
    lines = [sample_exp_window(1, 100, 4.0, spec.sub("a")),
             sample_exp_window(1, 100, 2.0, spec.sub("b"))]
    with pytest.warns(UserWarning):
        dmap(MultiConfig.from_lines(lines), BoundaryPolicy.given(0.0))


def test_mu_rho_line_marginals():
    rates = (1.5, 2.0, 4.0)
    cfg = sample_mu_rho(rates, 1, 30000, RngSpec(11, "mu"), BURN)
    for i, r in enumerate(rates):
        rep = ks_one_sample(cfg.values[i], exp_cdf(r), f"line{i}", 11)
        assert rep.passed, rep


def test_mu_rho_tied_rates_duplicate_lines():
    cfg = sample_mu_rho((2.0, 2.0), 1, 2000, RngSpec(12, "tie"), BURN)
    np.testing.assert_array_equal(cfg.values[0], cfg.values[1])
    mixed = sample_mu_rho((2.0, 3.0, 2.0), 1, 2000, RngSpec(13, "tie2"), BURN)
    np.testing.assert_array_equal(mixed.values[0], mixed.values[2])
    assert not np.array_equal(mixed.values[0], mixed.values[1])


def test_mu_rho_increment_atom_mass():
    # rates (1, rho): the line difference has a zero atom of mass 1/rho
    rho = 2.0
    cfg = sample_mu_rho((1.0, rho), 1, 60000, RngSpec(14, "atom"), BURN)
    d = (cfg.values[1] - cfg.values[0])[::4]
    hits = int(np.sum(d == 0.0))
    p0 = 1.0 / rho
    z = abs(hits - len(d) * p0) / np.sqrt(len(d) * p0 * (1 - p0))
    assert z < 3.0


def test_consistency_under_dropping_a_line():
    # removing the middle rate leaves the remaining joint law unchanged
    full = sample_mu_rho((1.5, 2.0, 4.0), 1, 30000, RngSpec(15, "full"), BURN)
    thin = sample_mu_rho((1.5, 4.0), 1, 30000, RngSpec(16, "thin"), BURN)
    for a, b in ((0, 0), (2, 1)):
        rep = ks_two_sample(full.values[a], thin.values[b], f"line{a}{b}", 15)
        assert rep.passed, rep
    d_full = (full.values[2] - full.values[0])[::4]
    d_thin = (thin.values[1] - thin.values[0])[::4]
    rep = ks_two_sample(d_full, d_thin, "diff", 15)
    assert rep.passed, rep


def test_monotone_coupling_under_rate_scaling():
    # shared uniforms and homogeneous maps: scaling every rate scales the draw
    a = sample_mu_rho((1.5, 2.0, 4.0), 1, 4000, RngSpec(17, "scale"), BURN)
    b = sample_mu_rho((1.8, 2.4, 4.8), 1, 4000, RngSpec(17, "scale"), BURN)
    assert np.all(b.values >= a.values)
    np.testing.assert_allclose(b.values, 1.2 * a.values, rtol=1e-9)


def test_multiline_step_preserves_marginals():
    rates = (1.6, 2.5, 4.5)
    spec = RngSpec(18, "step")
    lines = [sample_exp_window(1, 30000, r, spec.sub(f"line{i}"))
             for i, r in enumerate(rates)]
    cfg = MultiConfig.from_lines(lines, rates)
    svc = sample_exp_window(1, 30000, 1.0, spec.sub("svc"))
    out = multiline_step(cfg, svc, BURN)
    for i, r in enumerate(rates):
        rep = ks_one_sample(out.values[i], exp_cdf(r), f"after{i}", 18)
        assert rep.passed, rep
    for a, b in ((0, 1), (1, 2)):
        rep = correlation_test(out.values[a], out.values[b], f"cross{a}{b}", 18)
        assert rep.passed, rep


def test_coupled_step_preserves_joint_law():
    rates = (1.5, 3.0)
    base = sample_mu_rho(rates, 1, 30000, RngSpec(19, "base"), BURN)
    pre = sample_mu_rho(rates, 1, 37500, RngSpec(19, "pre"), BURN)
    svc = sample_exp_window(pre.offset, pre.length, 1.0, RngSpec(19, "svc"))
    out = coupled_step(pre, svc, BURN)
    for i in range(2):
        rep = ks_two_sample(base.values[i], out.values[i], f"line{i}", 19)
        assert rep.passed, rep
    d0 = (base.values[1] - base.values[0])[::4]
    d1 = (out.values[1] - out.values[0])[::4]
    rep = ks_two_sample(d0, d1, "diff", 19)
    assert rep.passed, rep


def test_triangular_diagonal_matches_iterated_departures():
    spec = RngSpec(20, "tri")
    cfg = random_config(spec, means=(1.8, 3.0, 5.0), length=400)
    tri = build_triangular_arrays(cfg, BoundaryPolicy.given(0.0))
    # validate=True has already asserted the interior diagonal; spot-check shape
    assert tri.n_lines == 3
    diag = tri.diagonal()
    ref = dmap(cfg, BoundaryPolicy.given(0.0))
    cut = int(0.2 * ref.length)
    np.testing.assert_allclose(diag.values[-1][cut:], ref.values[-1][cut:],
                               atol=1e-9)


def test_triangular_single_line_is_identity():
    cfg = random_config(RngSpec(21, "tri1"), means=(2.0,), length=50)
    tri = build_triangular_arrays(cfg, BoundaryPolicy.given(0.0))
    np.testing.assert_array_equal(tri.diagonal().values[0], cfg.values[0])


def test_triangular_column_marginals():
    # every unused-stage entry keeps the exponential law of its stage column
    rates = (2.0, 3.5, 5.5)
    spec = RngSpec(22, "tricol")
    length = 30000
    lines = [sample_exp_window(1, length, r, spec.sub(f"line{i}"))
             for i, r in enumerate(rates)]
    cfg = MultiConfig.from_lines(lines, rates)
    tri = build_triangular_arrays(cfg, BURN, validate=False)
    cut = int(0.2 * length)
    for i in range(3):
        for j in range(i + 1):
            rep = ks_one_sample(tri.xi[i][j].values[cut:], exp_cdf(rates[j]),
                                f"xi{i}{j}", 22)
            assert rep.passed, rep


def test_intertwining_dynamics_exact():
    spec = RngSpec(23, "dyn")
    cfg = random_config(spec, means=(1.9, 3.0, 5.0), length=500)
    svc = sample_exp_window(1, 500, 1.0, spec.sub("svc"))
    rep = check_intertwining_dynamics(cfg, svc)
    assert rep.max_abs_error < 1e-9


def test_independence_structure_bound():
    # independent exponential input lines; probe index deep enough that the
    # zero boundary state has washed out
    spec = RngSpec(24, "indep")
    rates = (1.6, 3.2)
    arrays = []
    for r in range(4000):
        lines = [sample_exp_window(1, 40, rate, spec.sub(f"rep{r}/line{i}"))
                 for i, rate in enumerate(rates)]
        cfg = MultiConfig.from_lines(lines, rates)
        arrays.append(build_triangular_arrays(cfg, BoundaryPolicy.given(0.0),
                                              validate=False))
    rep = check_independence_structure(arrays, k=20)
    assert rep.passed, rep
    assert rep.max_cross_corr < rep.bound
