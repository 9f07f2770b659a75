import math

import numpy as np
import pytest

from csslm import (HyperParams, KernelSpec, RegimeKind, closed_form_mu0, gram, make_dataset,
                   recover_degenerate, recover_main, train)
from csslm.problems import RegimeMismatch
from csslm.train import SolverFailure, UnboundedRegimeError, free_tolerance

from instances import SYMMETRIC_HP, one_class_pair, symmetric, two_point

LIN = KernelSpec.linear()


def _center(model):
    return model.support_beta @ model.support_points


def test_symmetric_benchmark(sym_model):
    m = sym_model
    assert m.regime.kind is RegimeKind.MAIN_QP
    np.testing.assert_allclose(_center(m), [0, 0], atol=1e-6)
    assert m.r == pytest.approx(1.0, abs=1e-6)
    assert m.t == pytest.approx(3.0, abs=1e-6)
    np.testing.assert_allclose(m.alpha, [0.9, 0.9, 0.4, 0.4], atol=1e-5)
    assert m.objective == pytest.approx(-0.7, abs=1e-6)
    assert m.g_objective == pytest.approx(-0.175, abs=1e-7)
    assert m.diagnostics["kkt_max_residual"] <= 1e-8
    u = m.diagnostics["uniqueness"]
    assert u["radius_unique"] and u["margin_unique"] and u["center_unique"]


def test_symmetric_model_invariants(sym_model, sym_data):
    m, d = sym_model, sym_data
    K = gram(LIN, d)
    beta = m.beta_full()
    np.testing.assert_allclose(beta, d.labels * m.alpha / (d.size * m.hyper.nu))
    bkb = beta @ K @ beta
    assert m.s == pytest.approx(bkb - m.r, rel=1e-8, abs=1e-12)
    assert m.beta_k_beta == pytest.approx(bkb)
    assert m.r >= 0 and m.t >= 0


def test_degenerate_benchmark(deg_model):
    m = deg_model
    assert m.regime.kind is RegimeKind.DEGENERATE_QP
    assert m.regime.lam == pytest.approx(0.25)
    np.testing.assert_allclose(_center(m), [-2, 0], atol=1e-6)
    assert m.r == 0.0
    assert m.t == pytest.approx(16.0, abs=1e-5)
    assert m.g_objective == pytest.approx(-1.0, abs=1e-6)
    np.testing.assert_allclose(m.alpha, [0.5], atol=1e-9)
    # beta = 1/(l lam) on positives, -alpha/(l lam) on negatives
    np.testing.assert_allclose(m.beta_full(), [2.0, -1.0], atol=1e-9)
    assert m.diagnostics["uniqueness"]["margin_unique"]


def test_one_class_pair(pair_model):
    m = pair_model
    np.testing.assert_allclose(m.alpha, [0.5, 0.5], atol=1e-7)
    assert m.r == pytest.approx(1.0, abs=1e-7)
    assert m.t == 0.0
    np.testing.assert_allclose(_center(m), [0, 0], atol=1e-7)
    assert m.diagnostics["uniqueness"]["radius_unique"]


def test_closed_form_examples():
    hp = HyperParams(1.0, 0.0)
    d = make_dataset([[0, 0], [2, 0], [10, 0]], [1, 1, -1])
    m = train(d, LIN, hp)
    assert m.regime.kind is RegimeKind.TRIVIAL
    np.testing.assert_array_equal(_center(m), [1, 0])
    assert (m.r, m.t) == (0.0, 81.0)

    d = make_dataset([[0, 0], [2, 0]], [1, 1])
    m = closed_form_mu0(gram(LIN, d), d, hp, LIN)
    np.testing.assert_array_equal(_center(m), [1, 0])
    assert (m.r, m.t) == (0.0, 0.0)

    d = make_dataset([[0, 0], [2, 0], [10, 0], [-4, 0]], [1, 1, -1, -1])
    assert train(d, LIN, hp).t == 25.0


def test_closed_form_regime_guard():
    d = symmetric()
    with pytest.raises(RegimeMismatch):
        closed_form_mu0(gram(LIN, d), d, SYMMETRIC_HP, LIN)


def test_unbounded_raises():
    with pytest.raises(UnboundedRegimeError, match=r"min\{m/l, b\*n/l\} = 0.5"):
        train(symmetric(), LIN, HyperParams(0.1, 0.6))


def test_recover_main_symmetric():
    d = symmetric()
    beta, r, t, rep, _ = recover_main(np.array([0.9, 0.9, 0.4, 0.4]), gram(LIN, d), d,
                                      SYMMETRIC_HP)
    assert (r, t) == pytest.approx((1.0, 3.0), abs=1e-12)
    assert rep.radius_unique and rep.margin_unique
    assert rep.free_positive_sv is not None and rep.free_negative_sv is not None
    assert rep.r_width <= 1e-12 and rep.t_width <= 1e-12


def test_recover_main_one_class():
    d = one_class_pair()
    _, r, t, rep, _ = recover_main(np.array([0.5, 0.5]), gram(LIN, d), d, HyperParams(0.5, 0.0))
    assert (r, t) == (1.0, 0.0)
    assert rep.radius_unique


def test_recover_main_positives_at_bound():
    # every positive multiplier sits at its bound, so no positive pins r from below
    d = symmetric()
    hp = HyperParams(0.25, 0.25, 1.0)
    _, r, t, rep, _ = recover_main(np.array([1.0, 1.0, 0.5, 0.5]), gram(LIN, d), d, hp)
    assert rep.r_l == -math.inf
    assert rep.clipped_at_zero
    assert rep.r_interval == (0.0, 1.0)
    assert not rep.radius_unique
    assert r == 0.5 and r + t == 4.0


def test_recover_main_needs_positive_sv():
    d = symmetric()
    with pytest.raises(SolverFailure, match="no positive support vector"):
        recover_main(np.zeros(4), gram(LIN, d), d, SYMMETRIC_HP)


def test_recover_degenerate_two_point():
    d = two_point()
    beta, r, t, rep, _ = recover_degenerate(np.array([0.5]), gram(LIN, d), d,
                                            HyperParams(0.25, 0.25))
    assert r == 0.0 and t == 16.0
    assert rep.margin_unique and rep.free_negative_sv == 1


def test_recover_degenerate_at_bound():
    d = make_dataset([[1, 0], [-1, 0], [0, 3]], [1, 1, -1])
    hp = HyperParams(0.5, 1 / 3, 1.0)
    assert train(d, LIN, hp).regime.kind is RegimeKind.DEGENERATE_QP
    _, r, t, rep, dist = recover_degenerate(np.array([1.0]), gram(LIN, d), d, hp)
    assert not rep.margin_unique
    assert rep.t_interval[1] == math.inf
    assert t == pytest.approx(dist[2])
    assert rep.margin_slack == pytest.approx(0.0, abs=1e-12)


def test_free_tolerance():
    assert free_tolerance(1e-9) == 1e-6
    assert free_tolerance(1e-6) == pytest.approx(1e-5)


@pytest.mark.parametrize("spec", [KernelSpec.rbf(0.5), KernelSpec.polynomial(3, 1.0)])
def test_kernel_training(spec):
    rng = np.random.default_rng(5)
    pts = np.vstack([rng.normal(size=(15, 2)), rng.normal(size=(10, 2)) * 2.5])
    d = make_dataset(pts, [1] * 15 + [-1] * 10)
    m = train(d, spec, HyperParams(0.1, 0.05, 1.0))
    assert m.diagnostics["kkt_max_residual"] <= 1e-8
    assert m.diagnostics["nu_report"]["all_hold"]


def test_precomputed_kernel():
    d = symmetric()
    K = gram(LIN, d)
    m = train(d, KernelSpec.precomputed(K), SYMMETRIC_HP)
    assert (m.r, m.t) == pytest.approx((1.0, 3.0), abs=1e-7)
