"""Cross-module properties of trained models on random instances."""

import numpy as np
import pytest

from csslm import HyperParams, KernelSpec, make_dataset, solve_qp, train
from csslm.certify import recover_xi
from csslm.model import objective_g
from csslm.problems import assemble_primal_qp, split_primal

from instances import random_main_instance, random_one_class


def _center(model, d):
    return model.beta_full() @ d.points


def _dist2(model, d):
    return ((d.points - _center(model, d)) ** 2).sum(axis=1)


def _h(p, ell, m, r, t, xi):
    return 0.5 * ell * (p.nu * r - p.mu * t) + xi[:m].sum() + p.b * xi[m:].sum()


@pytest.mark.parametrize("seed", range(10))
def test_dual_and_primal_centers_agree(seed):
    d, spec, hp = random_main_instance(np.random.default_rng(700 + seed))
    model = train(d, spec, hp)
    a, _, _, _ = split_primal(solve_qp(assemble_primal_qp(d.points, d, hp)).x, d.dim)
    np.testing.assert_allclose(_center(model, d), a, atol=1e-6)


def _flat_cases():
    rng = np.random.default_rng(11)
    cases = [random_main_instance(np.random.default_rng(800 + k)) for k in range(8)]
    for _ in range(4):
        ell = 2 * int(rng.integers(2, 8))
        # l * nu integral: the radius is pinned by no free support vector
        cases.append((random_one_class(rng, 2, ell)[0], KernelSpec.linear(), HyperParams(0.5, 0.0)))
    return cases


@pytest.mark.parametrize("case", _flat_cases())
def test_objective_flat_on_optimal_set(case):
    d, spec, hp = case
    model = train(d, spec, hp)
    u = model.diagnostics["uniqueness"]
    dist = _dist2(model, d)
    g0 = objective_g(dist, d.m, hp, model.r, model.t)
    rng = np.random.default_rng(0)
    # endpoints may cross by rounding when the interval is a single point
    r_lo, r_hi = sorted(u["r_interval"])
    r_hi = min(r_hi, r_lo + 10.0)
    for _ in range(20):
        r = rng.uniform(r_lo, r_hi)
        if u["t_interval"] == [0.0, 0.0]:
            t = 0.0
        else:
            q_lo, q_hi = sorted((max(u["q_l"], r), min(u["q_u"], max(u["q_l"], r) + 10.0)))
            t = max(rng.uniform(q_lo, q_hi) - r, 0.0)
        assert abs(objective_g(dist, d.m, hp, r, t) - g0) <= 1e-8


def test_one_class_radius_interval_is_wide():
    d = make_dataset([[0, 0], [1, 0], [3, 0], [7, 0]], [1] * 4)
    model = train(d, KernelSpec.linear(), HyperParams(0.5, 0.0))
    u = model.diagnostics["uniqueness"]
    assert not u["radius_unique"]
    assert u["r_interval"][1] - u["r_interval"][0] > 1.0


@pytest.mark.parametrize("seed", range(10))
def test_scaled_objective_identity(seed):
    d, spec, hp = random_main_instance(np.random.default_rng(900 + seed))
    ell, m = d.size, d.m
    model = train(d, spec, hp)
    dist = _dist2(model, d)
    xi = recover_xi(dist, m, model.r, model.t)
    h = _h(hp, ell, m, model.r, model.t, xi)
    assert abs(ell * objective_g(dist, m, hp, model.r, model.t) - h) <= 1e-8 * (1 + abs(h))
    assert abs(model.objective - h) <= 1e-8 * (1 + abs(h))

    sol = solve_qp(assemble_primal_qp(d.points, d, hp))
    a, s, t, xi_p = split_primal(sol.x, d.dim)
    r = float(a @ a - s)
    dist_p = ((d.points - a) ** 2).sum(axis=1)
    h_p = _h(hp, ell, m, r, t, xi_p)
    assert abs(sol.objective - h_p) <= 1e-8 * (1 + abs(h_p))
    assert abs(ell * objective_g(dist_p, m, hp, r, t) - h_p) <= 1e-8 * (1 + abs(h_p))
