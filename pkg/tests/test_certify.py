from dataclasses import replace

import numpy as np
import pytest

from csslm import HyperParams, KernelSpec, check_kkt, make_dataset, nu_property, train
from csslm.certify import recover_xi

from instances import one_class_pair, two_point

LIN = KernelSpec.linear()


def test_kkt_symmetric(sym_model, sym_data):
    rep = check_kkt(sym_model, sym_data)
    assert rep.max_residual <= 1e-8
    assert set(rep.groups) == {"primal_feasibility", "stationarity", "dual_feasibility",
                               "complementarity"}
    np.testing.assert_allclose(rep.xi, 0, atol=1e-8)
    assert not rep.partial


def test_kkt_perturbed_alpha(sym_model, sym_data):
    bad = replace(sym_model, alpha=np.array([0.9, 0.9, 0.5, 0.4]))
    rep = check_kkt(bad, sym_data)
    # t * (sum of negative multipliers - l mu) = 3 * (0.9 - 0.8)
    assert rep.groups["complementarity"] == pytest.approx(0.3, abs=1e-6)
    assert rep.groups["complementarity"] > 0.1
    assert not rep.ok(1e-6)


def test_kkt_tampered_radius(sym_model, sym_data):
    rep = check_kkt(replace(sym_model, r=2.0), sym_data)
    assert rep.groups["primal_feasibility"] > 0.1


def test_kkt_closed_form():
    d = make_dataset([[0, 0], [2, 0], [10, 0], [-4, 0]], [1, 1, -1, -1])
    m = train(d, LIN, HyperParams(1.0, 0.0))
    rep = check_kkt(m, d)
    assert rep.groups["primal_feasibility"] == 0.0
    assert rep.max_residual == 0.0


def test_kkt_degenerate(deg_model):
    rep = check_kkt(deg_model, two_point())
    assert rep.max_residual <= 1e-8


def test_kkt_partial_without_multipliers(sym_model, sym_data):
    rep = check_kkt(replace(sym_model, alpha=None), sym_data)
    assert rep.partial and set(rep.groups) == {"primal_feasibility"}


def test_kkt_shape_check(sym_model):
    with pytest.raises(ValueError, match="does not match"):
        check_kkt(sym_model, two_point())


def test_recover_xi():
    xi = recover_xi(np.array([3.0, 0.5, 2.0, 5.0]), 2, 1.0, 3.0)
    np.testing.assert_array_equal(xi, [1.0, 0.0, 1.0, 0.0])


def test_nu_symmetric(sym_model):
    rep = nu_property(sym_model)
    assert rep.case == "t > 0"
    assert (rep.m_plus, rep.s_plus, rep.n_plus, rep.s_minus) == (0, 2, 0, 2)
    vals = [(lhs, rhs) for _, lhs, rhs, _ in rep.inequalities]
    assert vals == pytest.approx([(0.0, 0.45), (0.45, 0.5), (0.0, 0.2), (0.2, 0.5)])
    assert rep.all_hold


def test_nu_one_class(pair_model):
    rep = nu_property(pair_model)
    assert rep.case == "one-class"
    assert (rep.m_plus, rep.s_plus) == (0, 2)
    vals = [(lhs, rhs) for _, lhs, rhs, _ in rep.inequalities]
    assert vals == pytest.approx([(0.0, 0.5), (0.5, 1.0)])
    assert rep.all_hold


def test_nu_degenerate(deg_model):
    rep = nu_property(deg_model)
    assert rep.case == "degenerate"
    assert (rep.n_plus, rep.s_minus) == (0, 1)
    vals = [(lhs, rhs) for _, lhs, rhs, _ in rep.inequalities]
    assert vals == pytest.approx([(0.0, 0.25), (0.25, 0.5)])
    assert rep.all_hold


def test_nu_not_applicable():
    d = make_dataset([[0, 0], [2, 0], [10, 0]], [1, 1, -1])
    rep = nu_property(train(d, LIN, HyperParams(1.0, 0.0)))
    assert not rep.applicable
    assert "not applicable" in rep.format()


def test_nu_t_zero_case():
    rng = np.random.default_rng(11)
    for _ in range(40):
        pts = np.vstack([rng.normal(size=(8, 2)), rng.normal(size=(8, 2)) * 0.3])
        d = make_dataset(pts, [1] * 8 + [-1] * 8)
        m = train(d, LIN, HyperParams(0.1, 0.01, 1.0))
        rep = nu_property(m)
        if rep.case == "t = 0":
            assert rep.all_hold
            assert rep.m_plus <= rep.s_plus and rep.n_plus <= rep.s_minus
            return
    pytest.fail("no t = 0 instance generated")


def test_report_format(sym_model, sym_data):
    text = check_kkt(sym_model, sym_data).format()
    assert "max_residual" in text and "complementarity" in text
    assert "holds" in nu_property(sym_model).format()
