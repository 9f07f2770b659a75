import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csslm import HyperParams, KernelSpec
from csslm.sgd import SgdConfig, SgdState, pegasos_train, sgd_step

from instances import SYMMETRIC_HP, symmetric

HP = HyperParams(0.5, 0.1, 1.0)


def test_step_positive():
    s = sgd_step(SgdState.zeros(2), [1, 0], 1, HP)
    np.testing.assert_array_equal(s.a, [2, 0])
    assert (s.s, s.t, s.k) == (-0.5, pytest.approx(0.1), 2)


def test_step_inactive_negative():
    s = sgd_step(SgdState.zeros(2), [1, 0], -1, HP)
    np.testing.assert_array_equal(s.a, [0, 0])
    assert (s.s, s.t) == (0.5, pytest.approx(0.1))


def test_step_revisit():
    plain = sgd_step(SgdState.zeros(2), [1, 0], 1, HP)
    rev = sgd_step(SgdState.zeros(2), [1, 0], 1, HP, variant="revisit")
    np.testing.assert_array_equal(rev.a, plain.a)
    assert (rev.s, rev.t) == (-0.5, pytest.approx(0.1))


def test_step_uses_pre_update_state():
    # a = (1, 0): <a, x> = 1 equals (|x|^2 + s)/2 = 1, so no loss although the decayed a is smaller
    st0 = SgdState(np.array([1.0, 0.0]), s=1.0, t=0.0, k=3)
    out = sgd_step(st0, [1, 0], 1, HP)
    eta = 1 / (0.5 * 3)
    np.testing.assert_allclose(out.a, [(1 - eta * 0.5), 0])


def test_config_validation():
    with pytest.raises(ValueError):
        SgdConfig(iterations=0)
    with pytest.raises(ValueError):
        SgdConfig(variant="fast")


def test_single_iteration_matches_step():
    d = symmetric()
    m = pegasos_train(d, SYMMETRIC_HP, SgdConfig(iterations=1, seed=7))
    i = np.random.default_rng(7).integers(0, d.size, size=1)[0]
    ref = sgd_step(SgdState.zeros(2), d.points[i], d.labels[i], SYMMETRIC_HP)
    np.testing.assert_array_equal(m.center, ref.a)
    assert m.diagnostics["raw_s"] == ref.s
    assert m.t == ref.t


def test_deterministic():
    d = symmetric()
    cfg = SgdConfig(iterations=5000, seed=3)
    a, b = pegasos_train(d, SYMMETRIC_HP, cfg), pegasos_train(d, SYMMETRIC_HP, cfg)
    assert np.array_equal(a.center, b.center) and (a.r, a.t) == (b.r, b.t)


def test_benchmark_seed_42():
    m = pegasos_train(symmetric(), SYMMETRIC_HP, SgdConfig(iterations=200_000, seed=42))
    assert abs(m.g_objective - (-0.175)) <= 0.01 * 0.175


def test_gap_decreases_with_iterations():
    d = symmetric()
    medians = []
    for K in (10**3, 10**4, 10**5):
        gaps = [pegasos_train(d, SYMMETRIC_HP, SgdConfig(iterations=K, seed=s)).g_objective + 0.175
                for s in range(10)]
        medians.append(float(np.median(gaps)))
    assert medians[0] > medians[1] > medians[2]


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([1, -1])),
                min_size=1, max_size=40))
def test_t_nonnegative(samples):
    state = SgdState.zeros(2)
    for x0, x1, y in samples:
        state = sgd_step(state, [x0, x1], y, HyperParams(0.3, 0.05, 2.0))
        assert state.t >= 0


def test_revisit_runs():
    m = pegasos_train(symmetric(), SYMMETRIC_HP, SgdConfig(iterations=20_000, variant="revisit"))
    assert np.isfinite(m.objective) and m.t >= 0


def test_progress_log(caplog):
    d = symmetric()
    with caplog.at_level(logging.INFO, logger="csslm.sgd"):
        m = pegasos_train(d, SYMMETRIC_HP, SgdConfig(iterations=1000, log_every=250, eval_data=d))
    assert [k for k, _ in m.diagnostics["history"]] == [250, 500, 750, 1000]
    assert "pegasos k=1000" in caplog.text


def test_rejects_nonlinear_kernel():
    with pytest.raises(ValueError, match="linear kernel only"):
        pegasos_train(symmetric(), SYMMETRIC_HP, kernel=KernelSpec.rbf(1.0))


def test_warns_outside_main_regime(caplog):
    with caplog.at_level(logging.WARNING, logger="csslm.sgd"):
        pegasos_train(symmetric(), HyperParams(0.3, 0.3), SgdConfig(iterations=10))
    assert "pegasos on regime" in caplog.text
