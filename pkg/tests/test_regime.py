import pytest
from hypothesis import given, settings, strategies as st

from csslm import HyperParams, RegimeKind, classify_regime
from csslm.regime import HyperParamError

K = RegimeKind


@pytest.mark.parametrize("nu, mu, kind", [
    (0.2, 0.2, K.MAIN_QP),
    (0.3, 0.3, K.DEGENERATE_QP),
    (0.1, 0.6, K.UNBOUNDED),
    (0.6, 0.0, K.TRIVIAL),
    (0.1, 0.5, K.DEGENERATE_LP),
])
def test_examples(nu, mu, kind):
    reg = classify_regime(HyperParams(nu, mu, 1.0), 2, 2)
    assert reg.kind is kind


def test_degenerate_lambda():
    reg = classify_regime(HyperParams(0.3, 0.3, 1.0), 2, 2)
    assert reg.lam == pytest.approx(0.2, abs=1e-15)
    assert str(reg) == "DegenerateQP(lambda=0.2)"


def test_exact_boundaries():
    # 0.1 + 0.2 is not 0.3 in floating point, but the typed values sum exactly
    assert classify_regime(HyperParams(0.1, 0.2), 3, 7).kind is K.DEGENERATE_QP
    # mu equal to the unboundedness bound is admitted
    assert classify_regime(HyperParams(0.1, 0.5), 2, 2).kind is K.DEGENERATE_LP
    # binding bound from the negatives: b n / l = 0.25 < m / l
    reg = classify_regime(HyperParams(0.1, 0.3), 3, 1)
    assert reg.kind is K.UNBOUNDED and "b*n/l" in reg.reason


def test_rounded_inputs_use_tolerance():
    # 1/3 is not a terminating decimal: treated as equal to m/l within 1e-12
    assert classify_regime(HyperParams(0.5, 1 / 3), 1, 2).kind is K.DEGENERATE_LP
    assert classify_regime(HyperParams(1 / 3 - 0.2, 0.2), 1, 2).kind is K.DEGENERATE_QP
    # a short typed decimal is compared exactly, however close
    assert classify_regime(HyperParams(0.4999999999, 0.0), 1, 1).kind is K.MAIN_QP


def test_one_class():
    assert classify_regime(HyperParams(0.5, 0.0), 4, 0).kind is K.MAIN_QP
    assert classify_regime(HyperParams(1.0, 0.0), 4, 0).kind is K.TRIVIAL
    assert classify_regime(HyperParams(0.5, 0.1), 4, 0).kind is K.UNBOUNDED


def test_invalid():
    for args in ((0.0, 0.1, 1.0), (0.1, -0.1, 1.0), (0.1, 0.1, 0.5)):
        with pytest.raises(HyperParamError):
            HyperParams(*args)
    with pytest.raises(HyperParamError):
        classify_regime(HyperParams(0.1, 0.1), 0, 3)


ORDER = [K.MAIN_QP, K.DEGENERATE_QP, K.DEGENERATE_LP, K.UNBOUNDED]


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 2.0), st.integers(1, 30), st.integers(0, 30),
       st.sampled_from([1.0, 1.5, 4.0]))
def test_monotone_in_mu(nu, m, n, b):
    mus = [0.0] + [k / 40 for k in range(1, 41)]
    ranks = []
    for mu in mus:
        kind = classify_regime(HyperParams(nu, mu, b), m, n).kind
        ranks.append(0 if kind is K.TRIVIAL else ORDER.index(kind))
    assert ranks == sorted(ranks)
