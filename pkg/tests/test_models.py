import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balldesign import (
    EXPONENTIAL,
    LOGIT,
    PROBIT,
    DomainError,
    ShiftedIntensity,
    get_model,
    lam,
    lam_prime,
    q_bundle,
    u_second,
)

mp.mp.dps = 50


def mp_probit(x):
    x = mp.mpf(x)
    phi = mp.npdf(x)
    return phi**2 / (mp.ncdf(x) * mp.ncdf(-x))


def mp_logit(x):
    e = mp.exp(mp.mpf(x))
    return e / (1 + e) ** 2


# Reference values computed with mpmath at 50 digits, frozen here.
PROBIT_TABLE = [
    # x, lambda, lambda', (1/lambda)''
    (1.0, 0.438628861102214, -0.334439020701208, 3.21487363733131),
    (3.0, 0.0145698633900005, -0.0396495401503628, 580.850533988767),
    (-2.5, 0.0497870801352981, 0.109277315064631, 117.743871150336),
    (8.0, 4.10313532722091e-14, -3.23270928288532e-13, 1.53753557402316e15),
]


def test_logit_values():
    assert lam("logit", -0.5) == pytest.approx(0.235003712201594, rel=1e-13)
    assert lam("logit", 0.0) == pytest.approx(0.25, rel=1e-15)
    assert u_second("logit", 0.0) == pytest.approx(2.0, rel=1e-14)


def test_logit_derivative_at_one():
    # closed form lambda' = lambda (1 - 2 e^x / (1 + e^x))
    assert lam_prime("logit", 1.0) == pytest.approx(-0.0908577476729484, rel=1e-12)
    assert lam_prime("logit", 1.0) == pytest.approx(float(mp.diff(mp_logit, 1.0)), rel=1e-12)


@pytest.mark.parametrize("x,val,der,u2", PROBIT_TABLE)
def test_probit_table(x, val, der, u2):
    assert lam("probit", x) == pytest.approx(val, rel=1e-12)
    assert lam_prime("probit", x) == pytest.approx(der, rel=1e-11)
    assert u_second("probit", x) == pytest.approx(u2, rel=1e-10)


def test_probit_u2_at_mode():
    assert u_second("probit", 0.0) == pytest.approx(math.pi - 2.0, rel=1e-13)
    # central second difference of 1/lambda, h = 1e-4
    assert u_second("probit", 0.0) == pytest.approx(1.14159265596442, rel=1e-8)


@pytest.mark.parametrize("x", [-40.0, -25.0, -12.5, 0.3, 9.0, 20.0, 38.0, 40.0])
def test_probit_log_intensity_far_tails(x):
    ref = float(mp.log(mp_probit(x)))
    assert PROBIT.log_intensity(x) == pytest.approx(ref, rel=1e-12)


def test_probit_tail_magnitudes():
    assert lam("probit", 20.0) == pytest.approx(1.10693651365397e-86, rel=1e-11)
    assert lam("probit", 38.0) == pytest.approx(4.17232343602511e-313, rel=1e-6)  # subnormal
    assert lam("probit", 37.0) > 0.0
    assert math.isfinite(PROBIT.log_intensity(60.0))


@pytest.mark.parametrize("model", [LOGIT, PROBIT])
def test_symmetric_models(model):
    x = np.linspace(-15, 15, 301)
    np.testing.assert_allclose(model.log_intensity(x), model.log_intensity(-x), rtol=1e-14)
    np.testing.assert_allclose(model.score(x), -model.score(-x), atol=1e-14)


@pytest.mark.parametrize("model", [LOGIT, PROBIT, EXPONENTIAL])
def test_score_is_log_derivative(model):
    x = np.linspace(-6, 6, 121)
    h = 1e-5
    fd = (model.log_intensity(x + h) - model.log_intensity(x - h)) / (2 * h)
    np.testing.assert_allclose(model.score(x), fd, atol=1e-8)


@pytest.mark.parametrize("model", [LOGIT, PROBIT])
def test_score_nonincreasing(model):
    # log-concavity, declared through the A4 flag
    assert model.satisfies_A4
    s = model.score(np.linspace(-30, 30, 6001))
    assert np.all(np.diff(s) <= 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-5.0, 5.0), st.sampled_from(["logit", "probit", "exponential"]))
def test_u2_matches_second_difference(x, name):
    model = get_model(name)
    h = 1e-3
    u = [1.0 / float(model.intensity(x + d)) for d in (-h, 0.0, h)]
    fd = (u[0] - 2 * u[1] + u[2]) / h**2
    assert float(model.u2(x)) == pytest.approx(fd, rel=1e-5, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30.0, 30.0))
def test_logit_against_mpmath(x):
    assert LOGIT.log_intensity(x) == pytest.approx(float(mp.log(mp_logit(x))), rel=1e-13, abs=1e-15)


def test_exponential():
    assert lam("exponential", 0.0) == 1.0
    assert lam_prime("exponential", 1.5) == pytest.approx(math.exp(1.5))
    assert u_second("exponential", 2.0) == pytest.approx(math.exp(-2.0))
    assert not EXPONENTIAL.unimodal
    assert EXPONENTIAL.score(np.array([-3.0, 4.0])).tolist() == [1.0, 1.0]


def test_flags():
    assert LOGIT.satisfies_A5 and PROBIT.satisfies_A5 and not EXPONENTIAL.satisfies_A5
    assert EXPONENTIAL.satisfies_A2 and EXPONENTIAL.satisfies_A3
    assert LOGIT.mode == 0.0 and PROBIT.mode == 0.0


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_argument(bad):
    with pytest.raises(DomainError):
        lam("probit", bad)
    with pytest.raises(DomainError):
        LOGIT.log_intensity(np.array([0.0, bad]))


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown model"):
        get_model("cloglog")


def test_shifted_intensity():
    s = ShiftedIntensity(LOGIT, -0.5, 2.0)
    assert s.mode == pytest.approx(0.25)
    q, dq = q_bundle(s, 0.1)
    assert q == pytest.approx(lam("logit", -0.3))
    assert dq == pytest.approx(2.0 * lam_prime("logit", -0.3))
    assert s.score(0.1) == pytest.approx(dq / q)
    assert ShiftedIntensity(EXPONENTIAL, 0.0, 1.0).mode == math.inf
    with pytest.raises(ValueError):
        ShiftedIntensity(LOGIT, 0.0, -1.0)
    with pytest.raises(ValueError):
        ShiftedIntensity(LOGIT, 0.0, 0.0).mode
