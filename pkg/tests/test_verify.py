import numpy as np
import pytest

from balldesign import (
    MarginalDesign,
    ShiftedIntensity,
    SingularDesignError,
    get_model,
    kw_check,
    marginal_log_det,
    oracle_three_point,
    oracle_two_point,
    solve,
    solve_case_a,
)
from balldesign.solver import degenerate_marginal


def s_of(model, beta0, beta1=1.0):
    return ShiftedIntensity(get_model(model), beta0, beta1)


def test_kw_passes_at_optimum():
    s = s_of("logit", -0.5)
    d = solve_case_a(s, 3)
    kw = kw_check(s, d, 3)
    assert kw.passed and kw.max_psi == pytest.approx(4.0, abs=1e-6)
    np.testing.assert_allclose(kw.support_psi, 4.0, atol=1e-9)
    assert min(abs(kw.argmax_x1 - p) for p in d.points) < 1e-3


def test_kw_fails_when_perturbed():
    s = s_of("logit", -0.5)
    d = solve_case_a(s, 3)
    bad = MarginalDesign(d.points + np.array([0.0, 0.1]), d.weights)
    kw = kw_check(s, bad, 3)
    assert not kw.passed and kw.max_psi > 4.0


def test_kw_degenerate():
    for k in (1, 3, 5):
        assert kw_check(s_of("probit", 0.4, 0.0), degenerate_marginal(k), k).passed


def test_kw_singular():
    with pytest.raises(SingularDesignError):
        kw_check(s_of("logit", 0.0), MarginalDesign([0.2], [1.0]), 2)
    with pytest.raises(ValueError):
        kw_check(s_of("logit", 0.0), degenerate_marginal(2), 2, grid_size=1)


def test_two_point_oracle_symmetric_logit():
    o = oracle_two_point(s_of("logit", 0.0), 3, resolution=2001)
    assert o.points[0] == pytest.approx(0.52, abs=0.002)
    assert o.points[1] == pytest.approx(-0.52, abs=0.002)
    assert o.weights[0] == pytest.approx(0.5, abs=1e-3)


def test_two_point_oracle_exponential():
    s = s_of("exponential", 0.0)
    o = oracle_two_point(s, 2, resolution=2001)
    a = solve_case_a(s, 2)
    np.testing.assert_allclose(o.points, a.points, atol=1e-3)
    assert o.weights[0] == pytest.approx(1 / 3, abs=1e-3)


def test_two_point_oracle_constant_intensity():
    o = oracle_two_point(s_of("logit", 0.7, 0.0), 1, resolution=101)
    assert o.points.tolist() == [1.0, -1.0] and o.weights.tolist() == [0.5, 0.5]
    with pytest.raises(ValueError):
        oracle_two_point(s_of("logit", 0.0), 1, resolution=50)


def test_three_point_oracle_agrees_with_pole_form():
    s = s_of("exponential", 0.3, 0.8)
    o = oracle_three_point(s, 3, resolution=401)
    a = solve_case_a(s, 3)
    assert marginal_log_det(s, o, 3) == pytest.approx(marginal_log_det(s, a, 3), abs=1e-4)


def test_three_point_oracle_never_beats_solver():
    rep = solve([0.1, 1.0, 0.0, 0.0], "logit")
    o = oracle_three_point(rep.shifted, 3, resolution=201, iterations=1000)
    assert marginal_log_det(rep.shifted, o, 3) <= rep.log_det + 1e-9
