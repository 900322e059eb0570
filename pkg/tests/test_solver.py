import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balldesign import (
    CaseLabel,
    MarginalDesign,
    ShiftedIntensity,
    asymptotic_inner_point,
    classify,
    get_model,
    marginal_log_det,
    oracle_two_point,
    solve,
    solve_case_a,
    solve_case_b,
    solve_case_c,
    solve_degenerate,
)
from balldesign.solver import degenerate_marginal, optimal_alpha, stationarity_residuals
from balldesign.verify import _best_alpha


def canonical(beta0, beta1, k):
    beta = np.zeros(k + 1)
    beta[0], beta[1] = beta0, beta1
    return beta


def s_of(model, beta0, beta1=1.0):
    return ShiftedIntensity(get_model(model), beta0, beta1)


@pytest.mark.parametrize("model,beta0,beta1,case", [
    ("logit", -0.5, 1.0, CaseLabel.C),
    ("logit", -1.5, 1.0, CaseLabel.A),
    ("logit", 1.5, 1.0, CaseLabel.B),
    ("probit", 2.0, 4.0, CaseLabel.C),
    ("exponential", 5.0, 0.1, CaseLabel.A),
    ("logit", 0.3, 0.0, CaseLabel.DEGENERATE),
])
def test_classify(model, beta0, beta1, case):
    assert classify(s_of(model, beta0, beta1)) is case


def test_pole_form_root_equation():
    s = s_of("logit", -0.5)
    d = solve_case_a(s, 3)
    x = d.points[1]
    assert d.points[0] == 1.0 and d.weights[0] == 0.25
    assert float(s.score(x)) * 3 * (1 - x * x) == pytest.approx(2 * (1 + 3 * x), abs=1e-12)
    assert x == pytest.approx(-0.175596560, abs=1e-8)


def test_exponential_root_closed_form():
    # score is beta1, so beta1 k (1 - x^2) = 2 (1 + k x) is a quadratic
    for k, b1 in [(2, 1.0), (3, 0.7), (6, 2.5)]:
        x = solve_case_a(s_of("exponential", 0.0, b1), k).points[1]
        a, b, c = -b1 * k, -2 * k, b1 * k - 2
        ref = max(r for r in np.roots([a, b, c]).real if -1 <= r <= 1)
        assert x == pytest.approx(ref, abs=1e-13)
    assert solve_case_a(s_of("exponential", 0.0), 2).points[1] == pytest.approx(0.0, abs=1e-15)


def test_case_b_mirrors_case_a():
    a = solve_case_a(s_of("probit", -1.7, 1.2), 4)
    b = solve_case_b(s_of("probit", 1.7, 1.2), 4)
    np.testing.assert_allclose(b.points, -a.points[::-1], atol=1e-14)
    np.testing.assert_allclose(b.weights, a.weights[::-1], atol=1e-15)


def test_k1_pole_fallback():
    d = solve_case_a(s_of("logit", 0.3, 0.5), 1)
    assert d.points.tolist() == [1.0, -1.0] and d.weights.tolist() == [0.5, 0.5]


def test_interior_design_logit_k3():
    rep = solve(canonical(0.1, 1.0, 3), "logit")
    (x, y), (wx, wy) = rep.marginal.points, rep.marginal.weights
    assert rep.interior
    assert x == pytest.approx(0.423924511, abs=1e-8)
    assert y == pytest.approx(-0.623924511, abs=1e-8)
    assert wx == pytest.approx(0.570327, abs=1e-6)
    # the published weight 0.4297 belongs to the lower level
    assert wy == pytest.approx(0.4297, abs=5e-4)
    np.testing.assert_allclose(stationarity_residuals(rep.shifted, 3, x, y, wx), 0, atol=1e-9)


def test_interior_design_against_oracle():
    rep = solve(canonical(0.1, 1.0, 3), "logit")
    o = oracle_two_point(rep.shifted, 3, resolution=2001)
    np.testing.assert_allclose(o.points, rep.marginal.points, atol=1e-3)
    assert marginal_log_det(rep.shifted, o, 3) <= rep.log_det + 1e-12


def test_symmetric_case():
    rep = solve(canonical(0.0, 1.0, 3), "logit")
    assert rep.marginal.points[0] == pytest.approx(0.518835, abs=1e-6)
    assert rep.marginal.points[0] == pytest.approx(-rep.marginal.points[1], abs=1e-10)


# interior-interval endpoints from the derivative of the pole-form root
THRESHOLDS = {("logit", 3): 0.4030855, ("logit", 6): 0.4801255,
              ("probit", 3): 0.4358056, ("probit", 6): 0.5072929}


@pytest.mark.parametrize("model,k", sorted(THRESHOLDS))
def test_interior_threshold(model, k):
    t = THRESHOLDS[(model, k)]
    assert solve(canonical(t - 2e-4, 1.0, k), model).interior
    assert not solve(canonical(t + 2e-4, 1.0, k), model).interior
    assert solve(canonical(-t + 2e-4, 1.0, k), model).interior


def test_asymptotic_limit():
    assert asymptotic_inner_point(1.0, 3) == pytest.approx(0.1547005384, abs=1e-10)
    assert asymptotic_inner_point(1.0, 6) == pytest.approx(0.2909944487, abs=1e-10)
    assert asymptotic_inner_point(0.0, 4) == -0.25
    inner = solve(canonical(-60.0, 1.0, 3), "logit").marginal.points[1]
    assert inner == pytest.approx(asymptotic_inner_point(1.0, 3), abs=1e-9)
    with pytest.raises(ValueError):
        asymptotic_inner_point(1.0, 3, "probit")


@pytest.mark.parametrize("k", range(1, 7))
def test_degenerate(k):
    m = degenerate_marginal(k)
    if k == 1:
        assert m.points.tolist() == [1.0, -1.0]
    else:
        np.testing.assert_allclose(m.points, [1.0, -1.0 / k])
        np.testing.assert_allclose(m.weights, [1 / (k + 1), k / (k + 1)])
    rep = solve(np.r_[0.7, np.zeros(k)], "probit")
    assert rep.case is CaseLabel.DEGENERATE and rep.kw_pass
    assert solve_degenerate(k).size == k + 1


def test_report_serializes():
    rep = solve([0.2, 0.5, -0.3, 0.1], "probit")
    text = json.dumps(rep.to_dict())
    back = json.loads(text)
    assert back["case"] == rep.case.value and back["k"] == 3


def test_beta_length_check():
    with pytest.raises(ValueError):
        solve([0.0, 1.0, 0.0], "logit", k=3)


@settings(max_examples=30, deadline=None)
@given(A=st.floats(1e-6, 10), B=st.floats(1e-6, 10), k=st.sampled_from([2, 3, 5, 9]))
def test_optimal_alpha_matches_line_search(A, B, k):
    assert float(optimal_alpha(A, B, k)) == pytest.approx(float(_best_alpha(A, B, k)), abs=1e-10)


@settings(max_examples=12, deadline=None)
@given(b0=st.floats(0.05, 2.5), b1=st.floats(0.3, 2.5), k=st.sampled_from([1, 2, 3, 6]),
       model=st.sampled_from(["logit", "probit"]))
def test_reflection_symmetry(b0, b1, k, model):
    up, down = solve(canonical(b0, b1, k), model), solve(canonical(-b0, b1, k), model)
    assert up.log_det == pytest.approx(down.log_det, abs=1e-8)
    np.testing.assert_allclose(up.marginal.points, -down.marginal.points[::-1], atol=1e-6)
    assert up.kw_pass and down.kw_pass


def test_case_c_reports_boundary():
    assert solve_case_c(s_of("logit", -0.5), 3) is None
    d = solve_case_c(s_of("logit", 0.1), 3)
    assert isinstance(d, MarginalDesign) and d.size == 2
