import math

import pytest
from hypothesis import given, strategies as st

from beurling_lab.asymptotics import TGrid, XSchedule
from beurling_lab.brv import (RatioField, cfe_residual, cocycle_defect, cocycle_profile,
                              estimate_index, estimate_karamata_index, limit_g,
                              shift_uniformity, uct_profile)
from beurling_lab.errors import LimitError
from beurling_lab.funcspace import (const_c, gamma_rho_builtin, identity_x, parse_expr,
                                    power_alpha, x_over_log)
from beurling_lab.represent import make_f_rho

SQRT = power_alpha(0.5)
UNIT = TGrid(-1.0, 1.0, 0.1)
AT_1E4 = XSchedule(1e4, 2.0, 5)


@given(st.floats(1.0, 1e12), st.sampled_from(["x^2", "exp(x/1000)", "sqrt(x)+1"]))
def test_sigma_at_zero_is_exactly_one(x, text):
    sigma = RatioField(parse_expr(text, positive=True), SQRT)
    assert sigma(0.0, x) == 1.0


@given(st.floats(100.0, 1e8), st.floats(-2.0, 2.0), st.floats(0.01, 1e3))
def test_sigma_scale_equivariance(x, t, c):
    f = gamma_rho_builtin(1.0)
    scaled = parse_expr(f"{c!r}*exp(2.0*(x^0.5-1.0))", positive=True)
    a, b = RatioField(f, SQRT)(t, x), RatioField(scaled, SQRT)(t, x)
    assert a == pytest.approx(b, rel=1e-12)


def test_limit_g_examples():
    f = make_f_rho(1.0, const_c(1.0))
    assert limit_g(f, const_c(1.0), 2.0) == pytest.approx(math.e ** 2, rel=1e-14)
    assert limit_g(f, const_c(1.0), 0.0) == 1.0
    # exp(2(sqrt(x+sqrt x) - sqrt x)) -> e: index 1, so g(1) = e
    g1 = limit_g(parse_expr("exp(2*(sqrt(x)-1))"), SQRT, 1.0)
    assert g1 == pytest.approx(math.e, rel=1e-6)


def test_limit_g_all_skipped():
    with pytest.raises(LimitError):
        limit_g(identity_x(), identity_x(), -1.5)


def test_estimate_index_exact_cases():
    est = estimate_index(make_f_rho(-1.0, const_c(1.0)), const_c(1.0))
    assert est.rho == pytest.approx(-1.0, abs=1e-8)
    assert est.fit_residual <= 1e-6
    flat = estimate_index(const_c(1.0), SQRT)
    assert flat.rho == 0.0 and flat.fit_residual == 0.0 and flat.cfe_max_residual == 0.0


def test_estimate_index_invariants():
    est = estimate_index(gamma_rho_builtin(2.0), SQRT)
    zero = dict(est.k_samples)[0.0]
    assert abs(zero) <= 1e-12
    assert est.fit_residual >= 0
    assert [t for t, _ in est.limits] == TGrid().points


def test_estimate_index_with_slowly_varying_factor():
    f = parse_expr("exp(2*(sqrt(x)-1))*(1+1/x)", positive=True)
    est = estimate_index(f, SQRT)
    assert est.rho == pytest.approx(1.0, abs=1e-2)
    assert est.cfe_max_residual <= 1e-2
    base = estimate_index(gamma_rho_builtin(1.0), SQRT)
    assert abs(est.rho - base.rho) <= 1e-2


def test_estimate_index_rejects_zero_limit():
    # exp(-x) has g(t) = 0 for t > 0 with phi = sqrt
    with pytest.raises(LimitError, match="not non-zero"):
        estimate_index(parse_expr("exp(-x)", positive=True), SQRT, TGrid(0.0, 2.0, 0.1),
                       XSchedule(1e4, 2.0, 10))


def test_estimate_index_needs_ten_points():
    with pytest.raises(ValueError):
        estimate_index(SQRT, SQRT, TGrid(-1.0, 1.0, 0.5))


def test_uct_profile_examples():
    exact = uct_profile(make_f_rho(1.0, const_c(1.0)), const_c(1.0), 1.0)
    assert exact.passed and max(exact.deviations) <= 1e-12
    rep = uct_profile(gamma_rho_builtin(1.0), SQRT, 1.0, UNIT, AT_1E4)
    # relative deviation at t = +-1 is 1 - exp(-1/(4 sqrt x)) to leading order
    oracle = max(abs(math.expm1(2 * (math.sqrt(1e4 + t * 100) - 100) - t)) for t in (-1.0, 1.0))
    assert rep.deviations[0] == pytest.approx(oracle, rel=1e-9)
    assert rep.deviations[0] == pytest.approx(2.5e-3, rel=0.01)
    lin = uct_profile(identity_x(), SQRT, 0.0, UNIT, AT_1E4)
    assert lin.deviations[0] == pytest.approx(0.01, rel=1e-12)


@pytest.mark.parametrize("phi", [const_c(1.0), SQRT, power_alpha(0.7)], ids=lambda f: f.label)
@pytest.mark.parametrize("rho", [-1.0, 0.5, 2.0])
def test_uct_passes_for_f_rho(phi, rho):
    assert uct_profile(make_f_rho(rho, phi), phi, rho, UNIT).passed


def test_uct_wide_grid_slow_case():
    # deviation ~ rho*alpha*t^2/2 * x^(alpha-1): 2.8 x^-0.3 on [-2, 2] is 0.014 at 5e7
    phi = power_alpha(0.7)
    rep = uct_profile(make_f_rho(2.0, phi), phi, 2.0)
    assert rep.verdict == "fail"
    assert rep.final_deviation == pytest.approx(2.8 * XSchedule().points[-1] ** -0.3, rel=0.05)
    assert uct_profile(make_f_rho(2.0, phi), phi, 2.0, sched=XSchedule(1e2, 4.0, 20)).passed


def test_uct_for_x_over_log_needs_deep_schedule():
    phi = x_over_log()
    f = make_f_rho(1.0, phi)
    assert uct_profile(f, phi, 1.0).verdict == "fail"
    assert uct_profile(f, phi, 1.0, sched=XSchedule(1e2, 1e8, 25)).passed


def test_cocycle_defect_examples():
    sigma = RatioField(SQRT, SQRT)
    oracle = abs(math.sqrt(1.02) - math.sqrt(1 + 1 / math.sqrt(10100.0)) * math.sqrt(1.01))
    assert cocycle_defect(sigma, 1.0, 1.0, 1e4) == pytest.approx(oracle, rel=1e-6)
    assert cocycle_defect(sigma, 1.0, 1.0, 1e4) < 1e-4
    assert cocycle_defect(sigma, 0.0, 0.7, 1e4) == 0.0
    flat = RatioField(const_c(1.0), const_c(1.0))
    assert cocycle_defect(flat, 1.3, -0.4, 55.0) == 0.0


@pytest.mark.parametrize("phi", [SQRT, power_alpha(0.3), power_alpha(0.7)], ids=lambda f: f.label)
def test_cocycle_profile_decays(phi):
    rep = cocycle_profile(RatioField(phi, phi))
    assert rep.passed
    assert rep.decay_exponent < 0


def test_cocycle_profile_constant_phi_is_zero():
    rep = cocycle_profile(RatioField(const_c(1.0), const_c(1.0)))
    assert set(rep.deviations) == {0.0}


def test_cfe_residual_examples():
    grid = [k / 10 for k in range(-20, 21)]
    linear = [(t, 1.7 * t) for t in grid]
    assert cfe_residual(linear, 0.5, 1.0) <= 1e-15
    square = [(t, t * t) for t in grid]
    assert cfe_residual(square, 1.0, 1.0) == pytest.approx(2.0)
    est = estimate_index(make_f_rho(2.0, SQRT), SQRT)
    assert cfe_residual(est.k_samples, 0.5, 1.0) <= 1e-2


def test_cfe_residual_off_grid():
    grid = [(k / 10, 0.0) for k in range(-10, 11)]
    with pytest.raises(ValueError):
        cfe_residual(grid, 0.9, 0.9)


def test_shift_uniformity_examples():
    exact = shift_uniformity(make_f_rho(1.0, const_c(1.0)), const_c(1.0), 3.0)
    assert exact.at_zero.passed and exact.at_shift.passed
    assert not exact.verdicts_differ
    diag = shift_uniformity(gamma_rho_builtin(1.0), SQRT, 2.0, rho=1.0)
    assert diag.at_zero.passed and diag.at_shift.passed
    # deviation ~ t^2 / (4 sqrt x): sup over [1.5, 2.5] vs [-0.5, 0.5] is (2.5/0.5)^2
    ratio = diag.at_shift.final_deviation / diag.at_zero.final_deviation
    assert ratio == pytest.approx(25.0, rel=0.01)
    bad = shift_uniformity(identity_x(), identity_x(), 0.2, rho=0.5)
    assert bad.at_zero.verdict == "fail" and bad.at_shift.verdict == "fail"


def test_karamata_index_power():
    est = estimate_karamata_index(parse_expr("x^2", positive=True), identity_x())
    assert est.rho == pytest.approx(2.0, abs=1e-12)
    assert est.mode == "karamata"
    for t, g in est.limits:
        assert g == pytest.approx((1 + t) ** 2, rel=1e-12)


def test_karamata_index_rejects_bad_grid():
    with pytest.raises(ValueError):
        estimate_karamata_index(identity_x(), identity_x(), TGrid(-1.0, 1.0, 0.1))
