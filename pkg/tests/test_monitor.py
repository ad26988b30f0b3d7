import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from fock_oracle import fock_moments, fock_state, q_function_moments
from squeezecomm.errors import ConfigurationError, ValidationError
from squeezecomm.monitor import (ContractiveParams, MassGaussianState, MonitoringPlan,
                                 PhysicalConstants, ResetMode, free_evolve, measure_gl,
                                 reading_distribution, run_monitoring, run_monitoring_trials,
                                 sql_bound, tcs_to_moments)

UNIT = PhysicalConstants()


def test_sql_bound():
    assert sql_bound(0.0) == 0.0
    assert sql_bound(2.0) == 2.0
    assert sql_bound(2.0, PhysicalConstants(mass=4)) == 0.5


def test_tcs_to_moments_examples():
    s = tcs_to_moments(ContractiveParams(1, 0))
    assert (s.vxx, s.vpp, s.vxp) == (0.5, 0.5, 0.0)
    r = 0.5 * math.asinh(1.0)
    s = tcs_to_moments(ContractiveParams(math.cosh(r), 1j * math.sinh(r)))
    assert s.determinant == pytest.approx(0.25, abs=1e-14)
    assert s.vxp == pytest.approx(-0.5) and s.is_contractive
    s = tcs_to_moments(ContractiveParams(1, 0, alpha=1.0))
    assert (s.mean_x, s.mean_p) == pytest.approx((math.sqrt(2), 0.0))


@settings(max_examples=60)
@given(st.floats(0, 2), st.floats(-math.pi, math.pi), st.floats(0.2, 5), st.floats(0.2, 5),
       st.floats(0.2, 5))
def test_moments_are_pure_and_invertible(r, phi, hbar, mass, omega):
    c = PhysicalConstants(hbar, mass, omega)
    p = ContractiveParams(math.cosh(r), math.sinh(r) * complex(math.cos(phi), math.sin(phi)))
    s = tcs_to_moments(p, c)
    assert s.determinant == pytest.approx(hbar ** 2 / 4, rel=1e-9)
    q = ContractiveParams.from_moments(s.vxx, s.vxp, s.vpp, c)
    s2 = tcs_to_moments(q, c)
    np.testing.assert_allclose(s2.covariance, s.covariance, rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("r,phi,alpha", [(0.0, 0.0, 0.0), (0.5, math.pi / 2, 0.7 + 0.3j),
                                         (0.3, 0.0, -0.4j)])
def test_fock_moments_match_convention(r, phi, alpha):
    c = PhysicalConstants(1.0, 2.0, 0.5)
    fock = fock_moments(fock_state(r, phi, alpha), c)
    nu = math.sinh(r) * complex(math.cos(phi), math.sin(phi))
    ours = tcs_to_moments(ContractiveParams(math.cosh(r), nu, alpha), c)
    np.testing.assert_allclose(ours.covariance, fock.covariance, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(ours.mean, fock.mean, atol=1e-9)


@pytest.mark.parametrize("r,phi,alpha", [(0.0, 0.0, 0.0), (0.5, math.pi / 2, 0.7 + 0.3j),
                                         (0.3, 0.0, -0.4j)])
def test_reading_statistics_match_q_function(r, phi, alpha):
    psi = fock_state(r, phi, alpha)
    total, mean_q, cov_q = q_function_moments(psi)
    assert total == pytest.approx(1.0, abs=1e-6)
    state = fock_moments(psi, UNIT)
    mean, cov = reading_distribution(state, ContractiveParams(1, 0))
    np.testing.assert_allclose(mean, mean_q, atol=1e-6)
    np.testing.assert_allclose(np.diag(cov), np.diag(cov_q), rtol=1e-3)
    assert cov[0, 1] == pytest.approx(cov_q[0, 1], abs=1e-3 * np.sqrt(cov_q[0, 0] * cov_q[1, 1]))
    if r == 0 and alpha == 0:
        assert cov[0, 0] == pytest.approx(0.5)


def test_sharp_reference_limit():
    s = MassGaussianState(0.0, 0.0, 0.8, 0.1, 0.5)
    for r in (2.0, 4.0, 6.0):
        ref = ContractiveParams(math.cosh(r), math.sinh(r))
        _, cov = reading_distribution(s, ref)
        expected = UNIT.mass * UNIT.omega / (2 * UNIT.hbar) * s.vxx
        assert cov[0, 0] == pytest.approx(expected, rel=2 * math.exp(-2 * r) / s.vxx)


def test_measure_gl_modes():
    s = MassGaussianState(0.3, -0.2, 0.5, 0.0, 0.5)
    ref = ContractiveParams(1, 0)
    reset = ContractiveParams(math.cosh(0.4), 1j * math.sinh(0.4))
    a1, post1 = measure_gl(s, ref, reset, ResetMode.ReadingDependent, seed=4)
    a2, post2 = measure_gl(s, ref, reset, ResetMode.ZeroMean, seed=4)
    np.testing.assert_array_equal(a1, a2)
    assert (post2.mean_x, post2.mean_p) == (0.0, 0.0)
    np.testing.assert_allclose(post1.alpha_mean(), a1)
    np.testing.assert_allclose(post1.covariance, tcs_to_moments(reset).covariance)


def test_measure_gl_sampling_statistics():
    s = MassGaussianState(1.0, 0.5, 0.7, -0.2, 0.6)
    ref = ContractiveParams(math.cosh(0.3), math.sinh(0.3))
    mean, cov = reading_distribution(s, ref)
    rng = np.random.default_rng(9)
    draws = np.array([measure_gl(s, ref, ref, seed=rng)[0] for _ in range(20_000)])
    se = np.sqrt(np.diag(cov) / len(draws))
    assert np.all(np.abs(draws.mean(0) - mean) < 4 * se)
    np.testing.assert_allclose(np.cov(draws.T), cov, rtol=0.05, atol=0.01)


@settings(max_examples=80)
@given(st.floats(0.05, 5), st.floats(-2, 2), st.floats(0.05, 5), st.floats(0, 10),
       st.floats(0.3, 3))
def test_free_evolve_preserves_determinant(vxx, vxp, vpp, t, mass):
    c = PhysicalConstants(hbar=0.5, mass=mass)
    if vxx * vpp - vxp ** 2 < c.hbar ** 2 / 4:
        vpp = (c.hbar ** 2 / 4 + vxp ** 2) / vxx
    s = MassGaussianState(0, 0, vxx, vxp, vpp, c)
    e = free_evolve(s, t)
    # det = vxx vpp - vxp^2 cancels, so the rounding floor scales with vxx vpp
    assert e.determinant == pytest.approx(s.determinant, abs=1e-13 * e.vxx * e.vpp)


def test_free_evolve_zero_time_is_identity():
    s = MassGaussianState(0.2, -1.0, 0.25, -1.0, 5.0)
    assert free_evolve(s, 0.0, f1=3.0) == s


@pytest.mark.parametrize("t", [0.1, 1.0, 7.5])
def test_sql_attained_without_correlation(t):
    c = PhysicalConstants(hbar=1.3, mass=0.7)

    def vxx_t(v):
        s = MassGaussianState(0, 0, v, 0.0, c.hbar ** 2 / (4 * v), c)
        return free_evolve(s, t).vxx

    res = minimize_scalar(vxx_t, bounds=(1e-3, 50), method="bounded", options={"xatol": 1e-12})
    assert res.fun == pytest.approx(sql_bound(t, c), rel=1e-10)
    assert res.x == pytest.approx(c.hbar * t / (2 * c.mass), rel=1e-4)


def test_contractive_state_beats_sql():
    s = MassGaussianState(0, 0, 0.25, -1.0, 5.0)
    e = free_evolve(s, 0.2)
    assert e.vxx == pytest.approx(0.05, abs=1e-15)
    assert e.vxx == pytest.approx(sql_bound(0.2) / 4, abs=1e-15)
    res = minimize_scalar(lambda t: free_evolve(s, t).vxx, bounds=(0, 1), method="bounded",
                          options={"xatol": 1e-10})
    assert res.x == pytest.approx(0.2, abs=1e-6)


@settings(max_examples=40)
@given(st.floats(0.05, 3), st.floats(0.01, 2))
def test_contractive_reset_hits_target(t, eps2):
    p = ContractiveParams.contractive_reset(t, eps2)
    e = free_evolve(tcs_to_moments(p), t)
    assert e.vxx == pytest.approx(eps2, rel=1e-8)
    assert e.vxp == pytest.approx(0.0, abs=1e-8 * (1 + tcs_to_moments(p).vpp * t))


def test_constant_force_mean():
    s = MassGaussianState(0.5, 2.0, 1, 0, 1)
    e = free_evolve(s, 3.0, f1=0.4)
    assert e.mean_x == pytest.approx(0.5 + 2.0 * 3 - 0.4 * 9 / 2)
    assert e.mean_p == pytest.approx(2.0 - 0.4 * 3)
    np.testing.assert_array_equal(e.covariance, free_evolve(s, 3.0).covariance)


def test_piecewise_forces_against_ode():
    c = PhysicalConstants(mass=1.7)
    s = MassGaussianState(0.2, -0.6, 1, 0, 1, c)
    f1 = [(0.5, 1.0), (1.2, -0.3), (0.6, 2.0)]
    f2 = [(1.0, 0.25), (0.7, -0.5)]
    T = 2.9

    def piece(segs, t):
        start = 0.0
        for d, v in segs:
            if start <= t < start + d:
                return v
            start += d
        return 0.0

    def rhs(t, y):
        return [y[1] / c.mass + piece(f2, t), -piece(f1, t)]

    sol = solve_ivp(rhs, (0, T), [s.mean_x, s.mean_p], rtol=1e-12, atol=1e-12, max_step=0.01)
    e = free_evolve(s, T, f1, f2)
    assert e.mean_x == pytest.approx(sol.y[0, -1], abs=1e-8)
    assert e.mean_p == pytest.approx(sol.y[1, -1], abs=1e-8)


def _plan(**kw):
    base = dict(intervals=(0.5,) * 4, reference=ContractiveParams(1, 0), reset=ContractiveParams(1, 0),
                seed=5)
    base.update(kw)
    return MonitoringPlan(**base)


def test_plan_validation():
    with pytest.raises(ValidationError):
        _plan(intervals=())
    with pytest.raises(ValidationError):
        _plan(intervals=(0.5, -1.0))
    with pytest.raises(ValidationError):
        _plan(force=(1.0, 2.0))
    with pytest.raises(ConfigurationError):
        MonitoringPlan.from_dict({"intervals": [1.0], "bogus": 1})


def test_plan_json_roundtrip(tmp_path):
    doc = {"intervals": {"count": 3, "duration": 0.25},
           "reference": {"mu": 1, "nu": 0},
           "reset": {"mu": math.cosh(0.5), "nu": [0, math.sinh(0.5)]},
           "reset_mode": "zero_mean", "force": [0, 1, 0], "seed": 12,
           "constants": {"hbar": 1.0, "mass": 2.0, "omega": 1.0}}
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(doc))
    plan = MonitoringPlan.load(path)
    assert plan.intervals == (0.25, 0.25, 0.25)
    assert plan.reset_mode is ResetMode.ZeroMean
    assert plan.reset.nu == pytest.approx(1j * math.sinh(0.5))
    assert plan.constants.mass == 2.0 and plan.force == (0.0, 1.0, 0.0)
    with pytest.raises(ConfigurationError):
        MonitoringPlan.load(tmp_path / "missing.json")


def test_run_monitoring_deterministic():
    plan = _plan()
    a, b = run_monitoring(plan), run_monitoring(plan)
    np.testing.assert_array_equal(a.reading, b.reading)
    x = run_monitoring_trials(plan, 20)
    y = run_monitoring_trials(plan, 20, workers=4)
    for r1, r2 in zip(x, y):
        np.testing.assert_array_equal(r1.reading, r2.reading)


def test_zero_force_residual_unbiased():
    recs = run_monitoring_trials(_plan(), 10_000)
    n1 = np.array([r.residual for r in recs])
    se = n1.std(0) / math.sqrt(len(recs))
    assert np.all(np.abs(n1.mean(0)) < 3 * se)


@pytest.mark.parametrize("mode", [ResetMode.ReadingDependent, ResetMode.ZeroMean])
def test_constant_force_residual_mean(mode):
    t, f = 0.5, 1.5
    plan = _plan(intervals=(t,) * 3, force=f, reset_mode=mode)
    recs = run_monitoring_trials(plan, 10_000)
    rpos = np.array([r.residual_position for r in recs])
    se = rpos.std(0) / math.sqrt(len(recs))
    expected = -(f / UNIT.mass) * t * t / 2
    assert np.all(np.abs(rpos.mean(0) - expected) < 3 * se)
    fhat = np.array([r.force_estimate for r in recs]).mean(0)
    np.testing.assert_allclose(fhat, f, atol=6 * se.max() * 2 * UNIT.mass / t ** 2)


def test_contractive_plan_beats_sql():
    t, eps2 = 0.2, 0.005
    ref = ContractiveParams.from_moments(0.005, 0.0, 0.25 / 0.005)
    plan = _plan(intervals=(t,) * 6, reference=ref, reset=ContractiveParams.contractive_reset(t, eps2))
    recs = run_monitoring_trials(plan, 10_000)
    n1 = np.array([r.n1 for r in recs]) * UNIT.x_scale
    # closed-form propagation: eps2 at the measurement instant plus the reference position noise
    predicted = math.sqrt(eps2 + tcs_to_moments(ref).vxx)
    rms = np.sqrt((n1 ** 2).mean(0))
    se = predicted / math.sqrt(2 * len(recs))
    assert np.all(np.abs(rms - predicted) < 3 * se)
    assert np.all(rms < math.sqrt(sql_bound(t)))
    np.testing.assert_allclose(recs[0].residual_std * UNIT.x_scale, predicted, rtol=1e-12)
