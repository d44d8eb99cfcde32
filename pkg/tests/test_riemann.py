import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rarz.model import RARZ, DomainError, ModelParams, PrimitiveState, pressure, pseudo_velocity
from rarz.riemann import (
    Pattern,
    classify,
    exact_profile,
    intermediate_state,
    rh_residuals,
    sample,
    shock_speed,
    solve,
    wave_curve_points,
)

P = ModelParams(rho_star=1.0, u_star=25.0, gamma=2.0)
MODEL = RARZ(P)

densities = st.floats(0.01, 0.99)
speeds = st.floats(0.5, 24.0)
states = st.builds(PrimitiveState, densities, speeds)


def bisect_density(w, u, params, tol=1e-15):
    """Independent root of ``ũ(u) p(ρ) = w`` on ``(0, ρ*)``."""
    ut = pseudo_velocity(u, params)
    lo, hi = 0.0, params.rho_star
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if ut * pressure(mid, params) > w:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol * params.rho_star:
            break
    return 0.5 * (lo + hi)


def w_of(W):
    return float(pseudo_velocity(W.u, P) * pressure(W.rho, P))


# -- classification ---------------------------------------------------------

def test_classify_shock():
    assert classify(PrimitiveState(0.8, 22), PrimitiveState(0.6, 15), MODEL) is Pattern.SHOCK_CONTACT


def test_classify_rarefaction():
    assert classify(PrimitiveState(0.8, 16), PrimitiveState(0.6, 18), MODEL) is Pattern.RAREFACTION_CONTACT


def test_classify_equal_velocities():
    assert classify(PrimitiveState(0.8, 15), PrimitiveState(0.7, 15), MODEL) is Pattern.CONTACT_ONLY


def test_near_equal_velocities_are_contact_only():
    L = PrimitiveState(0.8, 15.0)
    R = PrimitiveState(0.7, 15.0 + 1e-13)
    assert classify(L, R, MODEL) is Pattern.CONTACT_ONLY


# -- intermediate state -----------------------------------------------------

def test_contact_only_middle_keeps_left_density():
    M = intermediate_state(PrimitiveState(0.8, 15), PrimitiveState(0.7, 15), MODEL)
    assert (M.rho, M.u) == (0.8, 15)


def test_shock_case_middle_matches_bisection():
    L, R = PrimitiveState(0.8, 22), PrimitiveState(0.6, 15)
    M = intermediate_state(L, R, MODEL)
    assert M.u == 15
    assert M.rho == pytest.approx(bisect_density(w_of(L), R.u, P), abs=1e-12)
    assert L.rho < M.rho < P.rho_star


def test_rarefaction_case_middle_matches_bisection():
    L, R = PrimitiveState(0.8, 16), PrimitiveState(0.6, 18)
    M = intermediate_state(L, R, MODEL)
    assert M.rho == pytest.approx(bisect_density(w_of(L), R.u, P), abs=1e-12)
    assert 0 < M.rho < L.rho


def test_invalid_states_are_rejected():
    with pytest.raises(DomainError):
        intermediate_state(PrimitiveState(1.2, 10), PrimitiveState(0.5, 10), MODEL)
    with pytest.raises(DomainError):
        intermediate_state(PrimitiveState(0.5, 10), PrimitiveState(0.5, 30), MODEL)


def test_near_free_flow_right_state_gives_vacuum_middle():
    fan = solve(PrimitiveState(1e-3, 1.0), PrimitiveState(0.5, 25 * (1 - 1e-12)), MODEL)
    assert fan.middle.rho == 0.0 or fan.middle.rho < 1e-9


@settings(max_examples=1000, deadline=None)
@given(states, states)
def test_closed_form_matches_bisection(L, R):
    assume(abs(L.u - R.u) > 1e-9)
    M = intermediate_state(L, R, MODEL)
    assume(M.rho > 1e-6)
    assert M.rho == pytest.approx(bisect_density(w_of(L), R.u, P), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(states, states)
def test_advected_quantity_invariant_across_nonlinear_wave(L, R):
    M = intermediate_state(L, R, MODEL)
    assume(M.rho > 0)
    wL = w_of(L)
    assert abs(w_of(M) - wL) < 1e-10 * wL
    assert M.u == R.u


# -- shocks -----------------------------------------------------------------

def test_shock_speed_formula():
    L, M = PrimitiveState(0.5, 10), PrimitiveState(0.75, 4)
    assert shock_speed(L, M) == pytest.approx((0.75 * 4 - 0.5 * 10) / 0.25, rel=1e-15)


def test_shock_speed_degenerate_jump():
    with pytest.raises(DomainError):
        shock_speed(PrimitiveState(0.5, 10), PrimitiveState(0.5, 8))


def test_stationary_jump():
    assert shock_speed(PrimitiveState(0.5, 8), PrimitiveState(0.8, 5)) == 0.0


def test_weak_shock_speed_tends_to_characteristic_speed():
    L = PrimitiveState(0.5, 10)
    lam = float(MODEL.lam2(L.rho, L.u))
    errors = []
    for du in (1e-2, 1e-3, 1e-4):
        M = intermediate_state(L, PrimitiveState(0.5, L.u - du), MODEL)
        errors.append(abs(shock_speed(L, M) - lam))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-3


def test_rankine_hugoniot_on_random_shocks():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        rho_l, rho_r = rng.uniform(0.05, 0.95, 2)
        u_l, u_r = np.sort(rng.uniform(0.5, 24.5, 2))[::-1]
        L, R = PrimitiveState(rho_l, u_l), PrimitiveState(rho_r, u_r)
        fan = solve(L, R, MODEL)
        if fan.shock_speed is None:
            continue
        behind = fan.tangent or fan.middle
        assert np.all(rh_residuals(L, behind, fan.shock_speed, MODEL) < 1e-10)
        checked += 1


@settings(max_examples=300, deadline=None)
@given(states, states)
def test_admissibility(L, R):
    fan = solve(L, R, MODEL)
    if fan.pattern is Pattern.SHOCK_CONTACT:
        assert fan.middle.rho > L.rho and fan.middle.u < L.u
    elif fan.pattern is Pattern.RAREFACTION_CONTACT:
        assert fan.middle.rho < L.rho and fan.middle.u > L.u
    assert fan.min_speed <= fan.trailing_speed <= fan.contact_speed + 1e-12
    if fan.fan_edges is not None:
        assert fan.fan_edges[0] <= fan.fan_edges[1]
    if fan.composite:
        assert fan.shock_speed == pytest.approx(fan.fan_edges[0], rel=1e-9, abs=1e-9)


def test_decreasing_velocity_below_inflection_is_a_fan():
    fan = solve(PrimitiveState(0.5, 2.0), PrimitiveState(0.5, 1.0), MODEL)
    assert fan.pattern is Pattern.SHOCK_CONTACT
    assert fan.shock_speed is None and fan.fan_edges[0] < fan.fan_edges[1]


def test_genuinely_nonlinear_rarefaction_opens():
    fan = solve(PrimitiveState(0.5, 10), PrimitiveState(0.5, 20), MODEL)
    assert not fan.composite
    assert fan.fan_edges[0] == pytest.approx(float(MODEL.lam2(0.5, 10)), rel=1e-15)


# -- waves crossing the inflection velocity -------------------------------

def scalar_oracle(L, u_m, xi, n=200001):
    """Nonlinear wave from the scalar problem along ``w = w_L``.

    Osher's formula: the density at ``ξ`` minimises (``ρ_L < ρ_M``) or
    maximises (``ρ_L > ρ_M``) ``f(ρ) - ξρ`` with ``f(ρ) = ρ u(ρ)``.
    """
    w = w_of(L)
    rho_m = bisect_density(w, u_m, P)
    rho = np.linspace(min(L.rho, rho_m), max(L.rho, rho_m), n)
    u = MODEL.velocity(rho, w)
    f = rho * u
    out = []
    for x in xi:
        g = f - x * rho
        out.append(rho[np.argmin(g)] if L.rho < rho_m else rho[np.argmax(g)])
    return np.array(out)


@pytest.mark.parametrize("gamma", [2.0, 3.0, 4.0])
def test_inflection_velocity_matches_numerical_minimum(gamma):
    params = ModelParams(2.0, 25.0, gamma)
    model = RARZ(params)
    for rho, u in [(0.3, 3.0), (1.5, 20.0), (1.0, 10.0)]:
        w = model.advected(rho, u)
        us = np.linspace(1e-3, 25 * (1 - 1e-6), 400001)
        lam = model.lam2(model.density(w, us), us)
        assert us[np.argmin(lam)] == pytest.approx(model.inflection_velocity(), abs=1e-3)


def test_inflection_velocity_zero_when_gamma_at_most_one():
    assert RARZ(ModelParams(gamma=1.0)).inflection_velocity() == 0.0
    assert RARZ(ModelParams(gamma=0.5)).inflection_velocity() == 0.0


@pytest.mark.parametrize("L, u_r, composite", [
    (PrimitiveState(0.5, 0.5), 1.0, False),    # increasing u, entirely below the inflection: shock
    (PrimitiveState(0.5, 0.5), 20.0, True),    # increasing u across it: shock + fan
    (PrimitiveState(0.5, 5.0), 1.0, False),    # decreasing u below it: fan
    (PrimitiveState(0.3, 20.0), 0.6, True),    # decreasing u across it: shock + fan
    (PrimitiveState(0.3, 8.0), 5.0, True),     # decreasing u, slightly across it: shock + fan
])
def test_nonlinear_wave_matches_scalar_oracle(L, u_r, composite):
    fan = solve(L, PrimitiveState(0.2, u_r), MODEL)
    assert fan.composite is composite
    lo, hi = fan.min_speed, fan.trailing_speed
    span = max(hi - lo, 1.0)
    xi = np.concatenate([np.linspace(lo - 0.5 * span, lo - 1e-6 * span, 20),
                         np.linspace(lo + 1e-6 * span, hi - 1e-6 * span, 40)])
    xi = xi[xi < fan.contact_speed]
    expected = scalar_oracle(L, u_r, xi)
    got = sample(fan, xi).rho
    assert np.max(np.abs(got - expected)) < 1e-4


# -- sampling ---------------------------------------------------------------

def test_sample_outside_fan():
    fan = solve(PrimitiveState(0.8, 22), PrimitiveState(0.6, 15), MODEL)
    assert sample(fan, fan.min_speed - 1.0) == fan.left
    assert sample(fan, fan.contact_speed + 1.0) == fan.right


def test_contact_only_sampling():
    L, R = PrimitiveState(0.8, 15), PrimitiveState(0.7, 15)
    fan = solve(L, R, MODEL)
    assert sample(fan, 15 - 1e-9).rho == 0.8
    assert sample(fan, 15 + 1e-9).rho == 0.7


def test_rarefaction_fan_edge_continuity():
    fan = solve(PrimitiveState(0.8, 16), PrimitiveState(0.6, 18), MODEL)
    edge = fan.fan_edges[1]
    inner = sample(fan, np.array([edge * (1 - 1e-15)]))
    assert inner.rho[0] == pytest.approx(fan.middle.rho, abs=1e-10)
    assert inner.u[0] == pytest.approx(fan.middle.u, abs=1e-10)


def test_fan_states_satisfy_similarity_condition():
    fan = solve(PrimitiveState(0.8, 16), PrimitiveState(0.6, 18), MODEL)
    xi = np.linspace(*fan.fan_edges, 50)[1:-1]
    W = sample(fan, xi)
    assert np.all(np.abs(MODEL.lam2(W.rho, W.u) - xi) < 1e-12 * np.maximum(1, np.abs(xi)))
    assert np.allclose(MODEL.advected(W.rho, W.u), w_of(fan.left), rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(states, states)
def test_sampled_profile_bounds_and_monotone_fan(L, R):
    fan = solve(L, R, MODEL)
    xi = np.linspace(fan.min_speed - 5, fan.contact_speed + 5, 301)
    W = sample(fan, xi)
    assert np.all((W.rho >= 0) & (W.rho < P.rho_star))
    assert np.all((W.u >= 0) & (W.u <= P.u_star))
    if fan.fan_edges is not None:
        inside = (xi >= fan.fan_edges[0]) & (xi < fan.fan_edges[1])
        du = np.diff(W.u[inside])
        assert np.all(du >= -1e-12) or np.all(du <= 1e-12)


def test_exact_profile_test4_jump_moves_with_flow():
    fan = solve(PrimitiveState(0.8, 15), PrimitiveState(0.7, 15), MODEL)
    x = np.linspace(0, 2, 2001)
    W = exact_profile(fan, x, 0.02)
    assert np.all(W.rho[x < 1.3 - 1e-9] == 0.8)
    assert np.all(W.rho[x > 1.3 + 1e-9] == 0.7)


def test_exact_profile_at_time_zero():
    fan = solve(PrimitiveState(0.8, 22), PrimitiveState(0.6, 15), MODEL)
    W = exact_profile(fan, np.array([0.5, 1.5]), 0.0)
    assert list(W.rho) == [0.8, 0.6]


# -- wave curves ------------------------------------------------------------

@pytest.mark.parametrize("branch", ["S", "R"])
def test_wave_curve_starts_at_base_state_and_decreases(branch):
    U0 = PrimitiveState(0.6, 12)
    pts = wave_curve_points(U0, branch, 200, MODEL)
    assert tuple(pts[0]) == (12, 0.6)
    order = np.argsort(pts[:, 0])
    u, rho = pts[order, 0], pts[order, 1]
    slope = np.diff(rho) / np.diff(u)
    assert np.all(slope < 0)


def test_rarefaction_curve_reaches_vacuum_at_maximal_speed():
    pts = wave_curve_points(PrimitiveState(0.6, 12), "R", 100, MODEL)
    assert pts[-1, 0] == pytest.approx(25, rel=1e-5)
    assert pts[-1, 1] < 1e-2


def test_wave_curve_branch_sides():
    U0 = PrimitiveState(0.6, 12)
    assert np.all(wave_curve_points(U0, "S", 50, MODEL)[1:, 1] > 0.6)
    assert np.all(wave_curve_points(U0, "R", 50, MODEL)[1:, 1] < 0.6)


def test_wave_curve_rejects_unknown_branch():
    with pytest.raises(ValueError):
        wave_curve_points(PrimitiveState(0.6, 12), "X", 10, MODEL)
