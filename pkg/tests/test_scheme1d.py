import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rarz.diagnostics import l1_error, transition_width
from rarz.model import ARZ, MAR, RARZ, ModelParams, PrimitiveState
from rarz.riemann import exact_profile, intermediate_state, solve
from rarz.scheme1d import (
    Grid1D,
    NumericalFailure,
    SchemeConfig,
    UnsupportedConfiguration,
    VdcSampler,
    cfl_dt,
    glimm_transport_substep,
    godunov_flux,
    godunov_step,
    hybrid_step,
    initial_grid,
    riemann_data,
    run_1d,
    van_der_corput,
)

P = ModelParams(rho_star=1.0, u_star=25.0, gamma=2.0)
MODEL = RARZ(P)
TEST2 = ((0.8, 22.0), (0.6, 15.0))
TEST3 = ((0.8, 16.0), (0.6, 18.0))
TEST4 = ((0.8, 15.0), (0.7, 15.0))


def grid_of(pair, n=400, boundary="outflow"):
    return initial_grid(riemann_data(*pair), n, MODEL, boundary)


def uniform_grid(rho=0.5, u=10.0, n=50):
    return grid_of(((rho, u), (rho, u)), n)


# -- van der Corput ---------------------------------------------------------

@pytest.mark.parametrize("n, a", [(1, 0.5), (2, 0.25), (3, 0.75), (6, 0.375)])
def test_van_der_corput_values(n, a):
    assert van_der_corput(n) == a


def test_van_der_corput_equidistributed():
    a = np.array([van_der_corput(n) for n in range(1, 1025)])
    assert np.all((a > 0) & (a < 1))
    assert abs(a.mean() - 0.5) < 0.01


def test_van_der_corput_rejects_zero():
    with pytest.raises(ValueError):
        van_der_corput(0)


def test_sampler_consumes_sequence_in_order():
    s = VdcSampler()
    assert [s.next() for _ in range(3)] == [0.5, 0.25, 0.75]


# -- time step --------------------------------------------------------------

def test_cfl_dt_at_rest_returns_remaining_time():
    q = np.stack([np.full(4, 0.5), np.zeros(4)])  # w = 0 means u = 0
    grid = Grid1D(0.0, 1.0, q, MODEL)
    assert cfl_dt(grid, 0.45, 0.3) == 0.3


def test_cfl_dt_single_cell():
    grid = uniform_grid(0.5, 10.0, n=1)
    s = max(10.0, abs(float(MODEL.lam2(0.5, 10.0))))
    assert cfl_dt(grid, 0.45, 10.0) == pytest.approx(0.45 * grid.dx / s, rel=1e-14)


def test_cfl_dt_test2_data():
    grid = grid_of(TEST2)
    speeds = [max(abs(u), abs(float(MODEL.lam2(r, u)))) for r, u in TEST2]
    assert cfl_dt(grid, 0.45, 1.0) == pytest.approx(0.45 * grid.dx / max(speeds), rel=1e-13)


def test_cfl_dt_keeps_sampling_interval_inside_unit():
    grid = grid_of(TEST2)
    dt = cfl_dt(grid, 1.0, 1.0)
    _, u, _, _ = grid.decoded()
    assert np.all(dt * u / grid.dx <= 1.0)


# -- interface flux ---------------------------------------------------------

def osher_mass_flux(L, R, n=20001):
    """Independent Godunov mass flux from the scalar problem along ``w_L``.

    Valid when the contact moves right (``u_R >= 0``): the interface only
    sees the nonlinear wave between ``ρ_L`` and ``ρ_M``.
    """
    M = intermediate_state(L, R, MODEL)
    w = float(MODEL.advected(L.rho, L.u))
    rho = np.linspace(min(L.rho, M.rho), max(L.rho, M.rho), n)
    f = rho * MODEL.velocity(rho, w)
    return f.min() if L.rho <= M.rho else f.max()


states = st.builds(PrimitiveState, st.floats(0.05, 0.95), st.floats(0.2, 24.0))


@settings(max_examples=200, deadline=None)
@given(states, states)
def test_godunov_mass_flux_matches_scalar_oracle(L, R):
    left = tuple(np.array([a]) for a in (L.rho, L.u, float(MODEL.advected(L.rho, L.u))))
    right = tuple(np.array([a]) for a in (R.rho, R.u, float(MODEL.advected(R.rho, R.u))))
    F = godunov_flux(MODEL, left + (None,), right + (None,))
    expected = osher_mass_flux(L, R)
    assert F[0, 0] == pytest.approx(expected, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("model", [MAR(P), ARZ(ModelParams(1.0, 25.0, 2.0))])
def test_godunov_flux_of_equal_states_is_physical_flux(model):
    rho, u = np.array([0.3]), np.array([5.0])
    w = model.advected(rho, u)
    F = godunov_flux(model, (rho, u, w, None), (rho, u, w, None))
    assert F[0, 0] == pytest.approx(0.3 * 5.0, rel=1e-14)
    assert F[1, 0] == pytest.approx(0.3 * 5.0 * w[0], rel=1e-14)


# -- Godunov ----------------------------------------------------------------

def test_godunov_keeps_uniform_state():
    grid = uniform_grid()
    out = godunov_step(grid, cfl_dt(grid, 0.45, 1.0))
    assert np.array_equal(out.q, grid.q)


def test_godunov_mass_balance_per_step_on_contact():
    grid = grid_of(TEST4)
    for _ in range(20):
        dt = cfl_dt(grid, 0.45, 1.0)
        expected = grid.mass() + dt * grid.boundary_mass_flux()
        grid = godunov_step(grid, dt)
        assert abs(grid.mass() - expected) <= 1e-12 * expected


def test_godunov_periodic_mass_is_conserved():
    grid = initial_grid(riemann_data(*TEST2), 200, MODEL, "periodic")
    m0 = grid.mass()
    for _ in range(30):
        grid = godunov_step(grid, cfl_dt(grid, 0.45, 1.0))
    assert abs(grid.mass() - m0) < 1e-13 * m0


def test_godunov_reports_bad_cell():
    grid = grid_of(TEST2, 50)
    with pytest.raises(NumericalFailure):
        godunov_step(grid, 10.0)


@pytest.mark.parametrize("pair", [TEST2, TEST3, TEST4], ids=["test2", "test3", "test4"])
def test_godunov_converges_monotonically(pair):
    fan = solve(PrimitiveState(*pair[0]), PrimitiveState(*pair[1]), MODEL)
    errors = []
    for n in (100, 200, 400, 800):
        s = run_1d(riemann_data(*pair), SchemeConfig("godunov", 0.45, 0.02, P), n).final
        errors.append(l1_error(s.rho, exact_profile(fan, s.x, 0.02).rho, 2.0 / n))
    assert all(a > b for a, b in zip(errors, errors[1:]))


# -- Glimm transport --------------------------------------------------------

def test_glimm_substep_unchanged_when_sample_above_interval():
    grid = grid_of(TEST4)
    dt = cfl_dt(grid, 0.45, 1.0)
    sampler = VdcSampler()
    # a_1 = 0.5 exceeds dt/dx * u = 0.15 everywhere
    out = glimm_transport_substep(grid, dt, sampler)
    assert np.array_equal(out.q, grid.q)


def test_glimm_substep_moves_contact_one_cell():
    grid = grid_of(TEST4)
    dt = cfl_dt(grid, 0.45, 1.0)
    sampler = VdcSampler(index=3)  # next sample a_4 = 0.125 lies below dt/dx * u = 0.15
    out = glimm_transport_substep(grid, dt, sampler)
    assert np.count_nonzero(out.q[0] == 0.8) == np.count_nonzero(grid.q[0] == 0.8) + 1


def test_glimm_substep_keeps_uniform_state():
    grid = uniform_grid()
    sampler = VdcSampler(index=3)
    out = glimm_transport_substep(grid, cfl_dt(grid, 0.45, 1.0), sampler)
    assert np.allclose(out.q, grid.q, rtol=1e-14)


def test_glimm_substep_rejects_negative_velocity():
    grid = uniform_grid()
    q = grid.q.copy()
    q[1, 3] = -1.0
    with pytest.raises(UnsupportedConfiguration):
        glimm_transport_substep(grid.replace(q=q), 1e-4, VdcSampler())


def test_contact_position_counts_van_der_corput_samples():
    # the contact advances one cell per sample below dt/dx * u
    n = 200
    run = run_1d(riemann_data(*TEST4), SchemeConfig("hybrid", 0.45, 0.02, P), n)
    dx = 2.0 / n
    grid = grid_of(TEST4, n)
    c = cfl_dt(grid, 0.45, 1.0) * 15.0 / dx
    expected = sum(van_der_corput(k) < c for k in range(1, run.steps + 1))
    front = run.final.x[np.argmax(run.final.rho < 0.75)] - 0.5 * dx
    assert (front - 1.0) / dx == pytest.approx(expected, abs=1e-9)
    assert abs(front - (1.0 + 15.0 * 0.02)) <= 2.5 * dx


# -- hybrid -----------------------------------------------------------------

def test_hybrid_uniform_fixed_point():
    grid = uniform_grid()
    sampler = VdcSampler()
    for _ in range(5):
        grid2 = hybrid_step(grid, cfl_dt(grid, 0.45, 1.0), sampler)
        assert np.allclose(grid2.q, grid.q, rtol=1e-14)
        grid = grid2


def test_hybrid_contact_stays_sharp_godunov_smears():
    runs = {s: run_1d(riemann_data(*TEST4), SchemeConfig(s, 0.45, 0.02, P), 400).final
            for s in ("hybrid", "godunov")}
    assert transition_width(runs["hybrid"].rho, 0.8, 0.7) <= 2
    assert transition_width(runs["godunov"].rho, 0.8, 0.7) >= 5


def test_hybrid_beats_godunov_on_test2():
    fan = solve(PrimitiveState(*TEST2[0]), PrimitiveState(*TEST2[1]), MODEL)
    err = {}
    for s in ("hybrid", "godunov"):
        snap = run_1d(riemann_data(*TEST2), SchemeConfig(s, 0.45, 0.02, P), 400).final
        err[s] = l1_error(snap.rho, exact_profile(fan, snap.x, 0.02).rho, 2.0 / 400)
    assert err["hybrid"] < err["godunov"]


def test_hybrid_mass_drift_is_order_dx():
    for n in (100, 400):
        run = run_1d(riemann_data(*TEST2), SchemeConfig("hybrid", 0.45, 0.02, P), n)
        assert run.mass_defect < 2.0 / n


# -- driver -----------------------------------------------------------------

def test_zero_end_time_returns_initial_projection():
    run = run_1d(riemann_data(*TEST2), SchemeConfig("hybrid", 0.45, 0.0, P), 10)
    assert run.steps == 0
    assert list(run.final.rho) == [0.8] * 5 + [0.6] * 5
    assert np.allclose(run.final.u, [22.0] * 5 + [15.0] * 5, rtol=1e-13)


def plateau_error(scheme, n):
    fan = solve(PrimitiveState(*TEST2[0]), PrimitiveState(*TEST2[1]), MODEL)
    snap = run_1d(riemann_data(*TEST2), SchemeConfig(scheme, 0.45, 0.02, P), n).final
    a = 1.0 + fan.shock_speed * 0.02
    b = 1.0 + fan.contact_speed * 0.02
    core = (snap.x > a + 0.25 * (b - a)) & (snap.x < b - 0.25 * (b - a))
    assert core.sum() > 10
    return np.max(np.abs(snap.rho[core] - fan.middle.rho))


def test_test2_middle_plateau_hybrid():
    assert plateau_error("hybrid", 400) < 1e-3


def test_test2_middle_plateau_godunov_improves_with_refinement():
    # the smeared contact mixes (ρ, ρw) and sends spurious waves into the plateau
    errors = [plateau_error("godunov", n) for n in (200, 400, 800)]
    assert errors[0] > errors[1] > errors[2]


def test_model_comparison_profiles_differ():
    finals = {}
    for model in ("ARZ", "MAR", "RARZ"):
        cfg = SchemeConfig("godunov", 0.45, 0.05, P, model=model)
        finals[model] = run_1d(riemann_data((0.4, 20.0), (0.8, 16.0)), cfg, 200).final
    assert not np.allclose(finals["RARZ"].rho, finals["MAR"].rho)
    assert not np.allclose(finals["RARZ"].rho, finals["ARZ"].rho)


def test_snapshots_land_on_requested_times():
    run = run_1d(riemann_data(*TEST3), SchemeConfig("godunov", 0.45, 0.02, P), 100, snapshot_times=(0.005, 0.01))
    assert [s.t for s in run.snapshots] == [0.005, 0.01, 0.02]


@pytest.mark.parametrize("scheme", ["godunov", "hybrid"])
def test_runs_are_bit_identical(scheme):
    cfg = SchemeConfig(scheme, 0.45, 0.02, P)
    a = run_1d(riemann_data(*TEST3), cfg, 200).final
    b = run_1d(riemann_data(*TEST3), cfg, 200).final
    assert np.array_equal(a.rho, b.rho) and np.array_equal(a.u, b.u)


@pytest.mark.parametrize("pair", [TEST2, TEST3, TEST4], ids=["test2", "test3", "test4"])
@pytest.mark.parametrize("scheme", ["godunov", "hybrid"])
def test_bounds_hold_every_step(pair, scheme):
    seen = []

    def check(grid):
        rho, u, _, _ = grid.decoded()
        seen.append(bool(np.all((rho >= 0) & (rho < 1.0) & (u >= 0) & (u <= 25.0))))

    run_1d(riemann_data(*pair), SchemeConfig(scheme, 0.45, 0.02, P), 200, callback=check)
    assert seen and all(seen)


@pytest.mark.parametrize("kw", [{"scheme": "muscl"}, {"cfl": 0.0}, {"cfl": 1.5}, {"t_end": -1.0}])
def test_scheme_config_validation(kw):
    with pytest.raises(ValueError):
        SchemeConfig(**kw)
