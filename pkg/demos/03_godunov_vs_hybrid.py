# Godunov against the Godunov/Glimm hybrid in 1D.
#
# Both schemes use exact Riemann fluxes.  The hybrid moves contacts by
# van der Corput sampling, so they stay one cell wide, while Godunov smears
# them over a growing band.

# %%
from rarz import ModelParams, PrimitiveState, SchemeConfig, riemann_data, run_1d, solve
from rarz.diagnostics import l1_error, transition_width
from rarz.model import RARZ
from rarz.riemann import exact_profile

params = ModelParams(rho_star=1.0, u_star=25.0, gamma=2.0)
tests = {
    "Test 2": ((0.8, 22.0), (0.6, 15.0)),
    "Test 3": ((0.8, 16.0), (0.6, 18.0)),
    "Test 4": ((0.8, 15.0), (0.7, 15.0)),
}

# %% L1 error in density against the exact solution
for name, pair in tests.items():
    fan = solve(PrimitiveState(*pair[0]), PrimitiveState(*pair[1]), RARZ(params))
    for scheme in ("godunov", "hybrid"):
        errs = []
        for n in (100, 200, 400, 800):
            snap = run_1d(riemann_data(*pair), SchemeConfig(scheme, 0.45, 0.02, params), n).final
            errs.append(l1_error(snap.rho, exact_profile(fan, snap.x, 0.02).rho, 2.0 / n))
        print(f"{name} {scheme:8s}", "  ".join(f"{e:.2e}" for e in errs))

# %% the hybrid's contact sits within a cell or two of the exact position; the
# offset is set by how many samples fell below dt*u/dx, so its error is not
# monotone in n

# %% contact width on Test 4
for scheme in ("godunov", "hybrid"):
    snap = run_1d(riemann_data(*tests["Test 4"]), SchemeConfig(scheme, 0.45, 0.02, params), 400).final
    print(f"{scheme:8s} contact width: {transition_width(snap.rho, 0.8, 0.7)} cells")
