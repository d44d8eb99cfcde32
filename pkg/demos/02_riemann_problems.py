# Exact Riemann solutions for the four 1D experiments.
#
# The nonlinear wave lies on the curve w = const and is followed by a contact
# moving at the right-hand speed.  Below a critical velocity the nonlinear
# field is not genuinely nonlinear, and a shock can carry an attached fan.

# %%
import numpy as np

from rarz import ModelParams, PrimitiveState, make_closure, solve
from rarz.riemann import exact_profile

params = ModelParams(rho_star=1.0, u_star=25.0, gamma=2.0)
rarz = make_closure("RARZ", params)
tests = {
    "Test 2": ((0.8, 22.0), (0.6, 15.0)),
    "Test 3": ((0.8, 16.0), (0.6, 18.0)),
    "Test 4": ((0.8, 15.0), (0.7, 15.0)),
}

# %%
for name, (left, right) in tests.items():
    fan = solve(PrimitiveState(*left), PrimitiveState(*right), rarz)
    print(f"{name}: {fan.pattern.value:4s} middle rho={fan.middle.rho:.4f} u={fan.middle.u:g}",
          f"shock={fan.shock_speed}", f"fan={fan.fan_edges}", f"contact={fan.contact_speed:g}")

# %% profile of Test 2 at t = 0.02 on a coarse grid
fan = solve(PrimitiveState(0.8, 22.0), PrimitiveState(0.6, 15.0), rarz)
x = np.linspace(0.0, 2.0, 21)
W = exact_profile(fan, x, 0.02)
for xi, r, u in zip(x, W.rho, W.u):
    print(f"x={xi:4.1f}  rho={r:.4f}  u={u:6.3f}")

# %% Test 1 under the three closures: ARZ pushes the middle density past rho*
for model in ("ARZ", "MAR", "RARZ"):
    fan = solve(PrimitiveState(0.4, 20.0), PrimitiveState(0.8, 16.0), make_closure(model, params))
    print(f"Test 1 {model:5s}: middle rho = {fan.middle.rho:.4f}")

# %% where lambda_2 stops growing with u along w = const
small = make_closure("RARZ", ModelParams(rho_star=1.0, u_star=1.0, gamma=2.0))
print("inflection velocity:", small.inflection_velocity())
fan = solve(PrimitiveState(0.7, 0.2), PrimitiveState(0.5287, 0.5), small)
print("shock + fan:", fan.composite, "tangent state:", fan.tangent, "fan:", fan.fan_edges)
