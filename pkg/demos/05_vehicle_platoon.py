# Follow-the-leader platoons and the quantity they carry.
#
# The acceleration law keeps w_i = ũ(u_i) p(τ_i) constant along each
# trajectory, so the drift measured after RK4 integration is pure time
# discretization error and should fall by about 16 when dt is halved.

# %%
import numpy as np

from rarz import MicroParams, Vehicle1D, integrate, w_drift

params = MicroParams(gamma=2.0, u_star=25.0, d=0.5)
platoon = [Vehicle1D(x, u) for x, u in zip([0.0, 1.2, 2.1, 3.5, 4.4, 5.8],
                                            [18.75, 5.0, 15.0, 3.75, 12.5, 7.5])]

# %%
for dt in (2e-3, 1e-3, 5e-4):
    traj = integrate(platoon, params, dt, int(round(10.0 / dt)), store_every=int(round(0.1 / dt)))
    print(f"dt={dt:.0e}: max relative w drift {w_drift(traj, params).w_rel.max():.2e}")

# %% speeds relax towards the leader without leaving [0, u*]
traj = integrate(platoon, params, 1e-3, 10_000, store_every=2000)
print(np.round(traj.u, 3))

# %% in 2D the lateral quantity sigma_i is carried as well
params2 = MicroParams(gamma=2.0, u_star=25.0, v_star=5.0, d_x=0.5, d_y=0.5)
arrays = (np.array([0.0, 1.2, 2.1, 3.5]), np.array([0.0, 0.6, 1.3, 1.9]),
          np.array([18.75, 5.0, 15.0, 3.75]), np.array([2.5, 1.0, 3.5, 0.5]))
drift = w_drift(integrate(arrays, params2, 1e-3, 10_000, store_every=100), params2)
print(f"2D: w drift {drift.w_rel.max():.2e}, sigma drift {drift.sigma_rel.max():.2e}")
