# Fundamental diagrams of the three closures.
#
# Each closure links velocity to density along a curve of constant w.  ARZ
# and MAR can only be read off after clipping (ARZ) or by accepting negative
# speeds (MAR); RARZ stays inside [0, u*] and hits zero exactly at the jam
# density.

# %%
import numpy as np

from rarz import ModelParams, fd_curve
from rarz.model import fd_density_samples

params = ModelParams(rho_star=1.0, u_star=25.0, gamma=2.0)
rho = fd_density_samples(params, n=9, margin=1e-9)
print("rho:", np.round(rho, 3))

# %% same w, three closures
for model in ("ARZ", "MAR", "RARZ"):
    fd = fd_curve(model, 5.0, rho, params)
    print(f"{model:5s} u:", np.array2string(fd.u, precision=3, max_line_width=200))

# %% MAR goes negative once p(rho) exceeds w; ARZ is clipped at zero
mar = fd_curve("MAR", 0.5, rho, params)
print("MAR negative speeds at rho =", np.round(rho[mar.u < 0], 3))

# %% RARZ for several pressure exponents: the flow peak moves with gamma
dense = fd_density_samples(params, n=2001)
for gamma in (1.0, 2.0, 3.0):
    p = ModelParams(rho_star=1.0, u_star=25.0, gamma=gamma)
    fd = fd_curve("RARZ", 5.0, dense, p)
    k = int(np.argmax(fd.q))
    print(f"gamma={gamma:g}: max flow {fd.q[k]:.3f} at rho={dense[k]:.3f}, u(rho*)={fd.u[-1]:.1e}")
