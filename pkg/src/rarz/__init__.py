"""Refined Aw-Rascle-Zhang (RARZ) traffic flow: model algebra, exact Riemann
solver, Godunov and Godunov/Glimm hybrid schemes in 1D and 2D, and a
follow-the-leader vehicle integrator."""
from .model import (
    ARZ,
    MAR,
    RARZ,
    ConservedState,
    DomainError,
    ModelParams,
    PrimitiveState,
    eigenvalues,
    fd_curve,
    flux,
    flux_2d,
    make_closure,
    pressure,
    pressure_inverse,
    pseudo_velocity,
    pseudo_velocity_inverse,
    to_conserved,
    to_primitive,
)
from .riemann import Pattern, RiemannFan, classify, exact_profile, intermediate_state, sample, shock_speed, solve
from .scheme1d import (
    Grid1D,
    NumericalFailure,
    SchemeConfig,
    VdcSampler,
    godunov_step,
    hybrid_step,
    riemann_data,
    run_1d,
    van_der_corput,
)
from .solver2d import Config2D, Grid2D, quadrants, run_2d, split_solve, strang_step
from .micro import CollisionError, MicroParams, Vehicle1D, Vehicle2D, integrate, w_drift
from .config import ConfigError, ExperimentConfig, load_config, parse_config, to_toml

__version__ = "0.1.0"
