"""Finite-volume schemes for the 1D system.

Two integrators are provided: the classical Godunov scheme with exact
interface fluxes, and the two-step Godunov/Glimm transport-equilibrium
scheme, where contacts are moved by random choice (driven by the van der
Corput sequence) and nonlinear waves by Godunov fluxes on a staggered
half-cell update.  An HLL flux is available for comparison.

The sweep kernels operate along axis 1 of a conserved array of shape
``(ncomp, n, ...)``; components are ``(ρ, ρw[, ρs])`` where ``w`` is the
closure's advected quantity and ``s`` an optional passive quantity carried
with the contact (the lateral ``ṽp`` in 2D sweeps).  Trailing axes are
independent lines, which is how the 2D solver reuses them.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .model import Closure, ModelParams, PrimitiveState, make_closure
from .riemann import interface_state

EQUAL_TOL = 1e-12
SCHEMES = ("godunov", "hybrid", "hll")
BOUNDARIES = ("outflow", "periodic")


class NumericalFailure(RuntimeError):
    """A cell left the admissible set or became non-finite."""

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} at cell {index}")
        self.index = index


class UnsupportedConfiguration(ValueError):
    pass


# -- van der Corput ---------------------------------------------------------

def van_der_corput(n: int, base: int = 2) -> float:
    """Radical inverse of ``n`` in ``base`` (``n >= 1``)."""
    if n < 1:
        raise ValueError("van der Corput index starts at 1")
    q, denom = 0.0, 1.0
    while n:
        n, digit = divmod(n, base)
        denom *= base
        q += digit / denom
    return q


@dataclass
class VdcSampler:
    """Deterministic sample source; step ``n`` consumes ``a_{n+1}``."""

    index: int = 0

    def next(self) -> float:
        self.index += 1
        return van_der_corput(self.index)


# -- sweep kernels ----------------------------------------------------------

def _pad(q, boundary):
    if boundary == "periodic":
        return np.concatenate([q[:, -1:], q, q[:, :1]], axis=1)
    return np.concatenate([q[:, :1], q, q[:, -1:]], axis=1)


def decode(q, closure: Closure, vacuum: float = 0.0):
    """Split conserved data into ``(ρ, u, w, s)``; ``s`` is ``None`` without a passive component."""
    rho = q[0]
    full = rho > vacuum
    safe = np.where(full, rho, 1.0)
    w = np.where(full, q[1] / safe, 0.0)
    u = np.where(full, closure.velocity(safe, w), closure.vacuum_velocity(w))
    s = np.where(full, q[2] / safe, 0.0) if q.shape[0] > 2 else None
    return rho, u, w, s


def physical_flux(q, u):
    return u * q


def godunov_flux(closure: Closure, left, right):
    """Exact-Riemann interface flux; ``left``/``right`` are ``decode`` tuples."""
    rho_l, u_l, w_l, s_l = left
    rho_r, u_r, w_r, s_r = right
    rho0, u0, w0, from_right = interface_state(closure, rho_l, u_l, w_l, rho_r, u_r, w_r)
    m = rho0 * u0
    out = [m, m * w0]
    if s_l is not None:
        out.append(m * np.where(from_right, s_r, s_l))
    return np.stack(out)


def hll_flux_conserved(closure: Closure, ql, qr, left, right):
    """HLL flux with Davis-type speed bounds from both states."""
    rho_l, u_l = left[0], left[1]
    rho_r, u_r = right[0], right[1]
    lam_l = closure.lam2(rho_l, u_l)
    lam_r = closure.lam2(rho_r, u_r)
    s_lo = np.minimum(np.minimum(lam_l, u_l), np.minimum(lam_r, u_r))
    s_hi = np.maximum(np.maximum(lam_l, u_l), np.maximum(lam_r, u_r))
    fl = physical_flux(ql, u_l)
    fr = physical_flux(qr, u_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = (s_hi * fl - s_lo * fr + s_lo * s_hi * (qr - ql)) / (s_hi - s_lo)
    return np.where(s_lo >= 0, fl, np.where(s_hi <= 0, fr, mid))


def conservative_sweep(q, dt_dx, closure: Closure, boundary="outflow", flux="godunov", vacuum=0.0):
    """One conservative update ``q - dt/dx (F_{j+1/2} - F_{j-1/2})``."""
    qg = _pad(q, boundary)
    st = decode(qg, closure, vacuum)
    left = tuple(None if a is None else a[:-1] for a in st)
    right = tuple(None if a is None else a[1:] for a in st)
    if flux == "godunov":
        F = godunov_flux(closure, left, right)
    elif flux == "hll":
        F = hll_flux_conserved(closure, qg[:, :-1], qg[:, 1:], left, right)
    else:
        raise ValueError(f"unknown flux {flux!r}")
    return q - dt_dx * (F[:, 1:] - F[:, :-1])


def _star_state(closure, w_left, s_left, u_self):
    """Conserved ``U*(U_left, U_self)``: left neighbour's ``w``/``s`` at the cell's velocity."""
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = closure.density(w_left, u_self)
    out = [rho, rho * w_left]
    if s_left is not None:
        out.append(rho * s_left)
    return np.stack(out)


def _differs(a, b, tol=EQUAL_TOL):
    return np.any(np.abs(a - b) > tol * np.maximum(np.abs(a), np.abs(b)), axis=0)


def glimm_sweep(q, dt_dx, a, closure: Closure, boundary="outflow", vacuum=0.0):
    """Random-choice transport of contacts with a single sample ``a``.

    Cell ``j`` takes ``U*(U_{j-1}, U_j)`` when ``a < dt/dx * u_j``, else keeps
    ``U_j``.
    """
    qg = _pad(q, boundary)
    rho, u, w, s = decode(qg, closure, vacuum)
    u_c = u[1:-1]
    if np.any(u_c < 0):
        bad = np.argwhere(u_c < 0)[0]
        raise UnsupportedConfiguration(
            f"random-choice transport needs non-negative velocities; u < 0 at cell {tuple(bad)}")
    star = _star_state(closure, w[:-2], None if s is None else s[:-2], u_c)
    take = (a < dt_dx * u_c) & np.all(np.isfinite(star), axis=0)
    return np.where(take, star, q)


def hybrid_sweep(q, dt_dx, a, closure: Closure, boundary="outflow", vacuum=0.0):
    """Two-step transport-equilibrium update over one time step."""
    half = glimm_sweep(q, dt_dx, a, closure, boundary, vacuum)
    qg = _pad(q, boundary)
    old = decode(qg, closure, vacuum)
    h = decode(half, closure, vacuum)

    # right interface: waves from the (half, old right neighbour) problem
    right_nb = tuple(None if x is None else x[2:] for x in old)
    F_right = godunov_flux(closure, h, right_nb)

    # left interface: a contact still separating the cell from its left neighbour
    # blocks the incoming wave; otherwise use the Riemann flux
    left_nb = tuple(None if x is None else x[:-2] for x in old)
    star = _star_state(closure, left_nb[2], left_nb[3], h[1])
    blocked = _differs(star, half)
    F_left = np.where(blocked, physical_flux(half, h[1]), godunov_flux(closure, left_nb, h))
    return half - dt_dx * (F_right - F_left)


# -- grids ------------------------------------------------------------------

@dataclass
class Grid1D:
    """Uniform grid of cell-averaged conserved states ``q = (ρ, ρw)``."""

    x_min: float
    x_max: float
    q: np.ndarray
    closure: Closure
    boundary: str = "outflow"
    time: float = 0.0

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")

    @property
    def n_cells(self) -> int:
        return self.q.shape[1]

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def vacuum(self) -> float:
        p = self.closure.params
        return p.vacuum_threshold

    def decoded(self):
        return decode(self.q, self.closure, self.vacuum)

    def primitive(self) -> PrimitiveState:
        rho, u, _, _ = self.decoded()
        return PrimitiveState(rho.copy(), u)

    def mass(self) -> float:
        return float(self.q[0].sum() * self.dx)

    def boundary_mass_flux(self) -> float:
        """Net mass inflow rate through the two ends (zero for periodic grids)."""
        if self.boundary == "periodic":
            return 0.0
        rho, u, _, _ = self.decoded()
        return float(rho[0] * u[0] - rho[-1] * u[-1])

    def replace(self, **kw) -> "Grid1D":
        return dataclasses.replace(self, **kw)


def check_cells(q, closure: Closure, where=""):
    """Raise :class:`NumericalFailure` on non-finite or inadmissible cells."""
    bad = ~np.all(np.isfinite(q), axis=0) | (q[0] < 0) | (q[0] >= closure.rho_max)
    bad |= np.any(q[1:] < 0, axis=0)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NumericalFailure(f"inadmissible state{where}", idx if len(idx) > 1 else idx[0])


def cfl_dt(grid: Grid1D, cfl: float, t_end: float) -> float:
    """``cfl * dx / max |λ|``, clipped so the run lands on ``t_end``."""
    rho, u, _, _ = grid.decoded()
    smax = float(np.max(grid.closure.max_speed(rho, u)))
    remaining = t_end - grid.time
    if smax <= 0:
        return remaining
    return min(cfl * grid.dx / smax, remaining)


def godunov_step(grid: Grid1D, dt: float) -> Grid1D:
    q = conservative_sweep(grid.q, dt / grid.dx, grid.closure, grid.boundary, "godunov", grid.vacuum)
    check_cells(q, grid.closure, " after Godunov step")
    return grid.replace(q=q, time=grid.time + dt)


def hll_step(grid: Grid1D, dt: float) -> Grid1D:
    q = conservative_sweep(grid.q, dt / grid.dx, grid.closure, grid.boundary, "hll", grid.vacuum)
    check_cells(q, grid.closure, " after HLL step")
    return grid.replace(q=q, time=grid.time + dt)


def glimm_transport_substep(grid: Grid1D, dt: float, sampler: VdcSampler) -> Grid1D:
    """Step 1 alone (advances the sampler, not the clock)."""
    q = glimm_sweep(grid.q, dt / grid.dx, sampler.next(), grid.closure, grid.boundary, grid.vacuum)
    return grid.replace(q=q)


def hybrid_step(grid: Grid1D, dt: float, sampler: VdcSampler) -> Grid1D:
    q = hybrid_sweep(grid.q, dt / grid.dx, sampler.next(), grid.closure, grid.boundary, grid.vacuum)
    check_cells(q, grid.closure, " after hybrid step")
    return grid.replace(q=q, time=grid.time + dt)


# -- driver -----------------------------------------------------------------

@dataclass(frozen=True)
class Piecewise1D:
    """Piecewise-constant initial data: ``states[k]`` holds on ``[breaks[k-1], breaks[k])``."""

    states: tuple
    breaks: tuple
    x_min: float = 0.0
    x_max: float = 2.0

    def __post_init__(self):
        if len(self.states) != len(self.breaks) + 1:
            raise ValueError("need exactly one more state than break points")

    def evaluate(self, x):
        idx = np.searchsorted(np.asarray(self.breaks, dtype=float), x, side="right")
        rho = np.array([s.rho for s in self.states])[idx]
        u = np.array([s.u for s in self.states])[idx]
        return rho, u


def riemann_data(left, right, x_split=1.0, x_min=0.0, x_max=2.0) -> Piecewise1D:
    left = left if isinstance(left, PrimitiveState) else PrimitiveState(*left)
    right = right if isinstance(right, PrimitiveState) else PrimitiveState(*right)
    return Piecewise1D((left, right), (x_split,), x_min, x_max)


@dataclass
class SchemeConfig:
    scheme: str = "hybrid"
    cfl: float = 0.45
    t_end: float = 0.02
    params: ModelParams = field(default_factory=ModelParams)
    model: str = "RARZ"
    boundary: str = "outflow"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")

    @property
    def closure(self) -> Closure:
        return make_closure(self.model, self.params)


def initial_grid(initial: Piecewise1D, n_cells: int, closure: Closure, boundary="outflow") -> Grid1D:
    dx = (initial.x_max - initial.x_min) / n_cells
    x = initial.x_min + (np.arange(n_cells) + 0.5) * dx
    rho, u = initial.evaluate(x)
    w = closure.advected(rho, u)
    q = np.stack([rho, rho * w])
    check_cells(q, closure, " in initial data")
    return Grid1D(initial.x_min, initial.x_max, q, closure, boundary)


@dataclass(frozen=True)
class Snapshot:
    t: float
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray


def snapshot(grid: Grid1D) -> Snapshot:
    W = grid.primitive()
    return Snapshot(grid.time, grid.x, np.array(W.rho), np.array(W.u))


@dataclass
class Run1D:
    snapshots: list
    grid: Grid1D
    steps: int
    mass0: float
    inflow: float = 0.0

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def mass_defect(self) -> float:
        """Relative mass change not explained by the boundary fluxes of the pre-step states."""
        return abs(self.grid.mass() - self.mass0 - self.inflow) / self.mass0


def run_1d(initial: Piecewise1D, config: SchemeConfig, n_cells: int = 400,
           snapshot_times=(), callback=None) -> Run1D:
    """Advance ``initial`` to ``config.t_end``.

    Snapshots are taken at each requested time (steps are clipped to land on
    them) and always at ``t_end``.  ``callback(grid)`` runs after every step.
    """
    closure = config.closure
    grid = initial_grid(initial, n_cells, closure, config.boundary)
    mass0 = grid.mass()
    sampler = VdcSampler()
    targets = sorted({float(t) for t in snapshot_times if 0 <= t < config.t_end} | {config.t_end})
    snaps = []
    steps = 0
    inflow = 0.0
    for target in targets:
        while grid.time < target:
            dt = cfl_dt(grid, config.cfl, target)
            inflow += dt * grid.boundary_mass_flux()
            if config.scheme == "godunov":
                grid = godunov_step(grid, dt)
            elif config.scheme == "hll":
                grid = hll_step(grid, dt)
            else:
                grid = hybrid_step(grid, dt, sampler)
            if grid.time > target or target - grid.time < 1e-14 * max(target, 1.0):
                grid = grid.replace(time=target)
            steps += 1
            if callback is not None:
                callback(grid)
        snaps.append(snapshot(grid))
    return Run1D(snaps, grid, steps, mass0, inflow)
