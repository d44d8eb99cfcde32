"""Dimension-split solver for the 2D system.

Conserved variables are ``(ρ, ρũp, ρṽp)``.  Each Strang step runs an x
half-step, a y full step and a second x half-step.  In an x-sweep the
longitudinal quantity ``ũp`` plays the role of the 1D advected variable and
``ṽp`` is carried passively with the contact; y-sweeps swap the two and use
``v*`` as the speed bound.  Fluxes can be exact Godunov, HLL, or the
two-step Godunov/Glimm hybrid applied sweep by sweep.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .model import (
    RARZ,
    DomainError,
    ModelParams,
    PrimitiveState,
    _pseudo,
    _pseudo_inverse,
    _pressure,
    to_conserved,
)
from .riemann import Pattern, RiemannFan, sample as sample_1d, solve as solve_1d
from .scheme1d import (
    NumericalFailure,
    VdcSampler,
    check_cells,
    conservative_sweep,
    decode,
    hybrid_sweep,
)

FLUX_KINDS = ("hll", "godunov", "hybrid")


def _oriented(W: PrimitiveState, direction: str) -> PrimitiveState:
    """Express ``W`` as (ρ, normal, transverse) for the given sweep direction."""
    if direction == "x":
        return W
    if direction == "y":
        return PrimitiveState(W.rho, W.v, W.u)
    raise ValueError("direction must be 'x' or 'y'")


def _closure(params: ModelParams, direction: str) -> RARZ:
    return RARZ(params) if direction == "x" else RARZ(params, u_star=params.v_star)


def _transverse_max(params, direction):
    return params.v_star if direction == "x" else params.u_star


def split_eigenvalues(W: PrimitiveState, params: ModelParams, direction: str = "x"):
    """``(λ1, λ2, λ3)`` of the split Jacobian; ``λ1 = λ2`` is the normal velocity."""
    Wn = _oriented(W, direction)
    if not 0 <= Wn.rho < params.rho_star:
        raise DomainError("split eigenvalues require 0 <= rho < rho_star")
    lam3 = float(_closure(params, direction).lam2(Wn.rho, Wn.u))
    return Wn.u, Wn.u, lam3


def split_eigenvalues_x(W: PrimitiveState, params: ModelParams):
    return split_eigenvalues(W, params, "x")


@dataclass(frozen=True)
class SplitFan3:
    """Riemann structure of one split subsystem, in global (ρ, u, v) components."""

    left: PrimitiveState
    middle: PrimitiveState
    right: PrimitiveState
    pattern: Pattern
    direction: str
    fan: RiemannFan
    params: ModelParams

    @property
    def speeds(self):
        return self.fan.min_speed, self.fan.contact_speed

    def sample(self, xi) -> PrimitiveState:
        W = sample_1d(self.fan, xi)
        Ln = _oriented(self.left, self.direction)
        Rn = _oriented(self.right, self.direction)
        tmax = _transverse_max(self.params, self.direction)
        left_of_contact = np.asarray(xi) < self.fan.contact_speed
        rho = np.asarray(W.rho, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            s_left = _pseudo(Ln.v, tmax) * _pressure(Ln.rho, self.params.rho_star, self.params.gamma)
            t_left = _pseudo_inverse(s_left / _pressure(rho, self.params.rho_star, self.params.gamma), tmax)
        trans = np.where(left_of_contact, t_left, Rn.v)
        if np.ndim(trans) == 0:
            trans = float(trans)
        return _oriented(PrimitiveState(W.rho, W.u, trans), self.direction)


def split_solve(L: PrimitiveState, R: PrimitiveState, params: ModelParams, direction="x") -> SplitFan3:
    Ln, Rn = _oriented(L, direction), _oriented(R, direction)
    fan = solve_1d(PrimitiveState(Ln.rho, Ln.u), PrimitiveState(Rn.rho, Rn.u), _closure(params, direction))
    M = fan.middle
    tmax = _transverse_max(params, direction)
    if M.rho > 0:
        pL = _pressure(Ln.rho, params.rho_star, params.gamma)
        pM = _pressure(M.rho, params.rho_star, params.gamma)
        vM = float(_pseudo_inverse(_pseudo(Ln.v, tmax) * pL / pM, tmax))
    else:
        vM = tmax
    middle = _oriented(PrimitiveState(M.rho, M.u, vM), direction)
    return SplitFan3(L, middle, R, fan.pattern, direction, fan, params)


def split_intermediate_x(L: PrimitiveState, R: PrimitiveState, params: ModelParams) -> PrimitiveState:
    """Middle state with ``u_M = u_R``, ``ũ_L p_L = ũ_M p_M``, ``ṽ_L p_L = ṽ_M p_M``."""
    return split_solve(L, R, params, "x").middle


def split_intermediate_y(L: PrimitiveState, R: PrimitiveState, params: ModelParams) -> PrimitiveState:
    return split_solve(L, R, params, "y").middle


def _conserved_vec(W: PrimitiveState, params):
    Q = to_conserved(W, params)
    return np.array([Q.rho, Q.y, Q.z], dtype=float)


def hll_flux(L: PrimitiveState, R: PrimitiveState, direction: str, params: ModelParams):
    """HLL interface flux of the split subsystem in ``direction``."""
    Ln, Rn = _oriented(L, direction), _oriented(R, direction)
    closure = _closure(params, direction)
    qL, qR = _conserved_vec(L, params), _conserved_vec(R, params)
    uL, uR = Ln.u, Rn.u
    lamL, lamR = closure.lam2(Ln.rho, Ln.u), closure.lam2(Rn.rho, Rn.u)
    s_lo = min(lamL, uL, lamR, uR)
    s_hi = max(lamL, uL, lamR, uR)
    fL, fR = uL * qL, uR * qR
    if s_lo >= 0:
        return fL
    if s_hi <= 0:
        return fR
    return (s_hi * fL - s_lo * fR + s_lo * s_hi * (qR - qL)) / (s_hi - s_lo)


def hll_star_state(L: PrimitiveState, R: PrimitiveState, direction: str, params: ModelParams):
    """HLL intermediate conserved state ``(S_R U_R - S_L U_L - F_R + F_L) / (S_R - S_L)``."""
    Ln, Rn = _oriented(L, direction), _oriented(R, direction)
    closure = _closure(params, direction)
    qL, qR = _conserved_vec(L, params), _conserved_vec(R, params)
    uL, uR = Ln.u, Rn.u
    s_lo = min(closure.lam2(Ln.rho, uL), uL, closure.lam2(Rn.rho, uR), uR)
    s_hi = max(closure.lam2(Ln.rho, uL), uL, closure.lam2(Rn.rho, uR), uR)
    if s_hi == s_lo:
        return qL
    return (s_hi * qR - s_lo * qL - uR * qR + uL * qL) / (s_hi - s_lo)


# -- grid -------------------------------------------------------------------

@dataclass
class Grid2D:
    """Cell averages ``q[c, i, j]`` with ``i`` along x and ``j`` along y."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    q: np.ndarray
    params: ModelParams
    boundary: tuple = ("outflow", "outflow")
    time: float = 0.0

    @property
    def n_x(self):
        return self.q.shape[1]

    @property
    def n_y(self):
        return self.q.shape[2]

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dy(self):
        return (self.y_max - self.y_min) / self.n_y

    @property
    def x(self):
        return self.x_min + (np.arange(self.n_x) + 0.5) * self.dx

    @property
    def y(self):
        return self.y_min + (np.arange(self.n_y) + 0.5) * self.dy

    def primitive(self) -> PrimitiveState:
        rho, u, _, _ = decode(self.q, _closure(self.params, "x"), self.params.vacuum_threshold)
        _, v, _, _ = decode(self.q[[0, 2, 1]], _closure(self.params, "y"), self.params.vacuum_threshold)
        return PrimitiveState(rho.copy(), u, v)

    def mass(self) -> float:
        return float(self.q[0].sum() * self.dx * self.dy)

    def replace(self, **kw) -> "Grid2D":
        return dataclasses.replace(self, **kw)


def _boundary_pair(boundary):
    if isinstance(boundary, str):
        return (boundary, boundary)
    return tuple(boundary)


def _sweep(q, dt_over_h, params, direction, kind, boundary, a=None):
    closure = _closure(params, direction)
    vac = params.vacuum_threshold
    if direction == "y":
        q = q[[0, 2, 1]].transpose(0, 2, 1)
    if kind == "hybrid":
        out = hybrid_sweep(q, dt_over_h, a, closure, boundary, vac)
    else:
        out = conservative_sweep(q, dt_over_h, closure, boundary, kind, vac)
    if direction == "y":
        out = out.transpose(0, 2, 1)[[0, 2, 1]]
    return np.ascontiguousarray(out)


def strang_step(grid: Grid2D, dt: float, flux_kind: str = "hll", sampler: VdcSampler | None = None,
                order: str = "xyx") -> Grid2D:
    """x half-step, y full step, x half-step (``order="yxy"`` swaps the roles).

    With ``flux_kind="hybrid"`` each sweep draws its own van der Corput
    sample from ``sampler``.
    """
    if flux_kind not in FLUX_KINDS:
        raise ValueError(f"flux_kind must be one of {FLUX_KINDS}")
    if order not in ("xyx", "yxy"):
        raise ValueError("order must be 'xyx' or 'yxy'")
    if flux_kind == "hybrid" and sampler is None:
        raise ValueError("hybrid sweeps need a sampler")
    bx, by = _boundary_pair(grid.boundary)
    p = grid.params
    draw = (lambda: sampler.next()) if flux_kind == "hybrid" else (lambda: None)
    q = grid.q
    sides = {"x": (grid.dx, bx), "y": (grid.dy, by)}
    for direction, frac in zip(order, (0.5, 1.0, 0.5)):
        h, bnd = sides[direction]
        q = _sweep(q, frac * dt / h, p, direction, flux_kind, bnd, draw())
        try:
            check_cells(q, _closure(p, direction), f" after {direction}-sweep")
        except NumericalFailure as exc:
            raise NumericalFailure(f"{exc} (t={grid.time:.6g})", exc.index) from None
    return grid.replace(q=q, time=grid.time + dt)


def cfl_dt_2d(grid: Grid2D, cfl: float, t_end: float) -> float:
    """``cfl * min(dx, dy) / max spectral radius`` over both split directions."""
    W = grid.primitive()
    sx = _closure(grid.params, "x").max_speed(W.rho, W.u)
    sy = _closure(grid.params, "y").max_speed(W.rho, W.v)
    smax = float(max(np.max(sx), np.max(sy)))
    remaining = t_end - grid.time
    if smax <= 0:
        return remaining
    return min(cfl * min(grid.dx, grid.dy) / smax, remaining)


# -- initial data and driver ------------------------------------------------

@dataclass(frozen=True)
class Quadrants:
    """Four constant states; ``q1`` upper right, numbered counterclockwise."""

    q1: PrimitiveState
    q2: PrimitiveState
    q3: PrimitiveState
    q4: PrimitiveState
    x_split: float = 1.0
    y_split: float = 1.0
    x_min: float = 0.0
    x_max: float = 2.0
    y_min: float = 0.0
    y_max: float = 2.0

    def evaluate(self, x, y):
        X, Y = np.meshgrid(x, y, indexing="ij")
        right = X >= self.x_split
        top = Y >= self.y_split
        out = []
        for name in ("rho", "u", "v"):
            a1, a2, a3, a4 = (getattr(s, name) for s in (self.q1, self.q2, self.q3, self.q4))
            out.append(np.where(top, np.where(right, a1, a2), np.where(right, a4, a3)))
        return PrimitiveState(*out)


def quadrants(q1, q2, q3, q4, **kw) -> Quadrants:
    conv = [s if isinstance(s, PrimitiveState) else PrimitiveState(*s) for s in (q1, q2, q3, q4)]
    return Quadrants(*conv, **kw)


def initial_grid_2d(initial: Quadrants, n_x: int, n_y: int, params: ModelParams, boundary="outflow") -> Grid2D:
    x = initial.x_min + (np.arange(n_x) + 0.5) * (initial.x_max - initial.x_min) / n_x
    y = initial.y_min + (np.arange(n_y) + 0.5) * (initial.y_max - initial.y_min) / n_y
    Q = to_conserved(initial.evaluate(x, y), params)
    q = np.stack([np.asarray(Q.rho), np.asarray(Q.y), np.asarray(Q.z)])
    return Grid2D(initial.x_min, initial.x_max, initial.y_min, initial.y_max, q, params,
                  _boundary_pair(boundary))


@dataclass
class Config2D:
    flux_kind: str = "hybrid"
    cfl: float = 0.45
    t_end: float = 0.4
    params: ModelParams = field(default_factory=lambda: ModelParams(1.0, 1.0, 2.0, 1.0))
    boundary: str = "outflow"
    order: str = "xyx"

    def __post_init__(self):
        if self.flux_kind not in FLUX_KINDS:
            raise ValueError(f"flux_kind must be one of {FLUX_KINDS}")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.order not in ("xyx", "yxy"):
            raise ValueError("order must be 'xyx' or 'yxy'")


@dataclass(frozen=True)
class Field2D:
    t: float
    x: np.ndarray
    y: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    bounds: tuple | None = None  # (x_min, x_max, y_min, y_max)

    def domain(self) -> tuple:
        if self.bounds is not None:
            return self.bounds
        dx = self.x[1] - self.x[0] if self.x.size > 1 else 0.0
        dy = self.y[1] - self.y[0] if self.y.size > 1 else 0.0
        return (self.x[0] - dx / 2, self.x[-1] + dx / 2, self.y[0] - dy / 2, self.y[-1] + dy / 2)


@dataclass
class Run2D:
    snapshots: list
    grid: Grid2D
    steps: int

    @property
    def final(self) -> Field2D:
        return self.snapshots[-1]


def field_of(grid: Grid2D) -> Field2D:
    W = grid.primitive()
    return Field2D(grid.time, grid.x, grid.y, np.array(W.rho), np.array(W.u), np.array(W.v),
                   (grid.x_min, grid.x_max, grid.y_min, grid.y_max))


def run_2d(initial: Quadrants, config: Config2D, n_x: int = 200, n_y: int | None = None,
           snapshot_times=(), callback=None) -> Run2D:
    grid = initial_grid_2d(initial, n_x, n_y or n_x, config.params, config.boundary)
    sampler = VdcSampler()
    targets = sorted({float(t) for t in snapshot_times if 0 <= t < config.t_end} | {config.t_end})
    snaps, steps = [], 0
    for target in targets:
        while grid.time < target:
            dt = cfl_dt_2d(grid, config.cfl, target)
            grid = strang_step(grid, dt, config.flux_kind, sampler, config.order)
            if grid.time > target or target - grid.time < 1e-14 * max(target, 1.0):
                grid = grid.replace(time=target)
            steps += 1
            if callback is not None:
                callback(grid)
        snaps.append(field_of(grid))
    return Run2D(snaps, grid, steps)


# -- field files ------------------------------------------------------------

def write_field(path, fld: Field2D, values=None, fmt="%.17g"):
    """Plain-text field: header ``n_x n_y x_min x_max y_min y_max t`` then ``n_x`` rows of ``n_y`` values."""
    values = fld.rho if values is None else values
    bounds = " ".join(repr(float(b)) for b in fld.domain())
    header = f"{fld.x.size} {fld.y.size} {bounds} {float(fld.t)!r}"
    np.savetxt(path, np.asarray(values), fmt=fmt, header=header, comments="")


def read_field(path):
    """Inverse of :func:`write_field`: returns ``(header dict, values)``."""
    with open(path) as fh:
        head = fh.readline().split()
        values = np.loadtxt(fh, ndmin=2)
    nx, ny = int(head[0]), int(head[1])
    meta = dict(n_x=nx, n_y=ny, x_min=float(head[2]), x_max=float(head[3]),
                y_min=float(head[4]), y_max=float(head[5]), t=float(head[6]))
    if values.shape != (nx, ny):
        raise ValueError(f"field shape {values.shape} does not match header ({nx}, {ny})")
    return meta, values


# -- mid-line cuts ----------------------------------------------------------

@dataclass(frozen=True)
class Cut:
    """A line of cells through the middle of two quadrants.

    ``s`` is the coordinate along the cut; ``normal`` and ``transverse``
    are the velocity components along and across it.
    """

    name: str
    direction: str
    coord: float
    s: np.ndarray
    rho: np.ndarray
    normal: np.ndarray
    transverse: np.ndarray
    split: float
    fan: SplitFan3


def _undisturbed_mid(lo, hi, split, fans, t):
    """Midpoint of the widest part of ``(lo, hi)`` not yet reached by waves from ``split``."""
    if t <= 0:
        return 0.5 * (lo + hi)
    left = min(split + f.fan.min_speed * t for f in fans)
    right = max(split + f.fan.contact_speed * t for f in fans)
    if hi <= split:
        return 0.5 * (lo + min(hi, left))
    return 0.5 * (max(lo, right) + hi)


def mid_line_cuts(fld: Field2D, initial: Quadrants, params: ModelParams, t: float | None = None) -> list:
    """One cut through each half of the domain, normal to each initial interface.

    Without ``t`` the cuts run through the quadrant midlines.  With ``t``
    each cut is moved to the middle of the strip not yet reached by the
    waves of the crossing interface, where the exact split solution holds.
    """
    q = initial
    fx = [split_solve(q.q3, q.q4, params, "x"), split_solve(q.q2, q.q1, params, "x")]
    fy = [split_solve(q.q3, q.q2, params, "y"), split_solve(q.q4, q.q1, params, "y")]
    tt = 0.0 if t is None else t
    y_lo = _undisturbed_mid(q.y_min, q.y_split, q.y_split, fy, tt)
    y_hi = _undisturbed_mid(q.y_split, q.y_max, q.y_split, fy, tt)
    x_lo = _undisturbed_mid(q.x_min, q.x_split, q.x_split, fx, tt)
    x_hi = _undisturbed_mid(q.x_split, q.x_max, q.x_split, fx, tt)
    specs = (
        (f"y={y_lo:.4g}", "x", y_lo, fx[0]),
        (f"y={y_hi:.4g}", "x", y_hi, fx[1]),
        (f"x={x_lo:.4g}", "y", x_lo, fy[0]),
        (f"x={x_hi:.4g}", "y", x_hi, fy[1]),
    )
    cuts = []
    for name, direction, c, fan in specs:
        if direction == "x":
            j = int(np.argmin(np.abs(fld.y - c)))
            cuts.append(Cut(name, "x", c, fld.x, fld.rho[:, j], fld.u[:, j], fld.v[:, j], q.x_split, fan))
        else:
            i = int(np.argmin(np.abs(fld.x - c)))
            cuts.append(Cut(name, "y", c, fld.y, fld.rho[i, :], fld.v[i, :], fld.u[i, :], q.y_split, fan))
    return cuts


def cut_exact(cut: Cut, t: float) -> PrimitiveState:
    """Exact split solution along the cut, as (ρ, normal, transverse)."""
    if t == 0:
        xi = np.where(cut.s < cut.split, -np.inf, np.inf)
    else:
        xi = (cut.s - cut.split) / t
    return _oriented(cut.fan.sample(xi), cut.direction)


def cut_waves(cut: Cut, t: float):
    """Nontrivial exact waves on the cut with the transverse jump taken into account."""
    from .diagnostics import exact_waves

    fan = cut.fan
    trans = tuple(_oriented(W, cut.direction).v for W in (fan.left, fan.middle, fan.right))
    return exact_waves(fan.fan, t, cut.split, trans)


def identify_cut_waves(cut: Cut, t: float, margin_cells: float = 8.0) -> list:
    """``(wave, found)`` for every exact wave on the cut."""
    from .diagnostics import identify_wave

    h = cut.s[1] - cut.s[0]
    return [(w, identify_wave(cut.s, cut.rho, cut.transverse, w, margin_cells * h))
            for w in cut_waves(cut, t)]


def structure_metrics(fld: Field2D, initial: Quadrants, params: ModelParams) -> dict:
    """Contact widths on the midline cuts and wave identification on the moved cuts.

    Returns ``{"widths": {cut: cells}, "patterns": [...], "expected": {kind: n},
    "found": {kind: n}}`` with kinds ``"S"``, ``"R"`` and ``"J"``.
    """
    from .diagnostics import contact_window, transition_width

    widths = {}
    for cut in mid_line_cuts(fld, initial, params):
        fan = cut.fan.fan
        lo = fan.left.rho if fan.pattern is Pattern.CONTACT_ONLY else fan.middle.rho
        window = contact_window(fan, fld.t, cut.split, cut.s[0], cut.s[-1])
        widths[cut.name] = transition_width(cut.rho, lo, fan.right.rho, x=cut.s, window=window)
    expected = dict.fromkeys("SRJ", 0)
    found = dict.fromkeys("SRJ", 0)
    patterns = []
    for cut in mid_line_cuts(fld, initial, params, fld.t):
        patterns.append(cut.fan.pattern)
        for wave, ok in identify_cut_waves(cut, fld.t):
            expected[wave.kind] += 1
            found[wave.kind] += int(ok)
    return {"widths": widths, "patterns": patterns, "expected": expected, "found": found}
