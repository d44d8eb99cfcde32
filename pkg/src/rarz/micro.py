"""Follow-the-leader vehicle dynamics.

Vehicles are indexed from the back of the platoon; vehicle ``i`` follows
vehicle ``i + 1`` (or an explicit leader map in 2D) and the front vehicle
drives at constant speed.  The acceleration law

    u̇_i = γ u_i (u* - u_i) / u* · (u_{i+1} - u_i) / (x_{i+1} - x_i - d)

keeps ``w_i = ũ(u_i) p(τ_i)`` constant along exact trajectories, with
``τ_i = (x_{i+1} - x_i - d) / ΔX`` and ``p(τ) = τ^(-γ)``.  The 2D law keeps
both ``w_i`` and ``σ_i = ṽ(v_i) p(τ_i)`` constant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

LATERAL_DEGENERATE = 1e-9


class CollisionError(RuntimeError):
    def __init__(self, message, indices=()):
        super().__init__(f"{message}: vehicles {list(indices)}" if len(indices) else message)
        self.indices = tuple(int(i) for i in indices)


class Vehicle1D(NamedTuple):
    x: float
    u: float


class Vehicle2D(NamedTuple):
    x: float
    y: float
    u: float
    v: float


@dataclass(frozen=True)
class MicroParams:
    """Driver and vehicle constants.

    ``d`` is the 1D minimal gap; ``d_x``, ``d_y`` the directional minimal
    distances of the 2D law, whose interaction length ``dl`` defaults to
    ``d_x * d_y``.
    """

    gamma: float = 2.0
    u_star: float = 2.0
    v_star: float = 1.0
    d: float = 0.5
    dx_len: float = 1.0
    dy_len: float = 1.0
    d_x: float = 0.5
    d_y: float = 0.5
    dl: float | None = None

    def __post_init__(self):
        for name in ("gamma", "u_star", "v_star", "d", "dx_len", "dy_len", "d_x", "d_y"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def rho_star(self) -> float:
        return self.dx_len / self.d

    @property
    def rho_star_2d(self) -> float:
        return self.dx_len * self.dy_len / (self.d_x * self.d_y)

    @property
    def interaction(self) -> float:
        return self.d_x * self.d_y if self.dl is None else self.dl


def _pseudo(u, u_star):
    return u * u_star / (u_star - u)


def _relax(u, u_star, gamma):
    return gamma * u * (u_star - u) / u_star


def micro_rhs_1d(x, u, params: MicroParams):
    """Accelerations of a 1D platoon; the front vehicle gets zero."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    gap = np.diff(x) - params.d
    if np.any(gap <= 0):
        raise CollisionError("spacing at or below minimal distance", np.flatnonzero(gap <= 0))
    acc = np.zeros_like(u)
    acc[:-1] = _relax(u[:-1], params.u_star, params.gamma) * (u[1:] - u[:-1]) / gap
    return acc


def _chain(n):
    leader = np.arange(1, n + 1)
    leader[-1] = -1
    return leader


def _lateral_terms(x, y, u, v, leader, params: MicroParams):
    """Common bracket of the 2D law for followers, plus follower indices."""
    f = np.flatnonzero(leader >= 0)
    j = leader[f]
    dxs = x[j] - x[f]
    dys = y[j] - y[f]
    dl = params.interaction
    degenerate = np.abs(dys) < LATERAL_DEGENERATE * params.dy_len
    ady = np.where(degenerate, params.d_y, np.abs(dys))
    sgn = np.where(degenerate, 1.0, np.sign(dys))
    if np.any(dxs <= 0):
        raise CollisionError("leader not ahead of follower", f[dxs <= 0])
    tau_num = dxs * ady - dl
    if np.any(tau_num <= 0):
        raise CollisionError("2D specific volume non-positive", f[tau_num <= 0])
    den_x = dxs - dl / ady
    den_y = sgn * (ady - dl / dxs)
    du = u[j] - u[f]
    dv = v[j] - v[f]
    lateral = np.where(dv == 0, 0.0, dv / np.where(dv == 0, 1.0, den_y))
    return f, du / den_x + lateral


def micro_rhs_2d(x, y, u, v, params: MicroParams, leader=None):
    """Accelerations ``(u̇, v̇)`` of the 2D law; ``leader[i] = -1`` marks a free vehicle."""
    x, y, u, v = (np.asarray(a, dtype=float) for a in (x, y, u, v))
    leader = _chain(len(x)) if leader is None else np.asarray(leader)
    f, bracket = _lateral_terms(x, y, u, v, leader, params)
    du = np.zeros_like(u)
    dv = np.zeros_like(v)
    du[f] = _relax(u[f], params.u_star, params.gamma) * bracket
    dv[f] = _relax(v[f], params.v_star, params.gamma) * bracket
    return du, dv


# -- integration ------------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray | None = None
    v: np.ndarray | None = None
    leader: np.ndarray | None = None

    @property
    def is_2d(self):
        return self.y is not None


def _admissible(state, params, two_d, leader):
    if not np.all(np.isfinite(state)):
        return False
    if two_d:
        x, y, u, v = state
        if np.any(u < 0) or np.any(u > params.u_star) or np.any(v < 0) or np.any(v > params.v_star):
            return False
        try:
            _lateral_terms(x, y, u, v, leader, params)
        except CollisionError:
            return False
        return True
    x, u = state
    return bool(np.all(np.diff(x) > params.d) and np.all(u >= 0) and np.all(u <= params.u_star))


def _rhs(state, params, two_d, leader):
    if two_d:
        x, y, u, v = state
        du, dv = micro_rhs_2d(x, y, u, v, params, leader)
        return np.stack([u, v, du, dv])
    x, u = state
    return np.stack([u, micro_rhs_1d(x, u, params)])


def _rk4(state, h, params, two_d, leader):
    k1 = _rhs(state, params, two_d, leader)
    k2 = _rhs(state + 0.5 * h * k1, params, two_d, leader)
    k3 = _rhs(state + 0.5 * h * k2, params, two_d, leader)
    k4 = _rhs(state + h * k3, params, two_d, leader)
    return state + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _advance(state, dt, params, two_d, leader, max_halvings=20):
    """One step of size ``dt``, retried on 2, 4, ... substeps when it leaves the admissible set."""
    for k in range(max_halvings + 1):
        n_sub = 2 ** k
        h = dt / n_sub
        trial = state
        try:
            for _ in range(n_sub):
                trial = _rk4(trial, h, params, two_d, leader)
                if not _admissible(trial, params, two_d, leader):
                    raise CollisionError("inadmissible step")
        except CollisionError:
            continue
        return trial
    raise CollisionError(f"step rejected after {max_halvings} halvings")


def integrate(platoon, params: MicroParams, dt: float, n_steps: int, store_every: int = 1,
              leader=None) -> Trajectory:
    """Classical RK4 for positions and velocities.

    ``platoon`` is a sequence of :class:`Vehicle1D` or :class:`Vehicle2D`
    ordered from the back, or a tuple of arrays ``(x, u)`` / ``(x, y, u, v)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if store_every < 1:
        raise ValueError("store_every must be >= 1")
    if len(platoon) and isinstance(platoon[0], (Vehicle1D, Vehicle2D)):
        state = np.array(platoon, dtype=float).T.copy()
    else:
        state = np.array([np.asarray(a, dtype=float) for a in platoon])
    two_d = state.shape[0] == 4
    n = state.shape[1]
    leader = (_chain(n) if leader is None else np.asarray(leader)) if two_d else None
    if not _admissible(state, params, two_d, leader):
        raise CollisionError("initial platoon is not admissible")
    frames, times = [state.copy()], [0.0]
    for step in range(1, n_steps + 1):
        state = _advance(state, dt, params, two_d, leader)
        if step % store_every == 0 or step == n_steps:
            frames.append(state.copy())
            times.append(step * dt)
    data = np.array(frames)
    if two_d:
        return Trajectory(np.array(times), data[:, 0], data[:, 2], data[:, 1], data[:, 3], leader)
    return Trajectory(np.array(times), data[:, 0], data[:, 1])


# -- invariants -------------------------------------------------------------

def specific_volume(traj: Trajectory, params: MicroParams):
    """``τ_i`` of every follower at every stored time, shape ``(nt, n_followers)``."""
    if traj.is_2d:
        f = np.flatnonzero(traj.leader >= 0)
        j = traj.leader[f]
        dys = np.abs(traj.y[:, j] - traj.y[:, f])
        dys = np.where(dys < LATERAL_DEGENERATE * params.dy_len, params.d_y, dys)
        return (traj.x[:, j] - traj.x[:, f]) * dys - params.interaction, params.dx_len * params.dy_len, f
    return np.diff(traj.x, axis=1) - params.d, params.dx_len, np.arange(traj.x.shape[1] - 1)


def advected(traj: Trajectory, params: MicroParams):
    """``(w, σ)`` per stored time and follower; ``σ`` is ``None`` in 1D."""
    num, scale, f = specific_volume(traj, params)
    p = (num / scale) ** (-params.gamma)
    w = _pseudo(traj.u[:, f], params.u_star) * p
    sigma = _pseudo(traj.v[:, f], params.v_star) * p if traj.is_2d else None
    return w, sigma


@dataclass
class Drift:
    w: np.ndarray
    w_rel: np.ndarray
    sigma: np.ndarray | None = None
    sigma_rel: np.ndarray | None = None


def w_drift(traj: Trajectory, params: MicroParams) -> Drift:
    """Per-follower ``max_t |w_i(t) - w_i(0)|``, absolute and relative (same for σ in 2D)."""
    w, sigma = advected(traj, params)

    def _drift(a):
        d = np.max(np.abs(a - a[0]), axis=0)
        scale = np.abs(a[0])
        return d, np.divide(d, scale, out=np.zeros_like(d), where=scale > 0)

    dw, dw_rel = _drift(w)
    if sigma is None:
        return Drift(dw, dw_rel)
    ds, ds_rel = _drift(sigma)
    return Drift(dw, dw_rel, ds, ds_rel)
