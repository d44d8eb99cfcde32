"""Exact Riemann solver for the 1D system.

The solution of ``(ρ_L, u_L) | (ρ_R, u_R)`` is a nonlinear wave of the
second field (shock if ``u_R < u_L``, rarefaction if ``u_R > u_L``) from the
left state to a middle state, followed by a contact travelling at ``u_R``.
The middle state has ``u_M = u_R`` and the left state's advected quantity,
which for every closure in :mod:`rarz.model` gives ``ρ_M`` in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import Closure, DomainError, PrimitiveState, as_closure

CONTACT_TOL = 1e-12
VACUUM_PRESSURE = 1e-300
_EPS = np.finfo(float).eps


class Pattern(str, Enum):
    SHOCK_CONTACT = "S+J"
    RAREFACTION_CONTACT = "R+J"
    CONTACT_ONLY = "J"
    VACUUM_FAN = "R+vacuum"


@dataclass(frozen=True)
class RiemannFan:
    """Exact solution of one Riemann problem.

    The nonlinear wave is a shock (``shock_speed``), a fan (``fan_edges``) or,
    when it crosses the inflection velocity of the closure, a shock from the
    left state to ``tangent`` followed by a fan attached to it.
    """

    left: PrimitiveState
    right: PrimitiveState
    middle: PrimitiveState
    pattern: Pattern
    closure: Closure
    shock_speed: float | None = None
    fan_edges: tuple[float, float] | None = None
    tangent: PrimitiveState | None = None

    @property
    def contact_speed(self) -> float:
        return self.right.u

    @property
    def min_speed(self) -> float:
        if self.shock_speed is not None:
            return self.shock_speed
        if self.fan_edges is not None:
            return self.fan_edges[0]
        return self.contact_speed

    @property
    def trailing_speed(self) -> float:
        """Speed of the back of the nonlinear wave."""
        if self.fan_edges is not None:
            return self.fan_edges[1]
        if self.shock_speed is not None:
            return self.shock_speed
        return self.contact_speed

    @property
    def composite(self) -> bool:
        return self.shock_speed is not None and self.fan_edges is not None


def _velocity_scale(closure, uL, uR):
    return closure.u_max if np.isfinite(closure.u_max) else max(abs(uL), abs(uR), 1.0)


def classify(L: PrimitiveState, R: PrimitiveState, model) -> Pattern:
    closure = as_closure(model)
    du = R.u - L.u
    if abs(du) < CONTACT_TOL * _velocity_scale(closure, L.u, R.u):
        return Pattern.CONTACT_ONLY
    return Pattern.SHOCK_CONTACT if du < 0 else Pattern.RAREFACTION_CONTACT


def _check_state(W: PrimitiveState, closure: Closure, name: str):
    if not (0 < W.rho < closure.rho_max):
        raise DomainError(f"{name} density {W.rho!r} outside (0, {closure.rho_max})")
    if not (0 <= W.u <= closure.u_max):
        raise DomainError(f"{name} velocity {W.u!r} outside [0, {closure.u_max}]")


def _middle_density(closure, wL, uR):
    """Closed-form middle density; ``0.0`` flags a vacuum middle state."""
    if closure.kind == "RARZ":
        # p_M = w_L / ũ(u_R); underflow means the middle state is vacuum
        ut = closure.u_max * uR / (closure.u_max - min(uR, closure.u_max * (1 - 1e-12)))
        if ut == 0:
            raise DomainError("right state at rest: middle state sits at the jam density")
        if wL / ut < VACUUM_PRESSURE:
            return 0.0
    rho = float(closure.density(wL, uR))
    if rho >= closure.rho_max:
        raise DomainError("middle state reaches the jam density")
    return rho if rho > 0 else 0.0


def intermediate_state(L: PrimitiveState, R: PrimitiveState, model) -> PrimitiveState:
    """Middle state: ``u_M = u_R`` on the left state's ``w`` curve.

    Vacuum middle states are returned as ``(0, vacuum velocity)``.
    """
    closure = as_closure(model)
    _check_state(L, closure, "left")
    _check_state(R, closure, "right")
    if classify(L, R, closure) is Pattern.CONTACT_ONLY:
        return PrimitiveState(L.rho, R.u, L.v)
    wL = float(closure.advected(L.rho, L.u))
    rho = _middle_density(closure, wL, R.u)
    if rho == 0.0:
        return PrimitiveState(0.0, float(closure.vacuum_velocity(wL)), L.v)
    return PrimitiveState(rho, R.u, L.v)


def shock_speed(L: PrimitiveState, M: PrimitiveState) -> float:
    """Rankine-Hugoniot speed ``(ρu - ρ_L u_L) / (ρ - ρ_L)``."""
    drho = M.rho - L.rho
    if abs(drho) < 1e-14:
        raise DomainError("degenerate jump: shock states have equal densities")
    return (M.rho * M.u - L.rho * L.u) / drho


def rh_residuals(L: PrimitiveState, M: PrimitiveState, sigma: float, model):
    """Relative residuals of both jump conditions across a discontinuity."""
    closure = as_closure(model)
    wL = closure.advected(L.rho, L.u)
    wM = closure.advected(M.rho, M.u)
    qL = np.array([L.rho, L.rho * wL])
    qM = np.array([M.rho, M.rho * wM])
    fL = L.u * qL
    fM = M.u * qM
    scale = np.maximum.reduce([np.abs(fL), np.abs(fM), np.abs(sigma * qL), np.abs(sigma * qM)])
    return np.abs(sigma * (qM - qL) - (fM - fL)) / np.maximum(scale, np.finfo(float).tiny)


def _bisect(g, a, b, max_iter: int = 200):
    """Root of ``g`` between ``a`` (where ``g >= 0``) and ``b`` (where ``g < 0``), elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.zeros(np.broadcast(a, b).shape)
    hi = np.ones_like(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        pos = g(a + mid * (b - a)) >= 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 2 * _EPS):
            break
    return a + 0.5 * (lo + hi) * (b - a)


def _chord(closure, rho0, u0, w, u):
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = closure.density(w, u)
        return (rho * u - rho0 * u0) / (rho - rho0)


def _fan_top(closure, u_m, vacuum):
    return np.where(vacuum, closure.u_max * (1 - 1e-12), u_m)


def wave_structure(closure: Closure, rho_l, u_l, u_m, vacuum=False):
    """Shape of the nonlinear wave from ``(ρ_L, u_L)`` to velocity ``u_M`` along ``w_L``.

    Returns ``(has_shock, has_fan, u_t)``: the wave is a shock from the left
    state to velocity ``u_t`` followed by a fan from ``u_t`` to ``u_M``;
    ``u_t = u_L`` when there is no shock and ``u_t = u_M`` when there is no
    fan.  Works elementwise.
    """
    rho_l, u_l, u_m = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho_l, u_l, u_m)))
    vacuum = np.broadcast_to(np.asarray(vacuum, dtype=bool), rho_l.shape)
    w = closure.advected(rho_l, u_l)
    uc = closure.inflection_velocity()
    top = _fan_top(closure, u_m, vacuum)
    rising = u_m > u_l

    def g(u):
        return _chord(closure, rho_l, u_l, w, u) - closure.lam2(closure.density(w, u), u)

    # where the shock could end: beyond the inflection velocity towards u_M
    g_end = g(top)
    straddle = np.where(rising, u_l < uc, u_m < uc) & np.where(rising, True, u_l > uc)
    chord_ok = straddle & (g_end >= 0)
    composite = straddle & ~chord_ok
    has_shock = np.where(rising, chord_ok | composite, (u_m >= uc) | chord_ok | composite)
    has_fan = np.where(rising, ~chord_ok, ~has_shock | composite)
    u_t = np.where(has_shock, u_m, u_l)
    if np.any(composite):
        c = composite
        start = np.full(int(c.sum()), uc)
        rl, ul, tp = rho_l[c], u_l[c], top[c]
        wc = w[c]

        def gc(u):
            return _chord(closure, rl, ul, wc, u) - closure.lam2(closure.density(wc, u), u)

        u_t = u_t.copy()
        u_t[c] = _bisect(gc, start, tp)
    if u_t.ndim == 0:
        return bool(has_shock), bool(has_fan), float(u_t)
    return has_shock, has_fan, u_t


def solve(L: PrimitiveState, R: PrimitiveState, model) -> RiemannFan:
    """Classify the problem and build its fan."""
    closure = as_closure(model)
    pattern = classify(L, R, closure)
    M = intermediate_state(L, R, closure)
    if pattern is Pattern.CONTACT_ONLY:
        return RiemannFan(L, R, M, pattern, closure)
    vacuum = M.rho == 0.0
    if vacuum:
        pattern = Pattern.VACUUM_FAN
    has_shock, has_fan, u_t = wave_structure(closure, L.rho, L.u, M.u, vacuum)
    sigma = edges = tangent = None
    if has_shock and has_fan:
        wL = float(closure.advected(L.rho, L.u))
        tangent = PrimitiveState(float(closure.density(wL, u_t)), u_t, L.v)
        sigma = shock_speed(L, tangent)
    elif has_shock:
        sigma = shock_speed(L, M)
    if has_fan:
        T = tangent or L
        back = M.u if vacuum else float(closure.lam2(M.rho, M.u))
        edges = (float(closure.lam2(T.rho, T.u)), back)
    return RiemannFan(L, R, M, pattern, closure, shock_speed=sigma, fan_edges=edges, tangent=tangent)


def bisect_fan(closure: Closure, w, u_from, u_to, xi, max_iter: int = 200):
    """Velocity on the curve ``w = const`` where ``λ2 == xi``.

    ``λ2`` must increase monotonically from ``u_from`` to ``u_to`` (either may
    be the larger), which holds on each side of the inflection velocity, so
    plain bisection brackets the root.  Works elementwise on arrays.
    """
    w = np.asarray(w, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return _bisect(lambda u: xi - closure.lam2(closure.density(w, u), u), u_from, u_to, max_iter)


def sample(fan: RiemannFan, xi):
    """Self-similar solution at ``ξ = x/t``.

    Returns a :class:`PrimitiveState` whose fields have the shape of ``xi``.
    """
    closure = fan.closure
    xi = np.asarray(xi, dtype=float)
    L, M, R = fan.left, fan.middle, fan.right
    behind = xi < fan.contact_speed
    rho = np.where(behind, float(M.rho), float(R.rho))
    u = np.where(behind, float(M.u), float(R.u))
    if fan.pattern is not Pattern.CONTACT_ONLY:
        left = xi < fan.min_speed
        rho = np.where(left, float(L.rho), rho)
        u = np.where(left, float(L.u), u)
    if fan.fan_edges is not None:
        lo_edge, hi_edge = fan.fan_edges
        T = fan.tangent or L
        inside = (xi >= lo_edge) & (xi < hi_edge) & ~left
        if np.any(inside):
            wL = closure.advected(L.rho, L.u)
            n = int(inside.sum())
            u_end = M.u if M.rho > 0 else closure.u_max * (1 - 1e-12)
            uf = bisect_fan(closure, wL, np.full(n, T.u), np.full(n, u_end), xi[inside])
            u[inside] = uf
            rho[inside] = closure.density(wL, uf)
        if fan.pattern is Pattern.VACUUM_FAN:
            rho = np.where((xi >= hi_edge) & behind, 0.0, rho)
    v = np.where(behind, float(L.v), float(R.v))
    if xi.ndim == 0:
        return PrimitiveState(float(rho), float(u), float(v))
    return PrimitiveState(rho, u, v)


def exact_profile(fan: RiemannFan, x, t: float, x0: float = 1.0):
    """Exact solution at positions ``x`` and time ``t`` for a jump at ``x0``."""
    x = np.asarray(x, dtype=float)
    if t == 0:
        left = x < x0
        return PrimitiveState(np.where(left, fan.left.rho, fan.right.rho),
                              np.where(left, fan.left.u, fan.right.u),
                              np.where(left, fan.left.v, fan.right.v))
    return sample(fan, (x - x0) / t)


def wave_curve_points(U0: PrimitiveState, branch: str, n: int, model):
    """``n`` points ``(u, ρ)`` on the shock (``"S"``) or rarefaction (``"R"``) curve through ``U0``.

    The shock branch covers ``u`` from ``U0.u`` down to 1% of it; the
    rarefaction branch from ``U0.u`` up towards the maximal speed.
    """
    closure = as_closure(model)
    w0 = closure.advected(U0.rho, U0.u)
    if branch.upper() == "S":
        u = np.linspace(U0.u, 0.01 * U0.u, n)
    elif branch.upper() == "R":
        top = closure.u_max if np.isfinite(closure.u_max) else float(w0)
        u = np.linspace(U0.u, U0.u + (top - U0.u) * (1 - 1e-6), n)
    else:
        raise ValueError("branch must be 'S' or 'R'")
    rho = closure.density(w0, u)
    rho[0] = U0.rho
    return np.column_stack([u, rho])


# -- vectorized interface kernels -------------------------------------------

def interface_state(closure: Closure, rho_l, u_l, w_l, rho_r, u_r, w_r):
    """State ``(ρ, u, w, from_right)`` of the exact solution at ``ξ = 0⁻``.

    ``from_right`` marks interfaces whose contact moves left, so that the
    passive quantities must be taken from the right cell.
    """
    du = u_r - u_l
    scale = closure.u_max if np.isfinite(closure.u_max) else np.maximum(
        np.maximum(np.abs(u_l), np.abs(u_r)), 1.0)
    contact = np.abs(du) < CONTACT_TOL * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        rho_m = np.where(contact | (u_r < 0), rho_l, closure.density(w_l, u_r))
    vacuum = ~contact & (rho_m <= 0)
    rho0 = rho_l.copy()
    u0 = u_l.copy()

    active = ~contact & (u_r >= 0)
    if np.any(active):
        a = active
        rl, ul, wl, um, rm, vac = rho_l[a], u_l[a], w_l[a], u_r[a], rho_m[a], vacuum[a]
        has_shock, has_fan, ut = wave_structure(closure, rl, ul, um, vac)
        with np.errstate(divide="ignore", invalid="ignore"):
            rt = np.where(has_shock, closure.density(wl, ut), rl)
            sigma = np.where(has_shock, _chord(closure, rl, ul, wl, ut), -np.inf)
        lam_t = closure.lam2(rt, ut)
        lam_m = np.where(vac, closure.vacuum_velocity(wl), closure.lam2(rm, um))
        # behind a left-moving shock the interface sees the tangent (or middle) state
        past_shock = sigma < 0
        r_out = np.where(past_shock, rt, rl)
        u_out = np.where(past_shock, ut, ul)
        fan_open = has_fan & past_shock
        to_mid = (fan_open & (lam_m <= 0)) | (~has_fan & past_shock)
        r_out = np.where(to_mid, rm, r_out)
        u_out = np.where(to_mid, um, u_out)
        transonic = fan_open & (lam_t < 0) & (lam_m > 0)
        if np.any(transonic):
            tr = transonic
            uf = bisect_fan(closure, wl[tr], ut[tr], _fan_top(closure, um[tr], vac[tr]), 0.0)
            r_out[tr] = closure.density(wl[tr], uf)
            u_out[tr] = uf
        rho0[a] = r_out
        u0[a] = u_out

    # contact travelling left: the interface sees the right state
    from_right = u_r < 0
    rho0 = np.where(from_right, rho_r, rho0)
    u0 = np.where(from_right, u_r, u0)
    w0 = np.where(from_right, w_r, w_l)
    return rho0, u0, w0, from_right
