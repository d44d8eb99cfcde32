"""Model algebra for the refined ARZ (RARZ) traffic system.

The RARZ closure advects ``w = ũ(u) p(ρ)`` with

    p(ρ) = (1/ρ - 1/ρ*)^(-γ),      ũ(u) = (1/u - 1/u*)^(-1),

so that both the jam density ρ* and the maximal speed u* are enforced.  The
classical ARZ (``w = u + ρ^γ``) and the modified AR model (``w = u + p(ρ)``)
are provided as alternative closures for comparison runs.  Every closure
uses the same conserved variables ``(ρ, ρw)`` and flux ``(ρu, ρuw)``.

All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VACUUM_FRACTION = 1e-10
VELOCITY_CAP = 1.0 - 1e-12


class DomainError(ValueError):
    """Raised when a state or argument leaves the admissible set."""


@dataclass(frozen=True)
class ModelParams:
    """Physical constants closing the model.

    Parameters
    ----------
    rho_star : float
        Maximal (jam) density.
    u_star : float
        Maximal longitudinal velocity.
    gamma : float
        Pressure exponent.
    v_star : float
        Maximal lateral velocity, used only by the 2D system.
    """

    rho_star: float = 1.0
    u_star: float = 25.0
    gamma: float = 2.0
    v_star: float = 1.0

    def __post_init__(self):
        for name in ("rho_star", "u_star", "gamma", "v_star"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @property
    def vacuum_threshold(self) -> float:
        return VACUUM_FRACTION * self.rho_star

    def transposed(self) -> "ModelParams":
        """Swap the roles of u* and v* (used for y-direction sweeps)."""
        return ModelParams(self.rho_star, self.v_star, self.gamma, self.u_star)


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: float
    v: float = 0.0


@dataclass(frozen=True)
class ConservedState:
    rho: float
    y: float
    z: float = 0.0


# -- scalar maps ------------------------------------------------------------

def _pressure(rho, rho_star, gamma):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (rho * rho_star / (rho_star - rho)) ** gamma


def _pressure_inverse(p, rho_star, gamma):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return rho_star / (1.0 + rho_star * p ** (-1.0 / gamma))


def _pseudo(u, u_star):
    u = np.minimum(u, u_star * VELOCITY_CAP)
    return u * u_star / (u_star - u)


def _pseudo_inverse(ut, u_star):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return u_star / (1.0 + u_star / ut)


def pressure(rho, params: ModelParams):
    """Velocity offset ``(1/ρ - 1/ρ*)^(-γ)`` for ``0 < ρ < ρ*``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0) or np.any(rho >= params.rho_star):
        raise DomainError("pressure requires 0 < rho < rho_star")
    return _scalarize(_pressure(rho, params.rho_star, params.gamma))


def pressure_inverse(p, params: ModelParams):
    """Density with ``pressure(ρ) == p``; ``p`` must be positive."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise DomainError("pressure_inverse requires p > 0")
    return _scalarize(_pressure_inverse(p, params.rho_star, params.gamma))


def pseudo_velocity(u, params: ModelParams, u_star: float | None = None):
    """Pseudo-velocity ``(1/u - 1/u*)^(-1)`` for ``0 < u < u*``.

    ``u_star`` overrides ``params.u_star`` (pass ``params.v_star`` for the
    lateral component).
    """
    u_star = params.u_star if u_star is None else u_star
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= u_star):
        raise DomainError("pseudo_velocity requires 0 < u < u_star")
    return _scalarize(u * u_star / (u_star - u))


def pseudo_velocity_inverse(utilde, params: ModelParams, u_star: float | None = None):
    u_star = params.u_star if u_star is None else u_star
    utilde = np.asarray(utilde, dtype=float)
    if np.any(utilde < 0) or np.any(np.isnan(utilde)):
        raise DomainError("pseudo_velocity_inverse requires utilde >= 0")
    return _scalarize(_pseudo_inverse(utilde, u_star))


def _scalarize(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


# -- closures ---------------------------------------------------------------

class Closure:
    """Maps between ``(ρ, u)`` and the advected quantity ``w``.

    Subclasses define ``advected``, ``velocity``, ``density`` (the density on
    the curve ``w = const`` at velocity ``u``) and ``lam2`` (the genuinely
    nonlinear eigenvalue).  Arrays in, arrays out, no domain checks.
    """

    kind = "base"
    rho_max = np.inf
    u_max = np.inf

    def vacuum_velocity(self, w):
        raise NotImplementedError

    def max_speed(self, rho, u):
        return np.maximum(np.abs(u), np.abs(self.lam2(rho, u)))

    def inflection_velocity(self) -> float:
        """Velocity where ``λ2`` is smallest along every curve ``w = const``.

        ``λ2`` increases with ``u`` along such a curve above this velocity
        and decreases below it, so a single wave of the second field may be
        a shock with an attached fan.  Zero means genuinely nonlinear.
        """
        return 0.0


class RARZ(Closure):
    kind = "RARZ"

    def __init__(self, params: ModelParams, u_star: float | None = None):
        self.params = params
        self.rho_max = params.rho_star
        self.u_max = params.u_star if u_star is None else u_star
        self.gamma = params.gamma

    def advected(self, rho, u):
        return _pseudo(u, self.u_max) * _pressure(rho, self.rho_max, self.gamma)

    def velocity(self, rho, w):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _pseudo_inverse(w / _pressure(rho, self.rho_max, self.gamma), self.u_max)

    def density(self, w, u):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _pressure_inverse(w / _pseudo(u, self.u_max), self.rho_max, self.gamma)

    def lam2(self, rho, u):
        rs, us = self.rho_max, self.u_max
        with np.errstate(divide="ignore", invalid="ignore"):
            return u - self.gamma * u * rs * (us - u) / (us * (rs - rho))

    def vacuum_velocity(self, w):
        return np.full_like(np.asarray(w, dtype=float), self.u_max)

    def inflection_velocity(self) -> float:
        return self.u_max * max(self.gamma - 1.0, 0.0) / (2.0 * self.gamma)


class MAR(Closure):
    """Modified AR model: ``w = u + (1/ρ - 1/ρ*)^(-γ)``."""

    kind = "MAR"

    def __init__(self, params: ModelParams):
        self.params = params
        self.rho_max = params.rho_star
        self.gamma = params.gamma

    def advected(self, rho, u):
        return u + _pressure(rho, self.rho_max, self.gamma)

    def velocity(self, rho, w):
        return w - _pressure(rho, self.rho_max, self.gamma)

    def density(self, w, u):
        return _pressure_inverse(np.maximum(w - u, 0.0), self.rho_max, self.gamma)

    def lam2(self, rho, u):
        rs = self.rho_max
        with np.errstate(divide="ignore", invalid="ignore"):
            return u - self.gamma * _pressure(rho, rs, self.gamma) * rs / (rs - rho)

    def vacuum_velocity(self, w):
        return np.asarray(w, dtype=float)


class ARZ(Closure):
    """Classical ARZ model with ``p(ρ) = ρ^γ``."""

    kind = "ARZ"

    def __init__(self, params: ModelParams):
        self.params = params
        self.gamma = params.gamma

    def advected(self, rho, u):
        return u + rho ** self.gamma

    def velocity(self, rho, w):
        return w - rho ** self.gamma

    def density(self, w, u):
        return np.maximum(w - u, 0.0) ** (1.0 / self.gamma)

    def lam2(self, rho, u):
        return u - self.gamma * rho ** self.gamma

    def vacuum_velocity(self, w):
        return np.asarray(w, dtype=float)


CLOSURES = {"RARZ": RARZ, "MAR": MAR, "ARZ": ARZ}


def make_closure(kind: str, params: ModelParams) -> Closure:
    try:
        return CLOSURES[kind.upper()](params)
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(CLOSURES)}") from None


def as_closure(model) -> Closure:
    if isinstance(model, Closure):
        return model
    if isinstance(model, ModelParams):
        return RARZ(model)
    raise TypeError(f"expected ModelParams or Closure, got {type(model).__name__}")


# -- state conversions ------------------------------------------------------

def to_conserved(W: PrimitiveState, params: ModelParams) -> ConservedState:
    """``(ρ, u[, v]) -> (ρ, ρũp[, ρṽp])``.

    Cells at or below the vacuum threshold map to ``y = z = 0``.
    """
    rho = np.asarray(W.rho, dtype=float)
    u = np.asarray(W.u, dtype=float)
    v = np.asarray(W.v, dtype=float)
    if np.any(rho < 0) or np.any(rho >= params.rho_star):
        raise DomainError("to_conserved requires 0 <= rho < rho_star")
    if np.any(u < 0) or np.any(u > params.u_star):
        raise DomainError("to_conserved requires 0 <= u <= u_star")
    if np.any(v < 0) or np.any(v > params.v_star):
        raise DomainError("to_conserved requires 0 <= v <= v_star")
    vac = rho <= params.vacuum_threshold
    p = _pressure(rho, params.rho_star, params.gamma)
    y = np.where(vac, 0.0, rho * _pseudo(u, params.u_star) * p)
    z = np.where(vac, 0.0, rho * _pseudo(v, params.v_star) * p)
    return ConservedState(_scalarize(rho), _scalarize(y), _scalarize(z))


def to_primitive(Q: ConservedState, params: ModelParams) -> PrimitiveState:
    """Inverse of :func:`to_conserved`; vacuum cells decode to ``u = u*``."""
    rho = np.asarray(Q.rho, dtype=float)
    y = np.asarray(Q.y, dtype=float)
    z = np.asarray(Q.z, dtype=float)
    if np.any(y < 0) or np.any(z < 0):
        raise DomainError("negative momentum-like variable in conserved state")
    if np.any(rho < 0) or np.any(rho >= params.rho_star):
        raise DomainError("to_primitive requires 0 <= rho < rho_star")
    vac = rho <= params.vacuum_threshold
    safe = np.where(vac, 1.0, rho)
    rp = safe * _pressure(safe, params.rho_star, params.gamma)
    u = np.where(vac, params.u_star, _pseudo_inverse(y / rp, params.u_star))
    v = np.where(vac, params.v_star, _pseudo_inverse(z / rp, params.v_star))
    return PrimitiveState(_scalarize(rho), _scalarize(u), _scalarize(v))


def flux(W: PrimitiveState, params: ModelParams):
    """Physical x-flux ``(ρu, ρuũp)`` of a 1D state."""
    Q = to_conserved(W, params)
    return np.array([Q.rho * W.u, W.u * Q.y])


def flux_2d(W: PrimitiveState, params: ModelParams):
    """x- and y-fluxes ``(F, G)`` of the 2D system."""
    Q = to_conserved(W, params)
    F = np.array([Q.rho * W.u, W.u * Q.y, W.u * Q.z])
    G = np.array([Q.rho * W.v, W.v * Q.y, W.v * Q.z])
    return F, G


def eigenvalues(W: PrimitiveState, params: ModelParams):
    """``(λ1, λ2) = (u, u - γuρ*(u*-u)/(u*(ρ*-ρ)))``."""
    rho = np.asarray(W.rho, dtype=float)
    if np.any(rho >= params.rho_star) or np.any(rho < 0):
        raise DomainError("eigenvalues require 0 <= rho < rho_star")
    lam2 = RARZ(params).lam2(rho, np.asarray(W.u, dtype=float))
    return _scalarize(np.asarray(W.u, dtype=float)), _scalarize(lam2)


# -- fundamental diagrams ---------------------------------------------------

@dataclass
class FdSeries:
    model_kind: str
    w: float
    gamma: float
    points: np.ndarray  # columns rho, u, q

    @property
    def rho(self):
        return self.points[:, 0]

    @property
    def u(self):
        return self.points[:, 1]

    @property
    def q(self):
        return self.points[:, 2]


def fd_curve(model_kind: str, w: float, rho_samples, params: ModelParams) -> FdSeries:
    """Equilibrium velocity and flow along the curve of fixed ``w``.

    ARZ speeds are clipped at zero; MAR speeds are emitted unclipped and may
    be negative.
    """
    if not w > 0:
        raise DomainError("fd_curve requires w > 0")
    rho = np.asarray(rho_samples, dtype=float)
    if rho.ndim != 1 or np.any(np.diff(rho) <= 0):
        raise DomainError("rho_samples must be strictly increasing")
    kind = model_kind.upper()
    if kind == "ARZ":
        if np.any(rho <= 0):
            raise DomainError("ARZ densities must be positive")
        u = np.maximum(w - rho ** params.gamma, 0.0)
    elif kind == "MAR":
        u = w - np.asarray(pressure(rho, params))
    elif kind == "RARZ":
        u = np.asarray(pseudo_velocity_inverse(w / np.asarray(pressure(rho, params)), params))
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")
    return FdSeries(kind, float(w), params.gamma, np.column_stack([rho, u, rho * u]))


def fd_density_samples(params: ModelParams, n: int = 400, margin: float = 1e-9):
    """Default density grid for diagrams: ``n`` points spanning ``(0, ρ*)``."""
    inner = np.linspace(0.0, 1.0, n)
    inner = margin + (1.0 - 2.0 * margin) * inner
    return params.rho_star * inner
