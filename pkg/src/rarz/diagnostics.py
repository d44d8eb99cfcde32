"""Error norms, sharpness metrics and wave identification on profiles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PrimitiveState
from .riemann import Pattern, RiemannFan

STRENGTH_TOL = 1e-3


def l1_error(values, exact, dx: float) -> float:
    """Discrete L1 distance ``Σ |a - b| dx``."""
    return float(np.sum(np.abs(np.asarray(values) - np.asarray(exact))) * dx)


def transition_width(values, a: float, b: float, delta: float = 0.01, x=None, window=None) -> int:
    """Number of cells strictly between ``min(a, b) + δ`` and ``max(a, b) - δ``.

    With ``x`` and ``window=(x_lo, x_hi)`` only cells centred in that window
    are counted.
    """
    lo, hi = min(a, b), max(a, b)
    v = np.asarray(values)
    inside = (v > lo + delta) & (v < hi - delta)
    if window is not None:
        x = np.asarray(x)
        inside &= (x >= window[0]) & (x <= window[1])
    return int(np.count_nonzero(inside))


def contact_window(fan: RiemannFan, t: float, x0: float, x_min: float, x_max: float):
    """Interval holding the contact of ``fan`` and none of the nonlinear wave.

    It starts halfway between the trailing edge of the nonlinear wave and
    the contact, so the left plateau does not count towards the width.
    """
    if fan.pattern is Pattern.CONTACT_ONLY or t <= 0:
        return x_min, x_max
    return x0 + 0.5 * (fan.trailing_speed + fan.contact_speed) * t, x_max


def relative_drift(current: float, reference: float) -> float:
    return abs(current - reference) / abs(reference) if reference else abs(current)


@dataclass(frozen=True)
class Wave:
    """One wave of an exact solution at a fixed time.

    ``start``/``end`` coincide except for rarefaction fans; ``upstream`` and
    ``downstream`` are the states on either side.
    """

    kind: str  # "S", "R" or "J"
    start: float
    end: float
    upstream: PrimitiveState
    downstream: PrimitiveState


def _jump(a: PrimitiveState, b: PrimitiveState) -> float:
    return max(abs(a.rho - b.rho), abs(a.u - b.u), abs(a.v - b.v))


def exact_waves(fan: RiemannFan, t: float, x0: float, transverse=None) -> list:
    """Nontrivial waves of ``fan`` at time ``t`` for a jump located at ``x0``.

    ``transverse`` optionally gives the passive component ``(left, middle,
    right)`` so that contacts carrying only a transverse jump are kept.
    """
    L, M, R = fan.left, fan.middle, fan.right
    if transverse is not None:
        L = PrimitiveState(L.rho, L.u, transverse[0])
        M = PrimitiveState(M.rho, M.u, transverse[1])
        R = PrimitiveState(R.rho, R.u, transverse[2])
    waves = []
    if fan.pattern is not Pattern.CONTACT_ONLY and _jump(L, M) > STRENGTH_TOL:
        # a shock with an attached fan is reported as one wave of the pattern's kind
        kind = "S" if fan.pattern is Pattern.SHOCK_CONTACT else "R"
        waves.append(Wave(kind, x0 + fan.min_speed * t, x0 + fan.trailing_speed * t, L, M))
    left_of_contact = L if fan.pattern is Pattern.CONTACT_ONLY else M
    if _jump(left_of_contact, R) > STRENGTH_TOL:
        xc = x0 + fan.contact_speed * t
        waves.append(Wave("J", xc, xc, left_of_contact, R))
    return waves


def identify_wave(s, rho, transverse, wave: Wave, margin: float, frac: float = 0.25) -> bool:
    """Whether a numerical profile shows ``wave`` near its exact location.

    The profile is sampled ``margin`` outside the exact wave span on each
    side; both samples must lie within ``frac`` of the wave's jump from the
    exact upstream and downstream values.  Density is used unless the jump
    is purely transverse.
    """
    s = np.asarray(s)
    if abs(wave.upstream.rho - wave.downstream.rho) > STRENGTH_TOL:
        field, up, down = np.asarray(rho), wave.upstream.rho, wave.downstream.rho
    else:
        field, up, down = np.asarray(transverse), wave.upstream.v, wave.downstream.v
    before = wave.start - margin
    after = wave.end + margin
    if before < s[0] or after > s[-1]:
        return False
    left_val = float(np.interp(before, s, field))
    right_val = float(np.interp(after, s, field))
    tol = frac * abs(down - up)
    return abs(left_val - up) <= tol and abs(right_val - down) <= tol


def pattern_counts(patterns) -> dict:
    """Primary wave count of a set of interface solutions.

    Each interface contributes its leading wave: a shock for ``S+J``, a
    rarefaction for ``R+J`` and a contact for ``J``.
    """
    counts = {"shocks": 0, "rarefactions": 0, "contacts": 0}
    for p in patterns:
        p = Pattern(p)
        if p is Pattern.SHOCK_CONTACT:
            counts["shocks"] += 1
        elif p in (Pattern.RAREFACTION_CONTACT, Pattern.VACUUM_FAN):
            counts["rarefactions"] += 1
        else:
            counts["contacts"] += 1
    return counts
