"""Point-mass vehicle kinematics with a fixed-step RK4 integrator.

The model is a planar unicycle at constant speed: xdot = V cos(psi),
ydot = V sin(psi), psidot = a / V, where ``a`` is the commanded lateral
acceleration held constant over each step (ideal inner loop, zero-order
hold).  Speed is a stored constant and is never integrated, so it is
conserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geom import Pose, Vec2, wrap_angle

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class VehicleState:
    """Planar pose plus constant speed; heading anticlockwise from +x."""

    x: float
    y: float
    heading: float
    speed: float
    t: float = 0.0

    def __post_init__(self):
        if not self.speed > 0.0:
            raise ValueError("speed must be positive")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> Vec2:
        return (self.x, self.y)

    @property
    def pose(self) -> Pose:
        return Pose((self.x, self.y), self.heading)


def step(
    state: VehicleState, a_cmd: float, dt: float, a_max: float | None = None
) -> VehicleState:
    """Advance one step under a zero-order-hold lateral acceleration.

    Classical 4th-order Runge-Kutta on (x, y, psi); the turn rate is
    constant within the step so heading integrates exactly.
    """
    if not (isinstance(a_cmd, (int, float)) and math.isfinite(a_cmd)):
        raise ValueError(f"invalid command: {a_cmd!r}")
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if a_max is not None:
        a_cmd = min(max(a_cmd, -a_max), a_max)

    v = state.speed
    omega = a_cmd / v
    psi = state.heading

    c1, s1 = math.cos(psi), math.sin(psi)
    psi2 = psi + 0.5 * dt * omega
    c2, s2 = math.cos(psi2), math.sin(psi2)
    psi4 = psi + dt * omega
    c4, s4 = math.cos(psi4), math.sin(psi4)

    x = state.x + v * dt / 6.0 * (c1 + 4.0 * c2 + c4)
    y = state.y + v * dt / 6.0 * (s1 + 4.0 * s2 + s4)
    return replace(state, x=x, y=y, heading=wrap_angle(psi4), t=state.t + dt)


def step_arrays(x, y, psi, a_cmd, speed: float, dt: float):
    """Vectorized RK4 step matching :func:`step`; used by batched rollouts."""
    omega = a_cmd / speed
    c1, s1 = np.cos(psi), np.sin(psi)
    psi2 = psi + 0.5 * dt * omega
    c2, s2 = np.cos(psi2), np.sin(psi2)
    psi4 = psi + dt * omega
    c4, s4 = np.cos(psi4), np.sin(psi4)
    xn = x + speed * dt / 6.0 * (c1 + 4.0 * c2 + c4)
    yn = y + speed * dt / 6.0 * (s1 + 4.0 * s2 + s4)
    pw = np.mod(psi4, 2.0 * np.pi)
    pw = np.where(pw > np.pi, pw - 2.0 * np.pi, pw)
    return xn, yn, pw
