"""Leader-follower range/bearing model, its feedback-linearizing controller,
and the fixed-step integrators used by the simulation engine.

The follower keeps a predictor alpha_hat of the leader-relative bearing; the
controller is driven by the predictor, not the true bearing, so the closed loop
couples (L, alpha) to alpha_hat only through the estimation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StateVec:
    """Separation/bearing pair (metres, radians).

    Physical states have l > 0; this is asserted by the operations that need it
    (channel geometry, plant dynamics) rather than here, so that difference
    vectors can reuse the type.  Distances between states are max-norm.
    """

    l: float
    alpha: float


@dataclass(frozen=True)
class PlantParams:
    k_l: float = 1.0
    k_alpha: float = 1.0
    l_d: float = 4.0
    alpha_d: float = math.radians(20.0)
    d: float = 0.5
    v_gain: float = 0.8
    w_gain: float = 2.2
    noise_bound: float = 0.0

    def __post_init__(self):
        if self.k_l <= 0.0 or self.k_alpha <= 0.0:
            raise ValueError("controller gains k_l, k_alpha must be positive")
        if self.l_d <= 0.0:
            raise ValueError("desired separation l_d must be positive")
        if self.d <= 0.0:
            raise ValueError("axle offset d must be positive")
        if self.noise_bound < 0.0:
            raise ValueError("noise_bound must be non-negative")


@dataclass
class SimState:
    """Plant state plus the follower's bearing predictor."""

    x: StateVec
    alpha_hat: float


def _rhs_core(l, alpha, alpha_hat, n1, n2, p: PlantParams):
    # Reduced closed loop: the leader's speed/turn laws are v1 = v_gain*L + n1 and
    # omega1 = w_gain*alpha + n2, while the follower's controller runs on alpha_hat.
    v1 = p.v_gain * l + n1
    dl = p.k_l * (p.l_d - l) + v1 * (np.cos(alpha) - np.cos(alpha_hat))
    da = (v1 / l) * (np.sin(alpha_hat) - np.sin(alpha)) \
        + p.k_alpha * (p.alpha_d - alpha_hat) \
        + p.w_gain * alpha + n2 - p.w_gain * alpha_hat
    dah = p.k_alpha * (p.alpha_d - alpha_hat)
    return dl, da, dah


def closed_loop_rhs(s: SimState, n1: float, n2: float, p: PlantParams) -> SimState:
    """Time derivative of (L, alpha, alpha_hat) under the reduced closed loop."""
    if not s.x.l > 0.0:
        raise ValueError("separation must be positive")
    dl, da, dah = _rhs_core(s.x.l, s.x.alpha, s.alpha_hat, n1, n2, p)
    return SimState(StateVec(float(dl), float(da)), float(dah))


def controller_outputs(l: float, phi: float, alpha_hat: float,
                       v1: float, omega1: float, p: PlantParams) -> tuple[float, float]:
    """Follower wheel commands (v2, omega2) from the feedback-linearizing law.

    Parameters
    ----------
    l : separation to the leader (m), must be positive.
    phi : follower heading relative to the leader (rad).
    alpha_hat : bearing estimate the controller acts on (rad).
    v1, omega1 : leader inputs as the follower believes them; substituting these
        into the range/bearing kinematics together with the returned commands
        collapses them to the linear tracking dynamics exactly.
    """
    if not l > 0.0:
        raise ValueError("separation must be positive")
    u1 = p.k_l * (p.l_d - l) - v1 * math.cos(alpha_hat)
    u2 = p.k_alpha * (p.alpha_d - alpha_hat) + v1 * math.sin(alpha_hat) / l - omega1
    v2 = -math.cos(phi) * u1 - l * math.sin(phi) * u2
    omega2 = -math.sin(phi) / p.d * u1 + (l / p.d) * math.cos(phi) * u2
    return v2, omega2


def flow_map(alpha_hat0, t, p: PlantParams):
    """Analytic flow of the predictor ODE over a window of length t.

    The predictor relaxes exponentially toward the formation bearing, so both
    ends of a communication link can advance it in closed form.  Accepts arrays.
    """
    return p.alpha_d + (alpha_hat0 - p.alpha_d) * np.exp(-p.k_alpha * np.asarray(t, dtype=float))


def rk4_step_core(l, alpha, alpha_hat, dt, n1, n2, p: PlantParams):
    """Classical 4th-order Runge-Kutta step, noise held constant. Array-capable."""
    k1 = _rhs_core(l, alpha, alpha_hat, n1, n2, p)
    k2 = _rhs_core(l + 0.5 * dt * k1[0], alpha + 0.5 * dt * k1[1],
                   alpha_hat + 0.5 * dt * k1[2], n1, n2, p)
    k3 = _rhs_core(l + 0.5 * dt * k2[0], alpha + 0.5 * dt * k2[1],
                   alpha_hat + 0.5 * dt * k2[2], n1, n2, p)
    k4 = _rhs_core(l + dt * k3[0], alpha + dt * k3[1], alpha_hat + dt * k3[2], n1, n2, p)
    w = dt / 6.0
    return (l + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            alpha + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            alpha_hat + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]))


def rk4_step(s: SimState, dt: float, noise: tuple[float, float], p: PlantParams) -> SimState:
    """One RK4 step of closed_loop_rhs with the noise pair held constant."""
    if not s.x.l > 0.0:
        raise ValueError("separation must be positive")
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    l, a, ah = rk4_step_core(s.x.l, s.x.alpha, s.alpha_hat, dt, noise[0], noise[1], p)
    return SimState(StateVec(float(l), float(a)), float(ah))
