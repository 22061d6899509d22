"""Transmission triggering: the self-triggered interval rule and the
event-triggered baseline it is compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import ChannelConfig, resolution_loss_bound
from .plant import StateVec


class OutsideCommRegionError(ValueError):
    """Channel quality at this state is too poor for the trigger rule to apply."""


class TriggerViolationError(RuntimeError):
    """Box growth outpaced its bound over the scheduled interval (eta <= 0)."""


@dataclass(frozen=True)
class TriggerParams:
    """Calibration constants of the self-trigger rule.

    l_e bounds the growth rate of the estimation error, l_x / l_w the
    sensitivity of that rate to the state and the disturbance, w1 <= w2 the
    norm-equivalence constants, chi1_bar / c1 / c_chi the comparison-function
    slopes, and m_bound the worst-case disturbance magnitude.
    """

    l_e: float = 3.0
    l_x: float = 0.0
    l_w: float = 1.0
    w1: float = 1.0
    w2: float = 1.0
    chi1_bar: float = 1.0
    c1: float = 1.0
    c_chi: float = 1.0
    m_bound: float = 0.0

    def __post_init__(self):
        if self.l_e <= 0.0:
            raise ValueError("l_e must be positive")
        if self.l_x < 0.0 or self.l_w < 0.0:
            raise ValueError("l_x and l_w must be non-negative")
        if not 0.0 < self.w1 <= self.w2:
            raise ValueError("need 0 < w1 <= w2")
        if self.chi1_bar <= 0.0 or self.c1 <= 0.0:
            raise ValueError("chi1_bar and c1 must be positive")
        if self.c_chi < 0.0:
            raise ValueError("c_chi must be non-negative")
        if self.m_bound < 0.0:
            raise ValueError("m_bound must be non-negative")


@dataclass(frozen=True)
class EventThreshold:
    """Baseline rule: transmit when |alpha - alpha_hat| exceeds coeff times the
    (scaled) max-norm tracking error."""

    coeff: float = 0.1591
    scale_l: float = 1.0
    scale_alpha: float = 1.0

    def __post_init__(self):
        if self.coeff <= 0.0:
            raise ValueError("coeff must be positive")
        if self.scale_l <= 0.0 or self.scale_alpha <= 0.0:
            raise ValueError("scales must be positive")


def self_trigger_interval(g_val: float, params: TriggerParams) -> float:
    """Longest interval with guaranteed expected box contraction at quality g_val.

    Solves the growth-vs-resolution balance: over the returned interval the box
    grows by exactly the factor the channel is expected to win back.  Requires
    (w2/w1) * g_val < 1; otherwise no positive interval exists and the state is
    outside the communication region.
    """
    if not 0.0 <= g_val <= 1.0:
        raise ValueError("g_val must lie in [0, 1]")
    a = (params.w2 / params.w1) * g_val
    if a >= 1.0:
        raise OutsideCommRegionError(
            f"resolution-loss bound {g_val:.6g} leaves no positive trigger interval")
    b = params.l_x * params.chi1_bar / (params.l_e * params.w1)
    if a + b == 0.0:
        return math.inf
    return math.log1p((1.0 - a) / (a + b)) / params.l_e


def in_comm_region(state: StateVec, params: TriggerParams, cfg: ChannelConfig) -> bool:
    """Whether the state's channel quality admits a positive trigger interval."""
    return resolution_loss_bound(state, cfg) < params.w1 / params.w2


def event_trigger_fired(est_error: float, err_l: float, err_alpha: float,
                        thr: EventThreshold) -> bool:
    bound = thr.coeff * max(thr.scale_l * abs(err_l), thr.scale_alpha * abs(err_alpha))
    return abs(est_error) > bound
