"""Dynamic box quantizer with prefix-refinement decoding.

Encoder and decoder keep a synchronized box (center, half_width) that is
guaranteed to contain the signal.  Each delivered block bisects the box once
per component; blocks after the first loss are useless, which is why only the
delivered prefix matters.  Between transmissions the box center is advanced by
the predictor flow and the half-width by the growth bound in
propagate_half_width.

All bisection arithmetic happens in box coordinates xi = (x - center)/half_width
against dyadic midpoints, so every midpoint and increment is an exact float and
the containment guarantee survives floating point verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plant import PlantParams, flow_map
from .trigger import TriggerParams, TriggerViolationError


class ContainmentError(RuntimeError):
    """The signal left the quantizer box: coder synchronization is broken."""


@dataclass
class QuantizerState:
    center: np.ndarray
    half_width: float

    def __post_init__(self):
        self.center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if self.center.ndim != 1:
            raise ValueError("center must be a flat vector")
        self.half_width = float(self.half_width)
        if not self.half_width > 0.0:
            raise ValueError("half_width must be positive")


def bits_to_signs(block) -> np.ndarray:
    """Bit b -> bisection direction 2b - 1 (1 -> +1, 0 -> -1)."""
    b = np.asarray(block, dtype=np.int64)
    if not np.all((b == 0) | (b == 1)):
        raise ValueError("blocks must be 0/1 arrays")
    return 2 * b - 1


def encode(x_true, pre_jump: QuantizerState, r_k: int) -> list[np.ndarray]:
    """Bisection bit-blocks for r_k refinement rounds of every component.

    Block j holds, per component, whether the signal sits in the upper half of
    the current cell.  Raises ContainmentError if x_true is outside the box.
    """
    if r_k < 0:
        raise ValueError("r_k must be non-negative")
    x = np.atleast_1d(np.asarray(x_true, dtype=float))
    if x.shape != pre_jump.center.shape:
        raise ValueError("x_true and box center have different dimensions")
    xi = (x - pre_jump.center) / pre_jump.half_width
    if not np.all(np.abs(xi) <= 1.0):
        off = float(np.max(np.abs(xi)))
        raise ContainmentError(
            f"signal outside the quantizer box ({off:.6g} half-widths from center)")
    mids = np.zeros_like(xi)
    blocks = []
    for j in range(1, r_k + 1):
        bits = (xi >= mids).astype(np.int64)
        mids = mids + (2 * bits - 1) * 2.0 ** -j
        blocks.append(bits)
    return blocks


def decode(blocks, predicted_center, pre_jump_half_width: float) -> QuantizerState:
    """Post-jump box from the delivered prefix of blocks.

    With no delivered blocks the predicted box stands; each block halves the
    half-width exactly (power-of-two scaling commits no rounding).
    """
    if not pre_jump_half_width > 0.0:
        raise ValueError("pre-jump half_width must be positive")
    c = np.atleast_1d(np.asarray(predicted_center, dtype=float))
    mids = np.zeros_like(c)
    for j, block in enumerate(blocks, start=1):
        mids = mids + bits_to_signs(block) * 2.0 ** -j
    return QuantizerState(c + pre_jump_half_width * mids,
                          pre_jump_half_width * 2.0 ** -len(blocks))


def cell_contains(x_true, pre_jump: QuantizerState, blocks) -> bool:
    """Exact check that x_true lies in the cell selected by the blocks.

    Works on dyadic midpoints in box coordinates; comparing against the
    power-of-two cell radius is immune to the rounding of the subtraction, so a
    True here certifies containment and a False certifies a desync.
    """
    x = np.atleast_1d(np.asarray(x_true, dtype=float))
    xi = (x - pre_jump.center) / pre_jump.half_width
    mids = np.zeros_like(xi)
    for j, block in enumerate(blocks, start=1):
        mids = mids + bits_to_signs(block) * 2.0 ** -j
    return bool(np.all(np.abs(xi - mids) <= 2.0 ** -len(blocks)))


def propagated_width(u_post, tau, params: TriggerParams, center_dev=0.0):
    """Half-width bound after coasting tau seconds from a box of width u_post.

    center_dev is the distance of the post-jump center from the set point; it
    only matters when the error growth is state-dependent (l_x > 0).  Accepts
    arrays in tau / u_post / center_dev.
    """
    growth = np.exp(params.l_e * np.asarray(tau, dtype=float))
    eta = 1.0 - (params.l_x * params.chi1_bar / (params.w1 * params.l_e)) * (growth - 1.0)
    if np.any(eta <= 0.0):
        raise TriggerViolationError(
            "box growth bound lost: interval too long for the state-feedback rate l_x")
    drive = (params.l_x * params.c1 * (np.asarray(center_dev) + u_post)
             + params.l_w * params.m_bound
             + params.l_x * params.c_chi * params.m_bound)
    ramp = (growth - 1.0) / (params.w1 * params.l_e)
    return ((params.w2 / params.w1) * growth * u_post + ramp * drive) / eta


def propagate_half_width(post_jump: QuantizerState, t_interval: float,
                         params: TriggerParams, set_point: float = 0.0) -> float:
    """Guaranteed half-width at the next transmission, t_interval after a jump."""
    if t_interval < 0.0:
        raise ValueError("t_interval must be non-negative")
    dev = float(np.max(np.abs(post_jump.center - set_point)))
    return float(propagated_width(post_jump.half_width, t_interval, params,
                                  center_dev=dev))


def predict_center(post_jump_center, t_interval: float, plant: PlantParams) -> np.ndarray:
    """Coder-shared center prediction: the predictor flow applied to the center."""
    return np.atleast_1d(np.asarray(flow_map(post_jump_center, t_interval, plant)))
