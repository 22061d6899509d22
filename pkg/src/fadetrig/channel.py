"""State-dependent bursty fading channel.

A frame of r_bar fixed-size blocks is sent at every transmission instant.  Bit
errors are governed by a two-state (good/bad) Markov chain whose transition
probabilities depend on the normalized range r = L / (p * cos(alpha)): the
farther the receiver sits from boresight, or the lower the power, the burstier
and lossier the channel.  The decoder can only use an unbroken prefix of
delivered blocks, so the quantity of interest is the prefix-run length R.

The pair (block_rate_threshold, burst_decay_rate) is an exponential envelope on
the burstiness of R: Pr[R <= h - sigma] <= exp(-gamma * sigma).  The scalar
resolution_loss_bound g = exp(-h*gamma) * (1 + h*gamma) summarizes the envelope
for the trigger rule; smaller is better, and g -> 1 as the state approaches the
edge of the radiation cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plant import StateVec

# Fitted slope of the fade/recovery rates of the two-state chain.
TRANSITION_SCALE = 0.08


@dataclass(frozen=True)
class ChannelConfig:
    """Radio and framing parameters.

    h_rate doubles as the fading threshold of the Markov chain: the stationary
    probability of the good state is exp(-h_rate * r), which is exactly what
    makes block_rate_threshold an anchor for the delivered-prefix statistics.
    """

    r_bar: int = 4
    p: float = 8.0
    bits_per_block: int = 1
    h_coeff: float = 0.8
    h_rate: float = 0.25
    gamma_coeff: float = 8.0

    def __post_init__(self):
        if self.r_bar < 1:
            raise ValueError("r_bar must be at least 1 block")
        if self.p <= 0.0:
            raise ValueError("transmission power p must be positive")
        if self.bits_per_block < 1:
            raise ValueError("bits_per_block must be at least 1")
        if self.h_coeff <= 0.0 or self.h_rate <= 0.0 or self.gamma_coeff <= 0.0:
            raise ValueError("envelope coefficients must be positive")


@dataclass
class MarkovChannelState:
    good: bool


def normalized_range(state: StateVec, cfg: ChannelConfig) -> float:
    """r = L / (p * cos(alpha)); infinite at the edge of the radiation cone."""
    if state.l <= 0.0:
        raise ValueError("separation must be positive")
    if abs(state.alpha) >= math.pi / 2.0:
        return math.inf
    return state.l / (cfg.p * math.cos(state.alpha))


def block_rate_threshold(state: StateVec, cfg: ChannelConfig) -> float:
    """Anchor h of the burstiness envelope (in blocks); 0 outside the cone."""
    r = normalized_range(state, cfg)
    if math.isinf(r):
        return 0.0
    return cfg.h_coeff * cfg.r_bar * math.exp(-cfg.h_rate * r)


def burst_decay_rate(state: StateVec, cfg: ChannelConfig) -> float:
    """Decay rate gamma of the burstiness envelope; 0 outside the cone."""
    r = normalized_range(state, cfg)
    if math.isinf(r):
        return 0.0
    return cfg.gamma_coeff / r


def resolution_loss_bound(state: StateVec, cfg: ChannelConfig) -> float:
    """g = exp(-h*gamma) * (1 + h*gamma): expected-resolution loss per frame."""
    y = block_rate_threshold(state, cfg) * burst_decay_rate(state, cfg)
    return math.exp(-y) * (1.0 + y)


def transition_probs(state: StateVec, cfg: ChannelConfig) -> tuple[float, float]:
    """Per-bit (good->bad, bad->good) probabilities, each clamped to [0, 1].

    Rayleigh-fade fit: p12 grows like sqrt(r) while the recovery rate p21 decays
    with exp(h_rate*r)-1 in the denominator, so deep in the bad region losses
    come in long bursts.  Detailed balance gives the stationary good-state
    probability exp(-h_rate*r) before clamping.
    """
    r = normalized_range(state, cfg)
    if math.isinf(r):
        return 1.0, 0.0
    p12 = TRANSITION_SCALE * math.sqrt(math.pi * r / 2.0)
    p21 = TRANSITION_SCALE * math.sqrt(math.pi / 2.0) * math.sqrt(r) / math.expm1(cfg.h_rate * r)
    return min(p12, 1.0), min(p21, 1.0)


def stationary_good_prob(state: StateVec, cfg: ChannelConfig) -> float:
    p12, p21 = transition_probs(state, cfg)
    if p12 + p21 == 0.0:
        return 1.0
    return p21 / (p12 + p21)


def init_channel_state(state: StateVec, cfg: ChannelConfig,
                       rng: np.random.Generator) -> MarkovChannelState:
    """Channel state drawn from the stationary law at the given plant state."""
    return MarkovChannelState(good=bool(rng.random() < stationary_good_prob(state, cfg)))


def advance_chain(chan: MarkovChannelState, n_slots: int, state: StateVec,
                  cfg: ChannelConfig, rng: np.random.Generator) -> MarkovChannelState:
    """Relax the burst chain across `n_slots` idle bit slots, in place.

    Burst memory decays with elapsed time, not with bits actually sent, so an
    idle gap between frames mixes the chain toward its stationary law.  The
    two-state chain has the closed form
        P(good after k | s0) = pi + (1{s0 good} - pi) * (1 - p12 - p21)^k
    which is sampled with a single uniform whatever `n_slots` is, keeping the
    per-frame draw count fixed.
    """
    assert n_slots >= 0
    p12, p21 = transition_probs(state, cfg)
    tot = p12 + p21
    was_good = 1.0 if chan.good else 0.0
    if tot == 0.0:
        p_good = was_good
    else:
        p_good = p21 / tot + (was_good - p21 / tot) * (1.0 - tot) ** n_slots
    chan.good = bool(rng.random() < p_good)
    return chan


def sample_reception(state: StateVec, chan: MarkovChannelState, cfg: ChannelConfig,
                     rng: np.random.Generator) -> int:
    """Delivered-prefix length R for one frame; advances `chan` in place.

    The chain is stepped once per bit slot (transition first, then the slot's
    quality is read).  A block is delivered only if every one of its bits saw
    the good state; counting stops at the first lost block, but the chain still
    runs through the whole frame, so every call consumes exactly
    r_bar * bits_per_block uniforms from `rng`.
    """
    p12, p21 = transition_probs(state, cfg)
    run = 0
    alive = True
    for _ in range(cfg.r_bar):
        block_ok = True
        for _ in range(cfg.bits_per_block):
            u = rng.random()
            chan.good = (u >= p12) if chan.good else (u < p21)
            block_ok = block_ok and chan.good
        if alive and block_ok:
            run += 1
        else:
            alive = False
    return run


def sample_prefix_runs(state: StateVec, cfg: ChannelConfig, n_trials: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Vectorized i.i.d. draws of R, each trial starting a fresh stationary chain."""
    p12, p21 = transition_probs(state, cfg)
    good = rng.random(n_trials) < stationary_good_prob(state, cfg)
    runs = np.zeros(n_trials, dtype=np.int64)
    alive = np.ones(n_trials, dtype=bool)
    for _ in range(cfg.r_bar):
        block_ok = np.ones(n_trials, dtype=bool)
        for _ in range(cfg.bits_per_block):
            u = rng.random(n_trials)
            good = np.where(good, u >= p12, u < p21)
            block_ok &= good
        runs += alive & block_ok
        alive &= block_ok
    return runs


def empirical_tail_check(state: StateVec, cfg: ChannelConfig, n_trials: int,
                         rng: np.random.Generator, sigmas=None) -> list[dict]:
    """Empirical burst-tail probabilities against the exponential envelope.

    Returns one row per sigma with the empirical Pr[R <= h - sigma], the
    envelope value exp(-gamma * sigma), and the binomial standard error.
    """
    assert n_trials > 0
    h = block_rate_threshold(state, cfg)
    gamma = burst_decay_rate(state, cfg)
    if sigmas is None:
        sigmas = [h * k / 4.0 for k in range(5)]
    runs = sample_prefix_runs(state, cfg, n_trials, rng)
    rows = []
    for sigma in sigmas:
        emp = float(np.mean(runs <= h - sigma))
        se = math.sqrt(max(emp * (1.0 - emp), 1.0 / n_trials) / n_trials)
        rows.append({"sigma": float(sigma), "empirical": emp,
                     "envelope": math.exp(-gamma * sigma), "stderr": se})
    return rows
