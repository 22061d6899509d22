"""Monte-Carlo engine: closed-loop integration with triggered, quantized
transmissions over the bursty channel.

Timeline: states live on the uniform grid t_s = s * dt.  Step s integrates the
plant from t_{s-1} to t_s with that step's noise pair held constant; then any
transmission due at the boundary t_s is processed (the event rule checks the
fresh estimation error, the self rule transmits when its scheduled step
arrives); the trace row for t_s holds the post-jump values.  There is no
transmission at t = 0: encoder and decoder start a-priori synchronized on the
box [center0 +- u0].

A path that breaks an invariant (box containment, width-growth bound, leaving
the communication region, numerical blow-up) is frozen at its failure step,
excluded from the aggregates, and counted in McSummary.violations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from . import channel as ch
from . import quantizer as qz
from . import trigger as tg
from .config import ScenarioConfig
from .plant import StateVec, flow_map, rk4_step_core

FAIL_CONTAINMENT = "containment"
FAIL_WIDTH_GROWTH = "width_growth"
FAIL_COMM_REGION = "comm_region"
FAIL_NUMERIC = "numeric"

# interval histogram: 10 ms bins over [0, 1) s plus one overflow bin [1, inf)
INTERVAL_BIN_S = 0.01
INTERVAL_BIN_COUNT = 101

_TRAPZ = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class TransmissionRecord:
    k: int
    t_k: float
    interval: float
    r_k: int
    u_post: float
    est_error_post: float
    contained: bool


@dataclass
class SamplePath:
    seed: int
    scheme: str
    t: np.ndarray
    l: np.ndarray
    alpha: np.ndarray
    alpha_hat: np.ndarray
    est_error: np.ndarray
    u_bound: np.ndarray
    transmissions: list[TransmissionRecord]
    failure: str | None = None


@dataclass
class McSummary:
    scheme: str
    n_runs: int
    t: np.ndarray
    l_min: np.ndarray
    l_max: np.ndarray
    l_mean: np.ndarray
    alpha_min: np.ndarray
    alpha_max: np.ndarray
    alpha_mean: np.ndarray
    min_interval_per_run: np.ndarray
    mean_interval_per_run: np.ndarray
    min_interval: float
    mean_interval: float
    hist_fractions: np.ndarray
    err_l_per_run: np.ndarray
    err_alpha_per_run: np.ndarray
    err_track_per_run: np.ndarray
    violations: dict
    paths: list[SamplePath]


def _snap_steps(t_interval: float, dt: float) -> int:
    """Shortest whole number of grid steps covering the interval (at least one)."""
    if math.isinf(t_interval):
        return 1 << 60
    return max(1, math.ceil(t_interval / dt - 1e-9))


def _simulate_batch(cfg: ScenarioConfig, seeds, scheme: str) -> list[SamplePath]:
    cfg.validate()
    if scheme not in ("self", "event"):
        raise ValueError(f"a batch runs a single scheme, got {scheme!r}")
    chan_cfg = cfg.channel()
    plant_p = cfg.plant()
    trig_p = cfg.trigger()
    thr = cfg.threshold()
    n = len(seeds)
    n_steps = cfg.n_steps()
    dt = cfg.dt_s
    t_axis = np.arange(n_steps + 1) * dt

    # Per-path streams: one generator per path, consumed in a fixed order
    # (channel init, then the two noise arrays, then transmission bits in
    # chronological order) so every path is reproducible from its seed alone.
    rngs = [np.random.default_rng(int(s)) for s in seeds]
    state0 = StateVec(float(cfg.l0), float(cfg.alpha0))
    q0 = ch.stationary_good_prob(state0, chan_cfg)
    chains = [ch.MarkovChannelState(good=bool(r.random() < q0)) for r in rngs]
    m = plant_p.noise_bound
    if m > 0.0:
        noise1 = np.stack([r.uniform(-m, m, n_steps) for r in rngs], axis=1)
        noise2 = np.stack([r.uniform(-m, m, n_steps) for r in rngs], axis=1)
    else:
        noise1 = np.zeros((n_steps, n))
        noise2 = noise1

    L = np.full(n, float(cfg.l0))
    A = np.full(n, float(cfg.alpha0))
    AH = np.full(n, float(cfg.center0))
    c_post = np.full(n, float(cfg.center0))
    u_post = np.full(n, max(float(cfg.u0), cfg.u_floor))
    t_last = np.zeros(n)
    last_tx_step = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    failures: list[str | None] = [None] * n
    fail_step = np.full(n, n_steps + 1, dtype=np.int64)
    recs: list[list[TransmissionRecord]] = [[] for _ in range(n)]

    next_tx = np.full(n, -1, dtype=np.int64)
    floor_t = np.full(n, math.inf)
    if scheme == "self":
        g0 = ch.resolution_loss_bound(state0, chan_cfg)
        t0 = tg.self_trigger_interval(g0, trig_p)
        floor_t[:] = t0
        next_tx[:] = _snap_steps(t0, dt)

    fade_on = cfg.fade_duration_s > 0.0
    fade_lo = cfg.fade_start_s
    fade_hi = cfg.fade_start_s + cfg.fade_duration_s

    trace = {key: np.empty((n_steps + 1, n))
             for key in ("l", "alpha", "alpha_hat", "est_error", "u_bound")}

    def fail(i: int, reason: str, s: int):
        active[i] = False
        failures[i] = reason
        fail_step[i] = s

    def transmit(i: int, s: int):
        t = float(t_axis[s])
        if not abs(A[i]) < math.pi / 2.0:
            fail(i, FAIL_COMM_REGION, s)
            return
        tau = t - float(t_last[i])
        c_pre = float(flow_map(c_post[i], tau, plant_p))
        dev = abs(float(c_post[i]) - plant_p.alpha_d)
        try:
            u_pre = float(qz.propagated_width(float(u_post[i]), tau, trig_p,
                                              center_dev=dev))
        except tg.TriggerViolationError:
            fail(i, FAIL_WIDTH_GROWTH, s)
            return
        # Bisection geometry: both coder ends know a receivable bearing lies
        # inside the radiation cone, so when the grown box has outgrown
        # (-pi/2, pi/2) the delivered bits bisect the intersection instead.
        # This keeps a long coast from making the delivered resolution useless.
        # With no delivered block the box stays the pure flow-coasted one, so
        # the predictor never moves without data.
        lo = max(c_pre - u_pre, -math.pi / 2.0)
        hi = min(c_pre + u_pre, math.pi / 2.0)
        if lo < hi and (hi - lo) < 2.0 * u_pre:
            c_bis = 0.5 * (lo + hi)
            u_bis = 0.5 * (hi - lo) * (1.0 + 1e-9)
        else:
            c_bis, u_bis = c_pre, u_pre
        state_i = StateVec(float(L[i]), float(A[i]))
        ch.advance_chain(chains[i], int(s - last_tx_step[i]), state_i, chan_cfg, rngs[i])
        r_k = ch.sample_reception(state_i, chains[i], chan_cfg, rngs[i])
        if fade_on and fade_lo <= t < fade_hi:
            r_k = 0  # the chain still advanced: the fade rides on top of it
        box = qz.QuantizerState(np.array([c_bis]), u_bis)
        try:
            blocks = qz.encode(np.array([float(A[i])]), box, r_k)
        except qz.ContainmentError:
            fail(i, FAIL_CONTAINMENT, s)
            return
        if r_k == 0:
            # Nothing delivered: box and prediction keep coasting.  (The
            # un-capped grown box is retained so the predictor never moves
            # without data; width honesty needs the prediction to stay at the
            # box centre.)
            c_new, u_raw = c_pre, u_pre
            contained = qz.cell_contains(np.array([float(A[i])]),
                                         qz.QuantizerState(np.array([c_pre]), u_pre), [])
        else:
            post = qz.decode(blocks, box.center, u_bis)
            c_new, u_raw = float(post.center[0]), post.half_width
            contained = qz.cell_contains(np.array([float(A[i])]), box, blocks)
        u_new = max(u_raw, cfg.u_floor)
        recs[i].append(TransmissionRecord(k=len(recs[i]), t_k=t, interval=tau,
                                          r_k=r_k, u_post=u_new,
                                          est_error_post=float(A[i]) - c_new,
                                          contained=contained))
        c_post[i] = c_new
        u_post[i] = u_new
        AH[i] = c_new
        last_tx_step[i] = s
        t_last[i] = t
        if scheme == "self":
            g = ch.resolution_loss_bound(state_i, chan_cfg)
            try:
                t_nom = tg.self_trigger_interval(g, trig_p)
            except tg.OutsideCommRegionError:
                fail(i, FAIL_COMM_REGION, s)
                return
            # A partial delivery leaves the box wider than the nominal wait
            # assumes, so the follow-up comes sooner -- scaled by the missing
            # blocks, floored at the shortest nominal wait seen at any
            # transmission state so far (which never undercuts the analytic
            # minimum over the visited region).
            floor_t[i] = min(floor_t[i], t_nom)
            t_next = max(t_nom * 2.0 ** (r_k - chan_cfg.r_bar), floor_t[i])
            next_tx[i] = s + _snap_steps(t_next, dt)

    def write_trace(s: int):
        trace["l"][s] = L
        trace["alpha"][s] = A
        trace["alpha_hat"][s] = AH
        trace["est_error"][s] = A - AH
        tau = t_axis[s] - t_last
        dev = np.abs(c_post - plant_p.alpha_d)
        if trig_p.l_x == 0.0:
            trace["u_bound"][s] = qz.propagated_width(u_post, tau, trig_p,
                                                      center_dev=dev)
        else:
            for i in range(n):
                try:
                    trace["u_bound"][s, i] = qz.propagated_width(
                        float(u_post[i]), float(tau[i]), trig_p, center_dev=float(dev[i]))
                except tg.TriggerViolationError:
                    trace["u_bound"][s, i] = np.inf
                    if active[i]:
                        fail(i, FAIL_WIDTH_GROWTH, s)

    write_trace(0)
    for s in range(1, n_steps + 1):
        with np.errstate(all="ignore"):
            Ln, An, AHn = rk4_step_core(L, A, AH, dt, noise1[s - 1], noise2[s - 1],
                                        plant_p)
        bad = active & (~np.isfinite(Ln) | ~np.isfinite(An) | ~np.isfinite(AHn)
                        | (Ln <= 0.0) | (np.abs(An) > np.pi))
        move = active & ~bad
        L = np.where(move, Ln, L)
        A = np.where(move, An, A)
        AH = np.where(move, AHn, AH)
        for i in np.nonzero(bad)[0]:
            fail(i, FAIL_NUMERIC, s)

        if scheme == "self":
            due = active & (next_tx == s)
        else:
            bound = thr.coeff * np.maximum(thr.scale_l * np.abs(L - plant_p.l_d),
                                           thr.scale_alpha * np.abs(A - plant_p.alpha_d))
            due = active & (np.abs(A - AH) > bound)
        for i in np.nonzero(due)[0]:
            transmit(i, s)
        write_trace(s)

    paths = []
    for j, seed in enumerate(seeds):
        sl = slice(0, int(min(fail_step[j] + 1, n_steps + 1)))
        cols = {}
        for key, arr in trace.items():
            col = arr[:, j].copy()
            col[sl.stop:] = np.nan  # frozen tail of a failed path
            cols[key] = col
        paths.append(SamplePath(seed=int(seed), scheme=scheme, t=t_axis.copy(),
                                l=cols["l"], alpha=cols["alpha"],
                                alpha_hat=cols["alpha_hat"],
                                est_error=cols["est_error"],
                                u_bound=cols["u_bound"],
                                transmissions=recs[j], failure=failures[j]))
    return paths


def interval_histogram(intervals) -> np.ndarray:
    """Fractions per 10 ms bin over [0, 1) s; the last bin collects >= 1 s."""
    frac = np.zeros(INTERVAL_BIN_COUNT)
    iv = np.asarray(intervals, dtype=float)
    if iv.size:
        idx = np.minimum((iv / INTERVAL_BIN_S).astype(np.int64),
                         INTERVAL_BIN_COUNT - 1)
        frac = np.bincount(idx, minlength=INTERVAL_BIN_COUNT) / iv.size
    return frac


def summarize(cfg: ScenarioConfig, paths: list[SamplePath]) -> McSummary:
    scheme = paths[0].scheme
    t = paths[0].t
    dt = cfg.dt_s
    healthy = [p for p in paths if p.failure is None]
    nan_t = np.full_like(t, np.nan)

    if healthy:
        Ls = np.stack([p.l for p in healthy], axis=1)
        As = np.stack([p.alpha for p in healthy], axis=1)
        l_min, l_max, l_mean = Ls.min(axis=1), Ls.max(axis=1), Ls.mean(axis=1)
        a_min, a_max, a_mean = As.min(axis=1), As.max(axis=1), As.mean(axis=1)
        err_l = _TRAPZ(np.abs(Ls - cfg.l_d), dx=dt, axis=0) / cfg.horizon_s
        err_a = _TRAPZ(np.abs(As - cfg.alpha_d), dx=dt, axis=0) / cfg.horizon_s
        track = np.maximum(cfg.scale_l * np.abs(Ls - cfg.l_d),
                           cfg.scale_alpha * np.abs(As - cfg.alpha_d))
        err_track = _TRAPZ(track, dx=dt, axis=0) / cfg.horizon_s
    else:
        l_min = l_max = l_mean = a_min = a_max = a_mean = nan_t
        err_l = err_a = err_track = np.array([])

    per_run_min, per_run_mean, pooled = [], [], []
    for p in healthy:
        iv = [r.interval for r in p.transmissions]
        pooled.extend(iv)
        per_run_min.append(min(iv) if iv else math.nan)
        per_run_mean.append(float(np.mean(iv)) if iv else math.nan)

    violations = dict(Counter(p.failure for p in paths if p.failure is not None))
    return McSummary(
        scheme=scheme, n_runs=len(paths), t=t,
        l_min=l_min, l_max=l_max, l_mean=l_mean,
        alpha_min=a_min, alpha_max=a_max, alpha_mean=a_mean,
        min_interval_per_run=np.asarray(per_run_min),
        mean_interval_per_run=np.asarray(per_run_mean),
        min_interval=min(pooled) if pooled else math.nan,
        mean_interval=float(np.mean(pooled)) if pooled else math.nan,
        hist_fractions=interval_histogram(pooled),
        err_l_per_run=np.asarray(err_l), err_alpha_per_run=np.asarray(err_a),
        err_track_per_run=np.asarray(err_track),
        violations=violations, paths=paths)


def run_sample_path(config: ScenarioConfig, seed: int) -> SamplePath:
    """One path under config.scheme with an absolute per-path seed."""
    if config.scheme == "both":
        raise ValueError("run_sample_path needs a single scheme, not 'both'")
    return _simulate_batch(config, [int(seed)], config.scheme)[0]


def run_monte_carlo(config: ScenarioConfig, n_runs: int | None = None) -> McSummary:
    """n_runs paths seeded config.seed + 0 .. n_runs - 1, aggregated."""
    if config.scheme == "both":
        raise ValueError("run_monte_carlo aggregates one scheme at a time")
    n = config.runs if n_runs is None else int(n_runs)
    seeds = [config.seed + j for j in range(n)]
    return summarize(config, _simulate_batch(config, seeds, config.scheme))


def inject_deep_fade(config: ScenarioConfig, start_s: float,
                     duration_s: float) -> ScenarioConfig:
    """Config with every transmission in [start, start + duration) forced to fail."""
    return replace(config, fade_start_s=float(start_s),
                   fade_duration_s=float(duration_s)).validate()


def sweep_formations(config: ScenarioConfig, alpha_d_list) -> list[dict]:
    """Both schemes across desired formation bearings; traces are discarded.

    Returns one row per (alpha_d, scheme) with pooled interval statistics and
    mean time-averaged tracking errors.
    """
    rows = []
    for alpha_d in alpha_d_list:
        base = replace(config, alpha_d=float(alpha_d))
        for scheme in ("self", "event"):
            mc = run_monte_carlo(replace(base, scheme=scheme))
            rows.append({
                "alpha_d_deg": math.degrees(float(alpha_d)),
                "scheme": scheme,
                "min_interval": mc.min_interval,
                "mean_interval": mc.mean_interval,
                "err_l": float(np.mean(mc.err_l_per_run)) if mc.err_l_per_run.size else math.nan,
                "err_alpha": float(np.mean(mc.err_alpha_per_run)) if mc.err_alpha_per_run.size else math.nan,
                "violations": int(sum(mc.violations.values())),
            })
    return rows
