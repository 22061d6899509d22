"""Engine-level checks: reproducibility, record/trace consistency, the fade
injection window, and the interval bookkeeping.  Scenario-scale behavior
(convergence, interval statistics, scheme comparisons) lives in the
acceptance suite."""

import math
from dataclasses import replace

import numpy as np
import pytest

from fadetrig.config import defaults_for
from fadetrig.engine import (
    INTERVAL_BIN_COUNT,
    _snap_steps,
    inject_deep_fade,
    interval_histogram,
    run_monte_carlo,
    run_sample_path,
    summarize,
)


def short(scenario, **kw):
    base = dict(horizon_s=1.0, runs=3, trace_keep=0)
    base.update(kw)
    return replace(defaults_for(scenario), **base)


def paths_equal(a, b):
    assert a.seed == b.seed and a.scheme == b.scheme
    for key in ("t", "l", "alpha", "alpha_hat", "est_error", "u_bound"):
        assert np.array_equal(getattr(a, key), getattr(b, key), equal_nan=True), key
    assert a.transmissions == b.transmissions
    assert a.failure == b.failure


def test_same_seed_reproduces_path_exactly():
    cfg = short("distribution", scheme="self")
    paths_equal(run_sample_path(cfg, 42), run_sample_path(cfg, 42))


@pytest.mark.parametrize("scheme", ["self", "event"])
def test_batch_equals_single_path(scheme):
    cfg = short("distribution", scheme=scheme, seed=7)
    mc = run_monte_carlo(cfg)
    assert mc.n_runs == 3
    for j, p in enumerate(mc.paths):
        assert p.seed == 7 + j
        paths_equal(p, run_sample_path(cfg, 7 + j))


def test_n_runs_override():
    cfg = short("converge")
    assert run_monte_carlo(cfg, n_runs=2).n_runs == 2


def test_both_scheme_needs_splitting():
    cfg = short("distribution")  # scheme="both" by default
    with pytest.raises(ValueError):
        run_sample_path(cfg, 0)
    with pytest.raises(ValueError):
        run_monte_carlo(cfg)


def test_records_are_consistent_with_trace():
    cfg = short("converge", horizon_s=2.0, runs=1)
    p = run_sample_path(cfg, 0)
    assert p.failure is None
    assert len(p.transmissions) > 0
    dt = cfg.dt_s
    t_prev = 0.0
    for k, rec in enumerate(p.transmissions):
        assert rec.k == k
        assert rec.interval == pytest.approx(rec.t_k - t_prev, abs=1e-12)
        assert rec.interval >= dt - 1e-12
        assert rec.contained
        assert rec.u_post >= cfg.u_floor
        # trace rows hold post-jump values, so the row at t_k matches
        s = int(round(rec.t_k / dt))
        assert p.est_error[s] == pytest.approx(rec.est_error_post, abs=1e-12)
        t_prev = rec.t_k
    # the local error bound is honest wherever it is finite
    ok = np.isfinite(p.u_bound)
    assert np.all(np.abs(p.est_error[ok]) <= p.u_bound[ok] + 1e-9)


@pytest.mark.parametrize("scheme", ["self", "event"])
def test_healthy_runs_have_no_violations(scheme):
    mc = run_monte_carlo(short("distribution", scheme=scheme, runs=4))
    assert mc.violations == {}
    assert mc.min_interval >= mc.t[1] - 1e-12   # never below one grid step
    assert mc.hist_fractions.shape == (INTERVAL_BIN_COUNT,)
    assert mc.hist_fractions.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.isfinite(mc.err_l_per_run))
    assert np.all(mc.l_min <= mc.l_mean + 1e-15)
    assert np.all(mc.l_mean <= mc.l_max + 1e-15)


def test_deep_fade_blanks_the_window():
    cfg = replace(short("deepfade", scheme="self", runs=2), horizon_s=4.0)
    assert cfg.fade_duration_s > 0.0
    mc = run_monte_carlo(cfg)
    lo, hi = cfg.fade_start_s, cfg.fade_start_s + cfg.fade_duration_s
    in_window = [r for p in mc.paths for r in p.transmissions if lo <= r.t_k < hi]
    assert in_window, "fade window saw no transmissions"
    assert all(r.r_k == 0 for r in in_window)
    outside = [r for p in mc.paths for r in p.transmissions if not lo <= r.t_k < hi]
    assert any(r.r_k > 0 for r in outside)


def test_inject_deep_fade_sets_window():
    cfg = inject_deep_fade(short("converge"), 1.25, 0.5)
    assert cfg.fade_start_s == 1.25
    assert cfg.fade_duration_s == 0.5
    with pytest.raises(ValueError):
        inject_deep_fade(short("converge"), -1.0, 0.5)


def test_summarize_excludes_failed_paths():
    cfg = short("converge", runs=1)
    ok = run_sample_path(cfg, 0)
    bad = replace(ok, seed=1, failure="numeric")
    mc = summarize(cfg, [ok, bad])
    assert mc.n_runs == 2
    assert mc.violations == {"numeric": 1}
    assert np.array_equal(mc.l_min, ok.l)
    assert np.array_equal(mc.l_max, ok.l)
    assert mc.min_interval == min(r.interval for r in ok.transmissions)


def test_snap_steps():
    assert _snap_steps(0.012, 0.001) == 12
    assert _snap_steps(0.0125, 0.001) == 13
    assert _snap_steps(1e-6, 0.001) == 1    # never shorter than one step
    assert _snap_steps(0.0, 0.001) == 1
    assert _snap_steps(math.inf, 0.001) > 10**9


def test_interval_histogram_binning():
    frac = interval_histogram([0.005, 0.015, 2.0])
    assert frac[0] == pytest.approx(1 / 3)
    assert frac[1] == pytest.approx(1 / 3)
    assert frac[-1] == pytest.approx(1 / 3)
    assert frac.sum() == pytest.approx(1.0)
    assert interval_histogram([]).sum() == 0.0
    assert interval_histogram([0.01])[1] == 1.0   # left-closed bins
