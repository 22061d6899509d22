import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fadetrig.channel import ChannelConfig
from fadetrig.plant import StateVec
from fadetrig.trigger import (
    EventThreshold,
    OutsideCommRegionError,
    TriggerParams,
    event_trigger_fired,
    in_comm_region,
    self_trigger_interval,
)


def test_interval_worked_example():
    # l_x = 0, w1 = w2: T = ln(1/g) / l_e, so g = 1/e, l_e = 1 gives exactly 1
    p = TriggerParams(l_e=1.0)
    assert self_trigger_interval(math.exp(-1.0), p) == pytest.approx(1.0, abs=1e-12)
    p3 = TriggerParams(l_e=3.0)
    assert self_trigger_interval(math.exp(-1.0), p3) == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_interval_strictly_decreasing_in_quality_loss():
    p = TriggerParams(l_e=3.0, l_x=0.5, chi1_bar=1.2)
    gs = np.linspace(0.01, 0.99, 60)
    ts = [self_trigger_interval(g, p) for g in gs]
    assert all(a > b for a, b in zip(ts, ts[1:]))
    assert all(t > 0.0 for t in ts)


def test_outside_region_raises():
    p = TriggerParams(w1=1.0, w2=2.0)
    with pytest.raises(OutsideCommRegionError):
        self_trigger_interval(0.5, p)  # (w2/w1)*g == 1: no positive interval
    with pytest.raises(OutsideCommRegionError):
        self_trigger_interval(0.9, p)
    with pytest.raises(OutsideCommRegionError):
        self_trigger_interval(1.0, TriggerParams())
    with pytest.raises(ValueError):
        self_trigger_interval(-0.1, TriggerParams())
    with pytest.raises(ValueError):
        self_trigger_interval(1.1, TriggerParams())


def test_perfect_channel_limits():
    # with no state feedback a perfect channel never needs to retransmit
    assert self_trigger_interval(0.0, TriggerParams(l_x=0.0)) == math.inf
    # state feedback forces a finite interval even at g == 0
    t = self_trigger_interval(0.0, TriggerParams(l_x=2.0, l_e=3.0))
    assert 0.0 < t < math.inf


@given(st.floats(1e-3, 0.99), st.floats(0.2, 8.0), st.floats(0.0, 3.0),
       st.floats(0.3, 1.0), st.floats(1.0, 2.5))
def test_growth_resolution_balance_identity(g, l_e, l_x, w1, w2_over_w1):
    # The defining property of the interval: box growth (w2/w1) e^{l_e T} / eta
    # exactly cancels the expected resolution loss g.  (g below ~1e-3 makes the
    # float reconstruction of eta here ill-conditioned, not the rule itself.)
    w2 = w1 * w2_over_w1
    if (w2 / w1) * g >= 1.0:
        return
    p = TriggerParams(l_e=l_e, l_x=l_x, w1=w1, w2=w2, chi1_bar=1.3)
    t = self_trigger_interval(g, p)
    growth = math.exp(l_e * t)
    eta = 1.0 - (p.l_x * p.chi1_bar / (p.w1 * p.l_e)) * (growth - 1.0)
    assert eta > 0.0
    assert (w2 / w1) * growth / eta == pytest.approx(1.0 / g, rel=1e-10)


def test_in_comm_region():
    soft = ChannelConfig(gamma_coeff=0.5)
    far = StateVec(15.0, math.radians(-30.0))
    assert in_comm_region(far, TriggerParams(), soft)  # g ~ 0.93 < 1
    assert not in_comm_region(far, TriggerParams(w1=0.9, w2=1.0), soft)
    edge = StateVec(15.0, 1.57)
    assert not in_comm_region(edge, TriggerParams(), soft)
    assert not in_comm_region(far, TriggerParams(), ChannelConfig(gamma_coeff=1e-8))


def test_event_trigger_rule():
    thr = EventThreshold(coeff=0.1591)
    assert event_trigger_fired(0.2, 1.0, 0.5, thr)
    assert not event_trigger_fired(0.1, 1.0, 0.5, thr)
    # boundary is non-strict: exactly at the threshold does not fire
    assert not event_trigger_fired(0.1591, 1.0, 0.5, thr)
    assert event_trigger_fired(-0.2, -1.0, 0.5, thr)
    # max-norm: the larger scaled tracking error sets the bound
    thr2 = EventThreshold(coeff=0.5, scale_l=1.0, scale_alpha=4.0)
    assert not event_trigger_fired(0.9, 1.0, 0.5, thr2)  # bound = 0.5*max(1, 2) = 1
    assert event_trigger_fired(1.1, 1.0, 0.5, thr2)


def test_param_validation():
    with pytest.raises(ValueError):
        TriggerParams(l_e=0.0)
    with pytest.raises(ValueError):
        TriggerParams(w1=2.0, w2=1.0)
    with pytest.raises(ValueError):
        TriggerParams(w1=0.0)
    with pytest.raises(ValueError):
        TriggerParams(l_x=-1.0)
    with pytest.raises(ValueError):
        TriggerParams(m_bound=-0.5)
    with pytest.raises(ValueError):
        EventThreshold(coeff=0.0)
    with pytest.raises(ValueError):
        EventThreshold(scale_alpha=-1.0)
