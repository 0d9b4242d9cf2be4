"""The compiled and pure-Python kernels must produce identical output."""

import numpy as np
import pytest

from pwsc.integrate import EventSpec, IntegratorConfig, available_backends, integrate
from pwsc.system import load_fixture, make_shadow

pytestmark = pytest.mark.skipif(
    "compiled" not in available_backends(), reason="compiled kernel not built"
)


def _run(backend, sys, state0, span, cfg=None, events=(), mode="forward"):
    return integrate(sys, state0, span, cfg, events=events, mode=mode, backend=backend)


@pytest.mark.parametrize(
    "name,lam,state0,T",
    [
        ("sys_a", 0.01, (0.0, 0.5), 60.0),
        ("sys_a", -0.05, (0.4, 0.2), 40.0),
        ("sys_b", 0.02, (0.0, 0.3), 300.0),
        ("sys_c", -0.02, (0.1, 0.05), 50.0),
        ("sys_d", -0.01, (0.0, 0.6), 60.0),
    ],
)
def test_trajectories_bit_identical(name, lam, state0, T):
    sys = load_fixture(name).with_lambda(lam)
    a = _run("python", sys, state0, (0.0, T))
    b = _run("compiled", sys, state0, (0.0, T))
    assert np.array_equal(a.t, b.t)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a._rows, b._rows)
    assert len(a.events) == len(b.events)
    for ea, eb in zip(a.events, b.events):
        assert (ea.event_id, ea.t, ea.x, ea.y, ea.direction) == (
            eb.event_id,
            eb.t,
            eb.x,
            eb.y,
            eb.direction,
        )


def test_events_and_backward_identical():
    sys = load_fixture("sys_a").with_lambda(0.02)
    events = [
        EventSpec.y_crossing(0.4, direction=1, name="up"),
        EventSpec.x_crossing(0.8, action="record", name="gate"),
        EventSpec.manifold_crossing(name="manifold"),
    ]
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-13, h_max=0.7)
    a = _run("python", sys, (1.2, 0.1), (0.0, 45.0), cfg, events)
    b = _run("compiled", sys, (1.2, 0.1), (0.0, 45.0), cfg, events)
    assert np.array_equal(a.t, b.t)
    assert len(a.events) == len(b.events)
    for ea, eb in zip(a.events, b.events):
        assert (ea.event_id, ea.t, ea.x, ea.y) == (eb.event_id, eb.t, eb.x, eb.y)

    ab = _run("python", sys, (1.2, 0.1), (10.0, 0.0), mode="backward")
    bb = _run("compiled", sys, (1.2, 0.1), (10.0, 0.0), mode="backward")
    assert np.array_equal(ab.t, bb.t)
    assert np.array_equal(ab.x, bb.x)


def test_shadow_smooth_system_identical():
    sys = make_shadow(load_fixture("sys_b").with_lambda(0.01))
    a = _run("python", sys, (0.0, 0.2), (0.0, 200.0))
    b = _run("compiled", sys, (0.0, 0.2), (0.0, 200.0))
    assert np.array_equal(a.x, b.x)
    assert a.reason == b.reason
