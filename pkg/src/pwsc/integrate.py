"""Adaptive integration of PWSC Lienard systems with event localization.

Wraps the Dormand-Prince 5(4) stepping kernel (compiled extension when
available, pure-Python twin otherwise) and exposes trajectories with dense
output, event records, and tube-time measurement.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _kernel_py
from .expr import evaluate_array
from .rpn import compile_expression
from .system import SystemDefinition

try:  # compiled kernel is optional; the pure-Python twin is always present
    from . import _kernel as _kernel_c
except ImportError:  # pragma: no cover - depends on build environment
    _kernel_c = None

__all__ = [
    "IntegratorConfig",
    "EventSpec",
    "EventRecord",
    "Trajectory",
    "DenseSegment",
    "IntegrationError",
    "integrate",
    "locate_event",
    "time_in_tube",
    "available_backends",
    "default_backend",
    "write_trajectory_csv",
    "write_events_csv",
]


class IntegrationError(Exception):
    """Integration could not produce a usable trajectory."""


def available_backends() -> tuple:
    return ("compiled", "python") if _kernel_c is not None else ("python",)


def default_backend() -> str:
    forced = os.environ.get("PWSC_BACKEND")
    if forced in ("python", "compiled"):
        if forced == "compiled" and _kernel_c is None:
            raise IntegrationError("PWSC_BACKEND=compiled but the extension is not built")
        return forced
    return "compiled" if _kernel_c is not None else "python"


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    h_max: float = math.inf
    t_max: float = math.inf
    max_steps: int = 2_000_000
    h_init: float = 0.0
    fixed_step: float = 0.0
    escape_radius: float = math.inf

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("rtol and atol must be positive")


@dataclass(frozen=True)
class EventSpec:
    """Scalar event function of (t, x, y) with direction filter and action.

    The parametric constructors map onto fast in-kernel forms; a custom
    ``fn`` is supported but routes the run to the pure-Python kernel.
    """

    kind: int = 3  # 0: x - p0, 1: y - p0, 2: y - F(x), 3: custom fn
    param: float = 0.0
    fn: Optional[Callable[[float, float, float], float]] = None
    direction: int = 0  # +1 rising, -1 falling, 0 both
    action: str = "record"  # or "terminate"
    name: str = ""

    def __post_init__(self):
        if self.action not in ("record", "terminate"):
            raise ValueError(f"bad action {self.action!r}")
        if self.kind == 3 and self.fn is None:
            raise ValueError("custom events need fn")

    @classmethod
    def x_crossing(cls, value=0.0, direction=0, action="record", name=""):
        return cls(kind=0, param=value, direction=direction, action=action, name=name or f"x={value}")

    @classmethod
    def y_crossing(cls, value=0.0, direction=0, action="record", name=""):
        return cls(kind=1, param=value, direction=direction, action=action, name=name or f"y={value}")

    @classmethod
    def manifold_crossing(cls, direction=0, action="record", name="y=F(x)"):
        return cls(kind=2, direction=direction, action=action, name=name)

    @classmethod
    def custom(cls, fn, direction=0, action="record", name="custom"):
        return cls(kind=3, fn=fn, direction=direction, action=action, name=name)


@dataclass(frozen=True)
class EventRecord:
    event_id: int  # -1 is the built-in splitting-line crossing
    t: float
    x: float
    y: float
    direction: int
    name: str = ""


_REASONS = {
    0: "completed",
    1: "event",
    2: "max_steps",
    3: "step_underflow",
    4: "nonfinite_state",
    5: "escape",
}


class DenseSegment:
    """One accepted step with its 4th-order interpolant."""

    __slots__ = ("_traj", "_row")

    def __init__(self, traj: "Trajectory", row: int):
        self._traj = traj
        self._row = row

    @property
    def t_lo(self) -> float:
        r = self._traj._rows[self._row]
        return self._traj.t0 + self._traj.sign * r[0]

    @property
    def t_hi(self) -> float:
        r = self._traj._rows[self._row]
        return self._traj.t0 + self._traj.sign * r[2]

    def eval(self, t):
        return self._traj.state_at(t)


class Trajectory:
    """Numerical orbit with dense output and event records.

    ``t`` is strictly increasing in forward mode and strictly decreasing in
    backward mode. Dense evaluation via :meth:`state_at` covers the full
    integrated span.
    """

    def __init__(self, sys, t, x, y, rows, events, reason, status, t0, sign, mode, backend):
        self.sys = sys
        self.t = t
        self.x = x
        self.y = y
        self._rows = rows  # (n, 13): tau0, h, tau_end, x0, y0, qx[4], qy[4]
        self.events = events
        self.reason = reason
        self.status = status
        self.t0 = t0
        self.sign = sign
        self.mode = mode
        self.backend = backend

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def state_final(self) -> tuple:
        return float(self.x[-1]), float(self.y[-1])

    @property
    def n_segments(self) -> int:
        return len(self._rows)

    def segment(self, i: int) -> DenseSegment:
        return DenseSegment(self, i)

    def segments(self):
        return [DenseSegment(self, i) for i in range(len(self._rows))]

    def state_at(self, t):
        """Dense-output states at reported times ``t`` (scalar or array)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self._rows) == 0:
            xs = np.full_like(t_arr, float(self.x[0]))
            ys = np.full_like(t_arr, float(self.y[0]))
        else:
            tau = (t_arr - self.t0) * self.sign
            ends = self._rows[:, 2]
            idx = np.searchsorted(ends, tau, side="left")
            idx = np.clip(idx, 0, len(self._rows) - 1)
            rows = self._rows[idx]
            h = rows[:, 1]
            theta = (tau - rows[:, 0]) / h
            theta = np.clip(theta, 0.0, 1.0)
            xs = rows[:, 3] + h * theta * (
                rows[:, 5] + theta * (rows[:, 6] + theta * (rows[:, 7] + theta * rows[:, 8]))
            )
            ys = rows[:, 4] + h * theta * (
                rows[:, 9] + theta * (rows[:, 10] + theta * (rows[:, 11] + theta * rows[:, 12]))
            )
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(xs[0]), float(ys[0])
        return xs, ys

    def sample(self, n: int):
        """(t, x, y) on a uniform n-point grid over the integrated span."""
        tg = np.linspace(self.t[0], self.t[-1], n)
        xs, ys = self.state_at(tg)
        return tg, xs, ys


def _event_arrays(events: Sequence[EventSpec]):
    kinds = np.array([e.kind for e in events], dtype=np.int32)
    p0 = np.array([e.param for e in events], dtype=np.float64)
    dirs = np.array([e.direction for e in events], dtype=np.int32)
    acts = np.array([1 if e.action == "terminate" else 0 for e in events], dtype=np.int32)
    fns = [e.fn for e in events]
    return kinds, p0, dirs, acts, fns


def integrate(
    sys: SystemDefinition,
    state0,
    t_span,
    config: Optional[IntegratorConfig] = None,
    events: Sequence[EventSpec] = (),
    mode: str = "forward",
    backend: Optional[str] = None,
    store: bool = True,
) -> Trajectory:
    """Integrate ``sys`` from ``state0`` over ``t_span``.

    Backward mode (or a reversed ``t_span``) integrates the negated vector
    field; reported times then decrease. The splitting line x = 0 is an
    always-armed event: steps are cut at located crossings and restarted
    exactly on the line.
    """
    cfg = config or IntegratorConfig()
    if mode not in ("forward", "backward"):
        raise ValueError(f"bad mode {mode!r}")
    x0, y0 = float(state0[0]), float(state0[1])
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise ValueError(f"state0 must be finite, got {state0!r}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    duration = t1 - t0
    sign = 1.0
    if mode == "backward":
        sign = -1.0
        duration = abs(duration)
    elif duration < 0.0:
        sign = -1.0
        mode = "backward"
        duration = -duration
    duration = min(duration, cfg.t_max)

    fm = compile_expression(sys.f_minus)
    fp = compile_expression(sys.f_plus)
    gg = compile_expression(sys.g)
    stack_need = max(fm.stack_need, fp.stack_need, gg.stack_need)

    kinds, p0s, dirs, acts, fns = _event_arrays(events)
    has_custom = any(k == 3 for k in kinds)

    chosen = backend or default_backend()
    if chosen == "compiled" and (has_custom or _kernel_c is None):
        chosen = "python"
    impl = _kernel_c if chosen == "compiled" else _kernel_py

    split_enabled = 0 if sys.smooth else 1

    (status, ts, xs, ys, rows, ev_raw, n_steps, tau_f, x_f, y_f) = impl.run_ivp(
        fm.codes, fm.args, fp.codes, fp.args, gg.codes, gg.args, stack_need,
        sys.lam, sys.eps, sign,
        x0, y0, duration,
        cfg.rtol, cfg.atol, cfg.h_max, cfg.h_init, cfg.fixed_step, cfg.max_steps,
        split_enabled, cfg.escape_radius,
        kinds, p0s, dirs, acts, fns, t0, 1 if store else 0,
    )

    t_rep = t0 + sign * np.asarray(ts, dtype=float)
    x_arr = np.asarray(xs, dtype=float)
    y_arr = np.asarray(ys, dtype=float)
    rows_arr = np.asarray(rows, dtype=float).reshape(-1, 13)

    records = []
    for idx, tau, ex, ey, direction in ev_raw:
        idx = int(idx)
        name = "split" if idx < 0 else (events[idx].name or f"event{idx}")
        records.append(EventRecord(idx, t0 + sign * float(tau), float(ex), float(ey), int(direction), name))

    reason = _REASONS[int(status)]
    if status == 3:
        reason = f"step_underflow at t={t0 + sign * tau_f}, state=({x_f}, {y_f})"
    elif status == 4:
        reason = f"nonfinite_state near t={t0 + sign * tau_f}"
    elif status == 1 and records:
        reason = f"event:{records[-1].name}"

    return Trajectory(
        sys, t_rep, x_arr, y_arr, rows_arr, records, reason, int(status), t0, sign, mode, chosen
    )


def locate_event(segment: DenseSegment, fn: Callable[[float, float, float], float]):
    """Root of ``fn(t, x(t), y(t))`` on one dense segment (Brent).

    Requires a sign change across the segment; refined to |fn| < 1e-12 or a
    t-width of 1e-14.
    """
    a, b = segment.t_lo, segment.t_hi
    if a > b:
        a, b = b, a

    def g(t):
        xx, yy = segment.eval(t)
        return fn(t, xx, yy)

    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a, segment.eval(a)
    if gb == 0.0:
        return b, segment.eval(b)
    if (ga > 0) == (gb > 0):
        raise ValueError("event function has no sign change on this segment")
    t_star = brentq(g, a, b, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    return float(t_star), segment.eval(float(t_star))


def time_in_tube(
    traj: Trajectory,
    sys: SystemDefinition,
    radius: float,
    x_band,
    branch: str = "M^m",
) -> float:
    """Total slow time spent with |y - F(x)| < radius and x inside the band.

    Measured by sampling the dense output and bisecting indicator
    crossings; returns fast time scaled by eps.
    """
    if branch != "M^m":
        raise ValueError("only the middle branch M^m is supported")
    a, b = float(x_band[0]), float(x_band[1])
    rows = traj._rows
    if len(rows) == 0:
        return 0.0

    k = 8
    theta = np.linspace(0.0, 1.0, k + 1)
    h = rows[:, 1:2]
    tau0 = rows[:, 0:1]
    tau_end = rows[:, 2:3]
    th_end = np.clip((tau_end - tau0) / h, 0.0, 1.0)
    th = theta[None, :] * th_end  # (n, k+1)
    taus = (tau0 + th * h).ravel()
    xs = (
        rows[:, 3:4]
        + h * th * (rows[:, 5:6] + th * (rows[:, 6:7] + th * (rows[:, 7:8] + th * rows[:, 8:9])))
    ).ravel()
    ys = (
        rows[:, 4:5]
        + h * th * (rows[:, 9:10] + th * (rows[:, 10:11] + th * (rows[:, 11:12] + th * rows[:, 12:13])))
    ).ravel()

    order = np.argsort(taus, kind="stable")
    taus, xs, ys = taus[order], xs[order], ys[order]

    fvals = np.where(
        xs < 0.0,
        evaluate_array(sys.f_minus, x=xs),
        evaluate_array(sys.f_plus, x=xs),
    )
    m = np.minimum(radius - np.abs(ys - fvals), np.minimum(xs - a, b - xs))

    def m_at(t_rep):
        xx, yy = traj.state_at(t_rep)
        fv = evaluate_array(sys.f_minus, x=np.array([xx]))[0] if xx < 0 else evaluate_array(
            sys.f_plus, x=np.array([xx])
        )[0]
        return min(radius - abs(yy - fv), xx - a, b - xx)

    total = 0.0
    entry = taus[0] if m[0] > 0.0 else None
    for i in range(1, len(taus)):
        if m[i - 1] > 0.0 and m[i] <= 0.0 or m[i - 1] <= 0.0 and m[i] > 0.0:
            lo_rep = traj.t0 + traj.sign * taus[i - 1]
            hi_rep = traj.t0 + traj.sign * taus[i]
            if lo_rep > hi_rep:
                lo_rep, hi_rep = hi_rep, lo_rep
            try:
                t_cross = brentq(m_at, lo_rep, hi_rep, xtol=1e-12, maxiter=100)
            except ValueError:
                t_cross = 0.5 * (lo_rep + hi_rep)
            tau_cross = (t_cross - traj.t0) * traj.sign
            if m[i] > 0.0:
                entry = tau_cross
            elif entry is not None:
                total += tau_cross - entry
                entry = None
        elif m[i] > 0.0 and entry is None:
            entry = taus[i]
    if entry is not None:
        total += taus[-1] - entry
    return total * sys.eps


def _fmt(v) -> str:
    return f"{v:.17g}"


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with header t,x,y,region; region is L for x < 0 else R."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x,y,region\n")
        for t, x, y in zip(traj.t, traj.x, traj.y):
            region = "L" if x < 0.0 else "R"
            fh.write(f"{_fmt(t)},{_fmt(x)},{_fmt(y)},{region}\n")


def write_events_csv(traj: Trajectory, path) -> None:
    """CSV with header event_id,t,x,y,direction."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("event_id,t,x,y,direction\n")
        for r in traj.events:
            fh.write(f"{r.event_id},{_fmt(r.t)},{_fmt(r.x)},{_fmt(r.y)},{r.direction}\n")
