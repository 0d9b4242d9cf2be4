"""Periodic orbits, canard-explosion sweeps, and shadow-system comparison.

Cycles are located as fixed points of the Poincare return map on the
upward vertical ray through the equilibrium, which every cycle of these
systems crosses once per revolution. Sweeps in lambda measure the
explosion window (10% to 90% of the plateau amplitude) and flag
super-explosions; backward-time searches find repelling cycles.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .bifurcation import (
    EquilibriumError,
    Equilibrium,
    equilibrium_near,
)
from .expr import evaluate_array, evaluate_jet
from .integrate import (
    EventSpec,
    IntegratorConfig,
    Trajectory,
    integrate,
    time_in_tube,
)
from .system import F, HypothesisError, SystemDefinition, find_x_max, make_shadow

__all__ = [
    "PeriodicOrbit",
    "SweepResult",
    "SweepSample",
    "ShadowComparison",
    "CycleSearchError",
    "NoReturnError",
    "return_map",
    "find_limit_cycle",
    "classify_cycle",
    "CycleThresholds",
    "sweep_amplitude",
    "detect_bistability",
    "shadow_compare",
    "write_sweep_csv",
    "write_shadow_csv",
]


class CycleSearchError(Exception):
    pass


class NoReturnError(CycleSearchError):
    """Trajectory never returned to the section (converged or escaped)."""


@dataclass(frozen=True)
class PeriodicOrbit:
    section_x: float
    section_y: float
    period: float
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    x_min: float
    x_max: float
    multiplier: float
    stability: str  # 'attracting' or 'repelling'
    cycle_type: Optional[str] = None
    lam: float = 0.0

    @property
    def amplitude(self) -> float:
        return self.x_max - self.x_min


@dataclass(frozen=True)
class SweepSample:
    lam: float
    found: bool
    amplitude: Optional[float]
    period: Optional[float]
    cycle_type: Optional[str]
    multiplier: Optional[float]


@dataclass(frozen=True)
class SweepResult:
    samples: tuple
    plateau_amplitude: Optional[float]
    lambda_10: Optional[float]
    lambda_90: Optional[float]
    super_explosion: bool
    onset: Optional[float]

    @property
    def window_width(self) -> Optional[float]:
        if self.lambda_10 is None or self.lambda_90 is None:
            return None
        return self.lambda_90 - self.lambda_10

    def summary_dict(self) -> dict:
        return {
            "plateau_amplitude": self.plateau_amplitude,
            "lambda_10": self.lambda_10,
            "lambda_90": self.lambda_90,
            "window_width": self.window_width,
            "super_explosion": self.super_explosion,
            "onset": self.onset,
        }


@dataclass(frozen=True)
class ShadowComparison:
    y_c: float
    t: np.ndarray
    x_true: np.ndarray
    y_true: np.ndarray
    x_shadow: np.ndarray
    y_shadow: np.ndarray
    max_violation: float
    reentry_true: Optional[float]
    reentry_shadow: Optional[float]

    @property
    def R_true(self) -> np.ndarray:
        return 0.5 * (self.x_true**2 + self.y_true**2)

    @property
    def R_shadow(self) -> np.ndarray:
        return 0.5 * (self.x_shadow**2 + self.y_shadow**2)


# ---------------------------------------------------------------------------
# Return map


def _default_horizon(sys: SystemDefinition) -> float:
    return 200.0 + 60.0 / sys.eps


def _resolve_equilibrium(sys, lam, eq: Optional[Equilibrium], x_ref: float):
    if eq is not None and eq.lam == lam:
        return eq
    return equilibrium_near(sys, lam, x_ref)


def return_map(
    sys: SystemDefinition,
    lam: float,
    y: float,
    eq: Optional[Equilibrium] = None,
    config: Optional[IntegratorConfig] = None,
    mode: str = "forward",
    full: bool = False,
):
    """First return to the upward ray {x = x_eq, y > y_eq}.

    Integrates from (x_eq, y) until the next transversal crossing of the
    section in the same direction (leftward, matching the starting
    crossing). Raises :class:`NoReturnError` when the trajectory spirals
    into the equilibrium or leaves the domain instead.
    """
    eq = _resolve_equilibrium(sys, lam, eq, 0.0)
    if not y > eq.y:
        raise ValueError(f"section requires y > y_eq = {eq.y}, got {y}")
    sys_l = sys.with_lambda(lam)
    horizon = _default_horizon(sys)
    cfg = config or IntegratorConfig()
    esc = 50.0 * max(1.0, abs(sys.x_min), abs(sys.x_max), abs(y))
    if math.isinf(cfg.escape_radius):
        cfg = replace(cfg, escape_radius=esc)

    # the upward ray is crossed leftward in forward time; the same geometric
    # crossing has reversed x-velocity under time reversal
    sec_dir = -1 if mode == "forward" else 1
    section = EventSpec.x_crossing(eq.x, direction=sec_dir, action="terminate", name="section")
    state = (eq.x, y)
    t0 = 0.0
    remaining = horizon
    for _ in range(64):  # guard-rejected crossings restart from the section
        tr = integrate(
            sys_l, state, (t0, t0 + remaining), cfg, events=[section], mode=mode, store=full
        )
        if tr.status == 1:
            xc, yc = tr.state_final
            xdot = -yc + F(sys_l, xc)
            if yc > eq.y and abs(xdot) > 1e-10:
                if full:
                    return yc, tr
                return yc
            # guard failed: resume just past the crossing
            t_used = abs(tr.t_final - t0)
            remaining -= t_used
            if remaining <= 0.0:
                break
            state = (xc, yc)
            t0 = tr.t_final
            continue
        if tr.status == 0:
            raise NoReturnError(
                f"no return to the section within t_max = {horizon} (lambda={lam})"
            )
        raise NoReturnError(f"integration ended early: {tr.reason} (lambda={lam})")
    raise NoReturnError(f"no transversal return within t_max = {horizon} (lambda={lam})")


# ---------------------------------------------------------------------------
# Limit cycles


def _scan_bracket(sys, lam, eq, lo_off, hi_off, n_scan, config, mode):
    """Log-spaced scan of phi(y) = P(y) - y; returns the first sign-change
    bracket (y1, y2, phi1, phi2) or None."""
    offs = np.geomspace(lo_off, hi_off, n_scan)
    prev = None
    for off in offs:
        yv = eq.y + off
        try:
            phi = return_map(sys, lam, yv, eq=eq, config=config, mode=mode) - yv
        except (NoReturnError, CycleSearchError):
            prev = None
            continue
        if prev is not None:
            y_prev, phi_prev = prev
            if phi_prev == 0.0:
                return (y_prev, y_prev, phi_prev, phi_prev)
            if (phi_prev < 0.0 < phi) or (phi_prev > 0.0 > phi):
                return (y_prev, yv, phi_prev, phi)
        prev = (yv, phi)
    return None


def find_limit_cycle(
    sys: SystemDefinition,
    lam: float,
    direction: str = "forward",
    bracket: Optional[tuple] = None,
    eq: Optional[Equilibrium] = None,
    config: Optional[IntegratorConfig] = None,
    n_scan: int = 24,
) -> Optional[PeriodicOrbit]:
    """Fixed point of the return map, or None when no sign change exists.

    ``direction='backward'`` finds repelling cycles (attracting in reversed
    time). ``bracket`` is a (y_lo, y_hi) section-height range; the default
    spans from just above the equilibrium to well past the manifold range.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"bad direction {direction!r}")
    mode = "forward" if direction == "forward" else "backward"
    try:
        eq = _resolve_equilibrium(sys, lam, eq, 0.0)
    except EquilibriumError as exc:
        raise CycleSearchError(f"no section equilibrium: {exc}") from exc

    if bracket is None:
        try:
            x_M = find_x_max(sys)
            span = max(1.0, 2.0 * abs(F(sys, x_M) - eq.y))
        except HypothesisError:
            span = 2.0
        lo_off, hi_off = 1e-7, span
    else:
        lo_off = max(bracket[0] - eq.y, 1e-12)
        hi_off = bracket[1] - eq.y
        if hi_off <= lo_off:
            return None

    found = _scan_bracket(sys, lam, eq, lo_off, hi_off, n_scan, config, mode)
    if found is None:
        return None
    y1, y2, phi1, phi2 = found

    def phi(yv):
        return return_map(sys, lam, yv, eq=eq, config=config, mode=mode) - yv

    if y1 == y2:
        y_star = y1
    else:
        try:
            y_star = brentq(phi, y1, y2, xtol=1e-13, rtol=8.9e-16, maxiter=200)
        except (ValueError, NoReturnError):
            return None

    try:
        y_back, orbit_traj = return_map(sys, lam, float(y_star), eq=eq, config=config, mode=mode, full=True)
    except NoReturnError:
        return None
    residual = abs(y_back - y_star)
    if residual > 1e-7:
        return None

    # multiplier by one-sided finite difference away from the equilibrium
    delta = max(1e-8, 1e-6 * (y_star - eq.y))
    try:
        m = (return_map(sys, lam, float(y_star + delta), eq=eq, config=config, mode=mode) - y_back) / delta
    except NoReturnError:
        m = 0.0

    tg, xg, yg = orbit_traj.sample(max(512, 4 * orbit_traj.n_segments))
    x_min, x_max = float(np.min(xg)), float(np.max(xg))
    if direction == "forward":
        stability = "attracting" if abs(m) < 1.0 else "repelling"
        multiplier = m
    else:
        # attracting in reversed time means repelling forward
        stability = "repelling" if abs(m) < 1.0 else "attracting"
        multiplier = math.inf if m == 0.0 else 1.0 / m
    period = abs(orbit_traj.t_final - orbit_traj.t[0])
    orbit = PeriodicOrbit(
        section_x=eq.x,
        section_y=float(y_star),
        period=float(period),
        t=tg,
        x=xg,
        y=yg,
        x_min=x_min,
        x_max=x_max,
        multiplier=float(multiplier),
        stability=stability,
        lam=lam,
    )
    return replace(orbit, cycle_type=classify_cycle(orbit, sys, traj=orbit_traj))


# ---------------------------------------------------------------------------
# Cycle taxonomy


@dataclass(frozen=True)
class CycleThresholds:
    """Tunable constants of the cycle taxonomy.

    The small-cycle cutoff and head cutoff follow the corner geometry
    (fractions of x_M). The tube radius is 2*eps: slow manifolds sit at
    O(eps * g / F') distance from the critical manifold, so canard
    segments track inside an O(eps) tube while relaxation jumps and fold
    overshoots stay outside it. An O(sqrt(eps)) radius is the fold-layer
    width instead and swallows whole relaxation orbits at desk-scale eps.
    """

    small_cycle_fraction: float = 0.1
    head_fraction: float = 0.05
    tube_radius_scale: float = 2.0
    tracking_slow_time: float = 0.1
    band_fraction: tuple = (0.05, 0.95)


def _tube_radius(sys: SystemDefinition, x_M: float, thresholds: CycleThresholds) -> float:
    return thresholds.tube_radius_scale * sys.eps


def classify_cycle(
    orbit: PeriodicOrbit,
    sys: SystemDefinition,
    thresholds: CycleThresholds = CycleThresholds(),
    traj: Optional[Trajectory] = None,
) -> str:
    """small_cycle, canard_no_head, canard_with_head, or relaxation.

    Small cycles are below a fraction of x_M in amplitude; canards track
    the repelling middle branch for more than the tracking time (measured
    in slow units inside the tube); heads are excursions past the
    splitting line.
    """
    x_M = find_x_max(sys)
    if orbit.amplitude < thresholds.small_cycle_fraction * x_M:
        return "small_cycle"
    band = (thresholds.band_fraction[0] * x_M, thresholds.band_fraction[1] * x_M)
    radius = _tube_radius(sys, x_M, thresholds)
    if traj is None:
        traj = integrate(
            sys.with_lambda(orbit.lam),
            (orbit.section_x, orbit.section_y),
            (0.0, orbit.period),
        )
    tracking = time_in_tube(traj, sys, radius=radius, x_band=band)
    if tracking > thresholds.tracking_slow_time:
        if orbit.x_min >= -thresholds.head_fraction * x_M:
            return "canard_no_head"
        return "canard_with_head"
    return "relaxation"


# ---------------------------------------------------------------------------
# Amplitude sweep


def _threads() -> int:
    raw = os.environ.get("PWSC_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n else 1


def _sample_at(sys, lam, bracket, config) -> SweepSample:
    try:
        orbit = find_limit_cycle(sys, lam, bracket=bracket, config=config)
    except (CycleSearchError, EquilibriumError):
        orbit = None
    if orbit is None:
        return SweepSample(lam, False, None, None, None, None)
    return SweepSample(
        lam, True, orbit.amplitude, orbit.period, orbit.cycle_type, orbit.multiplier
    )


def sweep_amplitude(
    sys: SystemDefinition,
    lambda_range: tuple,
    n_steps: int = 30,
    refine: bool = False,
    config: Optional[IntegratorConfig] = None,
    super_explosion_resolution: float = 1e-6,
    window_rel_tol: float = 1e-3,
) -> SweepResult:
    """Cycle amplitudes across a lambda range with explosion-window
    measurement.

    The grid pass may run on PWSC_THREADS workers; failed points are
    retried sequentially with brackets warm-started from their neighbors.
    With ``refine``, the 10%/90% plateau crossings are bisected until the
    window is resolved to ``window_rel_tol`` of its own width, and the
    cycle onset to ``super_explosion_resolution`` in lambda.
    """
    lam_lo, lam_hi = float(lambda_range[0]), float(lambda_range[1])
    if not lam_lo < lam_hi:
        raise ValueError("lambda_range must satisfy lambda_min < lambda_max")
    grid = list(np.linspace(lam_lo, lam_hi, n_steps))

    samples: dict = {}
    n_workers = min(_threads(), len(grid))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for lam, res in zip(grid, pool.map(lambda l: _sample_at(sys, l, None, config), grid)):
                samples[lam] = res
    else:
        for lam in grid:
            samples[lam] = _sample_at(sys, lam, None, config)

    # warm-started retries: re-scan failures with a bracket around the
    # nearest found neighbor's section height
    found_lams = [l for l in grid if samples[l].found]
    for lam in grid:
        if samples[lam].found or not found_lams:
            continue
        nearest = min(found_lams, key=lambda l: abs(l - lam))
        amp = samples[nearest].amplitude or 1.0
        try:
            eq = equilibrium_near(sys, lam, 0.0)
        except EquilibriumError:
            continue
        bracket = (eq.y + 1e-9, eq.y + 3.0 * max(amp, 0.1))
        retry = _sample_at(sys, lam, bracket, config)
        if retry.found:
            samples[lam] = retry

    def add_sample(lam) -> SweepSample:
        if lam not in samples:
            samples[lam] = _sample_at(sys, lam, None, config)
        return samples[lam]

    # plateau: median amplitude over the top decile of lambdas with cycles
    found = sorted(l for l in samples if samples[l].found)
    plateau = None
    if found:
        k = max(1, len(found) // 10)
        top = found[-k:]
        plateau = float(np.median([samples[l].amplitude for l in top]))

    lambda_10 = lambda_90 = None
    onset = None
    super_explosion = False

    if plateau:
        def crossing(level, lo, hi, tol):
            """Bisect the first lambda where amplitude >= level."""
            flo = add_sample(lo)
            fhi = add_sample(hi)
            if not fhi.found or (fhi.amplitude or 0.0) < level:
                return None
            for _ in range(80):
                if hi - lo <= tol:
                    break
                mid = 0.5 * (lo + hi)
                s = add_sample(mid)
                if s.found and (s.amplitude or 0.0) >= level:
                    hi = mid
                else:
                    lo = mid
            return hi

        def first_with(pred):
            for l in sorted(samples):
                s = samples[l]
                if pred(s):
                    return l
            return None

        lam_first_10 = first_with(lambda s: s.found and s.amplitude >= 0.1 * plateau)
        lam_first_90 = first_with(lambda s: s.found and s.amplitude >= 0.9 * plateau)
        below_10 = [
            l for l in sorted(samples)
            if l < (lam_first_10 if lam_first_10 is not None else lam_hi)
        ]
        lo_10 = below_10[-1] if below_10 else lam_lo

        if lam_first_10 is not None:
            if refine:
                tol0 = max((lam_first_10 - lo_10) * 1e-3, 1e-14)
                lambda_10 = crossing(0.1 * plateau, lo_10, lam_first_10, tol0)
                if lam_first_90 is not None:
                    lo_90 = max(lambda_10 or lo_10, lo_10)
                    lambda_90 = crossing(0.9 * plateau, lo_90, lam_first_90, tol0)
                    # tighten both to the window's own scale
                    if lambda_10 is not None and lambda_90 is not None:
                        width = max(lambda_90 - lambda_10, 1e-13)
                        tol = max(width * window_rel_tol, 1e-14)
                        lambda_10 = crossing(0.1 * plateau, lambda_10 - max(tol0, tol), lambda_10, tol) or lambda_10
                        lambda_90 = crossing(0.9 * plateau, lambda_90 - max(tol0, tol), lambda_90, tol) or lambda_90
            else:
                lambda_10 = lam_first_10
                lambda_90 = lam_first_90

        # taxonomy scan: the canard ladder between the last small cycle and
        # the plateau is exponentially compressed in lambda, so sample it
        # explicitly rather than relying on bisection spillover
        if refine and lambda_90 is not None:
            smalls = [
                l for l in sorted(samples)
                if samples[l].found and samples[l].cycle_type == "small_cycle"
            ]
            scan_lo = smalls[-1] if smalls else (onset if onset is not None else lam_lo)
            if scan_lo < lambda_90:
                for l in np.linspace(scan_lo, lambda_90, 14)[1:-1]:
                    add_sample(float(l))

        # onset: bisect between the last no-cycle lambda and the first cycle
        first_found = min(l for l in samples if samples[l].found)
        below = [l for l in sorted(samples) if l < first_found and not samples[l].found]
        if below:
            lo, hi = below[-1], first_found
            for _ in range(80):
                if hi - lo <= super_explosion_resolution:
                    break
                mid = 0.5 * (lo + hi)
                s = add_sample(mid)
                if s.found:
                    hi = mid
                else:
                    lo = mid
            onset = hi
            first_amp = samples[onset].amplitude if samples[onset].found else None
            if first_amp is not None and first_amp >= 0.5 * plateau:
                super_explosion = True
        else:
            onset = first_found

    ordered = tuple(samples[l] for l in sorted(samples))
    return SweepResult(ordered, plateau, lambda_10, lambda_90, super_explosion, onset)


# ---------------------------------------------------------------------------
# Bistability


def detect_bistability(
    sys: SystemDefinition, lam: float, config: Optional[IntegratorConfig] = None
) -> dict:
    """Coexistence check: equilibrium stability, an attracting cycle sought
    from far outside, and a repelling cycle sought in backward time between
    the equilibrium and the attracting cycle."""
    eq = equilibrium_near(sys, lam, 0.0)
    stable_eq = eq.stable

    try:
        x_M = find_x_max(sys)
        far = max(2.0 * abs(F(sys, x_M) - eq.y), 1.0)
    except HypothesisError:
        far = 2.0
    attracting = None
    try:
        attracting = find_limit_cycle(
            sys, lam, bracket=(eq.y + 0.2 * far, eq.y + 3.0 * far), eq=eq, config=config
        )
        if attracting is not None and attracting.stability != "attracting":
            attracting = None
    except CycleSearchError:
        attracting = None

    repelling = None
    hi = attracting.section_y - 1e-6 if attracting else eq.y + far
    try:
        repelling = find_limit_cycle(
            sys,
            lam,
            direction="backward",
            bracket=(eq.y + 1e-7, hi),
            eq=eq,
            config=config,
        )
        if repelling is not None and repelling.stability != "repelling":
            repelling = None
    except CycleSearchError:
        repelling = None

    return {
        "stable_eq": bool(stable_eq),
        "attracting_cycle": attracting is not None,
        "repelling_cycle": repelling is not None,
        "attracting_orbit": attracting,
        "repelling_orbit": repelling,
        "equilibrium": eq,
    }


# ---------------------------------------------------------------------------
# Shadow comparison


def shadow_compare(
    sys: SystemDefinition,
    y_c: float,
    lam: Optional[float] = None,
    left: Optional[object] = None,
    n_grid: int = 2001,
    config: Optional[IntegratorConfig] = None,
) -> ShadowComparison:
    """Radial comparison of the true system against its shadow.

    Both systems start at (0, y_c); while both remain in the closed left
    half-plane their radial distances R = (x^2 + y^2)/2 are recorded on a
    shared time grid. ``left`` swaps in a corollary-style replacement for
    the shadow's left piece.
    """
    if not y_c > 0.0:
        raise ValueError("entry height y_c must be positive (field points left)")
    lam = sys.lam if lam is None else float(lam)
    sys_l = sys.with_lambda(lam)
    shadow = make_shadow(sys_l, left=left)

    cfg = config or IntegratorConfig()
    if math.isinf(cfg.escape_radius):
        cfg = replace(cfg, escape_radius=1e3 * max(1.0, abs(y_c), abs(sys.x_min)))
    horizon = _default_horizon(sys)

    def left_excursion(s):
        # smooth systems have no built-in splitting event; arm one
        events = (
            [EventSpec.x_crossing(0.0, direction=1, action="terminate", name="reentry")]
            if s.smooth
            else []
        )
        tr = integrate(s, (0.0, y_c), (0.0, horizon), cfg, events=events)
        t_exit = reentry = None
        for ev in tr.events:
            if ev.t > 0.0 and ev.direction == 1:
                t_exit, reentry = ev.t, ev.y
                break
        if t_exit is None:
            t_exit = tr.t_final
        return tr, t_exit, reentry

    tr_true, t_exit_true, re_true = left_excursion(sys_l)
    tr_sh, t_exit_sh, re_sh = left_excursion(shadow)
    # the comparison bounds the true orbit by the shadow's radial envelope:
    # the trajectories desynchronize in time on slow segments, so the
    # pointwise-in-time difference is not the bounded quantity (see ledger)

    t_end = min(t_exit_true, t_exit_sh, abs(tr_true.t_final), abs(tr_sh.t_final))
    tg = np.linspace(0.0, t_end, n_grid)

    # lemma hypothesis, checked on the x range the trajectories actually
    # visit while in the left half-plane
    x_reach = min(float(np.min(tr_true.state_at(tg)[0])), float(np.min(tr_sh.state_at(tg)[0])))
    if x_reach < 0.0:
        xs = np.linspace(x_reach, x_reach / 1e6, 1000)
        f_true = evaluate_array(sys_l.f_minus, x=xs)
        f_sh = evaluate_array(shadow.f_minus, x=xs)
        if not np.all(f_sh < f_true):
            raise HypothesisError(
                "ordering hypothesis fails: the shadow's left piece is not "
                f"below f_minus on the visited range [{x_reach}, 0)"
            )
    xt, yt = tr_true.state_at(tg)
    xs_, ys_ = tr_sh.state_at(tg)
    R_true = 0.5 * (xt**2 + yt**2)
    R_shadow = 0.5 * (xs_**2 + ys_**2)
    max_violation = float(np.max(R_true - np.maximum.accumulate(R_shadow)))
    return ShadowComparison(
        y_c=y_c,
        t=tg,
        x_true=xt,
        y_true=yt,
        x_shadow=xs_,
        y_shadow=ys_,
        max_violation=max_violation,
        reentry_true=re_true,
        reentry_shadow=re_sh,
    )


# ---------------------------------------------------------------------------
# CSV emission


def _fmt(v) -> str:
    return "" if v is None else f"{v:.17g}"


def write_sweep_csv(result: SweepResult, path) -> None:
    """CSV with header lambda,found,amplitude,period,cycle_type,multiplier."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("lambda,found,amplitude,period,cycle_type,multiplier\n")
        for s in result.samples:
            fh.write(
                f"{_fmt(s.lam)},{'true' if s.found else 'false'},{_fmt(s.amplitude)},"
                f"{_fmt(s.period)},{s.cycle_type or ''},{_fmt(s.multiplier)}\n"
            )


def write_shadow_csv(cmp: ShadowComparison, path) -> None:
    """CSV with header t,x_true,y_true,R_true,x_shadow,y_shadow,R_shadow."""
    Rt, Rs = cmp.R_true, cmp.R_shadow
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x_true,y_true,R_true,x_shadow,y_shadow,R_shadow\n")
        for i in range(len(cmp.t)):
            fh.write(
                f"{_fmt(cmp.t[i])},{_fmt(cmp.x_true[i])},{_fmt(cmp.y_true[i])},{_fmt(Rt[i])},"
                f"{_fmt(cmp.x_shadow[i])},{_fmt(cmp.y_shadow[i])},{_fmt(Rs[i])}\n"
            )
