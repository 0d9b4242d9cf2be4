"""Equilibria, corner quantities, and bifurcation classification.

Implements the two-level classification of the corner bifurcation: smooth
Hopf on either side of the splitting line when one of the alpha quantities
keeps the trace away from zero at the corner, otherwise a nonsmooth
bifurcation at lambda_0 = 0 whose character (nonsmooth Hopf, Hopf-like,
or super-explosion) is decided by the signs of beta_plus, beta_minus and
the criticality quantity Lambda. Smooth-Hopf criticality comes from the
standard planar first Lyapunov coefficient computed on third-order jets.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .expr import Expression, evaluate, evaluate_jet, evaluate_jet_env, jet_linear
from .system import F, F_prime, SystemDefinition, find_x_max, g_jet, g_value

__all__ = [
    "Equilibrium",
    "CornerQuantities",
    "BifurcationReport",
    "EquilibriumError",
    "NoEquilibriumError",
    "MultipleEquilibriaError",
    "TransversalityError",
    "NotAHopfError",
    "ClassificationError",
    "find_equilibrium",
    "equilibrium_near",
    "jacobian_eigen",
    "corner_quantities",
    "classify_corner",
    "find_hopf_locus",
    "lyapunov_first_coefficient",
    "classify_fold_hopf",
]

CORNER_TOL = 1e-10
MARGINAL_TOL = 1e-9


class EquilibriumError(Exception):
    pass


class NoEquilibriumError(EquilibriumError):
    pass


class MultipleEquilibriaError(EquilibriumError):
    def __init__(self, roots):
        super().__init__(f"{len(roots)} equilibria in window: {[float(r) for r in roots]}")
        self.count = len(roots)
        self.roots = list(roots)


class TransversalityError(EquilibriumError):
    pass


class NotAHopfError(Exception):
    pass


class ClassificationError(Exception):
    pass


# ---------------------------------------------------------------------------
# Equilibria


@dataclass(frozen=True)
class Equilibrium:
    x: float
    y: float
    lam: float
    side: str  # 'L', 'R', or 'corner'
    jacobian: Optional[tuple]  # ((a11, a12), (a21, a22)); None at the corner
    jacobian_left: Optional[tuple] = None  # populated at the corner
    jacobian_right: Optional[tuple] = None

    @property
    def eigenvalues(self):
        return jacobian_eigen(self)

    @property
    def local_type(self) -> str:
        return _local_type(self.jacobian if self.side != "corner" else self.jacobian_right)

    @property
    def stable(self) -> bool:
        """Negative real parts; at the corner both one-sided linearizations."""
        if self.side != "corner":
            return max(ev.real for ev in jacobian_eigen(self)) < 0.0
        left = max(ev.real for ev in jacobian_eigen(self, "L"))
        right = max(ev.real for ev in jacobian_eigen(self, "R"))
        return left < 0.0 and right < 0.0


def _jacobian_at(sys: SystemDefinition, x: float, y: float, lam: float, side: str):
    fp = F_prime(sys, x, side)
    gj = g_jet(sys, x, y, lam)
    return ((fp, -1.0), (sys.eps * gj.partial(1, 0), sys.eps * gj.partial(0, 1)))


def _eigen_2x2(jac):
    (a11, a12), (a21, a22) = jac
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return (complex((tr + s) / 2.0, 0.0), complex((tr - s) / 2.0, 0.0))
    s = math.sqrt(-disc)
    return (complex(tr / 2.0, s / 2.0), complex(tr / 2.0, -s / 2.0))


def _local_type(jac) -> str:
    (a11, a12), (a21, a22) = jac
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    if det < 0.0:
        return "saddle"
    if abs(tr) < CORNER_TOL:
        return "center"
    kind = "focus" if tr * tr - 4.0 * det < 0.0 else "node"
    return ("stable " if tr < 0.0 else "unstable ") + kind


def jacobian_eigen(eq: Equilibrium, side: Optional[str] = None):
    """Closed-form eigenvalues (Tr +- sqrt(Tr^2 - 4 Det))/2.

    At a corner equilibrium ``side`` selects the one-sided linearization;
    these limits equal (alpha_pm +- sqrt(beta_pm))/2.
    """
    if eq.side == "corner":
        if side not in ("L", "R"):
            raise ValueError("corner equilibrium: pass side='L' or side='R'")
        jac = eq.jacobian_left if side == "L" else eq.jacobian_right
    else:
        jac = eq.jacobian
    return _eigen_2x2(jac)


def _make_equilibrium(sys: SystemDefinition, x_eq: float, lam: float) -> Equilibrium:
    y_eq = F(sys, x_eq)
    if abs(x_eq) <= CORNER_TOL:
        return Equilibrium(
            x_eq, y_eq, lam, "corner", None,
            jacobian_left=_jacobian_at(sys, x_eq, y_eq, lam, "L"),
            jacobian_right=_jacobian_at(sys, x_eq, y_eq, lam, "R"),
        )
    side = "L" if x_eq < 0.0 else "R"
    return Equilibrium(x_eq, y_eq, lam, side, _jacobian_at(sys, x_eq, y_eq, lam, side))


def _slow_nullcline_on_manifold(sys: SystemDefinition, lam: float):
    def h(x):
        return g_value(sys, x, F(sys, x), lam)

    return h


def _scan_roots(sys: SystemDefinition, lam: float, window, n_cells: int = 1000):
    from .expr import evaluate_array

    x_lo, x_hi = window
    h = _slow_nullcline_on_manifold(sys, lam)
    xs = np.linspace(x_lo, x_hi, n_cells + 1)
    fvals = np.where(
        xs < 0.0,
        evaluate_array(sys.f_minus, x=xs),
        evaluate_array(sys.f_plus, x=xs),
    )
    vals = evaluate_array(sys.g, x=xs, y=fvals, lam=lam, eps=sys.eps)
    roots = []
    for i in range(n_cells):
        a, b = float(xs[i]), float(xs[i + 1])
        fa, fb = float(vals[i]), float(vals[i + 1])
        if not (math.isfinite(fa) and math.isfinite(fb)):
            continue
        if fa == 0.0:
            roots.append(a)
            continue
        if fb == 0.0:
            continue  # caught as the left endpoint of the next cell
        if (fa < 0.0 < fb) or (fa > 0.0 > fb):
            roots.append(float(brentq(h, a, b, xtol=1e-15, rtol=8.9e-16, maxiter=200)))
    if float(vals[-1]) == 0.0:
        roots.append(float(xs[-1]))
    # deduplicate near-coincident roots
    roots.sort()
    dedup = []
    scale = max(abs(x_lo), abs(x_hi), 1.0)
    for r in roots:
        if not dedup or abs(r - dedup[-1]) > 1e-9 * scale:
            dedup.append(r)
    return dedup


def find_equilibrium(
    sys: SystemDefinition, lam: Optional[float] = None, x_window: Optional[tuple] = None
) -> Equilibrium:
    """Unique transverse root of g(x, F(x); lambda) = 0 in the window.

    Raises :class:`NoEquilibriumError` / :class:`MultipleEquilibriaError`
    when the root is not unique and :class:`TransversalityError` when the
    slow nullcline meets the manifold tangentially.
    """
    lam = sys.lam if lam is None else float(lam)
    window = (sys.x_min, sys.x_max) if x_window is None else x_window
    roots = _scan_roots(sys, lam, window)
    if not roots:
        raise NoEquilibriumError(f"no equilibrium in x window {window} at lambda={lam}")
    if len(roots) > 1:
        raise MultipleEquilibriaError(roots)
    x_eq = roots[0]
    _check_transversality(sys, x_eq, lam)
    return _make_equilibrium(sys, x_eq, lam)


def _check_transversality(sys: SystemDefinition, x_eq: float, lam: float):
    y_eq = F(sys, x_eq)
    sides = ("L", "R") if abs(x_eq) <= CORNER_TOL else (("L",) if x_eq < 0 else ("R",))
    for side in sides:
        gj = g_jet(sys, x_eq, y_eq, lam)
        d = gj.partial(1, 0) + gj.partial(0, 1) * F_prime(sys, x_eq, side)
        if abs(d) <= 1e-8:
            raise TransversalityError(
                f"slow nullcline is tangent to the manifold at x={x_eq} (d={d})"
            )


def equilibrium_near(
    sys: SystemDefinition,
    lam: float,
    x_ref: float,
    x_window: Optional[tuple] = None,
    side: Optional[str] = None,
) -> Equilibrium:
    """Equilibrium whose x is closest to ``x_ref`` (continuation helper).

    ``side`` restricts candidates to one side of the splitting line.
    """
    window = (sys.x_min, sys.x_max) if x_window is None else x_window
    roots = _scan_roots(sys, lam, window)
    if side == "L":
        roots = [r for r in roots if r < CORNER_TOL]
    elif side == "R":
        roots = [r for r in roots if r > -CORNER_TOL]
    if not roots:
        raise NoEquilibriumError(
            f"no equilibrium near x={x_ref} (side={side}) at lambda={lam}"
        )
    x_eq = min(roots, key=lambda r: abs(r - x_ref))
    return _make_equilibrium(sys, x_eq, lam)


# ---------------------------------------------------------------------------
# Corner quantities (Theorem-2 discriminants)


@dataclass(frozen=True)
class CornerQuantities:
    alpha_minus: float
    alpha_plus: float
    beta_minus: float
    beta_plus: float
    Lambda: Optional[float]  # defined only when both betas are negative
    det_hypothesis_ok: bool
    lambda0: float

    def as_dict(self) -> dict:
        return {
            "alpha_minus": self.alpha_minus,
            "alpha_plus": self.alpha_plus,
            "beta_minus": self.beta_minus,
            "beta_plus": self.beta_plus,
            "Lambda": self.Lambda,
            "det_hypothesis_ok": self.det_hypothesis_ok,
        }


def corner_quantities(sys: SystemDefinition, lambda0: float = 0.0) -> CornerQuantities:
    """alpha_pm, beta_pm, Lambda evaluated at the origin with the given
    lambda_0, plus the determinant hypothesis (checked at lambda = 0)."""
    fm1 = F_prime(sys, 0.0, "L")
    fp1 = F_prime(sys, 0.0, "R")
    gj = g_jet(sys, 0.0, 0.0, lambda0)
    gx = gj.partial(1, 0)
    gy = gj.partial(0, 1)
    eps = sys.eps
    alpha_m = fm1 + eps * gy
    alpha_p = fp1 + eps * gy
    beta_m = (eps * gy - fm1) ** 2 - 4.0 * eps * gx
    beta_p = (eps * gy - fp1) ** 2 - 4.0 * eps * gx
    Lam = None
    if beta_p < 0.0 and beta_m < 0.0:
        Lam = alpha_p / math.sqrt(-beta_p) - (-alpha_m) / math.sqrt(-beta_m)
    gj0 = g_jet(sys, 0.0, 0.0, 0.0)
    gx0, gy0 = gj0.partial(1, 0), gj0.partial(0, 1)
    det_ok = gx0 > max(-fp1 * gy0, -fm1 * gy0)
    return CornerQuantities(alpha_m, alpha_p, beta_m, beta_p, Lam, det_ok, lambda0)


# ---------------------------------------------------------------------------
# Hopf locus


def _side_jacobian(eq: Equilibrium, side: str):
    if eq.side == "corner":
        return eq.jacobian_left if side == "L" else eq.jacobian_right
    return eq.jacobian


def find_hopf_locus(
    sys: SystemDefinition,
    branch: str,
    lambda_window: tuple,
    x_seed: float = 0.0,
    n_cells: int = 400,
) -> float:
    """Root of lambda -> Tr J(eq(lambda)) on one branch, by scan plus Brent.

    The equilibrium is continued in lambda starting from ``x_seed``
    (nearest-root continuation). Verifies |Tr| < 1e-10 and Det > 0 at the
    returned lambda.
    """
    if branch not in ("L", "R"):
        raise ValueError("branch must be 'L' or 'R'")
    lo, hi = float(lambda_window[0]), float(lambda_window[1])
    if not lo < hi:
        raise ValueError("empty lambda window")

    x_ref = {"val": x_seed}

    def trace_at(lam: float) -> float:
        eq = equilibrium_near(sys, lam, x_ref["val"], side=branch)
        x_ref["val"] = eq.x
        (a11, _), (_, a22) = _side_jacobian(eq, branch)
        return a11 + a22

    grid = np.linspace(lo, hi, n_cells + 1)
    # walk from the end nearest lambda = 0: the theorem's neighborhoods are
    # anchored at the corner, so continuation starts where the seed is valid
    if abs(hi) < abs(lo):
        grid = grid[::-1]
    vals = []
    refs = []
    for lam in grid:
        try:
            vals.append(trace_at(float(lam)))
        except EquilibriumError:
            vals.append(math.nan)
        refs.append(x_ref["val"])
    candidates = []
    for i in range(n_cells):
        a, b = float(grid[i]), float(grid[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if not (math.isfinite(fa) and math.isfinite(fb)):
            continue
        if fa == 0.0:
            candidates.append((a, refs[i]))
        elif (fa < 0.0 < fb) or (fa > 0.0 > fb):
            aa, bb = (a, b) if a < b else (b, a)
            x_ref["val"] = refs[i]  # restart the continuation at the bracket
            try:
                lam_root = float(
                    brentq(trace_at, aa, bb, xtol=1e-15, rtol=8.9e-16, maxiter=200)
                )
            except (ValueError, EquilibriumError):
                continue
            candidates.append((lam_root, x_ref["val"]))
    if math.isfinite(vals[-1]) and vals[-1] == 0.0:
        candidates.append((float(grid[-1]), refs[-1]))
    if not candidates:
        raise NotAHopfError(
            f"Tr J has no zero on branch {branch} for lambda in {lambda_window}"
        )
    lam_H, ref_H = min(candidates, key=lambda c: abs(c[0]))
    eq = equilibrium_near(sys, lam_H, ref_H, side=branch)
    (a11, a12), (a21, a22) = _side_jacobian(eq, branch)
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    if abs(tr) >= 1e-10:
        raise NotAHopfError(f"trace residual {tr} at lambda={lam_H}")
    if det <= 0.0:
        raise NotAHopfError(f"Det = {det} <= 0 at lambda={lam_H}: not a Hopf point")
    return lam_H


# ---------------------------------------------------------------------------
# First Lyapunov coefficient


def lyapunov_first_coefficient(
    sys: SystemDefinition, eq: Equilibrium, piece: Optional[str] = None
):
    """Planar first Lyapunov coefficient at a Hopf equilibrium.

    The system is brought to the canonical center form u' = -w v + f(u,v),
    v' = w u + g(u,v) by a linear change of coordinates, then

        16 l1 = f_uuu + f_uvv + g_uuv + g_vvv
                + (1/w) [f_uv (f_uu + f_vv) - g_uv (g_uu + g_vv)
                          - f_uu g_uu + f_vv g_vv]

    evaluated from third-order jets. Returns (l1, verdict) where verdict is
    'supercritical' (l1 < 0), 'subcritical' (l1 > 0), or 'degenerate'
    (|l1| < 1e-10).
    """
    side = piece or ("L" if eq.side == "L" else "R")
    piece_expr: Expression = sys.f_minus if side == "L" else sys.f_plus

    x_eq, y_eq, lam, eps = eq.x, eq.y, eq.lam, sys.eps
    jac = eq.jacobian if eq.side != "corner" else (
        eq.jacobian_left if side == "L" else eq.jacobian_right
    )
    (a11, a12), (a21, a22) = jac
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    if abs(tr) > 1e-8:
        raise NotAHopfError(f"not on the Hopf locus: Tr = {tr}")
    if det <= 0.0:
        raise NotAHopfError(f"Det = {det} <= 0")
    if a21 == 0.0:
        raise NotAHopfError("eps*g_x vanishes; canonical transformation is singular")
    w = math.sqrt(det)

    # coordinates (u, v): (x, y) = (x_eq, y_eq) + T (u, v),
    # T = [[1, a11/w], [0, a21/w]]  =>  T^-1 J T = [[0, -w], [w, 0]]
    jx = jet_linear(x_eq, 1.0, a11 / w)
    jy = jet_linear(y_eq, 0.0, a21 / w)
    rhs1 = evaluate_jet_env(piece_expr, jx, jy, lam, eps) - jy
    rhs2 = evaluate_jet_env(sys.g, jx, jy, lam, eps) * eps
    fj = rhs1 - rhs2 * (a11 / a21)
    gj = rhs2 * (w / a21)

    f_uu, f_uv, f_vv = fj.partial(2, 0), fj.partial(1, 1), fj.partial(0, 2)
    g_uu, g_uv, g_vv = gj.partial(2, 0), gj.partial(1, 1), gj.partial(0, 2)
    f_uuu, f_uvv = fj.partial(3, 0), fj.partial(1, 2)
    g_uuv, g_vvv = gj.partial(2, 1), gj.partial(0, 3)

    l1 = (
        f_uuu
        + f_uvv
        + g_uuv
        + g_vvv
        + (f_uv * (f_uu + f_vv) - g_uv * (g_uu + g_vv) - f_uu * g_uu + f_vv * g_vv) / w
    ) / 16.0

    if abs(l1) < 1e-10:
        return l1, "degenerate"
    return l1, ("supercritical" if l1 < 0.0 else "subcritical")


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class BifurcationReport:
    case: str  # 'i', 'ii', 'iii-a', 'iii-b', 'iii-c', or 'fold'
    criticality: Optional[str]
    lambda0: Optional[float]
    quantities: Optional[CornerQuantities]
    l1: Optional[float]
    marginal: bool
    hypothesis_ok: bool

    def as_dict(self) -> dict:
        q = self.quantities
        return {
            "case": self.case,
            "criticality": self.criticality,
            "lambda0": self.lambda0,
            "alpha_minus": q.alpha_minus if q else None,
            "alpha_plus": q.alpha_plus if q else None,
            "beta_minus": q.beta_minus if q else None,
            "beta_plus": q.beta_plus if q else None,
            "Lambda": q.Lambda if q else None,
            "l1": self.l1,
            "marginal": self.marginal,
            "hypothesis_ok": self.hypothesis_ok,
        }


def classify_corner(
    sys: SystemDefinition,
    lambda_window: Optional[tuple] = None,
    x_window: Optional[tuple] = None,
) -> BifurcationReport:
    """Classify the bifurcation at (or near) the corner.

    Decision tree: alpha_minus > 0 gives a smooth Hopf at lambda_0 < 0 on
    the left branch (case i); alpha_plus < 0 the mirror case (ii) on the
    right; otherwise the bifurcation is nonsmooth at lambda_0 = 0 with
    sub-cases by the signs of beta_pm and Lambda. Decisive quantities
    within 1e-9 of zero set the marginal flag.
    """
    fm1 = F_prime(sys, 0.0, "L")
    fp1 = F_prime(sys, 0.0, "R")
    if not (fm1 < 0.0 < fp1):
        raise ClassificationError(
            f"corner classification needs f_minus'(0) < 0 < f_plus'(0); "
            f"got {fm1}, {fp1}"
        )
    g00 = g_value(sys, 0.0, 0.0, 0.0)
    if abs(g00) > CORNER_TOL:
        raise ClassificationError(
            f"g(0,0;0,eps) = {g00} != 0: the equilibrium does not cross the "
            "corner at lambda = 0"
        )

    q0 = corner_quantities(sys, 0.0)
    if not q0.det_hypothesis_ok:
        raise ClassificationError(
            "determinant hypothesis g_x(0,0;0,eps) > max(-f'+ g_y, -f'- g_y) fails: "
            f"alpha/beta quantities {q0.as_dict()}"
        )

    if lambda_window is None:
        W = 1.0
        lambda_window = (-W, W)

    marginal = False
    if q0.alpha_minus > 0.0:
        marginal = q0.alpha_minus <= MARGINAL_TOL
        lam0 = find_hopf_locus(sys, "L", (lambda_window[0], -1e-14), x_seed=0.0)
        q = corner_quantities(sys, lam0)
        eq = equilibrium_near(sys, lam0, 0.0, x_window, side="L")
        l1, crit = lyapunov_first_coefficient(sys, eq, piece="L")
        if crit == "degenerate":
            marginal = True
            crit = None
        return BifurcationReport("i", crit, lam0, q, l1, marginal, True)

    if q0.alpha_plus < 0.0:
        marginal = -q0.alpha_plus <= MARGINAL_TOL
        lam0 = find_hopf_locus(sys, "R", (1e-14, lambda_window[1]), x_seed=0.0)
        q = corner_quantities(sys, lam0)
        eq = equilibrium_near(sys, lam0, 0.0, x_window, side="R")
        l1, crit = lyapunov_first_coefficient(sys, eq, piece="R")
        if crit == "degenerate":
            marginal = True
            crit = None
        return BifurcationReport("ii", crit, lam0, q, l1, marginal, True)

    # nonsmooth cases at lambda_0 = 0
    marginal = abs(q0.alpha_minus) <= MARGINAL_TOL or abs(q0.alpha_plus) <= MARGINAL_TOL
    if q0.beta_plus < 0.0:
        if q0.beta_minus < 0.0:
            marginal = marginal or abs(q0.beta_plus) <= MARGINAL_TOL
            marginal = marginal or abs(q0.beta_minus) <= MARGINAL_TOL
            marginal = marginal or abs(q0.Lambda) <= MARGINAL_TOL
            crit = "supercritical" if q0.Lambda < 0.0 else "subcritical"
            return BifurcationReport("iii-a", crit, 0.0, q0, None, marginal, True)
        marginal = marginal or abs(q0.beta_plus) <= MARGINAL_TOL or abs(q0.beta_minus) <= MARGINAL_TOL
        return BifurcationReport("iii-b", "supercritical", 0.0, q0, None, marginal, True)

    marginal = marginal or abs(q0.beta_plus) <= MARGINAL_TOL or abs(q0.beta_minus) <= MARGINAL_TOL
    crit = "subcritical" if q0.beta_minus < 0.0 else "supercritical"
    return BifurcationReport("iii-c", crit, 0.0, q0, None, marginal, True)


def classify_fold_hopf(
    sys: SystemDefinition, lambda_window: Optional[tuple] = None
) -> BifurcationReport:
    """Hopf bifurcation near the smooth fold at x_M (Theorem-1 regime)."""
    x_M = find_x_max(sys)
    y_M = evaluate(sys.f_plus, x=x_M)
    gj = g_jet(sys, x_M, y_M, sys.lam)
    if not gj.partial(1, 0) > 0.0:
        raise ClassificationError(
            f"fold-Hopf hypothesis g_x > 0 fails at the fold: g_x = {gj.partial(1, 0)}"
        )
    if lambda_window is None:
        # the equilibrium crosses the fold near lambda solving g(x_M, y_M) = 0;
        # bracket a window around it
        lam_c = _lambda_at_x(sys, x_M)
        width = max(0.5, 0.5 * abs(lam_c))
        lambda_window = (lam_c - width, lam_c + width)
    lam_H = find_hopf_locus(sys, "R", lambda_window, x_seed=x_M)
    eq = equilibrium_near(sys, lam_H, x_M, side="R")
    l1, crit = lyapunov_first_coefficient(sys, eq, piece="R")
    marginal = False
    if crit == "degenerate":
        marginal = True
        crit = None
    return BifurcationReport("fold", crit, lam_H, None, l1, marginal, True)


def _lambda_at_x(sys: SystemDefinition, x_eq: float, lam_window=(-10.0, 10.0)) -> float:
    """Solve g(x_eq, F(x_eq); lambda) = 0 for lambda by scan plus Brent."""
    y_eq = F(sys, x_eq)

    def h(lam):
        return g_value(sys, x_eq, y_eq, lam)

    lo, hi = lam_window
    grid = np.linspace(lo, hi, 2001)
    prev = h(float(grid[0]))
    for gi in grid[1:]:
        cur = h(float(gi))
        if prev == 0.0:
            return float(gi) - (float(grid[1]) - float(grid[0]))
        if (prev < 0.0 < cur) or (prev > 0.0 > cur):
            return float(brentq(h, float(gi) - (grid[1] - grid[0]), float(gi), xtol=1e-15))
        prev = cur
    raise NoEquilibriumError(f"no lambda in {lam_window} puts the equilibrium at x={x_eq}")
