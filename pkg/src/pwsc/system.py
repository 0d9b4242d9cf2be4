"""Planar piecewise-smooth continuous Lienard systems.

The model is

    x' = -y + F(x),   F(x) = f_minus(x) for x < 0, f_plus(x) for x >= 0
    y' = eps * g(x, y; lambda, eps)

with a corner of the critical manifold y = F(x) at the origin and a smooth
fold of f_plus at some x_M > 0.
"""

from __future__ import annotations

import configparser
import importlib.resources
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .expr import (
    Expression,
    EvalDomainError,
    ExprError,
    evaluate,
    evaluate_jet,
    free_variables,
    parse_expression,
    to_source,
)

__all__ = [
    "SystemDefinition",
    "ValidationReport",
    "HypothesisCheck",
    "CriticalManifold",
    "ConfigError",
    "HypothesisError",
    "XMaxNotFoundError",
    "make_system",
    "F",
    "F_prime",
    "make_shadow",
    "find_x_max",
    "validate",
    "critical_manifold",
    "load_system",
    "loads_system",
    "dump_system",
    "fixture_names",
    "fixture_path",
    "load_fixture",
]

ZERO_TOL = 1e-12
DERIV_TOL = 1e-12


class ConfigError(Exception):
    """Bad system definition (file syntax, missing keys, invalid values)."""


class HypothesisError(Exception):
    """A standing hypothesis of the model fails."""


class XMaxNotFoundError(HypothesisError):
    """f_plus' has no descending zero in the search window."""


@dataclass(frozen=True)
class SystemDefinition:
    """A PWSC Lienard system; immutable after construction.

    ``f_minus`` and ``f_plus`` are expressions in ``x`` only; ``g`` may use
    ``x``, ``y``, ``lambda``, ``eps``. ``lam`` is the bifurcation parameter;
    use :func:`dataclasses.replace` to re-parameterize.
    """

    f_minus: Expression
    f_plus: Expression
    g: Expression
    eps: float
    lam: float = 0.0
    x_min: float = -10.0
    x_max: float = 10.0
    name: str = ""

    def __post_init__(self):
        if not (self.eps > 0.0) or not math.isfinite(self.eps):
            raise ConfigError(f"eps must be a positive real, got {self.eps}")
        if not math.isfinite(self.lam):
            raise ConfigError(f"lambda must be finite, got {self.lam}")
        if not self.x_min < 0.0 < self.x_max:
            raise ConfigError("domain must satisfy x_min < 0 < x_max")
        for label, e in (("f_minus", self.f_minus), ("f_plus", self.f_plus)):
            extra = free_variables(e) - {"x"}
            if extra:
                raise ConfigError(f"{label} may only reference x, found {sorted(extra)}")

    @property
    def smooth(self) -> bool:
        """True when both pieces are the same expression (shadow systems)."""
        return self.f_minus == self.f_plus

    def with_lambda(self, lam: float) -> "SystemDefinition":
        return replace(self, lam=lam)


def _parse(expr_or_src) -> Expression:
    if isinstance(expr_or_src, str):
        return parse_expression(expr_or_src)
    return expr_or_src


def make_system(f_minus, f_plus, g, eps, lam=0.0, x_min=-10.0, x_max=10.0, name="") -> SystemDefinition:
    """Convenience constructor accepting expression source strings."""
    return SystemDefinition(
        _parse(f_minus), _parse(f_plus), _parse(g), float(eps), float(lam),
        float(x_min), float(x_max), name,
    )


# ---------------------------------------------------------------------------
# Pointwise pieces


def F(sys: SystemDefinition, x: float) -> float:
    """The piecewise fast nullcline: f_minus for x < 0, f_plus for x >= 0."""
    piece = sys.f_minus if x < 0.0 else sys.f_plus
    return evaluate(piece, x=x)


def F_prime(sys: SystemDefinition, x: float, side: Optional[str] = None) -> float:
    """One-sided derivative of F. ``side`` ('L'/'R') picks the piece at x=0."""
    if side == "L" or (side is None and x < 0.0):
        piece = sys.f_minus
    else:
        piece = sys.f_plus
    return evaluate_jet(piece, x=x).partial(1)


def g_value(sys: SystemDefinition, x: float, y: float, lam: Optional[float] = None) -> float:
    lam = sys.lam if lam is None else lam
    return evaluate(sys.g, x=x, y=y, lam=lam, eps=sys.eps)


def g_jet(sys: SystemDefinition, x: float, y: float, lam: Optional[float] = None):
    lam = sys.lam if lam is None else lam
    return evaluate_jet(sys.g, x=x, y=y, lam=lam, eps=sys.eps)


# ---------------------------------------------------------------------------
# Shadow system


def make_shadow(sys: SystemDefinition, left: Optional[Expression | str] = None) -> SystemDefinition:
    """Extend ``f_plus`` across the splitting line (the shadow system).

    With ``left`` given, that expression replaces the left piece instead,
    which is the corollary-style comparison system; it must vanish at 0.
    """
    if left is None and sys.smooth:
        return sys
    left_expr = sys.f_plus if left is None else _parse(left)
    if left is not None:
        v0 = evaluate(left_expr, x=0.0)
        if abs(v0) > ZERO_TOL:
            raise HypothesisError(f"replacement left piece must vanish at 0, got {v0}")
    name = f"{sys.name}~shadow" if sys.name and left is None else sys.name
    return replace(sys, f_minus=left_expr, name=name)


# ---------------------------------------------------------------------------
# Fold location


def find_x_max(sys: SystemDefinition, window: Optional[tuple] = None) -> float:
    """Locate the interior maximum of f_plus: the first descending zero of
    f_plus' in (0, x_hi], refined until |f_plus'(x_M)| < 1e-12."""
    x_hi = min(sys.x_max, 10.0) if window is None else window[1]
    x_lo = 0.0 if window is None else max(0.0, window[0])

    def d1(x):
        return evaluate_jet(sys.f_plus, x=x).partial(1)

    n = 1000
    xs = np.linspace(x_lo, x_hi, n + 1)
    prev_x, prev_v = None, None
    for xi in xs[1:]:
        v = d1(float(xi))
        if prev_x is not None and prev_v > 0.0 and v <= 0.0:
            root = brentq(d1, prev_x, float(xi), xtol=1e-15, rtol=8.9e-16, maxiter=200)
            if abs(d1(root)) >= DERIV_TOL:
                # polish with a couple of Newton steps on the jet
                for _ in range(5):
                    j = evaluate_jet(sys.f_plus, x=root)
                    if j.partial(2) == 0.0:
                        break
                    root -= j.partial(1) / j.partial(2)
            j = evaluate_jet(sys.f_plus, x=root)
            if abs(j.partial(1)) < DERIV_TOL and j.partial(2) < 0.0:
                return float(root)
        if prev_x is None or v != 0.0:
            prev_x, prev_v = float(xi), v
    raise XMaxNotFoundError(
        f"f_plus has no interior maximum with f_plus' changing sign in ({x_lo}, {x_hi}]"
    )


# ---------------------------------------------------------------------------
# Critical manifold


@dataclass(frozen=True)
class CriticalManifold:
    """Branches of y = F(x): M^l (x<0), M^m (0<x<x_M), M^r (x>x_M)."""

    sys: SystemDefinition
    x_M: float

    def value(self, x: float) -> float:
        return F(self.sys, x)

    def branch(self, x: float) -> str:
        if x < 0.0:
            return "M^l"
        return "M^m" if x < self.x_M else "M^r"

    def attracting(self, branch: str) -> bool:
        return branch in ("M^l", "M^r")


def critical_manifold(sys: SystemDefinition, n_samples: int = 1000) -> CriticalManifold:
    """Build the manifold and verify sampled branch stability
    (F' < 0 on M^l and M^r, F' > 0 on M^m)."""
    x_M = find_x_max(sys)
    for xs, sign_wanted, label in (
        (np.linspace(sys.x_min, -1e-9, n_samples), -1.0, "M^l"),
        (np.linspace(1e-9, x_M - 1e-9, n_samples), 1.0, "M^m"),
        (np.linspace(x_M + 1e-9, sys.x_max, n_samples), -1.0, "M^r"),
    ):
        for xi in xs:
            d = F_prime(sys, float(xi))
            if d * sign_wanted < 0.0:
                raise HypothesisError(
                    f"branch {label} has wrong fast-subsystem stability: F'({xi}) = {d}"
                )
    return CriticalManifold(sys, x_M)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    mandatory: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    f_minus_prime0: float
    f_plus_prime0: float
    x_M: Optional[float]
    F_at_x_M: Optional[float]
    shadow_ordering_ok: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = all(c.passed for c in self.checks if c.mandatory)
        object.__setattr__(self, "passed", ok)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "f_minus_prime_at_0": self.f_minus_prime0,
            "f_plus_prime_at_0": self.f_plus_prime0,
            "x_M": self.x_M,
            "F_at_x_M": self.F_at_x_M,
            "shadow_ordering_ok": self.shadow_ordering_ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "mandatory": c.mandatory, "detail": c.detail}
                for c in self.checks
            ],
        }


def validate(sys: SystemDefinition, x_window: Optional[tuple] = None) -> ValidationReport:
    """Check the standing hypotheses of the model on ``sys``.

    Mandatory: f_minus(0) = f_plus(0) = 0, f_minus'(0) <= 0 <= f_plus'(0)
    with at least one strict, and an interior maximum of f_plus.  The
    shadow ordering f_plus < f_minus on x < 0 (the comparison-lemma
    hypothesis) is reported but not mandatory.
    """
    x_lo = sys.x_min if x_window is None else x_window[0]
    x_hi = sys.x_max if x_window is None else x_window[1]
    if not x_lo < 0.0 < x_hi:
        raise ValueError("x_window must satisfy x_lo < 0 < x_hi")

    checks = []
    fm0 = evaluate(sys.f_minus, x=0.0)
    fp0 = evaluate(sys.f_plus, x=0.0)
    checks.append(
        HypothesisCheck("f_minus(0) = 0", abs(fm0) <= ZERO_TOL, True, f"f_minus(0) = {fm0}")
    )
    checks.append(
        HypothesisCheck("f_plus(0) = 0", abs(fp0) <= ZERO_TOL, True, f"f_plus(0) = {fp0}")
    )

    dm0 = evaluate_jet(sys.f_minus, x=0.0).partial(1)
    dp0 = evaluate_jet(sys.f_plus, x=0.0).partial(1)
    if sys.smooth:
        # shadow/smooth systems have no corner; skip the sign conditions
        checks.append(HypothesisCheck("corner condition", True, True, "smooth system"))
    else:
        checks.append(
            HypothesisCheck(
                "f_minus'(0) <= 0", dm0 <= ZERO_TOL, True, f"f_minus'(0) = {dm0}"
            )
        )
        checks.append(
            HypothesisCheck(
                "f_plus'(0) >= 0", dp0 >= -ZERO_TOL, True, f"f_plus'(0) = {dp0}"
            )
        )
        strict = dm0 < -ZERO_TOL or dp0 > ZERO_TOL
        checks.append(
            HypothesisCheck(
                "corner strictness", strict, True,
                "at least one of f_minus'(0) < 0, f_plus'(0) > 0 must be strict",
            )
        )

    x_M = None
    F_at = None
    try:
        x_M = find_x_max(sys, (0.0, x_hi))
        F_at = evaluate(sys.f_plus, x=x_M)
        checks.append(
            HypothesisCheck("interior maximum of f_plus", True, True, f"x_M = {x_M}")
        )
    except (HypothesisError, ExprError) as exc:
        checks.append(HypothesisCheck("interior maximum of f_plus", False, True, str(exc)))

    ordering_ok = True
    detail = ""
    try:
        xs = np.linspace(x_lo, -abs(x_lo) / 1e6, 1000)
        for xi in xs:
            fp = evaluate(sys.f_plus, x=float(xi))
            fm = evaluate(sys.f_minus, x=float(xi))
            if not fp < fm:
                ordering_ok = False
                detail = f"f_plus({xi}) = {fp} >= f_minus({xi}) = {fm}"
                break
    except EvalDomainError as exc:
        ordering_ok = False
        detail = str(exc)
    checks.append(
        HypothesisCheck("shadow ordering f_plus < f_minus on x < 0", ordering_ok, False, detail)
    )

    return ValidationReport(tuple(checks), dm0, dp0, x_M, F_at, ordering_ok)


# ---------------------------------------------------------------------------
# INI configuration files


_REQUIRED = {"functions": ("f_minus", "f_plus", "g"), "parameters": ("eps", "lambda")}
_OPTIONAL = {"domain": ("x_min", "x_max")}


def _unquote(v: str) -> str:
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def loads_system(text: str, name: str = "") -> SystemDefinition:
    """Parse an INI-style system definition (see fixtures for the format)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad INI syntax: {exc}") from exc

    for section, keys in _REQUIRED.items():
        if not cp.has_section(section):
            raise ConfigError(f"missing [{section}] section")
        for key in keys:
            if not cp.has_option(section, key):
                raise ConfigError(f"missing {key} in [{section}]")

    known = {**_REQUIRED, **_OPTIONAL}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp.options(section):
            if key not in known[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    def num(section, key, default=None):
        if not cp.has_option(section, key):
            return default
        raw = _unquote(cp.get(section, key))
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key} is not a number: {raw!r}") from exc

    try:
        return make_system(
            _unquote(cp.get("functions", "f_minus")),
            _unquote(cp.get("functions", "f_plus")),
            _unquote(cp.get("functions", "g")),
            eps=num("parameters", "eps"),
            lam=num("parameters", "lambda"),
            x_min=num("domain", "x_min", -10.0),
            x_max=num("domain", "x_max", 10.0),
            name=name,
        )
    except ExprError as exc:
        raise ConfigError(f"bad expression: {exc}") from exc


def load_system(path) -> SystemDefinition:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    import os

    return loads_system(text, name=os.path.splitext(os.path.basename(str(path)))[0])


def dump_system(sys: SystemDefinition) -> str:
    lines = [
        "[functions]",
        f'f_minus = "{to_source(sys.f_minus)}"',
        f'f_plus = "{to_source(sys.f_plus)}"',
        f'g = "{to_source(sys.g)}"',
        "",
        "[parameters]",
        f"eps = {sys.eps!r}",
        f"lambda = {sys.lam!r}",
        "",
        "[domain]",
        f"x_min = {sys.x_min!r}",
        f"x_max = {sys.x_max!r}",
        "",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Bundled fixtures


def fixture_names() -> list:
    files = importlib.resources.files("pwsc") / "fixtures"
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".ini"))


def fixture_path(name: str):
    p = importlib.resources.files("pwsc") / "fixtures" / f"{name}.ini"
    if not p.is_file():
        raise ConfigError(f"no bundled fixture named {name!r}")
    return p


def load_fixture(name: str) -> SystemDefinition:
    return loads_system(fixture_path(name).read_text(encoding="utf-8"), name=name)
