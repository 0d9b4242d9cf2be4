"""Seeded random PWSC system families used across test modules.

The quadratic family satisfies every standing hypothesis by construction:
f_minus = -a x + c x^2 (a > 0, c >= 0) keeps the left branch attracting,
f_plus = b x - |d| x^2 (b > 0) has its fold at b/(2|d|), and the ordering
f_plus < f_minus holds on the whole left half-line. g = x - lambda + p y
with |p| small keeps the determinant hypothesis strict.
"""

import math
import random

from pwsc.system import SystemDefinition, make_system


def quadratic_system(rng: random.Random, lam: float = 0.0) -> SystemDefinition:
    a = rng.uniform(0.05, 1.0)
    b = rng.uniform(0.2, 2.0)
    c = rng.uniform(0.0, 1.0)
    d = rng.uniform(0.3, 1.5)
    p = rng.uniform(-0.4, 0.4)
    eps = rng.uniform(0.01, 0.2)
    return make_system(
        f"-{a!r}*x + {c!r}*x^2",
        f"{b!r}*x - {d!r}*x^2",
        f"x - lambda + {p!r}*y",
        eps=eps,
        lam=lam,
        name="random-quadratic",
    )


def place_equilibrium(sys: SystemDefinition, x_eq: float) -> SystemDefinition:
    """Re-parameterize so the slow nullcline passes through (x_eq, F(x_eq))."""
    from pwsc.system import F

    gy_coeff = _p_of(sys)
    lam = x_eq + gy_coeff * F(sys, x_eq)
    return sys.with_lambda(lam)


def _p_of(sys: SystemDefinition) -> float:
    # g is always x - lambda + p*y in these families
    from pwsc.expr import evaluate

    return evaluate(sys.g, x=0.0, y=1.0, lam=0.0, eps=sys.eps) - evaluate(
        sys.g, x=0.0, y=0.0, lam=0.0, eps=sys.eps
    )


def case_i_system(rng: random.Random) -> SystemDefinition:
    """alpha_minus > 0: smooth Hopf on the left branch at lambda_0 < 0."""
    p = rng.uniform(0.5, 2.0)
    eps = rng.uniform(0.05, 0.2)
    a = rng.uniform(0.1, 0.9) * eps * p  # 0 < a < eps*p so alpha_- > 0
    c = rng.uniform(0.3, 1.0)
    b = rng.uniform(0.2, 1.5)
    d = rng.uniform(0.3, 1.5)
    return make_system(
        f"-{a!r}*x + {c!r}*x^2",
        f"{b!r}*x - {d!r}*x^2",
        f"x - lambda + {p!r}*y",
        eps=eps,
        name="random-case-i",
    )


def case_ii_system(rng: random.Random) -> SystemDefinition:
    """alpha_plus < 0: smooth Hopf on the right branch at lambda_0 > 0.

    Needs f_plus' to peak in the interior, so f_plus is cubic.
    """
    eps = rng.uniform(0.25, 0.4)
    b = rng.uniform(0.05, 0.3)
    t = rng.uniform(0.2, 0.8)
    p = -(b + t / 3.0) / eps
    a = rng.uniform(0.05, 0.3)
    c = rng.uniform(0.3, 1.0)
    return make_system(
        f"-{a!r}*x + {c!r}*x^2",
        f"{b!r}*x + x^2 - x^3",
        f"x - lambda + {p!r}*y",
        eps=eps,
        name="random-case-ii",
    )


def ordering_compliant_system(rng: random.Random) -> SystemDefinition:
    """Quadratic family member with the equilibrium in the right half-plane
    so left-half-plane excursions return (shadow-comparison tests)."""
    sys = quadratic_system(rng)
    x_eq = rng.uniform(0.02, 0.3)
    return place_equilibrium(sys, x_eq)
