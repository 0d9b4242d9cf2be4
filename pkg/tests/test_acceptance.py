"""Acceptance criteria, one test per criterion, at the stated tolerances.

Each test prints a PASS line (visible with pytest -s); budgets are asserted
where the criteria state runtimes. The plots criterion (8) lives with the
plots package tests.
"""

import json
import math
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from helpers_families import ordering_compliant_system, place_equilibrium, quadratic_system
from pwsc.bifurcation import (
    MultipleEquilibriaError,
    classify_corner,
    classify_fold_hopf,
    corner_quantities,
    equilibrium_near,
    find_equilibrium,
    jacobian_eigen,
)
from pwsc.integrate import IntegratorConfig, integrate
from pwsc.orbits import (
    detect_bistability,
    find_limit_cycle,
    shadow_compare,
    sweep_amplitude,
)
from pwsc.system import fixture_path, load_fixture, make_shadow, make_system, validate

ULP = 2.220446049250313e-16


@pytest.fixture(scope="module")
def sys_a():
    return load_fixture("sys_a")


@pytest.fixture(scope="module")
def sys_b():
    return load_fixture("sys_b")


@pytest.fixture(scope="module")
def sys_c():
    return load_fixture("sys_c")


@pytest.fixture(scope="module")
def sys_d():
    return load_fixture("sys_d")


@pytest.fixture(scope="module")
def sweep_a(sys_a):
    started = time.monotonic()
    res = sweep_amplitude(sys_a, (-0.01, 0.05), n_steps=25, refine=False)
    return res, time.monotonic() - started


@pytest.fixture(scope="module")
def sweep_b_refined(sys_b):
    started = time.monotonic()
    res = sweep_amplitude(sys_b, (0.0, 0.05), n_steps=25, refine=True)
    return res, time.monotonic() - started


# ---------------------------------------------------------------------------
# 1. Eigenvalue identity


def test_acceptance_1_eigenvalue_identity():
    started = time.monotonic()
    rng = random.Random(20240917)
    for _ in range(100):
        base = quadratic_system(rng)
        assert validate(base).passed
        sys = place_equilibrium(base, rng.uniform(-0.6, 0.6))
        try:
            eq = find_equilibrium(sys, x_window=(-0.8, 0.8))
        except MultipleEquilibriaError:
            eq = equilibrium_near(sys, sys.lam, 0.0, x_window=(-0.8, 0.8))
        sides = [eq.side] if eq.side != "corner" else ["L", "R"]
        for side in sides:
            jac = (
                eq.jacobian
                if eq.side != "corner"
                else (eq.jacobian_left if side == "L" else eq.jacobian_right)
            )
            mine = sorted(
                jacobian_eigen(eq, side if eq.side == "corner" else None),
                key=lambda z: (z.real, z.imag),
            )
            oracle = sorted(
                np.linalg.eigvals(np.array(jac)), key=lambda z: (z.real, z.imag)
            )
            for m, o in zip(mine, oracle):
                assert abs(m - o) < 1e-10

        corner = base.with_lambda(0.0)
        q = corner_quantities(corner)
        eqc = equilibrium_near(corner, 0.0, 0.0, x_window=(-0.5, 0.5))
        assert eqc.side == "corner"
        for side, alpha, beta in (
            ("L", q.alpha_minus, q.beta_minus),
            ("R", q.alpha_plus, q.beta_plus),
        ):
            ev = sorted(jacobian_eigen(eqc, side), key=lambda z: (z.real, z.imag))
            scale = max(abs(alpha), math.sqrt(abs(beta))) / 2
            if beta >= 0:
                want = sorted([(alpha - math.sqrt(beta)) / 2, (alpha + math.sqrt(beta)) / 2])
                for g, w in zip(sorted(z.real for z in ev), want):
                    assert abs(g - w) <= 4 * ULP * max(scale, 1e-300)
            else:
                assert abs(ev[0].real - alpha / 2) <= 4 * ULP * max(scale, 1e-300)
                assert abs(abs(ev[0].imag) - math.sqrt(-beta) / 2) <= 4 * ULP * max(scale, 1e-300)
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s exceeds 5s budget"
    print(f"\nACCEPTANCE 1 PASS: eigen identity on 100 random systems in {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 2. Theorem-2 classification vs dynamics


def test_acceptance_2_classification_vs_dynamics(sys_a, sys_b, sys_c, sweep_a):
    started = time.monotonic()

    ra = classify_corner(sys_a)
    assert ra.case == "iii-c" and ra.criticality == "supercritical"
    res_a, sweep_elapsed = sweep_a
    assert res_a.super_explosion
    first = next(s for s in res_a.samples if s.found)
    assert first.amplitude >= 0.5 * res_a.plateau_amplitude

    rb = classify_corner(sys_b)
    assert rb.case == "iii-a" and rb.criticality == "supercritical"
    assert rb.quantities.Lambda == pytest.approx(-0.55654, abs=1e-4)
    orb = find_limit_cycle(sys_b, 1e-5)
    assert orb is not None and orb.amplitude < 0.05

    rc = classify_corner(sys_c)
    assert rc.case == "i"
    assert rc.lambda0 == pytest.approx(-0.035, abs=1e-6)
    assert find_limit_cycle(sys_c, rc.lambda0 - 0.02) is None

    elapsed = time.monotonic() - started + sweep_elapsed
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 min budget"
    print(f"\nACCEPTANCE 2 PASS: classification matches dynamics in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 3. Canard-explosion window


def test_acceptance_3_explosion_window(sys_b, sweep_b_refined):
    res, sweep_elapsed = sweep_b_refined
    assert res.lambda_10 is not None and res.lambda_90 is not None
    width = res.lambda_90 - res.lambda_10
    assert 0.0 <= width < sys_b.eps, f"window width {width} not below eps={sys_b.eps}"

    types_in_order = []
    for s in res.samples:
        if s.found and s.cycle_type and (not types_in_order or types_in_order[-1] != s.cycle_type):
            types_in_order.append(s.cycle_type)
    first_seen = []
    for t in types_in_order:
        if t not in first_seen:
            first_seen.append(t)
    assert first_seen == [
        "small_cycle",
        "canard_no_head",
        "canard_with_head",
        "relaxation",
    ], types_in_order

    assert sweep_elapsed < 300.0, f"runtime {sweep_elapsed:.1f}s exceeds 5 min budget"
    print(
        f"\nACCEPTANCE 3 PASS: window width {width:.3e} < eps, type ladder in order, "
        f"{sweep_elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 4. Shadow lemma


def test_acceptance_4_shadow_lemma(sys_a, sys_b):
    started = time.monotonic()
    for yc in (0.2, 0.5, 0.8):
        cmp = shadow_compare(sys_a, yc, lam=0.01)
        assert cmp.max_violation <= 1e-8 * (1 + yc * yc)
    for yc in (0.1, 0.2, 0.3):
        cmp = shadow_compare(sys_b, yc, lam=0.01)
        assert cmp.max_violation <= 1e-8 * (1 + yc * yc)
    cor = shadow_compare(sys_b, 0.3, lam=0.01, left="-0.05*x + x^2")
    assert cor.max_violation <= 1e-8 * (1 + 0.3 * 0.3)

    rng = random.Random(31415)
    for _ in range(20):
        s = ordering_compliant_system(rng)
        for _ in range(5):
            yc = rng.uniform(0.1, 1.5)
            cmp = shadow_compare(s, yc)
            assert cmp.max_violation <= 1e-8 * (1 + yc * yc)
    elapsed = time.monotonic() - started
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 min budget"
    print(f"\nACCEPTANCE 4 PASS: shadow bound on fixtures + 100 random runs in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 5. Bounding corollaries


def test_acceptance_5_bounding_corollaries(sys_b, sys_c):
    # corner regime: true cycle inside the shadow system's cycle
    lam = 0.01
    tn = find_limit_cycle(sys_b, lam)
    ts = find_limit_cycle(make_shadow(sys_b), lam)
    assert tn is not None and ts is not None
    assert tn.x_min >= ts.x_min - 1e-6
    r_n = float(np.max(0.5 * (tn.x**2 + tn.y**2)))
    r_s = float(np.max(0.5 * (ts.x**2 + ts.y**2)))
    assert r_n <= r_s + 1e-6

    # fold regime of sys_c: cycles live right of the splitting line, so the
    # smooth system is its own shadow control and containment is equality
    rf = classify_fold_hopf(sys_c)
    lam_f = rf.lambda0 - 0.003
    cn = find_limit_cycle(sys_c, lam_f)
    cs = find_limit_cycle(make_shadow(sys_c), lam_f)
    assert cn is not None and cs is not None
    assert cn.x_min > 0.0  # never reaches the splitting line
    assert cn.x_min >= cs.x_min - 1e-6
    r_cn = float(np.max(0.5 * (cn.x**2 + cn.y**2)))
    r_cs = float(np.max(0.5 * (cs.x**2 + cs.y**2)))
    assert r_cn <= r_cs + 1e-6
    print("\nACCEPTANCE 5 PASS: cycle containment holds in corner and fold regimes")


# ---------------------------------------------------------------------------
# 6. Subcritical super-explosion


def test_acceptance_6_subcritical_super_explosion(sys_d):
    report = classify_corner(sys_d)
    assert report.case == "iii-c" and report.criticality == "subcritical"
    res = detect_bistability(sys_d, sys_d.lam)
    assert res["stable_eq"]
    assert res["repelling_cycle"]
    assert res["attracting_cycle"]
    assert res["attracting_orbit"].cycle_type == "relaxation"
    print(
        "\nACCEPTANCE 6 PASS: stable equilibrium, repelling cycle, and attracting "
        f"relaxation oscillation coexist at lambda={sys_d.lam}"
    )


# ---------------------------------------------------------------------------
# 7. Numerics


def test_acceptance_7_numerics(sys_a, tmp_path):
    # observed order >= 4.5 on the harmonic surrogate
    harmonic = make_system("0", "0", "x", eps=0.1)
    w = math.sqrt(0.1)
    T = 2 * math.pi / w
    errs = []
    for n in (50, 100, 200, 400):
        cfg = IntegratorConfig(fixed_step=T / n)
        tr = integrate(harmonic, (1.0, 0.0), (0.0, T), cfg)
        xf, yf = tr.state_final
        errs.append(math.hypot(xf - 1.0, yf))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(3)]
    assert min(orders) >= 4.5, orders

    # event residuals |x(t*)| < 1e-10 on 100 random crossings
    rng = random.Random(8)
    n_crossings = 0
    while n_crossings < 100:
        x0 = rng.uniform(-1.0, 1.8) or 0.5
        y0 = rng.uniform(-0.5, 1.2)
        lam = rng.uniform(-0.05, 0.3)
        tr = integrate(sys_a.with_lambda(lam), (x0, y0), (0.0, 25.0))
        for ev in tr.events:
            if ev.event_id == -1:
                assert abs(ev.x) < 1e-10
                n_crossings += 1

    # byte-identical CSV across repeated CLI runs
    outs = []
    for name in ("r1.csv", "r2.csv"):
        out = tmp_path / name
        r = subprocess.run(
            [sys.executable, "-m", "pwsc.cli", "simulate", str(fixture_path("sys_a")),
             "--lambda", "0.01", "--x0", "0.0", "--y0", "0.5", "--t-max", "40",
             "--out", str(out)],
            capture_output=True,
        )
        assert r.returncode == 0, r.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    print(
        f"\nACCEPTANCE 7 PASS: observed orders {[round(o, 2) for o in orders]}, "
        f"{n_crossings} event residuals < 1e-10, byte-identical CSV"
    )
