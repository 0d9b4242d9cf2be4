import math
import random

import numpy as np
import pytest
from scipy.stats import linregress

from helpers_families import ordering_compliant_system
from pwsc.bifurcation import equilibrium_near
from pwsc.orbits import (
    NoReturnError,
    detect_bistability,
    find_limit_cycle,
    return_map,
    shadow_compare,
    sweep_amplitude,
    write_shadow_csv,
    write_sweep_csv,
)
from pwsc.system import HypothesisError, load_fixture, make_shadow


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


# ---------------------------------------------------------------------------
# Return map


def test_return_map_spirals_into_stable_focus(sys_c):
    # pre-Hopf: the inward spiral's first return exists and contracts
    # toward the equilibrium (no fixed point above it); far starts escape
    lam = -0.035 - 0.01
    eq = equilibrium_near(sys_c, lam, 0.0)
    y0 = eq.y + 0.01
    yp = return_map(sys_c, lam, y0, eq=eq)
    assert eq.y < yp < y0
    with pytest.raises(NoReturnError):
        return_map(sys_c, lam, eq.y + 2.0, eq=eq)


def test_return_map_contracts_from_outside(sys_a):
    eq = equilibrium_near(sys_a, 0.3, 0.0)
    y0 = eq.y + 2.0
    assert return_map(sys_a, 0.3, y0, eq=eq) < y0


def test_return_map_requires_point_above_equilibrium(sys_a):
    eq = equilibrium_near(sys_a, 0.3, 0.0)
    with pytest.raises(ValueError):
        return_map(sys_a, 0.3, eq.y - 0.1, eq=eq)


def test_fixed_point_residual(sys_a):
    orb = find_limit_cycle(sys_a, 0.01)
    assert orb is not None
    y2 = return_map(sys_a, 0.01, orb.section_y)
    assert abs(y2 - orb.section_y) < 1e-7


# ---------------------------------------------------------------------------
# Limit cycles


def test_relaxation_cycle_sys_a(sys_a):
    orb = find_limit_cycle(sys_a, 0.01)
    assert orb is not None
    assert orb.stability == "attracting"
    assert orb.amplitude > 1.5
    assert orb.cycle_type == "relaxation"
    # closure of the sampled curve
    gap = math.hypot(orb.x[0] - orb.x[-1], orb.y[0] - orb.y[-1])
    assert gap < 1e-6 * (1 + orb.amplitude)


def test_small_cycle_sys_b(sys_b):
    orb = find_limit_cycle(sys_b, 1e-5)
    assert orb is not None
    assert orb.stability == "attracting"
    assert orb.amplitude < 0.05
    assert orb.cycle_type == "small_cycle"


def test_no_cycle_before_hopf_sys_c(sys_c):
    assert find_limit_cycle(sys_c, -0.035 - 0.02) is None


def test_cycle_type_ladder_frozen_lambdas(sys_b):
    # frozen from the measured explosion structure of sys_b
    assert find_limit_cycle(sys_b, 0.002).cycle_type == "small_cycle"
    assert find_limit_cycle(sys_b, 0.00208).cycle_type == "canard_no_head"
    assert find_limit_cycle(sys_b, 0.00256).cycle_type == "canard_with_head"
    assert find_limit_cycle(sys_b, 0.03).cycle_type == "relaxation"


def test_attracting_cycle_recovers_from_perturbation(sys_a):
    orb = find_limit_cycle(sys_a, 0.01)
    for sign in (+1, -1):
        y = orb.section_y + sign * 1e-3
        for _ in range(20):
            y = return_map(sys_a, 0.01, y)
            if abs(y - orb.section_y) < 1e-7:
                break
        assert abs(y - orb.section_y) < 1e-6


def test_repelling_cycle_attracts_backward(sys_d):
    res = detect_bistability(sys_d, sys_d.lam)
    rep = res["repelling_orbit"]
    assert rep is not None
    y = rep.section_y * (1 + 1e-4) + 1e-6
    for _ in range(20):
        y = return_map(sys_d, sys_d.lam, y, mode="backward")
        if abs(y - rep.section_y) < 1e-9:
            break
    assert abs(y - rep.section_y) < 1e-6


# ---------------------------------------------------------------------------
# Sweeps


def test_sweep_sys_a_super_explosion(sys_a):
    res = sweep_amplitude(sys_a, (-0.004, 0.02), n_steps=10)
    assert res.super_explosion
    assert res.onset == pytest.approx(0.0, abs=2e-6)
    first = next(s for s in res.samples if s.found)
    assert first.amplitude >= 0.5 * res.plateau_amplitude
    lams = [s.lam for s in res.samples]
    assert lams == sorted(lams)


def test_sweep_csv_roundtrip(tmp_path, sys_a):
    res = sweep_amplitude(sys_a, (0.005, 0.02), n_steps=4)
    out = tmp_path / "sweep.csv"
    write_sweep_csv(res, out)
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "lambda,found,amplitude,period,cycle_type,multiplier"
    assert len(lines) == len(res.samples) + 1


def test_sqrt_amplitude_growth_sys_c(sys_c):
    # supercritical smooth Hopf: amplitude ~ sqrt(lambda - lambda_0) near
    # onset (the cycle family ends by ~lambda_0 + 1e-3, see ledger)
    lam0 = -0.035
    deltas = np.geomspace(2e-5, 4e-4, 8)
    amps = []
    for d in deltas:
        orb = find_limit_cycle(sys_c, lam0 + float(d))
        assert orb is not None, d
        amps.append(orb.amplitude)
    fit = linregress(np.log(deltas), np.log(amps))
    assert fit.slope == pytest.approx(0.5, abs=0.1)


# ---------------------------------------------------------------------------
# Bistability


def test_bistability_sys_a_supercritical_no_coexistence(sys_a):
    pre = detect_bistability(sys_a, -0.01)
    assert (pre["stable_eq"], pre["attracting_cycle"], pre["repelling_cycle"]) == (
        True,
        False,
        False,
    )
    post = detect_bistability(sys_a, 0.01)
    assert (post["stable_eq"], post["attracting_cycle"], post["repelling_cycle"]) == (
        False,
        True,
        False,
    )


def test_bistability_sys_d_all_three(sys_d):
    res = detect_bistability(sys_d, sys_d.lam)
    assert res["stable_eq"]
    assert res["attracting_cycle"]
    assert res["repelling_cycle"]
    att, rep = res["attracting_orbit"], res["repelling_orbit"]
    assert att.cycle_type == "relaxation"
    assert rep.amplitude < att.amplitude


# ---------------------------------------------------------------------------
# Shadow comparison


def test_shadow_compare_t0_equality(sys_a):
    cmp = shadow_compare(sys_a, 0.5, lam=0.01)
    assert cmp.R_true[0] == cmp.R_shadow[0] == 0.5 * 0.5**2


def test_shadow_compare_sys_a(sys_a):
    cmp = shadow_compare(sys_a, 0.5, lam=0.01)
    assert cmp.max_violation <= 1e-8
    assert cmp.reentry_true is not None


def test_shadow_compare_sys_b_and_corollary(sys_b):
    cmp = shadow_compare(sys_b, 0.3, lam=0.01)
    assert cmp.max_violation <= 1e-8 * (1 + 0.3**2)
    # corollary variant: replacement left piece with larger slope at 0
    cor = shadow_compare(sys_b, 0.3, lam=0.01, left="-0.05*x + x^2")
    assert cor.max_violation <= 1e-8 * (1 + 0.3**2)


def test_shadow_compare_preconditions(sys_a, sys_b):
    with pytest.raises(ValueError):
        shadow_compare(sys_a, -0.1)
    # entry high enough that the visited range leaves the ordering region
    with pytest.raises(HypothesisError):
        shadow_compare(sys_b, 0.8, lam=0.01)


def test_shadow_bounding_random_systems():
    rng = random.Random(7)
    for _ in range(20):
        s = ordering_compliant_system(rng)
        for _ in range(5):
            yc = rng.uniform(0.1, 1.5)
            cmp = shadow_compare(s, yc)
            assert cmp.max_violation <= 1e-8 * (1 + yc * yc)


def test_shadow_csv(tmp_path, sys_a):
    cmp = shadow_compare(sys_a, 0.5, lam=0.01, n_grid=101)
    out = tmp_path / "shadow.csv"
    write_shadow_csv(cmp, out)
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,x_true,y_true,R_true,x_shadow,y_shadow,R_shadow"
    assert len(lines) == 102


# ---------------------------------------------------------------------------
# Bounding corollary for cycles


def test_true_cycle_contained_in_shadow_cycle(sys_b):
    lam = 0.01
    true_orb = find_limit_cycle(sys_b, lam)
    shadow_orb = find_limit_cycle(make_shadow(sys_b), lam)
    assert true_orb is not None and shadow_orb is not None
    assert true_orb.x_min >= shadow_orb.x_min - 1e-6
    r_true = np.max(0.5 * (true_orb.x**2 + true_orb.y**2))
    r_shadow = np.max(0.5 * (shadow_orb.x**2 + shadow_orb.y**2))
    assert r_true <= r_shadow + 1e-6
