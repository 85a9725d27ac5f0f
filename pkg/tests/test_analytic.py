import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq, minimize_scalar
from scipy.special import jv

from phasespace_ur.analytic import (
    ConstantTable,
    ConvergenceError,
    bessel_first_zero,
    bessel_j,
    best_constant,
    c_inf2,
    c_inf2_expansion,
    constant_to_energy,
    energy_to_constant,
    limit_ratio,
    meanfield_boundary,
    meanfield_curve,
    meanfield_energy,
    meanfield_limit_constant,
    meanfield_limit_numeric,
    number_angle_exact_residual,
    number_angle_residual,
    qudit_boundary,
    qudit_boundary_residual,
    qudit_forbidden,
    qudit_radius,
    radial_solver,
    scaling_exponents,
)
from phasespace_ur.groundstate import Scenario, sweep_tradeoff
from phasespace_ur.lca import cyclic, line, zint
from phasespace_ur.metrics import MetricSpec


def test_qudit_radius():
    assert qudit_radius(2) == 0.5
    assert qudit_radius(3) == pytest.approx(2 / 3)
    r = [qudit_radius(n) for n in range(2, 50)]
    assert np.all(np.diff(r) > 0) and r[-1] < 1
    with pytest.raises(ValueError):
        qudit_radius(1)


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_qudit_residual_endpoints(n):
    D = qudit_radius(n)
    assert qudit_boundary_residual(n, 0.0, D) == pytest.approx(0, abs=1e-15)
    assert qudit_boundary_residual(n, D, 0.0) == pytest.approx(0, abs=1e-15)
    assert qudit_boundary_residual(n, 0.0, 0.0) == pytest.approx(D**2)
    with pytest.raises(ValueError):
        qudit_boundary_residual(n, D + 0.1, 0)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_qudit_boundary_solves_residual(n):
    D = qudit_radius(n)
    dq = np.linspace(0, D, 41)
    dp = qudit_boundary(n, dq)
    for a, b in zip(dq, dp):
        assert qudit_boundary_residual(n, b, a) == pytest.approx(0, abs=1e-12)
    assert dp[0] == pytest.approx(D) and dp[-1] == pytest.approx(0, abs=1e-12)
    assert np.all(np.diff(dp) <= 1e-12)


def test_qudit_forbidden_region():
    assert qudit_forbidden(3, 0.0, 0.0)
    assert not qudit_forbidden(3, 2 / 3, 2 / 3)
    # the centre of the square is achievable even where the residual is positive
    assert qudit_boundary_residual(6, 5 / 6, 5 / 6) > 0
    assert not qudit_forbidden(6, 5 / 6, 5 / 6)


@given(st.floats(-0.5, 12.0), st.floats(0.05, 40.0))
@settings(max_examples=200, deadline=None)
def test_bessel_against_scipy(nu, x):
    assert bessel_j(nu, x) == pytest.approx(jv(nu, x), abs=1e-11)


def test_bessel_half_orders():
    x = 1.7
    assert bessel_j(-0.5, x) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.cos(x), abs=1e-14)
    assert bessel_j(0.5, x) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), abs=1e-14)


@pytest.mark.parametrize("nu, ref", [(-0.5, math.pi / 2), (0.0, 2.404825557695773), (0.5, math.pi)])
def test_first_zero_known_values(nu, ref):
    assert bessel_first_zero(nu) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("nu", [0.25, 1.0, 3.5, 9.0, 24.0])
def test_first_zero_against_scipy_bracket(nu):
    z = bessel_first_zero(nu)
    ref = brentq(lambda x: jv(nu, x), z - 0.05, z + 0.05, xtol=1e-14)
    assert z == pytest.approx(ref, abs=1e-10)
    # no sign change before it
    xs = np.linspace(1e-3, z - 1e-6, 400)
    assert np.all(jv(nu, xs) > 0)


def test_first_zero_rejects_low_order():
    with pytest.raises(ValueError):
        bessel_first_zero(-0.7)


def test_c_inf2_small_dimensions():
    assert c_inf2(1) == pytest.approx(math.pi / 2, abs=1e-10)
    assert c_inf2(2) == pytest.approx(2.4048256, abs=1e-7)
    assert c_inf2(3) == pytest.approx(math.pi, abs=1e-10)


def test_c_inf2_expansion_tracks_zeros():
    ns = np.array([10, 40, 160, 640])
    diffs = np.array([c_inf2(n) - c_inf2_expansion(n) for n in ns])
    assert np.all(diffs > 0) and np.all(np.diff(diffs) < 0)
    # three-term large-order expansion of the first zero in ν = n/2 − 1
    nu = ns / 2 - 1
    three = nu + 1.8557571 * nu ** (1 / 3) + 1.033150 * nu ** (-1 / 3)
    np.testing.assert_allclose([c_inf2(n) for n in ns], three, atol=1e-2)
    ratios = [2 * c_inf2(n) / n for n in (10, 20, 50, 200)]
    assert np.all(np.diff(ratios) < 0) and ratios[-1] > 1


def test_radial_solver_values():
    assert radial_solver(1).energy == pytest.approx(math.pi**2 / 4, abs=1e-6)
    assert radial_solver(3).energy == pytest.approx(math.pi**2, abs=1e-5)
    assert radial_solver(2).energy == pytest.approx(2.404825557695773**2, abs=1e-5)


def test_radial_solver_matches_bessel_in_higher_dimension():
    r = radial_solver(6, grid=4096)
    assert math.sqrt(r.energy) == pytest.approx(c_inf2(6), abs=1e-4)


def test_radial_solver_angular_term_raises_energy():
    # λ = l(l+n−2) for the lowest nonzero harmonic l=1 in n=3: j_{3/2,1}
    r = radial_solver(3, lam=2.0)
    assert math.sqrt(r.energy) == pytest.approx(bessel_first_zero(1.5), abs=1e-4)


def test_radial_solver_convergence_check():
    with pytest.raises(ConvergenceError):
        radial_solver(2, grid=16, rtol=1e-8)
    with pytest.raises(ValueError):
        radial_solver(1, lam=1.0)


def test_scaling_exponents():
    ratio, K = scaling_exponents(2, 2)
    assert ratio == 1 and K == pytest.approx(2.0)
    ratio, _ = scaling_exponents(1, 3, 2.0, 5.0)
    assert ratio == pytest.approx(2.0**0.75 * 5.0**0.25)
    with pytest.raises(ValueError):
        scaling_exponents(math.inf, 2)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_quadratic_constant_from_energy(n):
    assert energy_to_constant(float(n), 2, 2) == pytest.approx(n / 2)
    assert constant_to_energy(n / 2, 2, 2) == pytest.approx(n)


def test_dilation_scaling_numerically():
    # E(a, b) for a·x² + b·p² on a fine grid is √(ab)
    s = Scenario(line(256, 10.0), MetricSpec("abs", 2), MetricSpec("abs", 2))
    R = sweep_tradeoff(s, [4.0])
    ratio, _ = scaling_exponents(2, 2, 4.0, 1.0)
    assert R.points[0].energy == pytest.approx(ratio, rel=1e-6)


def test_energy_to_constant_in_other_exponents():
    # |x|·p² on a fine line: c from E must reproduce the product of spreads of the ground state
    s = Scenario(line(512, 12.0), MetricSpec("abs", 1), MetricSpec("abs", 2))
    R = sweep_tradeoff(s, [1.0])
    c = energy_to_constant(R.points[0].energy, 1, 2)
    p = R.points[0]
    assert p.moment_q * p.moment_p**0.5 >= c - 1e-3


def test_meanfield_curve_points():
    x, y = meanfield_curve(2.0, 3.0, 0.0)
    assert (x, y) == pytest.approx((1.0, 0.125))
    x, y = meanfield_curve(2.0, 3.0, math.pi / 2)
    assert (x, y) == pytest.approx((0.25, 1.0))
    x, y = meanfield_curve(1, 1, math.pi / 4)
    assert x == pytest.approx(0.5 * (1 + math.sqrt(2) / 2)) and y == pytest.approx(x)


def test_meanfield_boundary_is_lower_arc():
    x, y = meanfield_boundary(1, 1, 51)
    np.testing.assert_allclose((x - 0.5) ** 2 + (y - 0.5) ** 2, 0.25, atol=1e-14)
    assert (x[0], y[0]) == pytest.approx((0.0, 0.5), abs=1e-15)
    assert (x[-1], y[-1]) == pytest.approx((0.5, 0.0), abs=1e-15)


def test_meanfield_energy_against_bloch_sphere_oracle():
    # minimize over the full Bloch ball by brute force
    th = np.linspace(0, 2 * np.pi, 20001)
    for a, b, t in [(1, 1, 0.7), (2, 1, 2.0), (2, 2, 0.3)]:
        vals = (0.5 * (1 - np.cos(th))) ** b + t * (0.5 * (1 - np.sin(th))) ** a
        assert meanfield_energy(a, b, t) == pytest.approx(vals.min(), abs=5e-8)
        assert meanfield_energy(a, b, t) <= vals.min() + 1e-14


@pytest.mark.parametrize("a, b", [(1, 1), (2, 2), (1, 2), (1.5, 4)])
def test_meanfield_limit_constant(a, b):
    assert meanfield_limit_constant(a, b) == pytest.approx(meanfield_limit_numeric(a, b), abs=1e-10)
    assert limit_ratio(a, b) == pytest.approx(1.0, abs=1e-12)


def test_meanfield_limit_special_values():
    assert meanfield_limit_constant(2, 2) == pytest.approx(1.0)
    assert meanfield_limit_constant(1, 1) == pytest.approx(math.sqrt(2))
    res = minimize_scalar(lambda v: v + 1 / (4 * v), bounds=(1e-3, 10), method="bounded")
    assert res.fun == pytest.approx(1.0, abs=1e-9)


def test_number_angle_residual_substitutions():
    assert number_angle_residual(1.0, 0.0) == 0
    dp = math.sqrt(2 - math.sqrt(3))
    assert dp == pytest.approx(0.51764, abs=1e-5)
    assert number_angle_residual(0.0, dp) == pytest.approx(0, abs=1e-14)


def test_number_angle_exact_family():
    for r in np.linspace(0, 0.99, 12):
        dq = 2 * r**2 / (1 + r**2)
        dp = math.sqrt(2 * (1 - r) ** 2 / (1 + r**2))
        assert number_angle_exact_residual(dq, dp) == pytest.approx(0, abs=1e-14)


def test_number_angle_sweep_lies_on_circle():
    s = Scenario(zint(40, 128), MetricSpec("discrete", 1), MetricSpec("chordal", 2))
    R = sweep_tradeoff(s, np.logspace(-2, 2, 15))
    res = [number_angle_exact_residual(p.dq, p.dp) for p in R.points]
    assert max(abs(x) for x in res) < 2e-3


def test_constant_table_and_best_constant():
    t = ConstantTable()
    for key in [(2, 2, 3), (math.inf, 2, 2), (math.inf, math.inf, 1)]:
        t.add(*key, *best_constant(*key))
    assert t[(2, 2, 3)] == 1.5
    assert t[(math.inf, 2, 2)] == pytest.approx(2.4048256, abs=1e-7)
    assert math.isinf(t[(math.inf, math.inf, 1)])
    csv_text = t.to_csv()
    assert csv_text.splitlines()[0] == "alpha,beta,n,c,method,error"
    assert "inf,inf,1,inf" in csv_text
    with pytest.raises(NotImplementedError):
        best_constant(1, 3, 1)
    with pytest.raises(ValueError):
        t.add(2, 2, 1, -1.0, "bad")


def test_best_constant_numeric_branch_and_dual():
    v, method, err = best_constant(math.inf, 2, 2, numeric=True)
    assert method == "numeric" and v == pytest.approx(2.4048256, abs=1e-4)
    assert best_constant(2, math.inf, 3)[0] == pytest.approx(math.pi)
