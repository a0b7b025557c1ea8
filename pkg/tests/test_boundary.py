"""Velocity functional and thickness ODE."""

import math

import numpy as np
import pytest

from biofilmfront import (
    BoundaryState,
    ThicknessCollapse,
    boundary_step,
    build_grid,
    detachment_rhs,
    integrate_thickness,
    linear_preset,
    r_max_bound,
    velocity_profile,
    zero_kinetics,
)


def test_velocity_zero_growth():
    g = build_grid(10)
    v = velocity_profile(np.ones((1, 11)), np.ones((1, 11)), 1.0, zero_kinetics(1, 1), g)
    assert np.all(v.values == 0.0)


def test_velocity_constant_growth_exact():
    # g = c constant: v(z) = R^2 c z, exact under the trapezoid rule
    g = build_grid(10)
    kin = linear_preset([[0.0]], [0.7], [[0.0]], [0.0])
    v = velocity_profile(np.ones((1, 11)), np.ones((1, 11)), 2.0, kin, g)
    assert np.allclose(v.values, 4.0 * 0.7 * g.nodes, atol=1e-14)
    assert v.values[0] == 0.0


def test_velocity_r_squared_scaling():
    g = build_grid(20)
    kin = linear_preset([[0.5]], [0.1], [[0.0]], [0.0])
    Y = np.linspace(0.2, 1.0, 21).reshape(1, -1)
    C = np.ones((1, 21))
    v1 = velocity_profile(Y, C, 1.0, kin, g).values
    v3 = velocity_profile(Y, C, 3.0, kin, g).values
    assert np.allclose(v3, 9.0 * v1, rtol=1e-14)


def test_detachment_rhs_formula():
    assert detachment_rhs(2.0, 0.25, 0.5) == pytest.approx(4 * 0.25 - 0.5 * 16)


def test_rk4_fourth_order_on_decay():
    """Pure-detachment decay has a closed form; RK4 error must shrink ~dt^4."""
    lam, R0, T = 0.5, 1.0, 1.0
    exact = R0 * (1.0 + 3.0 * lam * R0**3 * T) ** (-1.0 / 3.0)

    def err(n_steps):
        dt = T / n_steps
        R = R0
        for _ in range(n_steps):
            R = integrate_thickness(R, lambda s: 0.0, lam, dt)
        return abs(R - exact)

    e1, e2 = err(40), err(80)
    order = math.log2(e1 / e2)
    assert order > 3.7


def test_equilibrium_preserved():
    # v1 = lam R^2 makes the right-hand side vanish identically
    lam, R = 0.5, 1.3
    v1 = lam * R**2
    state = BoundaryState(R=R, v1=v1)
    R_new = boundary_step(state, v1_new=v1, lam=lam, dt=0.1)
    assert R_new == pytest.approx(R, abs=1e-12)


def test_boundary_step_linear_v1_interpolation():
    """The step sees v1 varying linearly between its endpoints."""
    lam = 1e-12  # essentially pure growth dR/dt = R^2 v1(t)
    state = BoundaryState(R=1.0, v1=0.0)
    R_new = boundary_step(state, v1_new=1.0, lam=lam, dt=0.01)
    # dR/dt = R^2 t/dt with R ~ 1: R(dt) ~ 1 + dt/2 to leading order
    assert R_new == pytest.approx(1.0 + 0.5 * 0.01, rel=1e-3)


def test_collapse_raises():
    state = BoundaryState(R=0.05, v1=-30.0)
    with pytest.raises(ThicknessCollapse) as exc:
        boundary_step(state, v1_new=-30.0, lam=0.5, dt=20.0)
    assert exc.value.code == "THICKNESS_COLLAPSE"


@pytest.mark.parametrize(
    "R0,lam,v1_max,expect",
    [
        (1.0, 0.5, 2.0, 2.0),          # sqrt(2/0.5) = 2 dominates
        (3.0, 0.5, 2.0, 3.0),          # initial thickness dominates
        (1.0, 0.5, 0.0, 1.0),          # no growth: bound is R0
        (1.0, 0.5, -4.0, 1.0),         # shrinking film: bound is R0
    ],
)
def test_r_max_bound_cases(R0, lam, v1_max, expect):
    assert r_max_bound(R0, lam, v1_max) == pytest.approx(expect)


def test_integrate_thickness_sees_stage_times():
    """The quadrature must sample v1 at 0, dt/2 and dt, not only endpoints."""
    seen = []

    def v1(s):
        seen.append(s)
        return 0.0

    integrate_thickness(1.0, v1, 0.5, 0.2)
    assert sorted(set(seen)) == [0.0, 0.1, 0.2]
