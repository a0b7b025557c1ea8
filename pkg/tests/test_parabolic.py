"""Tridiagonal solver and one-step substrate scheme."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biofilmfront import (
    AssemblyError,
    LinearSolveError,
    TridiagonalSystem,
    assemble_step,
    build_grid,
    parabolic_step,
    solve_tridiagonal,
    zero_kinetics,
)


# -- Thomas solver -------------------------------------------------------------


def test_thomas_identity():
    # bands are full length; sub[0] and sup[-1] are padding
    sys_ = TridiagonalSystem(
        sub=np.zeros(3), diag=np.ones(3), sup=np.zeros(3), rhs=np.array([1.0, 2.0, 3.0])
    )
    assert np.allclose(solve_tridiagonal(sys_), [1.0, 2.0, 3.0])


def test_thomas_hand_solved_3x3():
    # [2 -1 0; -1 2 -1; 0 -1 2] x = [1, 0, 1] -> x = [1, 1, 1]
    sys_ = TridiagonalSystem(
        sub=np.array([0.0, -1.0, -1.0]),
        diag=np.array([2.0, 2.0, 2.0]),
        sup=np.array([-1.0, -1.0, 0.0]),
        rhs=np.array([1.0, 0.0, 1.0]),
    )
    assert np.allclose(solve_tridiagonal(sys_), [1.0, 1.0, 1.0], atol=1e-14)


def test_thomas_zero_pivot():
    sys_ = TridiagonalSystem(
        sub=np.array([0.0, 1.0]), diag=np.array([0.0, 1.0]), sup=np.array([1.0, 0.0]),
        rhs=np.array([1.0, 1.0]),
    )
    with pytest.raises(LinearSolveError) as exc:
        solve_tridiagonal(sys_)
    assert exc.value.code == "ZERO_PIVOT"


@settings(max_examples=60)
@given(st.integers(min_value=2, max_value=30), st.integers(min_value=0, max_value=2**31 - 1))
def test_thomas_matches_dense_solver(n, seed):
    rng = np.random.default_rng(seed)
    sub = rng.uniform(-1.0, 1.0, n)
    sup = rng.uniform(-1.0, 1.0, n)
    sub[0] = 0.0
    sup[-1] = 0.0
    # force strict diagonal dominance so both solvers are well-conditioned
    diag = 2.5 + np.abs(sub) + np.abs(sup)
    rhs = rng.uniform(-5.0, 5.0, n)
    A = np.diag(diag) + np.diag(sub[1:], -1) + np.diag(sup[:-1], 1)
    x = solve_tridiagonal(TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs))
    assert np.allclose(x, np.linalg.solve(A, rhs), atol=1e-10)


# -- assembly ------------------------------------------------------------------


def test_interior_stencil_fully_implicit():
    """v1 = 0, theta_scheme = 1: interior rows are the classic implicit stencil."""
    g = build_grid(4)
    dt, D = 0.01, 1.0
    C = np.zeros(5)
    sys_ = assemble_step(C, g, v1=(0.0, 0.0), H=np.zeros(5), D=D, psi_end=0.0,
                         dt=dt, theta_scheme=1.0)
    r = dt * D / g.dz**2
    assert sys_.diag[1] == pytest.approx(1.0 + 2.0 * r)
    assert sys_.sub[1] == pytest.approx(-r)   # row 1, coupling to node 0
    assert sys_.sup[1] == pytest.approx(-r)   # row 1, coupling to node 2
    # boundary rows: ghost-node symmetry and exact Dirichlet
    assert sys_.diag[0] == pytest.approx(1.0 + 2.0 * r)
    assert sys_.sup[0] == pytest.approx(-2.0 * r)
    assert sys_.diag[-1] == 1.0
    assert sys_.sub[-1] == 0.0


def test_assembly_pe_guard():
    g = build_grid(10)  # dz = 0.1, so |z v1| dz / (2D) > 1 needs v1 > 20 at z=1
    C = np.zeros(11)
    with pytest.raises(AssemblyError) as exc:
        assemble_step(C, g, v1=(25.0, 25.0), H=np.zeros(11), D=1.0, psi_end=0.0,
                      dt=1e-3, theta_scheme=0.5)
    assert exc.value.code == "UNSTABLE_ASSEMBLY"


def test_pe_guard_skips_unused_explicit_operator():
    g = build_grid(10)
    C = np.zeros(11)
    # huge *old* velocity is irrelevant when the scheme is fully implicit
    sys_ = assemble_step(C, g, v1=(1e4, 0.0), H=np.zeros(11), D=1.0, psi_end=0.0,
                         dt=1e-3, theta_scheme=1.0)
    assert np.all(np.isfinite(sys_.diag))
    with pytest.raises(AssemblyError):
        assemble_step(C, g, v1=(1e4, 0.0), H=np.zeros(11), D=1.0, psi_end=0.0,
                      dt=1e-3, theta_scheme=0.5)


# -- one-step scheme -----------------------------------------------------------


def _step_plain(C, g, dt, psi=0.0, v1=(0.0, 0.0), H=None, theta=0.5, D=1.0):
    H = np.zeros(g.N + 1) if H is None else H
    sys_ = assemble_step(C, g, v1=v1, H=H, D=D, psi_end=psi, dt=dt, theta_scheme=theta)
    return solve_tridiagonal(sys_)


def test_constant_steady_state_exact():
    g = build_grid(16)
    C = np.full(17, 3.0)
    C_new = _step_plain(C, g, dt=0.05, psi=3.0, v1=(0.2, 0.2))
    assert np.allclose(C_new, 3.0, rtol=1e-15)  # constants sit in the stencil kernel


def test_dirichlet_trace_bitwise():
    g = build_grid(8)
    C = np.linspace(0.0, 1.0, 9)
    psi = 0.4321
    C_new = _step_plain(C, g, dt=0.01, psi=psi)
    assert C_new[-1] == psi


def test_eigenmode_decay_rate():
    """cos(pi z / 2) decays like e^{-D (pi/2)^2 t} under the homogeneous problem."""
    g = build_grid(100)
    C = np.cos(0.5 * math.pi * g.nodes)
    dt, n_steps = 1e-3, 100
    for _ in range(n_steps):
        C = _step_plain(C, g, dt=dt)
    t = dt * n_steps
    exact = math.exp(-((0.5 * math.pi) ** 2) * t) * np.cos(0.5 * math.pi * g.nodes)
    err = np.max(np.abs(C - exact))
    assert err < 2e-5


def test_polynomial_steady_state():
    """With H = H0 and psi = psi_bar the fixed point is psi_bar + H0 (1 - z^2) / 2D."""
    g = build_grid(40)
    H0, psi_bar, D = 1.5, 0.25, 2.0
    C = np.full(g.N + 1, psi_bar)
    H = np.full(g.N + 1, H0)
    for _ in range(4000):
        C = _step_plain(C, g, dt=0.01, psi=psi_bar, H=H, D=D)
    target = psi_bar + (H0 / (2.0 * D)) * (1.0 - g.nodes**2)
    assert np.max(np.abs(C - target)) < 1e-6


def test_implicit_maximum_principle():
    rng = np.random.default_rng(3)
    g = build_grid(25)
    psi = 0.6
    for _ in range(20):
        C = rng.uniform(0.0, 2.0, g.N + 1)
        C_new = _step_plain(C, g, dt=0.3, psi=psi, v1=(1.0, 1.0), theta=1.0)
        lo, hi = min(C.min(), psi), max(C.max(), psi)
        assert C_new.min() >= lo - 1e-13
        assert C_new.max() <= hi + 1e-13


def test_implicit_positivity_with_source():
    rng = np.random.default_rng(11)
    g = build_grid(25)
    for _ in range(20):
        C = rng.uniform(0.0, 1.0, g.N + 1)
        H = rng.uniform(0.0, 2.0, g.N + 1)
        C_new = _step_plain(C, g, dt=0.5, psi=0.1, v1=(-0.5, -0.5), H=H, theta=1.0)
        assert C_new.min() >= -1e-13


def test_parabolic_step_multiple_substrates():
    g = build_grid(12)
    kin = zero_kinetics(1, 2)
    C = np.vstack([np.full(13, 1.0), np.linspace(0.0, 2.0, 13)])
    Y = np.zeros((1, 13))
    C_new = parabolic_step(
        C, g, Y_implicit=Y, v1=(0.0, 0.0), R_implicit=1.0, kin=kin,
        D=np.array([1.0, 0.5]), psi_end=np.array([1.0, 2.0]), dt=0.01,
    )
    assert C_new.shape == (2, 13)
    assert np.allclose(C_new[0], 1.0, rtol=1e-15)   # constant substrate untouched
    assert C_new[1, -1] == 2.0              # Dirichlet trace, second substrate


def test_parabolic_step_lagged_source_scaling():
    """Source enters as R^2 h: doubling R quadruples the one-step deposit."""
    g = build_grid(10)
    kin_unit = zero_kinetics(1, 1)

    def h_one(Y, C):
        return np.ones((1, Y.shape[1]))

    kin = type(kin_unit)(n=1, m=1, f=kin_unit.f, h=h_one, g=kin_unit.g,
                         quasi_positive=False)
    C = np.zeros((1, 11))
    Y = np.zeros((1, 11))
    kw = dict(grid=g, Y_implicit=Y, v1=(0.0, 0.0), kin=kin, D=np.array([1.0]),
              psi_end=np.array([0.0]), dt=1e-3)
    C1 = parabolic_step(C, R_implicit=1.0, **kw)
    C2 = parabolic_step(C, R_implicit=2.0, **kw)
    # compare away from the Dirichlet edge where the source is visible
    assert C2[0, 0] == pytest.approx(4.0 * C1[0, 0], rel=1e-10)
