"""Coupled time stepping: per-step fixed-point iteration, run loop, monitors.

One time step advances the full state (biomass ``Y``, substrates ``C``,
thickness ``R``, velocity ``v``) by iterating the stage map

1. substrate solve (implicit theta-scheme, sources lagged at the iterate),
2. velocity update ``v = R**2 * cumint(g)``,
3. biomass transport (semi-Lagrangian with trapezoid sources),
4. thickness update (RK4),

until successive iterates agree in sup norm.  The run loop assembles a
:class:`Trajectory` with per-step diagnostics, classifies the terminal
outcome, and exposes energy/invariant monitors plus the map back to physical
(moving-domain) coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .boundary import BoundaryState, boundary_step, detachment_rhs, r_max_bound, velocity_profile
from .errors import (EnvelopeViolation, PicardDivergence, SolverError,
                     ThicknessCollapse, ValidationError)
from .grid import Grid, build_grid, interp_rows, trapz_dz
from .kinetics import KineticsModel
from .parabolic import parabolic_step
from .problem import ProblemData, validate_problem
from .transport import V1Segment, transport_step

#: nodal values below this (negative) level trip the negativity flags
POSITIVITY_TOL = 1e-12
#: slack added to the a priori thickness bound before flagging
R_BOUND_SLACK = 1e-8

#: terminal run classifications
OUTCOMES = ("completed", "washout", "continuation_tripped", "picard_diverged",
            "positivity_violated")


@dataclass(frozen=True)
class State:
    """Full solver state at one time level (arrays are frozen copies)."""

    t: float
    grid: Grid
    Y: np.ndarray
    C: np.ndarray
    R: float
    v: np.ndarray

    def __post_init__(self):
        K = self.grid.N + 1
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float)).copy()
        C = np.atleast_2d(np.asarray(self.C, dtype=float)).copy()
        v = np.asarray(self.v, dtype=float).copy()
        if Y.shape[1] != K or C.shape[1] != K or v.shape != (K,):
            raise ValidationError("state arrays do not match the grid", code="DIMENSION_MISMATCH")
        if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(C))
                and np.all(np.isfinite(v)) and np.isfinite(self.R)):
            raise ValidationError("non-finite state", code="NONFINITE")
        if v[0] != 0.0:
            raise ValidationError("velocity must vanish at z=0", code="NONZERO_BASE_VELOCITY")
        for a in (Y, C, v):
            a.setflags(write=False)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "R", float(self.R))

    @property
    def v1(self) -> float:
        return float(self.v[-1])


@dataclass
class SolverConfig:
    """Numerical settings shared by all runs."""

    N: int = 100
    dt: float = 1e-3
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    theta_scheme: float = 0.5
    transport_coefficient: str = "scaled"   # or "unscaled"
    positivity_mode: str = "monitor"        # or "fail"
    continuation_threshold: float = 1e6
    mu: np.ndarray | None = None            # biomass energy weights
    nu: np.ndarray | None = None            # substrate energy weights

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValidationError(f"dt must be > 0, got {self.dt}", code="NONPOSITIVE_PARAM")
        if not 0.5 <= self.theta_scheme <= 1.0:
            raise ValidationError("theta_scheme must lie in [0.5, 1]", code="SCHEMA_VIOLATION")
        if self.transport_coefficient not in ("scaled", "unscaled"):
            raise ValidationError("transport_coefficient must be 'scaled' or 'unscaled'",
                                  code="SCHEMA_VIOLATION")
        if self.positivity_mode not in ("monitor", "fail"):
            raise ValidationError("positivity_mode must be 'monitor' or 'fail'",
                                  code="SCHEMA_VIOLATION")
        if self.picard_max_iter < 1:
            raise ValidationError("picard_max_iter must be >= 1", code="NONPOSITIVE_PARAM")

    def weights(self, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
        mu = np.ones(n) if self.mu is None else np.atleast_1d(np.asarray(self.mu, dtype=float))
        nu = np.ones(m) if self.nu is None else np.atleast_1d(np.asarray(self.nu, dtype=float))
        if mu.shape != (n,) or nu.shape != (m,) or np.any(mu <= 0) or np.any(nu <= 0):
            raise ValidationError("energy weights must be positive and match (n, m)",
                                  code="NONPOSITIVE_PARAM")
        return mu, nu


@dataclass
class StepReport:
    """Diagnostics for one accepted time step."""

    t: float
    R: float
    v1: float
    picard_iterations: int
    residual_history: list
    contraction_ratio: float
    clamped_feet: int
    energy: float
    boundary_energy_flux: float
    invariant_flags: set = field(default_factory=set)


@dataclass
class RBoundContext:
    """Inputs of the running a priori thickness bound."""

    R0: float
    lam: float
    v1_max: float = 0.0

    def update(self, v1: float) -> None:
        self.v1_max = max(self.v1_max, abs(float(v1)))

    def bound(self) -> float:
        return r_max_bound(self.R0, self.lam, self.v1_max)


@dataclass
class Trajectory:
    """Recorded run: strided states, per-step reports, terminal outcome."""

    grid: Grid
    cfg: SolverConfig
    data: ProblemData
    kin: KineticsModel
    states: list = field(default_factory=list)
    state_steps: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    outcome: str = "completed"
    failure: dict | None = None
    min_Y_seen: float = math.inf
    min_C_seen: float = math.inf

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def times(self) -> np.ndarray:
        """Times of all recorded steps including t = 0."""
        return np.array([self.states[0].t] + [r.t for r in self.reports])

    def thickness_series(self) -> np.ndarray:
        return np.array([self.states[0].R] + [r.R for r in self.reports])

    def v1_series(self) -> np.ndarray:
        return np.array([self.states[0].v1] + [r.v1 for r in self.reports])


def energy(s: State, mu: np.ndarray | None = None, nu: np.ndarray | None = None) -> float:
    """Weighted squared-profile energy
    ``E = 1/2 sum_i mu_i int Y_i^2 + 1/2 sum_j nu_j int C_j^2``."""
    dz = s.grid.dz
    mu = np.ones(s.Y.shape[0]) if mu is None else np.atleast_1d(mu)
    nu = np.ones(s.C.shape[0]) if nu is None else np.atleast_1d(nu)
    ey = sum(mu[i] * trapz_dz(s.Y[i] ** 2, dz) for i in range(s.Y.shape[0]))
    ec = sum(nu[j] * trapz_dz(s.C[j] ** 2, dz) for j in range(s.C.shape[0]))
    return 0.5 * float(ey + ec)


def _boundary_flux(s: State, D: np.ndarray, nu: np.ndarray) -> float:
    """Magnitude of the surface energy-flux terms
    ``sum_j nu_j (v1 * C_j(1)^2 / 2 + D_j C_j(1) dC_j/dz(1))``."""
    dz = s.grid.dz
    total = 0.0
    for j in range(s.C.shape[0]):
        c = s.C[j]
        slope = (3.0 * c[-1] - 4.0 * c[-2] + c[-3]) / (2.0 * dz)
        total += nu[j] * (0.5 * s.v1 * c[-1] ** 2 + D[j] * c[-1] * slope)
    return abs(float(total))


def _contraction_ratio(residuals: Sequence[float]) -> float:
    """Geometric mean of successive residual ratios (NaN if under 2 sweeps)."""
    if len(residuals) < 2 or residuals[0] <= 0.0:
        return float("nan")
    return float((residuals[-1] / residuals[0]) ** (1.0 / (len(residuals) - 1)))


def picard_step(state: State, data: ProblemData, kin: KineticsModel,
                cfg: SolverConfig) -> tuple[State, StepReport]:
    """Advance one step of length ``cfg.dt`` by fixed-point iteration.

    Every sweep restarts all substeps from the converged state at the step
    start, with sources/coefficients taken from the latest iterate; the
    residual is the largest sup-norm change of ``(Y, C, R, v1)`` between
    sweeps.

    Raises
    ------
    PicardDivergence
        When the sweep limit is exhausted or the residual grows three sweeps
        in a row.  The exception carries the residual history.
    ThicknessCollapse
        Propagated from the thickness update (washout).
    """
    grid, dt = state.grid, cfg.dt
    t_new = state.t + dt
    theta = cfg.theta_scheme
    Y0, C0, R_start, v1_start = state.Y, state.C, state.R, state.v1
    psi_end = data.psi_at(t_new)

    # step-start source fields, fixed across sweeps
    F_start = R_start**2 * np.asarray(kin.f(Y0, C0), dtype=float)
    H_start = R_start**2 * np.asarray(kin.h(Y0, C0), dtype=float)

    Yk, Ck, Rk, v1k = Y0, C0, R_start, v1_start
    residuals: list[float] = []
    rising = 0
    converged = False
    clamped = 0

    for _ in range(cfg.picard_max_iter):
        # (1) substrates: theta-blended sources, iterate-lagged at the end stage
        H_end = Rk**2 * np.asarray(kin.h(Yk, Ck), dtype=float)
        H = theta * H_end + (1.0 - theta) * H_start
        C_new = parabolic_step(C0, grid, Yk, (v1_start, v1k), Rk, kin,
                               data.D, psi_end, dt, theta, C_implicit=Ck, H_override=H)

        # (2) velocity from the freshest fields available
        v_new = velocity_profile(Yk, C_new, Rk, kin, grid).values
        v1_new = float(v_new[-1])

        # (3) biomass transport along characteristics
        F_end = Rk**2 * np.asarray(kin.f(Yk, C_new), dtype=float)

        def sources(zq, stage, _Fs=F_start, _Fe=F_end):
            return interp_rows(_Fs if stage == "start" else _Fe, zq, grid.nodes)

        seg = V1Segment(v1_start, v1_new, dt)
        Y_new, tdiag = transport_step(Y0, grid, sources, seg, cfg.transport_coefficient)
        clamped = tdiag.clamped_feet

        # (4) thickness
        R_new = boundary_step(BoundaryState(R_start, v1_start), v1_new, data.lam, dt)

        residual = max(
            float(np.max(np.abs(Y_new - Yk))),
            float(np.max(np.abs(C_new - Ck))),
            abs(R_new - Rk),
            abs(v1_new - v1k),
        )
        residuals.append(residual)
        rising = rising + 1 if len(residuals) >= 2 and residual > residuals[-2] else 0
        Yk, Ck, Rk, v1k = Y_new, C_new, R_new, v1_new
        if residual <= cfg.picard_tol:
            converged = True
            break
        if rising >= 3:
            raise PicardDivergence(
                f"fixed-point residual grew 3 sweeps in a row at t={t_new:g}",
                residual_history=residuals,
            )
    if not converged:
        raise PicardDivergence(
            f"no contraction within {cfg.picard_max_iter} sweeps at t={t_new:g} "
            f"(last residual {residuals[-1]:.3e})",
            residual_history=residuals,
        )

    # make the stored velocity exactly consistent with the converged fields
    v_final = velocity_profile(Yk, Ck, Rk, kin, grid).values
    new_state = State(t=t_new, grid=grid, Y=Yk, C=Ck, R=Rk, v=v_final)

    mu, nu = cfg.weights(kin.n, kin.m)
    report = StepReport(
        t=t_new,
        R=new_state.R,
        v1=new_state.v1,
        picard_iterations=len(residuals),
        residual_history=residuals,
        contraction_ratio=_contraction_ratio(residuals),
        clamped_feet=clamped,
        energy=energy(new_state, mu, nu),
        boundary_energy_flux=_boundary_flux(new_state, data.D, nu),
    )
    return new_state, report


def check_invariants(s: State, report: StepReport, cfg: SolverConfig,
                     bound_context: RBoundContext) -> set:
    """Evaluate the per-step invariant monitors, returning raised flags.

    ``NEGATIVE_Y`` / ``NEGATIVE_C``: nodal values below ``-POSITIVITY_TOL``.
    ``R_BOUND_EXCEEDED``: thickness above the running a priori bound.
    ``CONTINUATION``: any monitored norm above ``cfg.continuation_threshold``.
    """
    flags = set()
    if float(s.Y.min()) < -POSITIVITY_TOL:
        flags.add("NEGATIVE_Y")
    if float(s.C.min()) < -POSITIVITY_TOL:
        flags.add("NEGATIVE_C")
    if s.R > bound_context.bound() + R_BOUND_SLACK:
        flags.add("R_BOUND_EXCEEDED")
    dy = float(np.max(np.abs(np.diff(s.Y, axis=1)))) / s.grid.dz if s.Y.shape[1] > 1 else 0.0
    big = max(float(np.max(np.abs(s.Y))), float(np.max(np.abs(s.C))), abs(s.R), dy)
    if big > cfg.continuation_threshold:
        flags.add("CONTINUATION")
    return flags


def initial_state(data: ProblemData, kin: KineticsModel, cfg: SolverConfig) -> State:
    """Sample the problem data onto the grid and build the t = 0 state."""
    grid = build_grid(cfg.N)
    Y0, C0 = data.sample_initial(grid.nodes)
    v0 = velocity_profile(Y0, C0, data.R0, kin, grid).values
    return State(t=0.0, grid=grid, Y=Y0, C=C0, R=data.R0, v=v0)


def run_simulation(data: ProblemData, kin: KineticsModel, cfg: SolverConfig,
                   t_end: float, snapshot_stride: int = 1,
                   validate: bool = True) -> Trajectory:
    """Run from t = 0 to ``t_end`` (rounded to whole steps) and classify the
    outcome: ``completed``, ``washout`` (thickness floor), ``picard_diverged``,
    ``continuation_tripped`` (norm blow-up) or ``positivity_violated`` (only
    in ``positivity_mode="fail"``).

    Snapshots are stored every ``snapshot_stride`` steps (plus t = 0 and the
    final accepted state); per-step scalar diagnostics are always complete.
    """
    if t_end < 0.0:
        raise ValidationError(f"t_end must be >= 0, got {t_end}", code="NONPOSITIVE_PARAM")
    if snapshot_stride < 1:
        raise ValidationError("snapshot_stride must be >= 1", code="NONPOSITIVE_PARAM")
    if validate:
        rep = validate_problem(data, kin)
        if not rep.ok:
            code, msg = rep.violations[0]
            raise ValidationError(f"invalid problem data: {msg}", code=code)

    state = initial_state(data, kin, cfg)
    traj = Trajectory(grid=state.grid, cfg=cfg, data=data, kin=kin)
    traj.states.append(state)
    traj.state_steps.append(0)
    traj.min_Y_seen = float(state.Y.min())
    traj.min_C_seen = float(state.C.min())
    ctx = RBoundContext(R0=data.R0, lam=data.lam)
    ctx.update(state.v1)

    n_steps = int(round(t_end / cfg.dt))
    outcome = "completed"
    for k in range(1, n_steps + 1):
        try:
            state_new, report = picard_step(state, data, kin, cfg)
        except PicardDivergence as exc:
            outcome = "picard_diverged"
            traj.failure = {"code": exc.code, "message": str(exc),
                            "residual_history": exc.residual_history, "step": k}
            break
        except ThicknessCollapse as exc:
            outcome = "washout"
            traj.failure = {"code": exc.code, "message": str(exc),
                            "thickness": exc.thickness, "step": k}
            break

        ctx.update(state_new.v1)
        report.invariant_flags = check_invariants(state_new, report, cfg, ctx)
        traj.reports.append(report)
        traj.min_Y_seen = min(traj.min_Y_seen, float(state_new.Y.min()))
        traj.min_C_seen = min(traj.min_C_seen, float(state_new.C.min()))
        state = state_new
        if k % snapshot_stride == 0 or k == n_steps:
            traj.states.append(state)
            traj.state_steps.append(k)

        if "CONTINUATION" in report.invariant_flags:
            outcome = "continuation_tripped"
            break
        if cfg.positivity_mode == "fail" and (
                report.invariant_flags & {"NEGATIVE_Y", "NEGATIVE_C"}):
            outcome = "positivity_violated"
            break

    if traj.state_steps[-1] != len(traj.reports):
        # early break between stride points: keep the last accepted state
        traj.states.append(state)
        traj.state_steps.append(len(traj.reports))
    traj.outcome = outcome
    return traj


# -- energy dissipation envelope ----------------------------------------------


@dataclass
class EnvelopeReport:
    """Result of :func:`dissipation_envelope_check` (no violation found)."""

    gamma: float
    M_R: float
    C_star: float
    times: np.ndarray
    energies: np.ndarray
    budget: np.ndarray
    margins: np.ndarray


def dissipation_envelope_check(traj: Trajectory, alpha: float, beta: float,
                               M0: float, tol: float = 1e-3,
                               include_boundary: bool = False) -> EnvelopeReport:
    """Check recorded energies against the dissipation envelope
    ``E(t) <= exp(-gamma t) E(0) + M_R (beta + M0) / gamma`` with
    ``M_R = max R**2`` over the trajectory, ``C* = min`` energy weight and
    ``gamma = 2 alpha M_R / C*``.

    The caller asserts that the kinetics satisfy the dissipation inequality
    with constants ``(alpha, beta, M0)``; this routine only audits the
    recorded run.  With ``include_boundary`` the accumulated magnitude of the
    recorded surface energy flux is added to the budget (the envelope itself
    assumes a leak-free surface).

    Raises
    ------
    EnvelopeViolation
        At the first recorded time with ``E > budget * (1 + tol)``.
    """
    if alpha <= 0.0:
        raise ValidationError(f"alpha must be > 0, got {alpha}", code="NONPOSITIVE_PARAM")
    mu, nu = traj.cfg.weights(traj.kin.n, traj.kin.m)
    C_star = float(min(mu.min(), nu.min()))
    R_series = traj.thickness_series()
    M_R = float(np.max(R_series**2))
    gamma = 2.0 * alpha * M_R / C_star

    times = traj.times()
    E0 = energy(traj.states[0], mu, nu)
    energies = np.array([E0] + [r.energy for r in traj.reports])
    budget = np.exp(-gamma * times) * E0 + M_R * (beta + M0) / gamma
    if include_boundary:
        flux = np.array([0.0] + [r.boundary_energy_flux for r in traj.reports])
        steps = np.diff(times, prepend=times[0])
        budget = budget + np.cumsum(flux * steps)

    margins = budget * (1.0 + tol) - energies
    bad = np.nonzero(margins < 0.0)[0]
    if bad.size:
        k = int(bad[0])
        raise EnvelopeViolation(
            f"energy {energies[k]:.6g} exceeded its envelope {budget[k]:.6g} "
            f"at t={times[k]:g}",
            time=float(times[k]),
            excess=float(energies[k] / budget[k] - 1.0),
        )
    return EnvelopeReport(gamma=gamma, M_R=M_R, C_star=C_star, times=times,
                          energies=energies, budget=budget, margins=margins)


# -- back-transform to the physical (moving) domain ---------------------------


@dataclass
class PhysicalSnapshot:
    """One stored state mapped to physical coordinates."""

    t_phys: float
    x: np.ndarray
    X: np.ndarray   # biomass fractions on the physical nodes
    S: np.ndarray   # substrate concentrations
    u: np.ndarray   # physical velocity


@dataclass
class PhysicalTrajectory:
    """Physical-domain view of a run: thickness and velocity vs physical time."""

    t_phys: np.ndarray
    L: np.ndarray
    u1: np.ndarray
    snapshots: list


def back_transform(traj: Trajectory) -> PhysicalTrajectory:
    """Map a recorded run to the physical moving domain.

    The computational clock integrates ``dt = L**2 dt_c``, so physical time
    is accumulated with the trapezoid rule on ``R**2``; positions scale as
    ``x = z * L`` and the physical velocity is ``u = v / L`` (the thickness
    ``L`` equals ``R``).

    Raises
    ------
    SolverError
        Code ``NONPOSITIVE_THICKNESS`` when any recorded thickness is <= 0.
    """
    R = traj.thickness_series()
    if np.any(R <= 0.0):
        raise SolverError("trajectory contains nonpositive thickness",
                          code="NONPOSITIVE_THICKNESS")
    times = traj.times()
    Rsq = R**2
    t_phys = np.zeros_like(times)
    if len(times) > 1:
        t_phys[1:] = np.cumsum(0.5 * np.diff(times) * (Rsq[:-1] + Rsq[1:]))
    u1 = traj.v1_series() / R

    snapshots = []
    for s, step in zip(traj.states, traj.state_steps):
        L = s.R
        snapshots.append(PhysicalSnapshot(
            t_phys=float(t_phys[step]),
            x=s.grid.nodes * L,
            X=s.Y.copy(),
            S=s.C.copy(),
            u=s.v / L,
        ))
    return PhysicalTrajectory(t_phys=t_phys, L=R, u1=u1, snapshots=snapshots)
