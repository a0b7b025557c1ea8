"""Problem data (initial/boundary data, diffusivities, detachment) + validation.

A :class:`ProblemData` collects everything about a run that is not kinetics or
solver settings.  Spatial data are stored as vectorized callables of the
computational coordinate ``z`` so a single problem can be sampled onto any
grid; Dirichlet data are callables of time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import build_grid, trapz_dz
from .kinetics import KineticsModel

#: tolerance for the Dirichlet/initial-data compatibility check theta(1) == psi(0)
COMPAT_TOL = 1e-12


@dataclass(frozen=True)
class ProblemData:
    """Data defining one free-boundary run.

    Attributes
    ----------
    phi : sequence of callables
        Initial biomass profiles, one ``z -> values`` callable per species.
    theta : sequence of callables
        Initial substrate profiles, one per substrate.
    psi : sequence of callables
        Dirichlet substrate values at the film surface ``z = 1``, callables
        of time.
    D : numpy.ndarray, shape (m,)
        Substrate diffusivities.
    lam : float
        Detachment rate coefficient.
    R0 : float
        Initial film thickness.
    """

    phi: Sequence[Callable[[np.ndarray], np.ndarray]]
    theta: Sequence[Callable[[np.ndarray], np.ndarray]]
    psi: Sequence[Callable[[float], float]]
    D: np.ndarray
    lam: float
    R0: float

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        object.__setattr__(self, "theta", tuple(self.theta))
        object.__setattr__(self, "psi", tuple(self.psi))
        D = np.atleast_1d(np.asarray(self.D, dtype=float)).copy()
        D.setflags(write=False)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "R0", float(self.R0))

    @property
    def n(self) -> int:
        return len(self.phi)

    @property
    def m(self) -> int:
        return len(self.theta)

    def sample_initial(self, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Sample (phi, theta) onto the given nodes as (n, K) and (m, K) arrays."""
        Y0 = np.array([np.broadcast_to(np.asarray(p(nodes), dtype=float), nodes.shape)
                       for p in self.phi])
        C0 = np.array([np.broadcast_to(np.asarray(t(nodes), dtype=float), nodes.shape)
                       for t in self.theta])
        return Y0, C0

    def psi_at(self, t: float) -> np.ndarray:
        """Dirichlet values of all substrates at time ``t`` as an (m,) array."""
        return np.array([float(p(t)) for p in self.psi])


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_problem`.

    ``violations`` are fatal ``(code, message)`` pairs; ``warnings`` flag
    conditions a run survives but a user should know about.
    """

    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set:
        return {code for code, _ in self.violations}

    def warning_codes(self) -> set:
        return {code for code, _ in self.warnings}


def validate_problem(data: ProblemData, kin: KineticsModel, n_sample: int = 200) -> ValidationReport:
    """Check problem data against the model for shape, sign, finiteness and
    boundary/initial-data compatibility.

    Violations (fatal): ``DIMENSION_MISMATCH``, ``NONPOSITIVE_D``,
    ``NONPOSITIVE_LAMBDA``, ``NONPOSITIVE_R0``, ``NONFINITE_INPUT``,
    ``COMPAT_MISMATCH`` (``theta_j(1) != psi_j(0)`` beyond ``COMPAT_TOL``).

    Warnings: ``NEGATIVE_INITIAL_DATA`` when the model is quasi-positive but
    the data start negative; ``SECOND_ORDER_COMPAT`` when the substrate data
    fail the higher-order matching condition
    ``D_j theta_j'' (1) + v1(0) theta_j'(1) + H_j(1) = psi_j'(0)``
    (checked by finite differences, so only gross mismatches are flagged).
    """
    rep = ValidationReport()
    if data.n != kin.n or data.m != kin.m:
        rep.violations.append((
            "DIMENSION_MISMATCH",
            f"data has (n={data.n}, m={data.m}) but kinetics expects "
            f"(n={kin.n}, m={kin.m})",
        ))
        return rep
    if data.D.shape != (data.m,):
        rep.violations.append((
            "DIMENSION_MISMATCH",
            f"D must have shape ({data.m},), got {data.D.shape}",
        ))
        return rep

    if not np.all(np.isfinite(data.D)):
        rep.violations.append(("NONFINITE_INPUT", "non-finite diffusivity"))
    elif np.any(data.D <= 0.0):
        rep.violations.append(("NONPOSITIVE_D", f"diffusivities must be > 0, got {data.D}"))
    if not np.isfinite(data.lam):
        rep.violations.append(("NONFINITE_INPUT", "non-finite detachment rate"))
    elif data.lam <= 0.0:
        rep.violations.append(("NONPOSITIVE_LAMBDA", f"detachment rate must be > 0, got {data.lam}"))
    if not np.isfinite(data.R0):
        rep.violations.append(("NONFINITE_INPUT", "non-finite initial thickness"))
    elif data.R0 <= 0.0:
        rep.violations.append(("NONPOSITIVE_R0", f"initial thickness must be > 0, got {data.R0}"))

    grid = build_grid(max(int(n_sample), 4))
    Y0, C0 = data.sample_initial(grid.nodes)
    psi0 = data.psi_at(0.0)
    if not (np.all(np.isfinite(Y0)) and np.all(np.isfinite(C0)) and np.all(np.isfinite(psi0))):
        rep.violations.append(("NONFINITE_INPUT", "non-finite initial or boundary data"))
        return rep

    # Dirichlet data must match the initial substrate trace at z = 1.
    mismatch = np.abs(C0[:, -1] - psi0)
    if np.any(mismatch > COMPAT_TOL):
        j = int(np.argmax(mismatch))
        rep.violations.append((
            "COMPAT_MISMATCH",
            f"theta_{j}(1)={C0[j, -1]!r} differs from psi_{j}(0)={psi0[j]!r} "
            f"by {mismatch[j]:.3e} (> {COMPAT_TOL:g})",
        ))

    if kin.quasi_positive and (np.any(Y0 < 0.0) or np.any(C0 < 0.0)):
        rep.warnings.append((
            "NEGATIVE_INITIAL_DATA",
            "model preserves nonnegativity but initial data start negative",
        ))

    if rep.ok:
        _second_order_compat(rep, data, kin, grid.nodes, Y0, C0)
    return rep


def _second_order_compat(rep, data, kin, nodes, Y0, C0):
    """Finite-difference check of the higher-order boundary matching condition."""
    dz = nodes[1] - nodes[0]
    R0sq = data.R0 ** 2
    gvals = np.asarray(kin.g(Y0, C0), dtype=float)
    v1_0 = R0sq * trapz_dz(gvals, dz)
    hvals = np.asarray(kin.h(Y0, C0), dtype=float)
    dt_fd = 1e-6
    for j in range(data.m):
        c = C0[j]
        d2 = (c[-3] - 2.0 * c[-2] + c[-1]) / dz ** 2          # one-sided curvature at z=1
        d1 = (3.0 * c[-1] - 4.0 * c[-2] + c[-3]) / (2.0 * dz)  # one-sided slope at z=1
        lhs = data.D[j] * d2 + v1_0 * d1 + R0sq * hvals[j, -1]
        psi_rate = (float(data.psi[j](dt_fd)) - float(data.psi[j](-dt_fd))) / (2.0 * dt_fd)
        scale = max(1.0, abs(lhs), abs(psi_rate))
        if abs(lhs - psi_rate) > 1e-3 * scale:
            rep.warnings.append((
                "SECOND_ORDER_COMPAT",
                f"substrate {j}: boundary data rate psi'(0)={psi_rate:.6g} does not "
                f"match the interior balance {lhs:.6g} at t=0; expect a transient "
                "boundary layer",
            ))
