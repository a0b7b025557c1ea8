"""Reaction kinetics: biomass growth rates f, substrate rates h, expansion g.

A :class:`KineticsModel` bundles three vectorized callables

* ``f(Y, C) -> (n, K)`` biomass volume-fraction rates,
* ``h(Y, C) -> (m, K)`` substrate rates,
* ``g(Y, C) -> (K,)``  local volumetric expansion rate (drives the velocity),

where ``Y`` has shape ``(n, K)`` and ``C`` shape ``(m, K)`` for any number of
sample points ``K``.  Presets cover the linear case and Monod saturation
kinetics; user callables are accepted as long as they honor the shapes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class KineticsModel:
    """Reaction model for ``n`` biomass species and ``m`` substrates.

    Attributes
    ----------
    n, m : int
        Component counts (each at least 1).
    f, h, g : callable
        Vectorized rate functions, see module docstring.
    quasi_positive : bool
        Set when the rates can never drive nonnegative data negative
        (``f_i >= 0`` and ``h_j >= 0`` whenever ``Y >= 0`` and ``C >= 0``).
    lipschitz_hint : float or None
        Optional bound on the rate-function Lipschitz constant, used only
        for diagnostics.
    """

    n: int
    m: int
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    h: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    quasi_positive: bool = False
    lipschitz_hint: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValidationError(
                f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}",
                code="DIMENSION_MISMATCH",
            )


def _as_2d(arr: np.ndarray, rows: int, name: str) -> tuple[np.ndarray, bool]:
    """Coerce (rows,) or (rows, K) input to 2D; report whether it was 1D."""
    a = np.asarray(arr, dtype=float)
    was_1d = a.ndim == 1
    if was_1d:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] != rows:
        raise ValidationError(
            f"{name} must have {rows} rows, got shape {a.shape}",
            code="DIMENSION_MISMATCH",
        )
    return a, was_1d


def eval_kinetics(kin: KineticsModel, Y: np.ndarray, C: np.ndarray):
    """Evaluate ``(f, h, g)`` at one state or a batch of states.

    ``Y`` may be ``(n,)`` or ``(n, K)`` and ``C`` correspondingly ``(m,)`` or
    ``(m, K)``; 1D inputs yield 1D outputs.  Non-finite inputs are rejected
    with code ``NONFINITE_INPUT``.
    """
    Y2, squeeze = _as_2d(Y, kin.n, "Y")
    C2, _ = _as_2d(C, kin.m, "C")
    if Y2.shape[1] != C2.shape[1]:
        raise ValidationError(
            f"Y and C sample counts differ: {Y2.shape[1]} vs {C2.shape[1]}",
            code="DIMENSION_MISMATCH",
        )
    if not (np.all(np.isfinite(Y2)) and np.all(np.isfinite(C2))):
        raise ValidationError("non-finite state passed to kinetics", code="NONFINITE_INPUT")
    fv = np.asarray(kin.f(Y2, C2), dtype=float)
    hv = np.asarray(kin.h(Y2, C2), dtype=float)
    gv = np.asarray(kin.g(Y2, C2), dtype=float)
    if squeeze:
        return fv[:, 0], hv[:, 0], float(gv.reshape(-1)[0])
    return fv, hv, gv


def zero_kinetics(n: int = 1, m: int = 1) -> KineticsModel:
    """Inert model: ``f = h = g = 0`` (trivially quasi-positive)."""

    def f(Y, C):
        return np.zeros_like(np.asarray(Y, dtype=float))

    def h(Y, C):
        return np.zeros_like(np.asarray(C, dtype=float))

    def g(Y, C):
        return np.zeros(np.asarray(Y).shape[-1])

    return KineticsModel(n=n, m=m, f=f, h=h, g=g, quasi_positive=True, lipschitz_hint=0.0)


def linear_preset(A: np.ndarray, c: np.ndarray, B: np.ndarray, d: np.ndarray) -> KineticsModel:
    """Affine kinetics ``f = A Y + c``, ``h = B C + d``, ``g = sum_i f_i``.

    Shapes: ``A (n, n)``, ``c (n,)``, ``B (m, m)``, ``d (m,)``.  Mismatched
    shapes raise ``DIMENSION_MISMATCH``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    n, m = len(c), len(d)
    if A.shape != (n, n) or B.shape != (m, m):
        raise ValidationError(
            f"matrix/vector shapes disagree: A{A.shape} vs c({n},), B{B.shape} vs d({m},)",
            code="DIMENSION_MISMATCH",
        )
    if not all(np.all(np.isfinite(x)) for x in (A, B, c, d)):
        raise ValidationError("non-finite coefficients", code="NONFINITE_INPUT")

    def f(Y, C):
        return A @ Y + c[:, None]

    def h(Y, C):
        return B @ C + d[:, None]

    def g(Y, C):
        return (A @ Y + c[:, None]).sum(axis=0)

    # quasi-positive only in the degenerate all-zero case; affine rates can
    # always be driven negative otherwise.
    qp = not (A.any() or B.any() or c.any() or d.any())
    lip = float(max(np.abs(A).sum(), np.abs(B).sum()))
    return KineticsModel(n=n, m=m, f=f, h=h, g=g, quasi_positive=qp, lipschitz_hint=lip)


@dataclass(frozen=True)
class MonodParams:
    """Parameters for saturation (Monod) growth kinetics.

    Attributes
    ----------
    mu : numpy.ndarray, shape (n,)
        Maximum specific growth rates, strictly positive.
    K : numpy.ndarray, shape (n,)
        Half-saturation constants, strictly positive.
    k_d : numpy.ndarray, shape (n,)
        Decay/maintenance rates, nonnegative.
    limiting : numpy.ndarray of int, shape (n,)
        Index of the substrate limiting each species' growth.
    yields : numpy.ndarray, shape (n, m)
        Yield coefficients; entry ``(i, j) > 0`` means species ``i`` consumes
        substrate ``j`` with that yield, ``0`` means no consumption.
    """

    mu: np.ndarray
    K: np.ndarray
    k_d: np.ndarray
    limiting: np.ndarray
    yields: np.ndarray

    def __post_init__(self):
        for name in ("mu", "K", "k_d", "limiting", "yields"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))


def monod_preset(params: MonodParams, m: int | None = None) -> KineticsModel:
    """Saturation kinetics with optional decay and substrate consumption.

    Growth: ``f_i = (mu_i * C_l / (K_i + C_l) - k_d_i) * Y_i`` with ``l`` the
    species' limiting substrate.  Consumption: ``h_j`` sums
    ``-(1 / yields[i, j]) * mu_i * C_j / (K_i + C_j) * Y_i`` over consuming
    species.  Expansion ``g = sum_i f_i``.

    Raises
    ------
    ValidationError
        Code ``NONPOSITIVE_PARAM`` for ``mu <= 0``, ``K <= 0``, ``k_d < 0`` or
        a negative yield; ``DIMENSION_MISMATCH`` for inconsistent shapes or a
        limiting index outside ``[0, m)``.
    """
    mu = np.atleast_1d(np.asarray(params.mu, dtype=float))
    K = np.atleast_1d(np.asarray(params.K, dtype=float))
    k_d = np.atleast_1d(np.asarray(params.k_d, dtype=float))
    limiting = np.atleast_1d(np.asarray(params.limiting, dtype=int))
    yields = np.atleast_2d(np.asarray(params.yields, dtype=float))
    n = len(mu)
    if m is None:
        m = yields.shape[1]
    if K.shape != (n,) or k_d.shape != (n,) or limiting.shape != (n,) or yields.shape != (n, m):
        raise ValidationError(
            f"inconsistent Monod parameter shapes for n={n}, m={m}",
            code="DIMENSION_MISMATCH",
        )
    if np.any(mu <= 0.0) or np.any(K <= 0.0):
        raise ValidationError("mu and K must be > 0", code="NONPOSITIVE_PARAM")
    if np.any(k_d < 0.0):
        raise ValidationError("decay rates must be >= 0", code="NONPOSITIVE_PARAM")
    if np.any(yields < 0.0):
        raise ValidationError(
            "yields must be > 0 for consuming pairs (0 = no consumption)",
            code="NONPOSITIVE_PARAM",
        )
    if np.any(limiting < 0) or np.any(limiting >= m):
        raise ValidationError(
            f"limiting substrate indices must lie in [0, {m})", code="DIMENSION_MISMATCH"
        )

    consuming = yields > 0.0  # (n, m) mask

    def f(Y, C):
        Cl = C[limiting]                      # (n, K) limiting substrate per species
        return (mu[:, None] * Cl / (K[:, None] + Cl) - k_d[:, None]) * Y

    def h(Y, C):
        out = np.zeros_like(np.asarray(C, dtype=float))
        for i in range(n):
            for j in np.nonzero(consuming[i])[0]:
                rate = mu[i] * C[j] / (K[i] + C[j]) * Y[i]
                out[j] -= rate / yields[i, j]
        return out

    def g(Y, C):
        return f(Y, C).sum(axis=0)

    qp = bool(np.all(k_d == 0.0) and not consuming.any())
    return KineticsModel(n=n, m=m, f=f, h=h, g=g, quasi_positive=qp)
