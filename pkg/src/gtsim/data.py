"""Initial-data families and the exact scaling transformations.

Three families cover the verification suite: indicator data on a pair of
frequency boxes (the norm-inflation construction), a smooth annulus bump in
frequency (analytic-in-time scaling checks), and Gaussians (every closed-form
oracle).  The two pseudo-scaling maps act exactly in frequency space by
relabeling the lattice onto a dilated grid, so scaling tests carry no
interpolation error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from gtsim.core import (
    AccuracyWarning,
    ConfigurationError,
    DomainError,
    Field,
    Grid,
    from_freq,
    to_freq,
)

__all__ = [
    "InflationParams",
    "annulus_bump",
    "critical_regularities",
    "effective_box_params",
    "freq_box_data",
    "freq_box_spectrum",
    "gaussian_data",
    "rescale_integrated",
    "rescale_monomial",
]


def critical_regularities(d: int, p: int) -> tuple[float, float]:
    """Scaling-critical exponents ``(s_m, s_i)`` for the two pseudo-scalings:
    ``s_m = d/2 - 2/p`` (monomial map) and ``s_i = d/2 - 4/p`` (integrated
    map)."""
    if d < 1 or p < 2 or p % 2:
        raise ConfigurationError(f"need dimension >= 1 and even p >= 2, got d={d}, p={p}")
    return d / 2 - 2 / p, d / 2 - 4 / p


@dataclass(frozen=True)
class InflationParams:
    """Frequency-box data parameters: boxes ``[N, N+A)`` and ``[2N, 2N+A)``
    with spectral height ``R``, plus the associated evolution horizon ``T``."""

    N: float
    A: float
    R: float
    T: float = 1.0

    def __post_init__(self):
        if not (self.N > 0 and self.A > 0 and self.R > 0 and self.T > 0):
            raise ConfigurationError("inflation parameters must be positive")
        if self.A >= self.N:
            raise ConfigurationError(
                f"boxes [N, N+A) and [2N, 2N+A) overlap unless A < N; got N={self.N}, A={self.A}"
            )

    @classmethod
    def from_power_law(cls, N: float, delta: float = 0.2) -> "InflationParams":
        """Parameters on the critical power-law family
        ``R = N^{1+3 delta}``, ``A = N^{1-delta}``, ``T = N^{-3-6 delta}``."""
        if delta <= 0:
            raise ConfigurationError(f"delta must be positive, got {delta}")
        return cls(N=N, A=N ** (1 - delta), R=N ** (1 + 3 * delta), T=N ** (-3 - 6 * delta))


def _snap(value: float, step: float) -> float:
    return max(1, round(value / step)) * step


def effective_box_params(params: InflationParams, grid: Grid) -> tuple[float, float]:
    """The ``(N_eff, A_eff)`` that :func:`freq_box_spectrum` actually uses
    after snapping to the grid's frequency lattice.  Reports quote these, not
    the requested values."""
    dxi = grid.dxi[0]
    return _snap(params.N, dxi), _snap(params.A, dxi)


def freq_box_spectrum(params: InflationParams, grid: Grid) -> np.ndarray:
    """Frequency-side indicator data ``R * 1_{[N,N+A) u [2N,2N+A)}`` snapped to
    the lattice (FFT order).

    The half-open boxes hold exactly ``A_eff/dxi`` modes each, so the mass is
    ``2 R^2 A_eff`` on the nose.  Raises when a snapped box is narrower than 8
    cells or the upper box leaves the grid band; warns when the separation
    ``N >= 4A`` fails (the asymptotic regime is then not certified).
    """
    if grid.d != 1:
        raise DomainError("frequency-box data is one-dimensional")
    dxi = grid.dxi[0]
    n_eff = _snap(params.N, dxi)
    a_eff = _snap(params.A, dxi)
    if a_eff < 8 * dxi - 1e-12 * dxi:
        raise ConfigurationError(
            f"box width A={params.A} snaps to {a_eff:.6g} < 8 dxi = {8 * dxi:.6g}; refine the grid"
        )
    if a_eff >= n_eff:
        raise ConfigurationError("snapped boxes overlap: A_eff >= N_eff")
    if 2 * n_eff + a_eff > grid.xi_max[0] + 1e-12:
        raise ConfigurationError(
            f"upper box reaches {2 * n_eff + a_eff:.6g}, beyond the grid band {grid.xi_max[0]:.6g}"
        )
    if n_eff < 4 * a_eff:
        warnings.warn(
            f"weak box separation N_eff = {n_eff:.6g} < 4 A_eff = {4 * a_eff:.6g}",
            AccuracyWarning,
            stacklevel=2,
        )
    xi = grid.xi_axes[0]
    tol = 1e-9 * dxi
    mask = ((xi >= n_eff - tol) & (xi < n_eff + a_eff - tol)) | (
        (xi >= 2 * n_eff - tol) & (xi < 2 * n_eff + a_eff - tol)
    )
    return np.where(mask, params.R + 0j, 0j)


def freq_box_data(params: InflationParams, grid: Grid) -> Field:
    """Physical-space field whose spectrum is :func:`freq_box_spectrum`."""
    return from_freq(grid, freq_box_spectrum(params, grid))


# -- smooth annulus bump ------------------------------------------------------


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity partition-of-unity step: 0 for u <= 0, 1 for u >= 1, with
    every derivative vanishing at both ends."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        g = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return f / (f + g)


def bump_profile(r) -> np.ndarray:
    """Radial profile: 1 on [1/2, 2], 0 outside (1/4, 4), C-infinity blends."""
    r = np.asarray(r, dtype=float)
    rise = _smooth_step((r - 0.25) / 0.25)
    fall = _smooth_step((4.0 - r) / 2.0)
    return np.where(r <= 1.0, rise, fall)


def annulus_bump(grid: Grid, N: float, *, shift: float = 1.0) -> Field:
    """Concentrated bump ``exp(i * shift * Lap) psi`` with
    ``psi_hat(xi) = profile(|xi| / N)``: an O(1) plateau on the annulus
    ``N/2 <= |xi| <= 2N``, supported in ``N/4 < |xi| < 4N``.

    The grid band must contain the support: ``4N <= xi_max``.
    """
    if N <= 0:
        raise ConfigurationError(f"annulus scale must be positive, got {N}")
    if 4 * N > min(grid.xi_max) + 1e-12:
        raise ConfigurationError(
            f"annulus support reaches 4N = {4 * N:.6g}, beyond the grid band {min(grid.xi_max):.6g}"
        )
    r = np.sqrt(grid.xi_sq) / N
    uhat = bump_profile(r).astype(complex)
    uhat *= np.exp(-1j * shift * grid.xi_sq)
    return from_freq(grid, uhat)


# -- Gaussians ----------------------------------------------------------------


def gaussian_data(grid: Grid, amp: float = 1.0, width: float = 1.0, chirp: float = 0.0) -> Field:
    """Isotropic Gaussian ``amp * exp(-|x|^2/(4 width^2) + i chirp |x|^2)``.

    Warns when the box is too small to hold the data (edge amplitude above
    1e-12 of the peak), since moment and norm oracles then pick up periodic
    images.
    """
    if width <= 0:
        raise ConfigurationError(f"width must be positive, got {width}")
    edge = math.exp(-min(grid.L) ** 2 / (16 * width**2))
    if edge > 1e-12:
        warnings.warn(
            f"gaussian edge amplitude {edge:.2e} of peak; enlarge the box or shrink the data",
            AccuracyWarning,
            stacklevel=2,
        )
    x_sq = np.zeros((1,) * grid.d)
    for ax, x in enumerate(grid.x_axes):
        sh = [1] * grid.d
        sh[ax] = -1
        x_sq = x_sq + (x * x).reshape(sh)
    return Field(grid, amp * np.exp(-x_sq / (4 * width**2) + 1j * chirp * x_sq))


# -- exact scaling maps -------------------------------------------------------


def _rescale(u: Field, lam: float, alpha: float) -> Field:
    """``v(x) = lam^alpha * u(x/lam)`` as an exact lattice relabeling: the
    output lives on the dilated grid ``(lam*L, n)`` and its spectrum satisfies
    ``vhat(xi') = lam^{alpha + d} uhat(lam * xi')``, which lands back on the
    input lattice index-by-index."""
    if lam <= 0:
        raise ConfigurationError(f"scaling factor must be positive, got {lam}")
    g = u.grid
    dilated = Grid(L=tuple(lam * Li for Li in g.L), n=g.n)
    vhat = lam ** (alpha + g.d) * to_freq(u)
    return from_freq(dilated, vhat)


def rescale_monomial(u: Field, lam: float, p: int) -> Field:
    """Spatial part of the monomial pseudo-scaling:
    ``v(x) = lam^{-2/p} u(x/lam)`` (time maps as ``t -> lam^2 t`` and the
    sigma interval as ``lam -> lam^2 lam``; critical regularity ``d/2-2/p``)."""
    return _rescale(u, lam, -2.0 / p)


def rescale_integrated(u: Field, lam: float, p: int) -> Field:
    """Spatial part of the integrated-variant pseudo-scaling:
    ``v(x) = lam^{-4/p} u(x/lam)`` (critical regularity ``d/2 - 4/p``)."""
    return _rescale(u, lam, -4.0 / p)
