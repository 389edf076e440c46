"""Periodic spectral grids, Fourier transforms, and norms.

Everything downstream works on a uniform grid over the torus
``[-L_1/2, L_1/2) x ... x [-L_d/2, L_d/2)`` with an even number of points per
axis.  Frequency-side data uses the continuum-normalized unitary transform
sampled on the dual lattice ``xi_k = 2*pi*k/L``, so that Plancherel holds
exactly between the Riemann sums on the two sides:

    sum |u(x_j)|^2 dx = sum |uhat(xi_k)|^2 dxi.

The free Schroedinger group ``exp(i*c*tau*Laplacian)`` acts as the Fourier
multiplier ``exp(-i*c*tau*|xi|^2)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "AccuracyWarning",
    "ConfigurationError",
    "DomainError",
    "Field",
    "Grid",
    "SobolevIndex",
    "boundary_mass_fraction",
    "free_propagate",
    "from_freq",
    "gradient",
    "lebesgue_norm",
    "make_grid",
    "moment_variance",
    "radial_momentum",
    "sobolev_norm",
    "to_freq",
]


class ConfigurationError(ValueError):
    """Raised when grid, quadrature, or model parameters are inconsistent."""


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain of validity."""


class AccuracyWarning(UserWarning):
    """Emitted when a result is returned but its accuracy is degraded."""


def _as_tuple(value, d: int, kind: type) -> tuple:
    if np.isscalar(value):
        return tuple(kind(value) for _ in range(d))
    out = tuple(kind(v) for v in value)
    if len(out) != d:
        raise ConfigurationError(f"expected {d} per-axis values, got {len(out)}")
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on a centered box.

    Parameters
    ----------
    L : tuple of float
        Box edge lengths per axis.
    n : tuple of int
        Points per axis; each must be even and at least 8.

    Notes
    -----
    Derived arrays (coordinate axes, frequency lattice in FFT order, the
    squared-frequency mesh, and the centering phase) are computed once at
    construction.  Two grids compare equal iff their ``(L, n)`` match, which
    also keys the module-level multiplier caches.
    """

    L: tuple[float, ...]
    n: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.L) <= 3 or len(self.L) != len(self.n):
            raise ConfigurationError("grid must have matching L/n of dimension 1..3")
        for Li, ni in zip(self.L, self.n):
            if not (math.isfinite(Li) and Li > 0):
                raise ConfigurationError(f"box length must be positive, got {Li}")
            if ni < 8 or ni % 2:
                raise ConfigurationError(f"points per axis must be even and >= 8, got {ni}")
        x_axes = tuple(
            np.arange(ni) * (Li / ni) - Li / 2 for Li, ni in zip(self.L, self.n)
        )
        xi_axes = tuple(
            2 * np.pi * np.fft.fftfreq(ni, d=Li / ni) for Li, ni in zip(self.L, self.n)
        )
        xi_sq = _mesh_sum_sq(xi_axes)
        # centering phase: exp(+i xi * L/2) per axis, combined multiplicatively
        phase = np.ones((1,) * len(self.n), dtype=complex)
        for ax, (xi, Li) in enumerate(zip(xi_axes, self.L)):
            shape = [1] * len(self.n)
            shape[ax] = -1
            phase = phase * np.exp(1j * xi * (Li / 2)).reshape(shape)
        object.__setattr__(self, "x_axes", x_axes)
        object.__setattr__(self, "xi_axes", xi_axes)
        object.__setattr__(self, "xi_sq", xi_sq)
        object.__setattr__(self, "_phase_fwd", phase)

    # -- scalar geometry ---------------------------------------------------

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(Li / ni for Li, ni in zip(self.L, self.n))

    @property
    def dxi(self) -> tuple[float, ...]:
        return tuple(2 * np.pi / Li for Li in self.L)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def freq_cell_volume(self) -> float:
        return float(np.prod(self.dxi))

    @property
    def xi_max(self) -> tuple[float, ...]:
        """Largest represented |xi_i| per axis (the Nyquist frequency)."""
        return tuple(np.pi * ni / Li for Li, ni in zip(self.L, self.n))

    @property
    def xi_sq_max(self) -> float:
        """Largest |xi|^2 on the lattice (corner of the frequency box)."""
        return float(sum(x * x for x in self.xi_max))

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Open coordinate meshes, one broadcastable array per axis."""
        return tuple(np.meshgrid(*self.x_axes, indexing="ij", sparse=True))


def _mesh_sum_sq(axes: Sequence[np.ndarray]) -> np.ndarray:
    total = np.zeros((1,) * len(axes))
    for ax, v in enumerate(axes):
        shape = [1] * len(axes)
        shape[ax] = -1
        total = total + (v * v).reshape(shape)
    return total


def make_grid(L, n, d: int | None = None) -> Grid:
    """Build a :class:`Grid`, broadcasting scalar ``L``/``n`` to ``d`` axes."""
    if d is None:
        if np.isscalar(L) and np.isscalar(n):
            d = 1
        else:
            d = len(L) if not np.isscalar(L) else len(n)
    return Grid(L=_as_tuple(L, d, float), n=_as_tuple(n, d, int))


@dataclass(frozen=True)
class Field:
    """Complex field sampled on a :class:`Grid`.

    ``values`` is coerced to complex128 with the grid's shape; non-finite
    entries are rejected so NaNs cannot propagate silently into spectra.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.n:
            raise ConfigurationError(f"field shape {v.shape} != grid shape {self.grid.n}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise DomainError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise ConfigurationError("fields live on different grids")


@dataclass(frozen=True)
class SobolevIndex:
    """A Sobolev regularity: exponent ``s`` plus the homogeneous flag."""

    s: float
    homogeneous: bool = False


# -- transforms -------------------------------------------------------------


def to_freq(u: Field) -> np.ndarray:
    """Continuum-normalized Fourier coefficients of ``u`` in FFT order.

    Returns
    -------
    numpy.ndarray
        ``uhat`` with ``uhat[k] = (2*pi)^{-d/2} * sum_j u(x_j) e^{-i xi_k . x_j} dx``,
        i.e. the unitary continuum transform of the band-limited interpolant
        evaluated on the dual lattice.
    """
    g = u.grid
    scale = g.cell_volume * (2 * np.pi) ** (-g.d / 2)
    return g._phase_fwd * np.fft.fftn(u.values) * scale


def from_freq(grid: Grid, uhat: np.ndarray) -> Field:
    """Inverse of :func:`to_freq`; exact round trip to rounding error."""
    uhat = np.asarray(uhat, dtype=np.complex128)
    if uhat.shape != grid.n:
        raise ConfigurationError(f"spectrum shape {uhat.shape} != grid shape {grid.n}")
    ntot = int(np.prod(grid.n))
    scale = ntot * grid.freq_cell_volume * (2 * np.pi) ** (-grid.d / 2)
    vals = np.fft.ifftn(uhat * np.conj(grid._phase_fwd)) * scale
    return Field(grid, vals)


def free_propagate(u: Field, tau: float, coeff: float = 1.0) -> Field:
    """Apply the free group ``exp(i*coeff*tau*Laplacian)`` spectrally."""
    g = u.grid
    uhat = to_freq(u)
    return from_freq(g, uhat * np.exp(-1j * coeff * tau * g.xi_sq))


def gradient(u: Field) -> tuple[Field, ...]:
    """Spectral partial derivatives of ``u``, one field per axis."""
    g = u.grid
    uhat = to_freq(u)
    out = []
    for ax, xi in enumerate(g.xi_axes):
        shape = [1] * g.d
        shape[ax] = -1
        out.append(from_freq(g, 1j * xi.reshape(shape) * uhat))
    return tuple(out)


# -- norms ------------------------------------------------------------------


def lebesgue_norm(u: Field, q: float) -> float:
    """``L^q`` norm by the grid quadrature (``q = inf`` for the sup norm)."""
    if q == math.inf:
        return float(np.max(np.abs(u.values)))
    if q < 1:
        raise DomainError(f"L^q norm requires q >= 1, got {q}")
    a = np.abs(u.values)
    return float((np.sum(a**q) * u.grid.cell_volume) ** (1.0 / q))


_ZERO_MODE_TOL = 1e-12


def sobolev_norm(u: Field | np.ndarray, s, homogeneous: bool = False, *, grid: Grid | None = None) -> float:
    """Discrete Sobolev norm ``( sum w(xi)^{2s} |uhat|^2 dxi )^{1/2}``.

    Parameters
    ----------
    u : Field or ndarray
        Physical field, or a frequency-side array (then ``grid`` is required).
    s : float or SobolevIndex
        Regularity exponent; a :class:`SobolevIndex` carries its own flag.
    homogeneous : bool
        Use ``w = |xi|`` instead of ``w = (1 + |xi|^2)^{1/2}``.  For ``s < 0``
        the zero mode is excluded, and a zero-mode mass fraction above 1e-12
        raises :class:`DomainError` since the continuum norm diverges there.
    """
    if isinstance(s, SobolevIndex):
        homogeneous = s.homogeneous
        s = s.s
    if isinstance(u, Field):
        grid = u.grid
        uhat = to_freq(u)
    else:
        if grid is None:
            raise ConfigurationError("frequency-side input requires grid=")
        uhat = np.asarray(u)
    power = np.abs(uhat) ** 2
    if homogeneous:
        w2 = grid.xi_sq.copy()
        if s < 0:
            total = float(np.sum(power))
            zero = float(power[(0,) * grid.d])
            if total > 0 and zero / total > _ZERO_MODE_TOL:
                raise DomainError(
                    "homogeneous norm with s < 0 is undefined: zero-mode mass "
                    f"fraction {zero / total:.3e} exceeds {_ZERO_MODE_TOL:.0e}"
                )
            w2[(0,) * grid.d] = 1.0  # excluded below
            power = power.copy()
            power[(0,) * grid.d] = 0.0
        weight = w2**s
        if s > 0:
            weight[(0,) * grid.d] = 0.0
    else:
        weight = (1.0 + grid.xi_sq) ** s
    return float(np.sqrt(np.sum(weight * power) * grid.freq_cell_volume))


# -- moment diagnostics ------------------------------------------------------

_BOUNDARY_SHELL = 0.9  # fraction of the half-width where the shell begins
_BOUNDARY_WARN = 1e-4


def boundary_mass_fraction(u: Field) -> float:
    """Fraction of the mass carried by the outer 10% shell of the box."""
    g = u.grid
    mask = np.zeros(g.n, dtype=bool)
    for ax, (x, Li) in enumerate(zip(g.x_axes, g.L)):
        shape = [1] * g.d
        shape[ax] = -1
        mask |= (np.abs(x) >= _BOUNDARY_SHELL * Li / 2).reshape(shape)
    power = np.abs(u.values) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    return float(np.sum(power[mask]) / total)


def _warn_if_boundary_heavy(u: Field, what: str) -> None:
    frac = boundary_mass_fraction(u)
    if frac > _BOUNDARY_WARN:
        warnings.warn(
            f"{what}: boundary shell holds {frac:.2e} of the mass; "
            "moment integrals on the torus are unreliable",
            AccuracyWarning,
            stacklevel=3,
        )


def moment_variance(u: Field) -> float:
    """Second moment ``v = int |x|^2 |u|^2 dx`` on the centered box.

    Warns with :class:`AccuracyWarning` if more than 1e-4 of the mass sits in
    the outer 10% shell, where the periodic ``|x|^2`` weight is meaningless.
    """
    _warn_if_boundary_heavy(u, "moment_variance")
    g = u.grid
    x_sq = _mesh_sum_sq(g.x_axes)
    return float(np.sum(x_sq * np.abs(u.values) ** 2) * g.cell_volume)


def radial_momentum(u: Field) -> float:
    """Virial flux ``4 Im int conj(u) (x . grad u) dx`` (= d/dt of the variance
    under the free flow with unit coefficient)."""
    _warn_if_boundary_heavy(u, "radial_momentum")
    g = u.grid
    acc = 0.0
    grads = gradient(u)
    for ax, gu in enumerate(grads):
        shape = [1] * g.d
        shape[ax] = -1
        x = g.x_axes[ax].reshape(shape)
        acc += float(np.sum(np.imag(np.conj(u.values) * x * gu.values)))
    return 4.0 * acc * g.cell_volume
