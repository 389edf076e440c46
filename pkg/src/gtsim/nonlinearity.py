"""The sigma-averaged Gabitov-Turitsyn nonlinearity and its invariants.

The equation's nonlinear term is

    G[u] = int exp(-i sigma Lap) [ |v_sigma|^p v_sigma ] dmu(sigma),
    v_sigma = exp(i sigma Lap) u,

where ``mu`` is one of three measures on a sigma interval: the unit average on
[0, 1], the average on [0, lam], or plain Lebesgue measure on [0, lam].  The
sigma integral is evaluated by a fixed node/weight table; products are
dealiased by zero padding (factor (p+2)/2 per axis), so the computed flow is
exactly the Hamiltonian flow of the discrete energy reported by
:func:`energy` -- conservation drift therefore measures time integration, not
the sigma table.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gtsim.core import ConfigurationError, Field, Grid, from_freq, sobolev_norm, to_freq

__all__ = [
    "GTConfig",
    "SigmaQuadrature",
    "VARIANTS",
    "energy",
    "gt_nonlinearity",
    "mass",
    "potential_energy",
    "resolve_quadrature",
]

VARIANTS = ("averaged-unit", "averaged-interval", "integrated-interval")

_POINTS_PER_PANEL = 4
_MIN_NODES = 8


@dataclass(frozen=True, eq=False)
class SigmaQuadrature:
    """Node/weight table for the sigma integral on ``[0, lam]``.

    ``resolved_rate`` records the largest phase rate ``|xi|^2`` the table was
    validated for (panel width below ``pi / rate``); ``None`` marks a
    user-supplied table accepted without validation.
    """

    nodes: np.ndarray
    weights: np.ndarray
    lam: float
    resolved_rate: float | None = None

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ConfigurationError("quadrature nodes/weights must be matching 1d arrays")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigurationError(f"sigma interval length must be positive, got {self.lam}")
        if np.any(nodes < -1e-12) or np.any(nodes > self.lam * (1 + 1e-12)):
            raise ConfigurationError("sigma nodes must lie in [0, lam]")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @staticmethod
    def required_nodes(lam: float, max_rate: float) -> int:
        """Node count the panel rule assigns for phase rates up to ``max_rate``."""
        panels = max(_MIN_NODES // _POINTS_PER_PANEL, math.ceil(lam * max_rate / math.pi))
        return _POINTS_PER_PANEL * panels

    @classmethod
    def gauss_legendre(
        cls,
        lam: float,
        max_rate: float,
        *,
        averaged: bool = True,
        validate: bool = True,
    ) -> "SigmaQuadrature":
        """Composite Gauss-Legendre table resolving ``exp(i sigma r)`` for
        ``|r| <= max_rate``: panel width at most ``pi / max_rate``, four points
        per panel, at least eight nodes in total.

        With ``averaged=True`` the weights sum to 1 (mean over the interval),
        otherwise to ``lam`` (plain integral).  ``validate=False`` returns the
        same table but marked unvalidated, for deliberately light tables cross
        checked by refinement instead of the grid rule.
        """
        n_nodes = cls.required_nodes(lam, max_rate)
        nodes, weights = _composite_gl(lam, n_nodes // _POINTS_PER_PANEL)
        if averaged:
            weights = weights / lam
        return cls(nodes, weights, lam, resolved_rate=float(max_rate) if validate else None)

    @classmethod
    def for_grid(cls, grid: Grid, lam: float = 1.0, *, averaged: bool = True) -> "SigmaQuadrature":
        """Rule table resolving every phase rate the grid can produce."""
        return cls.gauss_legendre(lam, grid.xi_sq_max, averaged=averaged)

    def refined(self, factor: int = 2) -> "SigmaQuadrature":
        """Fresh composite table with ``factor`` times the panel count,
        preserving the weight normalization.  Used for refinement checks."""
        panels = factor * max(2, math.ceil(self.count / _POINTS_PER_PANEL))
        nodes, weights = _composite_gl(self.lam, panels)
        if abs(self.total - 1.0) <= abs(self.total - self.lam):
            weights = weights / self.lam
        return SigmaQuadrature(nodes, weights, self.lam, resolved_rate=None)


def _composite_gl(lam: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    y, w = np.polynomial.legendre.leggauss(_POINTS_PER_PANEL)
    edges = np.linspace(0.0, lam, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * y[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class GTConfig:
    """Model parameters: power ``p`` (even, >= 2), dispersion coefficient
    ``gamma`` (nonzero), the sigma-measure variant, its interval length
    ``lam``, and an optional explicit sigma table (``None`` selects the
    grid-validated panel rule at evaluation time)."""

    p: int = 2
    gamma: float = -1.0
    variant: str = "averaged-unit"
    lam: float = 1.0
    sigma_quad: SigmaQuadrature | None = None

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or self.p % 2:
            raise ConfigurationError(f"power p must be an even integer >= 2, got {self.p}")
        if not (math.isfinite(self.gamma) and self.gamma != 0.0):
            raise ConfigurationError(f"dispersion coefficient must be finite and nonzero, got {self.gamma}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigurationError(f"sigma interval length must be positive, got {self.lam}")
        if self.variant == "averaged-unit" and self.lam != 1.0:
            raise ConfigurationError("averaged-unit variant requires lam == 1")
        if self.sigma_quad is not None:
            q = self.sigma_quad
            if abs(q.lam - self.lam) > 1e-12 * max(1.0, self.lam):
                raise ConfigurationError(
                    f"sigma table covers [0, {q.lam}] but the variant interval is [0, {self.lam}]"
                )
            target = 1.0 if self.averaged else self.lam
            if abs(q.total - target) > 1e-9 * target:
                raise ConfigurationError(
                    f"sigma weights sum to {q.total:.12g}; the {self.variant} variant requires {target:g}"
                )

    @property
    def averaged(self) -> bool:
        return self.variant != "integrated-interval"


def resolve_quadrature(grid: Grid, cfg: GTConfig) -> SigmaQuadrature:
    """The sigma table used on ``grid``: the cached panel rule when the config
    has none, otherwise the config's own table.  A table validated for a
    smaller phase rate than the grid's ``|xi|^2`` maximum is rejected."""
    if cfg.sigma_quad is None:
        return _rule_table(grid, cfg.lam, cfg.averaged)
    q = cfg.sigma_quad
    if q.resolved_rate is not None and q.resolved_rate < grid.xi_sq_max * (1 - 1e-12):
        need = SigmaQuadrature.required_nodes(cfg.lam, grid.xi_sq_max)
        raise ConfigurationError(
            f"sigma table resolves phase rates up to {q.resolved_rate:.6g} but the grid "
            f"reaches |xi|^2 = {grid.xi_sq_max:.6g}; {need} nodes are required "
            f"(got {q.count})"
        )
    return q


@functools.lru_cache(maxsize=32)
def _rule_table(grid: Grid, lam: float, averaged: bool) -> SigmaQuadrature:
    return SigmaQuadrature.for_grid(grid, lam, averaged=averaged)


# -- dealiased sigma-product kernel ------------------------------------------


@functools.lru_cache(maxsize=16)
def _pad_ctx(grid: Grid, q: int):
    shape = tuple(q * ni for ni in grid.n)
    corner = np.ix_(
        *[
            np.concatenate([np.arange(ni // 2), np.arange(q * ni - ni // 2, q * ni)])
            for ni in grid.n
        ]
    )
    xi_axes = tuple(
        2 * np.pi * np.fft.fftfreq(q * ni, d=Li / (q * ni)) for Li, ni in zip(grid.L, grid.n)
    )
    xi_sq = np.zeros((1,) * grid.d)
    for ax, v in enumerate(xi_axes):
        sh = [1] * grid.d
        sh[ax] = -1
        xi_sq = xi_sq + (v * v).reshape(sh)
    return shape, corner, xi_sq


def _dealias_factor(p: int) -> int:
    return (p + 2) // 2


def _chunk_size(ntot_pad: int) -> int:
    # keep each batched (chunk, padded-grid) array near 64 MB
    return max(1, 4_000_000 // ntot_pad)


def _pad_batch(uhat: np.ndarray, corner, shape, chunk: int) -> np.ndarray:
    out = np.zeros((chunk,) + shape, dtype=np.complex128)
    out[(slice(None),) + corner] = uhat[None]
    return out


def sigma_product_hat(
    slot_hats: Sequence[np.ndarray], grid: Grid, p: int, quad: SigmaQuadrature
) -> np.ndarray:
    """Frequency-side multilinear sigma product

        sum_m w_m e^{+i sigma_m |xi|^2} F[ prod_j C_j(e^{i sigma_m Lap} slot_j) ](xi)

    over ``p + 1`` slot spectra, with conjugation ``C_j`` on odd slots.  The
    pointwise product is dealiased by zero padding, so the result is the exact
    band-limited coefficient array of the continuum product of the slot
    interpolants, sigma node by sigma node.
    """
    if len(slot_hats) != p + 1:
        raise ConfigurationError(f"need {p + 1} slots for power {p}, got {len(slot_hats)}")
    qf = _dealias_factor(p)
    shape, corner, xi_sq_pad = _pad_ctx(grid, qf)
    ntot_pad = int(np.prod(shape))
    axes = tuple(range(-grid.d, 0))
    same = all(s is slot_hats[0] for s in slot_hats)
    s_back = ntot_pad * grid.freq_cell_volume * (2 * np.pi) ** (-grid.d / 2)
    s_fwd = (grid.cell_volume / qf**grid.d) * (2 * np.pi) ** (-grid.d / 2)
    sig = quad.nodes
    wts = quad.weights
    out = np.zeros(grid.n, dtype=np.complex128)
    chunk = _chunk_size(ntot_pad)
    bshape = (-1,) + (1,) * grid.d
    for start in range(0, sig.size, chunk):
        sl = slice(start, min(start + chunk, sig.size))
        c = sl.stop - sl.start
        phase = np.exp(-1j * sig[sl].reshape(bshape) * xi_sq_pad[None])
        if same:
            v = np.fft.ifftn(phase * _pad_batch(slot_hats[0], corner, shape, c), axes=axes)
            v *= s_back
            w = np.abs(v) ** p * v
        else:
            w = None
            for j, sh in enumerate(slot_hats):
                v = np.fft.ifftn(phase * _pad_batch(sh, corner, shape, c), axes=axes)
                v *= s_back
                if j % 2:
                    np.conj(v, out=v)
                w = v if w is None else w * v
        what = np.fft.fftn(w, axes=axes)[(slice(None),) + corner]
        back = np.exp(1j * sig[sl].reshape(bshape) * grid.xi_sq[None])
        out += s_fwd * np.tensordot(wts[sl], back * what, axes=(0, 0))
    return out


def _gt_hat(uhat: np.ndarray, grid: Grid, cfg: GTConfig, quad: SigmaQuadrature | None = None) -> np.ndarray:
    if quad is None:
        quad = resolve_quadrature(grid, cfg)
    return sigma_product_hat([uhat] * (cfg.p + 1), grid, cfg.p, quad)


def gt_nonlinearity(u: Field, cfg: GTConfig) -> Field:
    """Evaluate ``G[u]`` on the field's grid (dealiased, sigma table per cfg)."""
    return from_freq(u.grid, _gt_hat(to_freq(u), u.grid, cfg))


# -- invariants ---------------------------------------------------------------


def mass(u: Field) -> float:
    """``int |u|^2 dx`` (conserved by the flow for any real sigma weights)."""
    return float(np.sum(np.abs(u.values) ** 2) * u.grid.cell_volume)


def potential_at_sigmas(u: Field, p: int, sigmas) -> np.ndarray:
    """``P(sigma) = int |exp(i sigma Lap) u|^{p+2} dx`` at the given sigmas.

    Evaluated on the dealiasing grid so the quadrature is exact for the
    band-limited field (up to one negligible wrap-around coefficient).
    """
    grid = u.grid
    qf = _dealias_factor(p)
    shape, corner, xi_sq_pad = _pad_ctx(grid, qf)
    ntot_pad = int(np.prod(shape))
    axes = tuple(range(-grid.d, 0))
    s_back = ntot_pad * grid.freq_cell_volume * (2 * np.pi) ** (-grid.d / 2)
    dv_pad = grid.cell_volume / qf**grid.d
    uhat = to_freq(u)
    sig = np.atleast_1d(np.asarray(sigmas, dtype=float))
    out = np.empty(sig.size)
    chunk = _chunk_size(ntot_pad)
    bshape = (-1,) + (1,) * grid.d
    for start in range(0, sig.size, chunk):
        sl = slice(start, min(start + chunk, sig.size))
        c = sl.stop - sl.start
        phase = np.exp(-1j * sig[sl].reshape(bshape) * xi_sq_pad[None])
        v = np.fft.ifftn(phase * _pad_batch(uhat, corner, shape, c), axes=axes)
        a = s_back * np.abs(v)
        out[sl] = np.sum(a ** (p + 2), axis=axes) * dv_pad
    return out


def potential_energy(u: Field, cfg: GTConfig) -> float:
    """``(p+2)^{-1} int P(sigma) dmu(sigma)`` with the config's sigma table."""
    quad = resolve_quadrature(u.grid, cfg)
    vals = potential_at_sigmas(u, cfg.p, quad.nodes)
    return float(np.dot(quad.weights, vals) / (cfg.p + 2))


def energy(u: Field, cfg: GTConfig) -> float:
    """Conserved energy ``-(gamma/2) |grad u|^2 + potential``."""
    kinetic = sobolev_norm(u, 1.0, homogeneous=True) ** 2
    return -0.5 * cfg.gamma * kinetic + potential_energy(u, cfg)
