"""Conserved quantities, virial fluxes, and inequality checks.

The variance ``v(t) = int |x|^2 |u|^2`` of a Gabitov-Turitsyn flow obeys

    dv/dt       = gamma * vdot1 + vdot2,      vdot1 = 4 Im int conj(u) x.grad u,
    d(vdot1)/dt = -16 E - c_a Q0 - c_b P(1),

with ``P(sigma) = int |e^{i sigma Lap} u|^{p+2} dx``, ``Q0`` its plain sigma
average, ``Qs`` the sigma-weighted average, and

    vdot2 = (4(dp-4)/(p+2)) Qs + (8/(p+2)) P(1),
    c_a = 4(dp-8)/(p+2),    c_b = 16/(p+2).

All four P-coefficients are nonnegative once ``dp >= 8``, so for positive
energy the flux ``vdot1`` drifts at least linearly (``|vdot1| >= 16 E |t|``
from real data), and with Cauchy-Schwarz ``|vdot1| <= 4 sqrt(v) ||u||_H1dot``
this forces the kinetic lower bound with explicit constant 16 that the
inequality checker verifies.  The identities hold for the unit-average
variant; finite differences along captured trajectories validate them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from gtsim.core import (
    AccuracyWarning,
    ConfigurationError,
    Field,
    boundary_mass_fraction,
    moment_variance,
    radial_momentum,
    sobolev_norm,
    to_freq,
)
from gtsim.nonlinearity import (
    GTConfig,
    mass,
    potential_at_sigmas,
    potential_energy,
    resolve_quadrature,
)

if TYPE_CHECKING:  # pragma: no cover
    from gtsim.evolution import Trajectory

__all__ = [
    "DiagnosticsRecord",
    "VirialReport",
    "equipartition_ratio",
    "record",
    "spectral_tail_fraction",
    "vddot1_rhs",
    "vdot2",
    "virial_identity_residuals",
    "virial_inequality_check",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One capture-time row of scalar monitors.

    ``energy == sign(-gamma) * kinetic + potential`` by construction
    (``kinetic`` is the positive quantity ``|gamma|/2 ||grad u||^2``);
    ``hs`` holds ``(s, ||u||_{H^s})`` pairs for the requested exponents.
    """

    t: float
    mass: float
    kinetic: float
    potential: float
    energy: float
    variance: float
    vdot1: float
    equip_ratio: float
    boundary_frac: float
    hs: tuple[tuple[float, float], ...] = ()


def _unit_average_only(cfg: GTConfig, what: str) -> None:
    if cfg.variant != "averaged-unit":
        raise ConfigurationError(f"{what} is derived for the averaged-unit variant only")


def record(u: Field, t: float, cfg: GTConfig, hs=()) -> DiagnosticsRecord:
    """Scalar diagnostics of a single field; moment warnings are suppressed
    here because the boundary fraction itself is part of the record."""
    grad_sq = sobolev_norm(u, 1.0, homogeneous=True) ** 2
    potential = potential_energy(u, cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        variance = moment_variance(u)
        vdot1 = radial_momentum(u)
    return DiagnosticsRecord(
        t=float(t),
        mass=mass(u),
        kinetic=0.5 * abs(cfg.gamma) * grad_sq,
        potential=potential,
        energy=-0.5 * cfg.gamma * grad_sq + potential,
        variance=variance,
        vdot1=vdot1,
        equip_ratio=equipartition_ratio(u, cfg),
        boundary_frac=boundary_mass_fraction(u),
        hs=tuple((float(s), sobolev_norm(u, float(s))) for s in hs),
    )


def equipartition_ratio(u: Field, cfg: GTConfig) -> float:
    """Kinetic-to-potential shape ratio
    ``||u||_{H1dot}^2 / int P(sigma) dmu(sigma)`` (zero field maps to 0)."""
    denom = (cfg.p + 2) * potential_energy(u, cfg)
    num = sobolev_norm(u, 1.0, homogeneous=True) ** 2
    if denom == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / denom


def spectral_tail_fraction(u: Field, band: float = 0.75) -> float:
    """Mass fraction carried by modes with some ``|xi_i|`` beyond ``band``
    times the axis bandwidth -- the resolution monitor."""
    g = u.grid
    uhat = to_freq(u)
    mask = np.zeros(g.n, dtype=bool)
    for ax, (xi, ximax) in enumerate(zip(g.xi_axes, g.xi_max)):
        sh = [1] * g.d
        sh[ax] = -1
        mask |= (np.abs(xi) >= band * ximax).reshape(sh)
    total = float(np.sum(np.abs(uhat) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(uhat[mask]) ** 2) / total)


def _sigma_moments(u: Field, cfg: GTConfig) -> tuple[float, float, float]:
    """``(Q0, Qs, P1)``: plain and sigma-weighted table averages of P plus the
    endpoint value ``P(1)``."""
    quad = resolve_quadrature(u.grid, cfg)
    vals = potential_at_sigmas(u, cfg.p, quad.nodes)
    p1 = float(potential_at_sigmas(u, cfg.p, [1.0])[0])
    return (
        float(np.dot(quad.weights, vals)),
        float(np.dot(quad.weights * quad.nodes, vals)),
        p1,
    )


def vdot2(u: Field, cfg: GTConfig) -> float:
    """Nonlocal variance flux: the nonlinearity's contribution to dv/dt."""
    _unit_average_only(cfg, "vdot2")
    d, p = u.grid.d, cfg.p
    _, qs, p1 = _sigma_moments(u, cfg)
    return 4 * (d * p - 4) / (p + 2) * qs + 8 / (p + 2) * p1


def vddot1_rhs(u: Field, cfg: GTConfig) -> float:
    """Right-hand side of d(vdot1)/dt along the flow."""
    _unit_average_only(cfg, "vddot1_rhs")
    d, p = u.grid.d, cfg.p
    q0, _, p1 = _sigma_moments(u, cfg)
    grad_sq = sobolev_norm(u, 1.0, homogeneous=True) ** 2
    e = -0.5 * cfg.gamma * grad_sq + q0 / (p + 2)
    return -16 * e - 4 * (d * p - 8) / (p + 2) * q0 - 16 / (p + 2) * p1


def virial_identity_residuals(traj: "Trajectory", stride: int = 1) -> dict[str, float]:
    """Centered-difference validation of the two virial identities along a
    uniformly captured trajectory: max relative residuals of
    ``dv/dt = gamma vdot1 + vdot2`` and ``d(vdot1)/dt = vddot1_rhs`` over
    interior captures (subsampled by ``stride``).  Both are O(h^2) in the
    capture spacing."""
    cfg = traj.cfg
    _unit_average_only(cfg, "virial_identity_residuals")
    ts = np.asarray(traj.times)
    if len(ts) < 3:
        raise ConfigurationError("need at least 3 captures for centered differences")
    h = ts[1] - ts[0]
    if not np.allclose(np.diff(ts), h, rtol=1e-9, atol=1e-12 * abs(h)):
        raise ConfigurationError("virial finite differences require uniform captures")
    v = np.array([r.variance for r in traj.records])
    w = np.array([r.vdot1 for r in traj.records])
    interior = range(1, len(ts) - 1, stride)
    rhs_v = {k: cfg.gamma * w[k] + vdot2(traj.fields[k], cfg) for k in interior}
    rhs_w = {k: vddot1_rhs(traj.fields[k], cfg) for k in interior}
    scale_v = max(max(abs(x) for x in rhs_v.values()), 1e-300)
    scale_w = max(max(abs(x) for x in rhs_w.values()), 1e-300)
    res_v = max(abs((v[k + 1] - v[k - 1]) / (2 * h) - rhs_v[k]) for k in rhs_v) / scale_v
    res_w = max(abs((w[k + 1] - w[k - 1]) / (2 * h) - rhs_w[k]) for k in rhs_w) / scale_w
    return {"dvariance": float(res_v), "dvdot1": float(res_w), "h": float(h)}


@dataclass(frozen=True)
class VirialReport:
    """Sign-resolved virial inequality margins along a trajectory.

    Margins are worst-case (most negative) relative slacks; a check passes
    when its margin exceeds ``-tol``.  The bounds derive from
    ``d(vdot1)/dt <= -16 E`` (valid for ``d p >= 8``), so:

    * ``monotone_margin`` -- slack of ``sign(t) (vdot1 - vdot1(0) + 16 E t)
      <= 0``, both time directions.
    * ``quad_margin`` / ``quad_constant`` -- the quadratic variance bound.
      The sigma average over [0, 1] breaks time reversal, so this is
      one-sided: focusing dispersion bounds ``v`` above on ``t <= 0``
      (explicit constant 8); defocusing bounds it below on ``t >= 0``, and
      ``quad_constant`` is then the fitted constant
      ``min (v - v0 + vdot1(0) t) / (E t^2) >= 8``.
    * ``kinetic_margin`` -- slack of ``||u||_H1dot^2 v(t) >= 16 E^2 t^2``,
      the Cauchy-Schwarz kinetic lower bound for data with
      ``vdot1(0) = 0`` and positive energy.

    A margin is NaN when the trajectory has no captures in the applicable
    regime; ``ok`` requires every applicable margin to clear ``-tol``.
    """

    gamma: float
    energy: float
    variance0: float
    vdot1_0: float
    quad_margin: float
    quad_constant: float
    monotone_margin: float
    kinetic_margin: float
    ok: bool


def virial_inequality_check(traj: "Trajectory", tol: float = 1e-6) -> VirialReport:
    """Evaluate the sign-split virial inequalities on a captured trajectory."""
    cfg = traj.cfg
    _unit_average_only(cfg, "virial_inequality_check")
    d, p = traj.fields[0].grid.d, cfg.p
    if d * p < 8:
        raise ConfigurationError(
            f"virial inequality bounds require d * p >= 8, got d = {d}, p = {p}"
        )
    ts = np.asarray(traj.times)
    v = np.array([r.variance for r in traj.records])
    w = np.array([r.vdot1 for r in traj.records])
    kin = np.array([2 * r.kinetic / abs(cfg.gamma) for r in traj.records])
    e = traj.records[0].energy
    v0, w0 = v[0], w[0]
    tiny = 1e-300
    nz = np.abs(ts) > 0

    drift = w - w0 + 16.0 * e * ts
    if np.any(nz):
        scale = np.maximum(np.abs(w - w0)[nz] + np.abs(16.0 * e * ts[nz]), tiny)
        monotone_margin = float(np.min(-np.sign(ts[nz]) * drift[nz] / scale))
    else:
        monotone_margin = math.nan

    if cfg.gamma > 0:
        quad_constant = 8.0
        sel = nz & (ts <= 0.0)
        if np.any(sel):
            bound = v0 + w0 * ts[sel] - 8.0 * e * ts[sel] ** 2
            scale = np.maximum.reduce(
                [np.abs(v[sel]), np.full(sel.sum(), abs(v0)), np.full(sel.sum(), tiny)]
            )
            quad_margin = float(np.min((bound - v[sel]) / scale))
        else:
            quad_margin = math.nan
    else:
        sel = nz & (ts >= 0.0)
        if np.any(sel) and e != 0.0:
            ratios = (v[sel] - v0 + w0 * ts[sel]) / (e * ts[sel] ** 2)
            quad_constant = float(np.min(ratios))
            quad_margin = (quad_constant - 8.0) / 8.0
        else:
            quad_constant = math.nan
            quad_margin = math.nan

    if e > 0 and np.any(nz):
        rhs = 16.0 * e**2 * ts[nz] ** 2
        kinetic_margin = float(np.min((kin[nz] * v[nz] - rhs) / np.maximum(rhs, tiny)))
    else:
        kinetic_margin = math.nan

    margins = [monotone_margin, quad_margin, kinetic_margin]
    applicable = [m for m in margins if not math.isnan(m)]
    ok = bool(applicable) and all(m >= -tol for m in applicable)
    return VirialReport(
        gamma=cfg.gamma,
        energy=float(e),
        variance0=float(v0),
        vdot1_0=float(w0),
        quad_margin=quad_margin,
        quad_constant=quad_constant,
        monotone_margin=monotone_margin,
        kinetic_margin=kinetic_margin,
        ok=ok,
    )
