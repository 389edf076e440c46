"""Desk-scale numerical studies emitting fitted exponents and verdicts.

Each ``run_*`` function reproduces one quantitative mechanism of the
Gabitov-Turitsyn theory at parameters a workstation can afford and returns an
:class:`ExperimentReport`: the effective parameters (after any grid
snapping), least-squares power-law fits, named boolean checks, measured
values, and free-form notes.  Asymptotic limits are out of reach, so every
claim is verified as a fitted scaling exponent plus ordering or dominance
booleans at moderate parameters: exponents are robust to the profile and the
cutoffs, while absolute constants are not, and only the former are asserted.

The studies:

- :func:`run_inflation_negative` -- amplification of the first Picard term
  from paired frequency boxes at negative regularity: linear-in-time growth,
  the output floor growing like ``N^(1+7*delta)``, the data norm shrinking,
  and the next two terms dominated by the first.
- :func:`run_analytic_ip` -- growth of the first-term duality ratio on
  smooth annulus bumps below the modified scaling regularity, with the flat
  slope at the critical index as negative control.
- :func:`run_equipartition` -- backward defocusing flow from Gaussian data
  driving the kinetic/potential ratio up by an order of magnitude, with
  spectral-tail and quadrature-refinement monitoring.
- :func:`run_inflation_energy` -- the Gaussian scaling identities behind
  norm inflation at positive regularity (scalings-only mode: the full-solve
  window needs more dimensions than a desk run affords, and the identities
  are dimension-parametric).
- :func:`run_symmetry_check` -- dilation covariance of the flow across the
  nonlinearity variants, measured through the integral-equation residual,
  with a deliberately mismatched variant as negative control.
- :func:`run_virial_check` -- variance and momentum identities along a flow,
  and (focusing) the variance-pinch route to a blow-up flag with the kinetic
  lower bound checked on the way.

Sweep points own their state and are evaluated in the order given, so a
rerun of the same spec reproduces its report bit for bit.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from gtsim.core import (
    AccuracyWarning,
    ConfigurationError,
    DomainError,
    Field,
    free_propagate,
    from_freq,
    make_grid,
    moment_variance,
    sobolev_norm,
    to_freq,
)
from gtsim.data import (
    InflationParams,
    annulus_bump,
    critical_regularities,
    effective_box_params,
    freq_box_data,
    freq_box_spectrum,
    gaussian_data,
    rescale_integrated,
    rescale_monomial,
)
from gtsim.diagnostics import (
    record,
    spectral_tail_fraction,
    virial_identity_residuals,
    virial_inequality_check,
)
from gtsim.evolution import SolverParams, Trajectory, duhamel_residual, evolve, suggest_dt
from gtsim.nonlinearity import GTConfig, SigmaQuadrature, gt_nonlinearity, potential_at_sigmas
from gtsim.picard import TimeNodes, xi1_closed_form, xi1_spectral, xi_series

__all__ = [
    "EXPERIMENTS",
    "ExperimentReport",
    "FitResult",
    "SweepSpec",
    "fit_power_law",
    "run_analytic_ip",
    "run_equipartition",
    "run_inflation_energy",
    "run_inflation_negative",
    "run_sweep",
    "run_symmetry_check",
    "run_virial_check",
]

_TINY = float(np.finfo(np.float64).tiny)


# -- fitting ------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    """Least-squares power law ``y = exp(intercept) * x**exponent``.

    Fitted on log-log points; ``r_squared`` is reported as computed, never
    thresholded away.  ``stderr`` is the standard error of the exponent and
    is NaN with fewer than three points.
    """

    exponent: float
    stderr: float
    r_squared: float
    intercept: float
    points: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "intercept": self.intercept,
            "points": [[x, y] for x, y in self.points],
        }


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> FitResult:
    """Fit ``log y = intercept + exponent * log x`` by least squares."""
    ax = np.asarray(xs, dtype=float)
    ay = np.asarray(ys, dtype=float)
    if ax.ndim != 1 or ax.shape != ay.shape or ax.size < 2:
        raise ConfigurationError("power-law fit needs two or more (x, y) pairs")
    if np.any(ax <= 0.0) or np.any(ay <= 0.0):
        raise DomainError("power-law fit requires strictly positive points")
    lx = np.log(ax)
    ly = np.log(ay)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    if sxx == 0.0:
        raise DomainError("degenerate power-law fit: all abscissae equal")
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    m = ax.size
    stderr = math.nan if m < 3 else math.sqrt(ss_res / (m - 2) / sxx)
    return FitResult(
        exponent=slope,
        stderr=stderr,
        r_squared=r_squared,
        intercept=intercept,
        points=tuple(zip(ax.tolist(), ay.tolist())),
    )


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentReport:
    """Flat, serialization-ready outcome of one study.

    ``params`` embeds the exact effective parameters (post-snapping) and
    every tolerance used, so the report alone reproduces the run.  ``verdict``
    is ``"pass"``, ``"fail"``, or ``"inconclusive"`` -- the last when a
    resolution monitor (not a scientific check) failed.  ``series`` carries
    per-capture diagnostics rows for studies that integrate a flow.
    """

    experiment: str
    params: dict
    fits: dict[str, FitResult]
    checks: dict[str, bool]
    values: dict[str, float]
    notes: tuple[str, ...]
    verdict: str
    series: tuple = ()

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "verdict": self.verdict,
            "passed": self.passed,
            "params": _jsonable(self.params),
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "checks": dict(self.checks),
            "values": _jsonable(self.values),
            "notes": list(self.notes),
            "series_length": len(self.series),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _verdict(checks: dict[str, bool], monitors: Sequence[str] = ()) -> str:
    """Pass/fail from the checks, except that a failed *monitor* check (a
    resolution or adequacy guard) makes the whole study inconclusive."""
    if any(not checks[k] for k in monitors if k in checks):
        return "inconclusive"
    return "pass" if checks and all(checks.values()) else "fail"


# -- sweep plumbing ------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of one study invocation.

    ``grid`` supplies the study's sweep axes (for example the ``n_values``
    list), ``fixed`` pins the remaining keyword parameters, and
    ``tolerances`` overrides the ``tol_*`` keywords.  All three are merged
    into a single keyword set for the runner, so the spec is a complete and
    reproducible record of the call.
    """

    experiment: str
    grid: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out_path: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            known = ", ".join(sorted(EXPERIMENTS))
            raise ConfigurationError(f"unknown experiment {self.experiment!r}; known: {known}")
        if not self.grid:
            raise ConfigurationError("sweep needs a nonempty parameter grid")
        for key, value in self.grid.items():
            if isinstance(value, (list, tuple)) and len(value) == 0:
                raise ConfigurationError(f"sweep axis {key!r} is empty")

    def kwargs(self) -> dict:
        merged = dict(self.grid)
        merged.update(self.fixed)
        merged.update(self.tolerances)
        return merged


def run_sweep(spec: SweepSpec) -> ExperimentReport:
    """Run the study a :class:`SweepSpec` describes."""
    return EXPERIMENTS[spec.experiment](**spec.kwargs())


# -- negative-regularity first-term amplification ------------------------------


def run_inflation_negative(
    n_values: Sequence[float] = (8.0, 16.0, 32.0),
    delta: float = 0.2,
    s: float = -2.25,
    *,
    dxi: float = 0.125,
    n_grid: int = 2048,
    t_lo: float = 0.01,
    t_hi: float = 0.1,
    t_count: int = 5,
    t_mid: float = 0.05,
    series_n: float | None = None,
    series_order: int = 3,
    series_nodes: int = 6,
    dominance_ratio: float = 0.5,
    envelope_headroom: float = 3.0,
    tol_t_slope: float = 0.05,
    tol_min_exponent: float = 0.10,
    tol_data_exponent: float = 0.10,
    tol_refinement: float = 1e-6,
) -> ExperimentReport:
    """Amplification of the first Picard term from paired frequency boxes.

    The data is the indicator of ``[N, N+A) u [2N, 2N+A)`` with height ``R``,
    ``A = N^(1-delta)``, ``R = N^(1+3*delta)``, in one dimension with cubic
    nonlinearity and gamma = -1.  Three fits: the first term grows linearly
    in time (slope 1 over ``t in [t_lo, t_hi] * N^-2`` at the largest ``N``);
    its output floor ``min_{|xi| < A} |Xi1-hat(t_mid * N^-2)|`` grows like
    ``N^(1+7*delta)`` (open band: the half-open boxes feed no lattice pair
    to the closed left edge mode); and the data norm shrinks like
    ``N^(s + 3/2 + 5*delta/2)``.  A separate coarser lattice carries the
    Picard terms through order three at horizon ``T = N^(-3-6*delta)`` to
    check that the first term dominates the next two and that their norms
    sit under a single geometric envelope ``C^j T^j R^(2j+1) log(A)^(2j)``.
    That block runs at ``series_n`` (default: the second-largest ``N``): the
    certified sigma table needs ~``8 N^2`` resolved phase, so its cost grows
    like ``N^2``-to-``N^3`` and the doubled-table refinement pass is part of
    the certificate -- the default is the largest scale whose certified
    series fits a desk budget.

    ``delta`` defaults to 0.2 rather than "sufficiently small"; smaller
    values sharpen the asymptotic agreement but shrink every effect below
    fit resolution at desk scale.  ``s`` must satisfy ``s < -3/2`` and is
    chosen so the data-norm exponent stays negative.
    """
    gamma = -1.0
    ns = tuple(sorted(float(v) for v in n_values))
    if len(ns) < 2:
        raise ConfigurationError("need at least two N values to fit exponents")
    if not s < -1.5:
        raise ConfigurationError("negative-regularity amplification needs s < -3/2")
    if not 0.0 < delta < 1.0:
        raise ConfigurationError("delta must lie in (0, 1)")
    if s + 1.5 + 2.5 * delta >= 0.0:
        raise ConfigurationError(
            "s + 3/2 + 5*delta/2 must be negative so the data norm shrinks with N"
        )
    grid = make_grid(2.0 * math.pi / dxi, n_grid)

    notes: list[str] = []
    n_effs: list[float] = []
    a_effs: list[float] = []
    data_norms: list[float] = []
    band_mins: list[float] = []
    xi1_at_horizon: list[float] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for n_req in ns:
            par = InflationParams.from_power_law(n_req, delta)
            n_eff, a_eff = effective_box_params(par, grid)
            phihat = freq_box_spectrum(par, grid)
            data_norms.append(sobolev_norm(phihat, s, grid=grid))
            xh = xi1_closed_form(par, grid, t_mid * n_eff**-2, gamma=gamma)
            band = np.abs(grid.xi_axes[0]) <= a_eff - 0.5 * grid.dxi[0]
            band_mins.append(float(np.min(np.abs(xh[band]))))
            xi1_at_horizon.append(
                sobolev_norm(xi1_closed_form(par, grid, par.T, gamma=gamma), s, grid=grid)
            )
            n_effs.append(n_eff)
            a_effs.append(a_eff)
        par_top = InflationParams.from_power_law(ns[-1], delta)
        ts = np.geomspace(t_lo, t_hi, t_count) * n_effs[-1] ** -2
        growth = [
            sobolev_norm(xi1_closed_form(par_top, grid, float(t), gamma=gamma), s, grid=grid)
            for t in ts
        ]
    notes.extend(f"warning: {w.message}" for w in caught)

    fit_t = fit_power_law(ts, growth)
    fit_min = fit_power_law(n_effs, band_mins)
    fit_data = fit_power_law(n_effs, data_norms)
    expect_min = 1.0 + 7.0 * delta
    expect_data = s + 1.5 + 2.5 * delta

    # Picard terms Xi_1..Xi_3 on a coarser lattice just wide enough for the
    # box band; the sigma table resolves every phase the box data itself can
    # produce and a doubled table certifies it.
    n_series = float(series_n) if series_n is not None else ns[max(0, len(ns) - 2)]
    par_dom = InflationParams.from_power_law(n_series, delta)
    dxi_dom = 2.0 * dxi
    n_eff_d, a_eff_d = effective_box_params(
        par_dom, make_grid(2.0 * math.pi / dxi_dom, 16)
    )
    need = 3.0 * (2.0 * n_eff_d + a_eff_d) / dxi_dom
    dom_grid = make_grid(2.0 * math.pi / dxi_dom, 1 << max(4, math.ceil(math.log2(need))))
    rate = 2.0 * (2.0 * n_eff_d + a_eff_d) ** 2
    quad = SigmaQuadrature.gauss_legendre(1.0, rate, validate=False)
    cfg_dom = GTConfig(p=2, gamma=gamma, sigma_quad=quad)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        phi = freq_box_data(par_dom, dom_grid)
        nodes = TimeNodes.build(par_dom.T, count=series_nodes)
        series = xi_series(phi, nodes, cfg_dom, order=series_order)
        term_norms = [sobolev_norm(series.term(j), s) for j in range(1, series_order + 1)]
        cfg_ref = dataclasses.replace(cfg_dom, sigma_quad=quad.refined(2))
        series_ref = xi_series(phi, nodes, cfg_ref, order=series_order)
        drift = max(
            abs(sobolev_norm(series_ref.term(j), s) - term_norms[j - 1])
            / max(term_norms[j - 1], _TINY)
            for j in range(1, series_order + 1)
        )
    notes.extend(f"warning: {w.message}" for w in caught)
    notes.append(
        f"series point: N_eff={n_eff_d:g}, A_eff={a_eff_d:g}, T={par_dom.T:g}, "
        f"grid n={dom_grid.n[0]}, sigma nodes={quad.nodes.size}"
    )

    log_a = math.log(a_eff_d)
    envelope_scale = [
        par_dom.T**j * par_dom.R ** (2 * j + 1) * log_a ** (2 * j)
        for j in range(1, series_order + 1)
    ]
    env_constants = [
        (term_norms[j - 1] / envelope_scale[j - 1]) ** (1.0 / j)
        for j in range(1, series_order + 1)
    ]
    c_fit = env_constants[0]
    envelope_ok = all(
        term_norms[j - 1] <= (envelope_headroom * c_fit) ** j * envelope_scale[j - 1]
        for j in range(1, series_order + 1)
    )
    dominance_ok = (
        series_order >= 3 and term_norms[1] + term_norms[2] <= dominance_ratio * term_norms[0]
    )

    checks = {
        "t_slope": abs(fit_t.exponent - 1.0) <= tol_t_slope,
        "min_band_exponent": abs(fit_min.exponent - expect_min) <= tol_min_exponent * expect_min,
        "data_norm_exponent": abs(fit_data.exponent - expect_data) <= tol_data_exponent,
        "data_norm_decreasing": all(b < a for a, b in zip(data_norms, data_norms[1:])),
        "xi1_growing": all(b > a for a, b in zip(xi1_at_horizon, xi1_at_horizon[1:])),
        "dominance": dominance_ok,
        "envelope": envelope_ok,
        "sigma_quadrature_resolved": drift <= tol_refinement,
    }
    values = {
        "c_envelope_fit": c_fit,
        "sigma_refinement_drift": drift,
        "expected_min_exponent": expect_min,
        "expected_data_exponent": expect_data,
    }
    for j, v in enumerate(term_norms, start=1):
        values[f"term_norm_{j}"] = v
        values[f"envelope_constant_{j}"] = env_constants[j - 1]
    for n_eff, v_min, v_dat, v_xi in zip(n_effs, band_mins, data_norms, xi1_at_horizon):
        values[f"band_min_N={n_eff:g}"] = v_min
        values[f"data_norm_N={n_eff:g}"] = v_dat
        values[f"xi1_horizon_N={n_eff:g}"] = v_xi
    params = {
        "n_values": ns,
        "n_effective": tuple(n_effs),
        "a_effective": tuple(a_effs),
        "delta": delta,
        "s": s,
        "gamma": gamma,
        "p": 2,
        "dxi": dxi,
        "n_grid": n_grid,
        "t_window": (t_lo, t_hi, t_count),
        "t_mid": t_mid,
        "horizon_T": par_top.T,
        "R_top": par_top.R,
        "series_order": series_order,
        "series_nodes": series_nodes,
        "series_grid": (dom_grid.L[0], dom_grid.n[0]),
        "sigma_rate": rate,
        "dominance_ratio": dominance_ratio,
        "envelope_headroom": envelope_headroom,
        "tol_t_slope": tol_t_slope,
        "tol_min_exponent": tol_min_exponent,
        "tol_data_exponent": tol_data_exponent,
        "tol_refinement": tol_refinement,
    }
    return ExperimentReport(
        experiment="inflate-neg",
        params=params,
        fits={"t_slope": fit_t, "min_band_vs_N": fit_min, "data_norm_vs_N": fit_data},
        checks=checks,
        values=values,
        notes=tuple(notes),
        verdict=_verdict(checks, monitors=("sigma_quadrature_resolved",)),
    )


# -- analytic ill-posedness scaling --------------------------------------------


_RAD_PER_PANEL = 2.5
"""Phase budget per 6-point panel for oscillatory time integrands."""


def _panel_quadrature(
    lo: float,
    hi: float,
    max_panel: float,
    include: Sequence[float] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Composite 6-point Gauss-Legendre rule on ``[lo, hi]`` with uniform
    panels at most ``max_panel`` wide between consecutive breakpoints.  The
    breakpoints (``include``) put integrand kinks on panel edges, so every
    panel sees a smooth function resolved to the caller's phase budget.
    """
    if not lo < hi:
        raise ConfigurationError(f"empty quadrature interval [{lo:g}, {hi:g}]")
    if max_panel <= 0.0:
        raise ConfigurationError(f"panel width must be positive, got {max_panel:g}")
    cuts = sorted({lo, hi, *(b for b in include if lo < b < hi)})
    edges = [lo]
    for a, b in zip(cuts, cuts[1:]):
        k = max(1, math.ceil((b - a) / max_panel))
        edges.extend(a + (b - a) * (i + 1) / k for i in range(k))
    eds = np.asarray(edges)
    x, wq = np.polynomial.legendre.leggauss(6)
    mid = 0.5 * (eds[1:] + eds[:-1])
    half = 0.5 * (eds[1:] - eds[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wq[None, :]).ravel()
    return nodes, weights


def run_analytic_ip(
    n_values: Sequence[float] = (8.0, 16.0, 32.0),
    s_values: Sequence[float] = (-1.0, -0.5),
    horizon: float = 1.0,
    *,
    p: int = 2,
    gamma: float = 1.0,
    spacing_scale: float = 1.0,
    bandwidth_margin: float = 1.25,
    window_radius: float = 1.0,
    identity_scale: float = 4.0,
    tol_growth: float = 0.15,
    tol_flat: float = 0.10,
    tol_doubling: float = 0.05,
    tol_identity: float = 1e-6,
    tol_refinement: float = 1e-7,
) -> ExperimentReport:
    """Growth in ``N`` of the first-term operator ratio on annulus bumps.

    The data ``psi_N`` is the backward free flow, to time ``-tau*`` with
    ``tau* = min(1, gamma*horizon)``, of a smooth bump supported on ``|xi|
    in [N/4, 4N]``, so the forward flow refocuses it in the middle of the
    observation window.  Testing the first Picard term against the free
    flow of the data collapses all propagators by unitarity and Plancherel,
    leaving the positive, monotone-in-``t`` pairing

        |<e^{i gamma t Lap} psi, Xi1(psi)(t)>|
            = int_0^t int_0^1 P(gamma*r + sigma) dsigma dr,
        P(tau) = int |e^{i tau Lap} psi|^{p+2} dx,

    and ``sup_t ||Xi1(psi_N)||_{H^s}`` is bounded below by the pairing at
    ``t = horizon`` over ``||psi||_{H^-s}``.  The double integral is the
    overlap-weighted integral of ``P``, and the study keeps only its
    refocusing window ``|tau - tau*| <= window_radius/N^2``, where the peak
    contributes at the clean rate ``N^{d(p+1)-2}``: outside the window the
    dispersive tail of ``P`` adds a log factor to the full pairing (on the
    line as much as on the lattice), and on the lattice the periodized free
    flow saturates at a box-filling floor, both of which the windowed bound
    sidesteps -- by construction it only sharpens the lower bound's constant.
    The reported ratio divides by ``||psi||_{H^-s} ||psi||_{H^s}^{p+1}``
    (duality normalization times the data scale of the term) and grows like
    ``N^{p(s_m - s)}`` with ``s_m = d/2 - 2/p``: a positive slope below the
    modified scaling index, flat at it (negative control).

    Direct lattice ``H^s`` norms of the first term are *not* a usable proxy
    at desk scale: exact lattice resonances contribute a mean-field
    background of relative size ``t * dxi * N`` that is measure-zero on the
    line.  Each ``N`` therefore runs on its own grid with ``dxi =
    spacing_scale/N``, which keeps periodization artifacts a constant
    multiple of the refocusing peak, and constants cancel in the fit.

    ``P`` oscillates at phase rates up to ``32 N^2`` (the extreme resonance
    on the support), so all ``tau`` integrals use composite Gauss-Legendre
    panels holding a fixed phase budget per panel -- a constant panel count
    for the ``O(1/N^2)`` window -- with kinks of the overlap weight on panel
    edges and a doubled-panel drift monitor at the largest ``N``.  For cubic
    one-dimensional runs the *full* pairing is also recomputed from the
    explicit first-term lattice sum on a small auxiliary grid (``N =
    identity_scale``); Plancherel and unitarity are exact on the lattice, so
    agreement to ``tol_identity`` pins every constant in the reduction.  A
    side check confirms ``||psi_N||_{H^0}`` scales like ``N^{d/2}`` across
    doubling pairs on a shared grid.
    """
    d = 1
    if p < 2 or p % 2:
        raise ConfigurationError(f"p must be even and at least 2, got {p}")
    s_m, _ = critical_regularities(d, p)
    ns = tuple(sorted(float(v) for v in n_values))
    ss = tuple(float(v) for v in s_values)
    if len(ns) < 2:
        raise ConfigurationError("need at least two N values to fit the growth exponent")
    if ns[0] <= 0.0:
        raise ConfigurationError("annulus scales must be positive")
    if horizon <= 0.0:
        raise ConfigurationError("horizon must be positive")
    if gamma <= 0.0:
        raise ConfigurationError(
            "the refocusing window is posed for positive net dispersion; "
            "run the time-reversed data instead of flipping gamma"
        )
    if spacing_scale <= 0.0:
        raise ConfigurationError("spacing_scale must be positive")
    if bandwidth_margin < 1.05:
        raise ConfigurationError("bandwidth_margin must leave at least 5% spectral headroom")
    if window_radius <= 0.0:
        raise ConfigurationError("window_radius must be positive")
    for s in ss:
        if s > s_m + 1e-12:
            raise ConfigurationError(
                f"operator-norm growth is claimed only for s <= s_m = {s_m:g}; got s = {s:g}"
            )
    t_eff = gamma * horizon
    tau_star = min(1.0, t_eff)
    for n_req in ns:
        if n_req * n_req < 2.0 * window_radius / tau_star:
            raise ConfigurationError(
                f"N = {n_req:g} too small: need N^2 >= 2*window_radius/min(1, gamma*horizon) "
                "so the refocusing window stays inside the pairing region"
            )

    def grid_for(n_req: float):
        dxi = spacing_scale / n_req
        need = 8.0 * bandwidth_margin * n_req / dxi
        n_modes = 1 << max(1, math.ceil(math.log2(need)))
        return make_grid(2.0 * math.pi / dxi, n_modes)

    kinks = (tau_star, 1.0, t_eff)

    def overlap_weight(nodes: np.ndarray) -> np.ndarray:
        w = np.minimum(np.minimum(nodes, 1.0), np.minimum(t_eff, 1.0 + t_eff - nodes))
        return np.maximum(w, 0.0)

    def windowed_bound(psi: Field, n_req: float, panels_of: float = _RAD_PER_PANEL) -> float:
        half_w = window_radius / n_req**2
        rate = 32.0 * n_req**2
        nodes, wts = _panel_quadrature(
            tau_star - half_w, tau_star + half_w, panels_of / rate, include=kinks
        )
        pvals = potential_at_sigmas(psi, p, nodes)
        return float(np.dot(wts, overlap_weight(nodes) * pvals) / gamma)

    def full_pairing(psi: Field, n_req: float) -> float:
        rate = 32.0 * n_req**2
        nodes, wts = _panel_quadrature(0.0, 1.0 + t_eff, _RAD_PER_PANEL / rate, include=kinks)
        pvals = potential_at_sigmas(psi, p, nodes)
        return float(np.dot(wts, overlap_weight(nodes) * pvals) / gamma)

    notes: list[str] = []
    pairings: list[float] = []
    ratios: dict[float, list[float]] = {s: [] for s in ss}
    grid = psi = None
    for n_req in ns:
        grid = grid_for(n_req)
        psi = annulus_bump(grid, n_req, shift=-tau_star)
        val = windowed_bound(psi, n_req)
        pairings.append(val)
        for s in ss:
            denom = sobolev_norm(psi, -s) * sobolev_norm(psi, s) ** (p + 1)
            ratios[s].append(val / denom)
        notes.append(f"N={n_req:g}: dxi={grid.dxi[0]:.4g}, n={grid.n[0]}, window bound={val:.6g}")
    drift = abs(windowed_bound(psi, ns[-1], 0.5 * _RAD_PER_PANEL) - pairings[-1]) / max(
        pairings[-1], _TINY
    )

    fits: dict[str, FitResult] = {}
    checks: dict[str, bool] = {}
    values: dict[str, float] = {"tau_refinement_drift": drift}
    for s in ss:
        fit = fit_power_law(ns, ratios[s])
        fits[f"growth_s={s:g}"] = fit
        expected = p * (s_m - s)
        values[f"expected_exponent_s={s:g}"] = expected
        if abs(expected) < 1e-12:
            checks[f"flat_at_critical_s={s:g}"] = abs(fit.exponent) <= tol_flat
        else:
            checks[f"growth_s={s:g}"] = abs(fit.exponent - expected) <= tol_growth * abs(expected)
    for n_req, val in zip(ns, pairings):
        values[f"window_bound_N={n_req:g}"] = val
        for s in ss:
            values[f"ratio_N={n_req:g}_s={s:g}"] = ratios[s][ns.index(n_req)]
    checks["tau_quadrature_resolved"] = drift <= tol_refinement

    # every constant in the pairing reduction, pinned by the exact lattice sum
    if p == 2:
        g_id = grid_for(identity_scale)
        psi_id = annulus_bump(g_id, identity_scale, shift=-tau_star)
        xhat = xi1_spectral(to_freq(psi_id), g_id, horizon, GTConfig(p=2, gamma=gamma))
        tested = free_propagate(psi_id, horizon, coeff=gamma)
        inner = complex(
            np.sum(np.conj(tested.values) * from_freq(g_id, xhat).values) * g_id.cell_volume
        )
        pair_id = full_pairing(psi_id, identity_scale)
        identity_err = abs(abs(inner) - pair_id) / max(pair_id, _TINY)
        checks["pairing_identity"] = identity_err <= tol_identity
        values["pairing_identity_error"] = identity_err
    else:
        notes.append("explicit first-term cross-check is cubic-only; skipped")

    h0_norms = [sobolev_norm(annulus_bump(grid, n_req, shift=-tau_star), 0.0) for n_req in ns]
    doubling_ok = True
    doubled = 0
    for i, n_lo in enumerate(ns):
        for j, n_hi in enumerate(ns):
            if abs(n_hi - 2.0 * n_lo) <= 1e-9 * n_hi:
                doubled += 1
                ratio = h0_norms[j] / h0_norms[i]
                values[f"h0_doubling_N={n_lo:g}"] = ratio
                doubling_ok = doubling_ok and abs(ratio / 2.0 ** (d / 2.0) - 1.0) <= tol_doubling
    if doubled:
        checks["h0_doubling"] = doubling_ok
    else:
        notes.append("no doubling pairs in n_values; H^0 scaling not checked")

    params = {
        "n_values": ns,
        "s_values": ss,
        "s_m": s_m,
        "horizon": horizon,
        "gamma": gamma,
        "p": p,
        "spacing_scale": spacing_scale,
        "bandwidth_margin": bandwidth_margin,
        "window_radius": window_radius,
        "identity_scale": identity_scale,
        "tol_growth": tol_growth,
        "tol_flat": tol_flat,
        "tol_doubling": tol_doubling,
        "tol_identity": tol_identity,
        "tol_refinement": tol_refinement,
    }
    return ExperimentReport(
        experiment="ipscale",
        params=params,
        fits=fits,
        checks=checks,
        values=values,
        notes=tuple(notes),
        verdict=_verdict(checks, monitors=("tau_quadrature_resolved",)),
    )


# -- equipartition under backward defocusing flow ------------------------------


def run_equipartition(
    width: float = 1.0,
    *,
    p: int = 8,
    product: float = 10.0,
    amp: float | None = None,
    box: float = 25.6,
    n_grid: int = 1024,
    dt: float | None = None,
    capture_count: int = 40,
    sigma_rate: float | None = None,
    tail_band: float = 0.75,
    tail_limit: float = 1e-6,
    ratio_target: float = 10.0,
    initial_ratio_limit: float = 0.25,
    fit_window: float = 0.5,
    tol_bound: float = 1e-3,
    tol_refinement: float = 1e-5,
    safety: float = 0.1,
) -> ExperimentReport:
    """Backward defocusing run from a Gaussian driving equipartition.

    Starts from ``u0 = A exp(-x^2 / (4 width^2))`` with ``A^p width^4 =
    product`` (amplitude derived unless given), gamma = -1, and integrates
    backward to ``T = -sqrt(v(0)/E)``.  The sigma-averaged potential decays
    under self-compression much faster than the kinetic term grows, so the
    kinetic/potential ratio -- tiny at ``t = 0`` by construction -- must grow
    by ``ratio_target`` by time ``T``.  Along the way the kinetic term obeys
    ``||u||^2_{H1-dot} >= c E^2 t^2 / (v(0) + E t^2)`` with a single constant
    ``c`` fitted on the first ``fit_window`` fraction of the run and then
    required pointwise on all captures.

    Resolution is monitored, not assumed: the spectral tail beyond
    ``tail_band`` of the band must stay under ``tail_limit``, and the final
    nonlinearity evaluation must be stable under sigma-table refinement;
    failing either makes the verdict "inconclusive" rather than "fail".
    """
    gamma = -1.0
    d = 1
    if p * d < 8:
        raise ConfigurationError("equipartition mechanism needs p >= 8/d")
    if amp is None:
        if product < 10.0 - 1e-9:
            raise ConfigurationError("equipartition data needs A^p width^4 >= 10")
        amp = (product / width**4) ** (1.0 / p)
    product_eff = amp**p * width**4
    if product_eff < 10.0 - 1e-9:
        raise ConfigurationError(
            f"A^p width^4 = {product_eff:.6g} < 10: the potential does not dominate at t=0"
        )
    grid = make_grid(box, n_grid)
    u0 = gaussian_data(grid, amp=amp, width=width)
    if sigma_rate is None:
        # resolve phases across the initial band with headroom for the
        # compression the run itself produces; adequacy is certified after
        # the fact by the refinement check
        sigma_rate = (16.0 / width) ** 2
    quad = SigmaQuadrature.gauss_legendre(1.0, sigma_rate, validate=False)
    cfg = GTConfig(p=p, gamma=gamma, sigma_quad=quad)

    rec0 = record(u0, 0.0, cfg)
    e = rec0.energy
    v0 = rec0.variance
    if e <= 0.0:
        raise DomainError("defocusing energy must be positive for the pinch time")
    t_star = -math.sqrt(v0 / e)
    if dt is None:
        dt = -suggest_dt(u0, cfg)
    dt = -abs(dt)
    capture_every = max(1, round(abs(t_star / dt) / capture_count))
    params_s = SolverParams(dt=dt, t_final=t_star, safety=safety, capture_every=capture_every)
    traj = evolve(u0, cfg, params_s)

    recs = traj.records
    ratios = np.array([r.equip_ratio for r in recs])
    tails = np.array([spectral_tail_fraction(f, band=tail_band) for f in traj.fields])
    ts = np.asarray(traj.times)
    grad_sq = 2.0 * np.array([r.kinetic for r in recs])  # kinetic = |gamma|/2 * grad^2

    growth = float(ratios[-1] / ratios[0]) if ratios[0] > 0 else math.inf
    nz = np.abs(ts) > 0
    bound_floor = e**2 * ts[nz] ** 2 / (v0 + e * ts[nz] ** 2)
    quotient = grad_sq[nz] / bound_floor
    window = np.abs(ts[nz]) <= fit_window * abs(t_star)
    c_fit = float(np.min(quotient[window])) if np.any(window) else math.nan
    pointwise_ok = bool(np.all(grad_sq[nz] >= c_fit * (1.0 - tol_bound) * bound_floor))

    u_final = traj.final
    g_run = gt_nonlinearity(u_final, cfg)
    g_ref = gt_nonlinearity(u_final, dataclasses.replace(cfg, sigma_quad=quad.refined(2)))
    scale = float(np.linalg.norm(g_ref.values))
    drift = float(np.linalg.norm(g_run.values - g_ref.values)) / max(scale, _TINY)

    checks = {
        "initial_ratio_small": float(ratios[0]) <= initial_ratio_limit,
        "ratio_growth": growth >= ratio_target,
        "kinetic_lower_bound": pointwise_ok,
        "completed": traj.completed,
        "tail_resolved": float(np.max(tails)) <= tail_limit,
        "sigma_quadrature_resolved": drift <= tol_refinement,
    }
    values = {
        "energy": e,
        "variance_0": v0,
        "t_star": t_star,
        "ratio_initial": float(ratios[0]),
        "ratio_final": float(ratios[-1]),
        "ratio_growth": growth,
        "c_fit": c_fit,
        "tail_max": float(np.max(tails)),
        "sigma_refinement_drift": drift,
        "captures": float(len(recs)),
    }
    notes = []
    if traj.flag:
        notes.append(f"solver flag: {traj.flag}")
    params = {
        "p": p,
        "gamma": gamma,
        "amp": amp,
        "width": width,
        "product": product_eff,
        "box": box,
        "n_grid": n_grid,
        "dt": dt,
        "capture_every": capture_every,
        "sigma_rate": sigma_rate,
        "sigma_nodes": quad.count,
        "tail_band": tail_band,
        "tail_limit": tail_limit,
        "ratio_target": ratio_target,
        "initial_ratio_limit": initial_ratio_limit,
        "fit_window": fit_window,
        "tol_bound": tol_bound,
        "tol_refinement": tol_refinement,
        "safety": safety,
    }
    return ExperimentReport(
        experiment="equipartition",
        params=params,
        fits={},
        checks=checks,
        values=values,
        notes=tuple(notes),
        verdict=_verdict(
            checks, monitors=("tail_resolved", "sigma_quadrature_resolved", "completed")
        ),
        series=recs,
    )


# -- positive-regularity scaling identities ------------------------------------


def _averaged_potential_integral(u: Field, p: int, scale: float) -> float:
    """Mean-free integral over sigma in [0, 1] of the interaction potential
    ``P(sigma)``, with panels graded dyadically near zero to resolve the
    algebraic concentration at ``sigma ~ scale``."""
    edges = [0.0, min(max(scale, 1e-12), 1.0)]
    while edges[-1] < 1.0:
        edges.append(min(2.0 * edges[-1], 1.0))
    x, w = np.polynomial.legendre.leggauss(6)
    nodes: list[float] = []
    weights: list[float] = []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.extend(0.5 * (a + b) + half * x)
        weights.extend(half * w)
    vals = potential_at_sigmas(u, p, np.asarray(nodes))
    return float(np.dot(weights, vals))


def run_inflation_energy(
    sigmas: Sequence[float] = (0.02, 0.032, 0.05, 0.08),
    s: float = 1.25,
    *,
    d_theory: int = 4,
    p: int = 8,
    amp: float = 1.0,
    eps_values: Sequence[float] = (1e-1, 1e-2, 1e-3),
    box: float = 8.0,
    n_grid: int = 2048,
    tol_exponent: float = 0.02,
    tol_identity: float = 1e-10,
) -> ExperimentReport:
    """Gaussian scaling identities behind norm inflation at positive regularity.

    For ``u0 = A exp(-x^2/(4 sigma^2))`` at fixed ``A``, four quantities are
    fitted against ``sigma`` and must match their closed-form exponents
    within ``tol_exponent`` (relative): ``||u0||^2_{H^s} ~ sigma^(d-2s)``,
    ``v(0) ~ sigma^(d+2)``, ``||u0||^2_{H1-dot} ~ sigma^(d-2)``, and the
    sigma-averaged potential ``U(0) ~ sigma^(d+2)`` -- the extra two powers
    relative to a single-time potential being the signature of the
    dispersion-managed averaging.  Separately, the parameter choice
    ``sigma^(2(d/2-4/p-s)) = eps^(1+4/(sp))``, ``A^p = eps^(-2/s) sigma^-4``
    must satisfy ``(A^p sigma^4)^s = eps^-2`` exactly (checked to
    ``tol_identity`` in logs for each requested ``eps`` at the theory
    dimension ``d_theory``).

    Scalings-only mode: the full-solve inflation window needs ``s_i > 1``
    and ``1 <= s < s_i``, which forces more dimensions than a desk grid
    affords; the identities are dimension-parametric and verified here in
    d = 1 where the Gaussian family is cheap and exactly resolved.  The
    defocusing mechanism and the focusing proxy are exercised by the
    equipartition and virial studies.
    """
    d = 1
    s_i_theory = d_theory / 2.0 - 4.0 / p
    if not s_i_theory > 1.0:
        raise ConfigurationError(
            f"theory point needs s_i = d/2 - 4/p > 1; got {s_i_theory:g} at d={d_theory}, p={p}"
        )
    if not 1.0 <= s < s_i_theory:
        raise ConfigurationError(
            f"inflation window needs 1 <= s < s_i = {s_i_theory:g}; got s = {s:g}"
        )
    ws = tuple(sorted(float(v) for v in sigmas))
    if len(ws) < 2:
        raise ConfigurationError("need at least two widths to fit exponents")
    if ws[0] <= 0.0:
        raise ConfigurationError("widths must be positive")
    grid = make_grid(box, n_grid)
    xi_max = grid.xi_max[0]
    if 8.0 / ws[0] > xi_max:
        raise ConfigurationError(
            f"width {ws[0]:g} has bandwidth ~{8.0 / ws[0]:.3g} beyond the grid band {xi_max:.3g}"
        )

    hs_sq: list[float] = []
    kin_sq: list[float] = []
    var0: list[float] = []
    pot0: list[float] = []
    for w in ws:
        u0 = gaussian_data(grid, amp=amp, width=w)
        hs_sq.append(sobolev_norm(u0, s) ** 2)
        kin_sq.append(sobolev_norm(u0, 1.0, homogeneous=True) ** 2)
        var0.append(moment_variance(u0))
        pot0.append(_averaged_potential_integral(u0, p, w * w) / (p + 2))

    targets = {
        "hs_norm_sq": (hs_sq, d - 2.0 * s),
        "variance": (var0, d + 2.0),
        "kinetic_sq": (kin_sq, d - 2.0),
        "potential": (pot0, d + 2.0),
    }
    fits: dict[str, FitResult] = {}
    checks: dict[str, bool] = {}
    values: dict[str, float] = {}
    for name, (ys, expected) in targets.items():
        fit = fit_power_law(ws, ys)
        fits[name] = fit
        checks[f"exponent_{name}"] = abs(fit.exponent - expected) <= tol_exponent * abs(expected)
        values[f"expected_{name}"] = expected

    worst = 0.0
    for eps in eps_values:
        log_eps = math.log(eps)
        log_sigma = (1.0 + 4.0 / (s * p)) / (2.0 * (s_i_theory - s)) * log_eps
        log_a_p = -2.0 / s * log_eps - 4.0 * log_sigma
        resid = abs(math.expm1(s * (log_a_p + 4.0 * log_sigma) + 2.0 * log_eps))
        worst = max(worst, resid)
        values[f"identity_residual_eps={eps:g}"] = resid
        values[f"sigma_eps={eps:g}"] = math.exp(log_sigma)
    checks["parameter_identity"] = worst <= tol_identity

    params = {
        "sigmas": ws,
        "s": s,
        "d_run": d,
        "d_theory": d_theory,
        "p": p,
        "amp": amp,
        "eps_values": tuple(float(e) for e in eps_values),
        "box": box,
        "n_grid": n_grid,
        "s_i_theory": s_i_theory,
        "tol_exponent": tol_exponent,
        "tol_identity": tol_identity,
    }
    notes = (
        "scalings-only mode: the full-solve window (1 <= s < s_i with s_i > 1) needs "
        "d >= 3 grids; the identities checked here are dimension-parametric. The "
        "defocusing mechanism runs in the equipartition study and the focusing proxy "
        "in the virial study.",
    )
    return ExperimentReport(
        experiment="inflate-energy",
        params=params,
        fits=fits,
        checks=checks,
        values=values,
        notes=notes,
        verdict=_verdict(checks),
    )


# -- dilation covariance across variants ---------------------------------------


_VARIANT_MAPS: dict[str, Callable] = {
    "averaged-interval": rescale_monomial,
    "integrated-interval": rescale_integrated,
}


def run_symmetry_check(
    lams: Sequence[int] = (1, 2),
    variant: str = "averaged-interval",
    *,
    p: int = 2,
    gamma: float = -1.0,
    amp: float = 1.0,
    width: float = 1.0,
    box: float = 24.0,
    n_grid: int = 192,
    dt: float = 5e-3,
    t_final: float = 0.06,
    residual_factor: float = 5.0,
    control_factor: float = 100.0,
    include_control: bool = True,
) -> ExperimentReport:
    """Dilation covariance of the flow, measured by the integral residual.

    A reference trajectory of the unit-averaged equation is rescaled by
    ``lambda`` (exact frequency relabeling onto the dilated torus, no
    interpolation) and the mapped captures are tested as a solution of the
    matching variant with endpoint ``lambda^2``: ``"averaged-interval"``
    pairs with the amplitude map ``lambda^(-2/p)``, ``"integrated-interval"``
    with ``lambda^(-4/p)``.  The integral-equation residual of the mapped
    trajectory must stay within ``residual_factor`` of the reference's own
    residual (the solver tolerance); testing the same mapped captures against
    the *other* variant is the negative control and must exceed
    ``control_factor`` times the tolerance.

    ``lambda = 1`` degenerates to self-consistency and is reported as such.
    The relabeling keeps the mode count fixed (the box dilates instead), so
    no grid enlargement occurs for any ``lambda``.
    """
    if variant not in _VARIANT_MAPS:
        known = ", ".join(sorted(_VARIANT_MAPS))
        raise ConfigurationError(f"variant must be one of {known}; got {variant!r}")
    lam_list = tuple(int(v) for v in lams)
    for lam, requested in zip(lam_list, lams):
        if lam != requested or lam < 1:
            raise ConfigurationError("dilation factors must be integers >= 1")
    grid = make_grid(box, n_grid)
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        u0 = gaussian_data(grid, amp=amp, width=width)
    notes.extend(f"warning: {w.message}" for w in caught)
    cfg0 = GTConfig(p=p, gamma=gamma, variant="averaged-unit")
    params_s = SolverParams(dt=dt, t_final=t_final, capture_every=1)
    traj = evolve(u0, cfg0, params_s)
    r_self = duhamel_residual(traj)

    rescale = _VARIANT_MAPS[variant]
    other = next(v for v in _VARIANT_MAPS if v != variant)
    checks: dict[str, bool] = {}
    values: dict[str, float] = {"residual_self": r_self}
    for lam in lam_list:
        lam_sq = float(lam * lam)
        mapped = tuple(rescale(f, float(lam), p) for f in traj.fields)
        times = tuple(lam_sq * t for t in traj.times)
        cfg_m = GTConfig(p=p, gamma=gamma, variant=variant, lam=lam_sq)
        params_m = SolverParams(dt=lam_sq * dt, t_final=lam_sq * t_final, capture_every=1)
        recs = tuple(record(f, t, cfg_m) for f, t in zip(mapped, times))
        traj_m = Trajectory(
            cfg=cfg_m, params=params_m, times=times, fields=mapped, records=recs, flag=None
        )
        r_matched = duhamel_residual(traj_m)
        values[f"residual_lam={lam}"] = r_matched
        checks[f"matched_lam={lam}"] = r_matched <= residual_factor * max(r_self, _TINY)
        if lam == 1:
            # identity map: the residual must reproduce the solver tolerance
            checks["lam1_self_consistent"] = (
                0.5 * r_self <= r_matched <= 2.0 * max(r_self, _TINY)
            )
        if include_control and lam > 1:
            cfg_w = GTConfig(p=p, gamma=gamma, variant=other, lam=lam_sq)
            recs_w = tuple(record(f, t, cfg_w) for f, t in zip(mapped, times))
            traj_w = Trajectory(
                cfg=cfg_w, params=params_m, times=times, fields=mapped, records=recs_w, flag=None
            )
            r_wrong = duhamel_residual(traj_w)
            values[f"residual_wrong_lam={lam}"] = r_wrong
            checks[f"control_lam={lam}"] = r_wrong >= control_factor * max(r_self, _TINY)
    if include_control and all(lam == 1 for lam in lam_list):
        notes.append("no lambda > 1 in the sweep; negative control not exercised")

    params = {
        "lams": lam_list,
        "variant": variant,
        "control_variant": other,
        "p": p,
        "gamma": gamma,
        "amp": amp,
        "width": width,
        "box": box,
        "n_grid": n_grid,
        "dt": dt,
        "t_final": t_final,
        "residual_factor": residual_factor,
        "control_factor": control_factor,
        "include_control": include_control,
    }
    return ExperimentReport(
        experiment="symmetry",
        params=params,
        fits={},
        checks=checks,
        values=values,
        notes=tuple(notes),
        verdict=_verdict(checks),
    )


# -- virial identities and the focusing pinch ----------------------------------


def run_virial_check(
    *,
    p: int = 8,
    gamma: float = 1.0,
    amp: float = 1.5,
    width: float = 1.0,
    chirp: float = 0.0,
    box: float = 32.0,
    n_grid: int = 512,
    dt: float | None = None,
    t_final: float | None = None,
    overshoot: float = 1.05,
    capture_count: int = 60,
    sigma_rate: float | None = None,
    min_step_fraction: float = 1e-2,
    identity_window: float = 0.5,
    tol_identity: float = 1e-4,
    tol_bound: float = 1e-4,
    tol_inequality: float = 1e-6,
    safety: float = 0.1,
) -> ExperimentReport:
    """Virial identities along a flow, plus the focusing variance pinch.

    Integrates Gaussian data (real by default) under the unit-averaged
    equation and checks, by centered differences on the captures inside
    ``identity_window`` of the run, that the variance and dilation-momentum
    identities hold to ``tol_identity``; the one-sided virial inequalities
    are checked on the same window.

    For focusing runs (``gamma > 0`` with positive energy) the target time
    is ``overshoot`` times the reference ``T* = -sqrt(v(0)/E)``.  The
    variance bound ``v <= v(0) - 8 E t^2`` forces concentration no later
    than ``-sqrt(v(0)/(8E))``, so the step-size guard must reject a step --
    flagging the trajectory -- strictly before ``T*``; until the rejection
    the kinetic term must dominate ``16 E^2 t^2 / (v(0) - E t^2)`` within
    ``tol_bound``.  Defocusing runs (``gamma < 0``) integrate forward to
    ``t_final`` (default 1) and skip the pinch block.
    """
    d = 1
    if d * p < 8:
        raise ConfigurationError("variance convexity needs d*p >= 8")
    grid = make_grid(box, n_grid)
    u0 = gaussian_data(grid, amp=amp, width=width, chirp=chirp)
    if sigma_rate is None:
        sigma_rate = (16.0 / width) ** 2
    quad = SigmaQuadrature.gauss_legendre(1.0, sigma_rate, validate=False)
    cfg = GTConfig(p=p, gamma=gamma, sigma_quad=quad)
    rec0 = record(u0, 0.0, cfg)
    e = rec0.energy
    v0 = rec0.variance
    focusing = gamma > 0
    if focusing and e <= 0.0:
        raise DomainError(
            f"focusing pinch needs positive energy; E = {e:.6g} (raise amp or width)"
        )

    t_star = -math.sqrt(v0 / e) if focusing else math.nan
    if t_final is None:
        t_final = overshoot * t_star if focusing else 1.0
    if dt is None:
        dt = suggest_dt(u0, cfg)
    dt = math.copysign(abs(dt), t_final)
    capture_every = max(1, round(abs(t_final / dt) / capture_count))
    params_s = SolverParams(
        dt=dt,
        t_final=t_final,
        safety=safety,
        capture_every=capture_every,
        min_step_fraction=min_step_fraction,
    )
    traj = evolve(u0, cfg, params_s)
    ts = np.asarray(traj.times)

    # identities and inequalities on the healthy prefix of the run
    horizon = identity_window * abs(t_final)
    keep = int(np.sum(np.abs(ts) <= horizon + 1e-12))
    keep = max(3, min(keep, len(ts)))
    sub = Trajectory(
        cfg=cfg,
        params=params_s,
        times=traj.times[:keep],
        fields=traj.fields[:keep],
        records=traj.records[:keep],
        flag=None,
    )
    res = virial_identity_residuals(sub)
    ineq = virial_inequality_check(sub, tol=tol_inequality)

    checks = {
        "identity_variance": res["dvariance"] <= tol_identity,
        "identity_vdot1": res["dvdot1"] <= tol_identity,
        "inequalities": ineq.ok,
    }
    values = {
        "energy": e,
        "variance_0": v0,
        "identity_variance_residual": res["dvariance"],
        "identity_vdot1_residual": res["dvdot1"],
        "monotone_margin": ineq.monotone_margin,
        "quad_margin": ineq.quad_margin,
        "kinetic_margin": ineq.kinetic_margin,
        "captures": float(len(ts)),
    }
    notes: list[str] = []

    if focusing:
        grad_sq = 2.0 / abs(gamma) * np.array([r.kinetic for r in traj.records])
        denom = v0 - e * ts**2
        sel = (np.abs(ts) > 0) & (denom > 0)
        lower = 16.0 * e**2 * ts[sel] ** 2 / denom[sel]
        pinch_ok = bool(np.all(grad_sq[sel] >= lower * (1.0 - tol_bound)))
        flagged = traj.flag == "blowup-suspected"
        before = abs(ts[-1]) < abs(t_star)
        checks["blowup_flagged"] = flagged
        checks["flag_before_reference_time"] = before
        checks["kinetic_exceeds_pinch_bound"] = pinch_ok
        values["t_star"] = t_star
        values["t_last"] = float(ts[-1])
        values["pinch_upper_bound"] = -math.sqrt(v0 / (8.0 * e))
        if traj.flag:
            notes.append(f"solver flag: {traj.flag}")
    else:
        checks["completed"] = traj.completed
        if traj.flag:
            notes.append(f"solver flag: {traj.flag}")

    params = {
        "p": p,
        "gamma": gamma,
        "amp": amp,
        "width": width,
        "chirp": chirp,
        "box": box,
        "n_grid": n_grid,
        "dt": dt,
        "t_final": t_final,
        "overshoot": overshoot,
        "capture_every": capture_every,
        "sigma_rate": sigma_rate,
        "min_step_fraction": min_step_fraction,
        "identity_window": identity_window,
        "tol_identity": tol_identity,
        "tol_bound": tol_bound,
        "tol_inequality": tol_inequality,
        "safety": safety,
    }
    return ExperimentReport(
        experiment="virial-check",
        params=params,
        fits={},
        checks=checks,
        values=values,
        notes=tuple(notes),
        verdict=_verdict(checks),
        series=traj.records,
    )


EXPERIMENTS: dict[str, Callable[..., ExperimentReport]] = {
    "inflate-neg": run_inflation_negative,
    "ipscale": run_analytic_ip,
    "equipartition": run_equipartition,
    "inflate-energy": run_inflation_energy,
    "symmetry": run_symmetry_check,
    "virial-check": run_virial_check,
}
