"""Monitor and virial-flux checks against Gaussian closed forms and
finite differences along real flows."""

import math

import numpy as np
import pytest

from gtsim.core import ConfigurationError, Field, make_grid, sobolev_norm
from gtsim.data import gaussian_data
from gtsim.diagnostics import (
    equipartition_ratio,
    record,
    spectral_tail_fraction,
    vddot1_rhs,
    vdot2,
    virial_identity_residuals,
    virial_inequality_check,
)
from gtsim.evolution import SolverParams, evolve
from gtsim.nonlinearity import GTConfig, potential_at_sigmas, resolve_quadrature

AMP, WIDTH = 0.9, 1.1


def gaussian_mass(a, w):
    return a * a * w * math.sqrt(2 * math.pi)


def gaussian_grad_sq(a, w):
    return a * a * math.sqrt(2 * math.pi) / (4 * w)


def gaussian_variance(a, w):
    return a * a * math.sqrt(2 * math.pi) * w**3


def gaussian_potential_values(a, w, p, sigmas):
    """P(sigma) for the Gaussian: 2 sqrt(pi/(p+2)) a^{p+2} w^{p+1} W^{-p/2}."""
    big_w = np.sqrt(w**4 + np.asarray(sigmas, dtype=float) ** 2)
    return 2 * math.sqrt(math.pi / (p + 2)) * a ** (p + 2) * w ** (p + 1) * big_w ** (-p / 2)


@pytest.mark.parametrize("p,gamma", [(2, -1.0), (8, 1.0)])
def test_record_matches_gaussian_oracles(p, gamma):
    grid = make_grid(32.0, 256)
    u = gaussian_data(grid, amp=AMP, width=WIDTH)
    cfg = GTConfig(p=p, gamma=gamma)
    rec = record(u, 0.3, cfg, hs=(-1.0, 1.0))

    quad = resolve_quadrature(grid, cfg)
    pot = float(np.dot(quad.weights, gaussian_potential_values(AMP, WIDTH, p, quad.nodes))) / (p + 2)
    grad_sq = gaussian_grad_sq(AMP, WIDTH)

    assert rec.t == 0.3
    assert rec.mass == pytest.approx(gaussian_mass(AMP, WIDTH), rel=1e-12)
    assert rec.kinetic == pytest.approx(0.5 * abs(gamma) * grad_sq, rel=1e-12)
    assert rec.potential == pytest.approx(pot, rel=1e-10)
    assert rec.energy == pytest.approx(-0.5 * gamma * grad_sq + pot, rel=1e-10)
    assert rec.variance == pytest.approx(gaussian_variance(AMP, WIDTH), rel=1e-12)
    assert rec.vdot1 == pytest.approx(0.0, abs=1e-12)
    assert rec.equip_ratio == pytest.approx(grad_sq / ((p + 2) * pot), rel=1e-10)
    assert rec.boundary_frac < 1e-12
    assert [s for s, _ in rec.hs] == [-1.0, 1.0]
    for s, val in rec.hs:
        assert val == pytest.approx(sobolev_norm(u, s), rel=1e-12)


def test_chirped_gaussian_radial_momentum():
    grid = make_grid(32.0, 256)
    b = 0.25
    u = gaussian_data(grid, amp=AMP, width=WIDTH, chirp=b)
    rec = record(u, 0.0, GTConfig(p=2, gamma=-1.0))
    assert rec.vdot1 == pytest.approx(8 * b * AMP * AMP * math.sqrt(2 * math.pi) * WIDTH**3, rel=1e-10)


@pytest.mark.parametrize("gamma", [-1.0, 1.0])
def test_energy_splits_into_signed_kinetic_plus_potential(gamma):
    grid = make_grid(32.0, 128)
    u = gaussian_data(grid, amp=0.7, width=1.3)
    rec = record(u, 0.0, GTConfig(p=2, gamma=gamma))
    assert rec.energy == pytest.approx(-math.copysign(1.0, gamma) * rec.kinetic + rec.potential, rel=1e-13)


def test_vddot1_two_algebraic_forms_agree():
    grid = make_grid(32.0, 256)
    u = gaussian_data(grid, amp=1.1, width=1.0, chirp=0.2)
    for p, gamma in ((2, -1.0), (8, 1.0)):
        cfg = GTConfig(p=p, gamma=gamma)
        quad = resolve_quadrature(grid, cfg)
        q0 = float(np.dot(quad.weights, potential_at_sigmas(u, p, quad.nodes)))
        p1 = float(potential_at_sigmas(u, p, [1.0])[0])
        grad_sq = sobolev_norm(u, 1.0, homogeneous=True) ** 2
        d = grid.d
        alt = 8 * gamma * grad_sq - 4 * (d * p - 4) / (p + 2) * q0 - 16 / (p + 2) * p1
        assert vddot1_rhs(u, cfg) == pytest.approx(alt, rel=1e-12)


def test_zero_field_record_is_all_zero():
    grid = make_grid(16.0, 64)
    u = Field(grid, np.zeros(grid.n))
    rec = record(u, 0.0, GTConfig(p=2, gamma=-1.0))
    assert rec.mass == 0.0
    assert rec.energy == 0.0
    assert rec.variance == 0.0
    assert rec.equip_ratio == 0.0
    assert equipartition_ratio(u, GTConfig(p=2, gamma=-1.0)) == 0.0


def test_spectral_tail_fraction_localizes_band_edges():
    grid = make_grid(2 * np.pi, 64)
    x = grid.x_axes[0]
    low = Field(grid, np.exp(1j * 2 * x))
    ximax = grid.xi_max[0]
    m_hi = int(round(0.9 * ximax * grid.L[0] / (2 * np.pi)))
    hi = Field(grid, np.exp(1j * m_hi * x))
    assert spectral_tail_fraction(low) < 1e-15
    assert spectral_tail_fraction(hi) == pytest.approx(1.0)
    assert spectral_tail_fraction(Field(grid, np.zeros(grid.n))) == 0.0


@pytest.mark.parametrize("p,gamma,chirp", [(8, -1.0, 0.0), (2, -1.0, 0.3)])
def test_virial_identities_hold_along_flow(p, gamma, chirp):
    grid = make_grid(24.0, 128)
    u0 = gaussian_data(grid, amp=1.1, width=1.0, chirp=chirp)
    cfg = GTConfig(p=p, gamma=gamma)
    res = virial_identity_residuals(evolve(u0, cfg, SolverParams(dt=1e-4, t_final=8e-4)))
    res_half = virial_identity_residuals(evolve(u0, cfg, SolverParams(dt=5e-5, t_final=4e-4)))
    for key in ("dvariance", "dvdot1"):
        assert res[key] < 1e-6
        # centered differences: quartering under step halving
        assert 3.0 < res[key] / res_half[key] < 5.0


def test_virial_identity_residuals_needs_three_captures():
    grid = make_grid(24.0, 128)
    u0 = gaussian_data(grid, amp=0.5, width=1.0)
    cfg = GTConfig(p=2, gamma=-1.0)
    traj = evolve(u0, cfg, SolverParams(dt=1e-3, t_final=1e-3))
    with pytest.raises(ConfigurationError):
        virial_identity_residuals(traj)


def test_virial_fluxes_reject_non_unit_average_variants():
    grid = make_grid(24.0, 128)
    u = gaussian_data(grid, amp=0.5, width=1.0)
    cfg = GTConfig(p=2, gamma=-1.0, variant="integrated-interval", lam=0.7)
    with pytest.raises(ConfigurationError):
        vdot2(u, cfg)
    with pytest.raises(ConfigurationError):
        vddot1_rhs(u, cfg)


def test_virial_inequalities_focusing_backward():
    grid = make_grid(32.0, 256)
    u0 = gaussian_data(grid, amp=1.3, width=1.0)
    cfg = GTConfig(p=8, gamma=1.0)
    traj = evolve(u0, cfg, SolverParams(dt=-1e-3, t_final=-0.05, capture_every=10))
    rep = virial_inequality_check(traj)
    assert rep.energy > 0
    assert rep.quad_constant == 8.0
    assert rep.quad_margin > 0
    assert rep.monotone_margin > 0
    assert rep.kinetic_margin > 0
    assert rep.ok


def test_virial_inequalities_defocusing_forward():
    grid = make_grid(32.0, 256)
    u0 = gaussian_data(grid, amp=1.3, width=1.0)
    cfg = GTConfig(p=8, gamma=-1.0)
    traj = evolve(u0, cfg, SolverParams(dt=1e-3, t_final=0.05, capture_every=10))
    rep = virial_inequality_check(traj)
    assert rep.quad_constant >= 8.0
    assert rep.quad_margin >= 0
    assert rep.ok


def test_virial_inequalities_require_mass_supercritical_power():
    grid = make_grid(32.0, 128)
    u0 = gaussian_data(grid, amp=0.5, width=1.0)
    cfg = GTConfig(p=2, gamma=1.0)
    traj = evolve(u0, cfg, SolverParams(dt=-1e-3, t_final=-2e-3))
    with pytest.raises(ConfigurationError):
        virial_inequality_check(traj)
