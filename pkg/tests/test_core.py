"""Grid, transform, and norm checks against Gaussian closed forms."""

import math
import warnings

import numpy as np
import pytest

from gtsim.core import (
    AccuracyWarning,
    ConfigurationError,
    DomainError,
    Field,
    SobolevIndex,
    boundary_mass_fraction,
    free_propagate,
    from_freq,
    gradient,
    lebesgue_norm,
    make_grid,
    moment_variance,
    radial_momentum,
    sobolev_norm,
    to_freq,
)


def gaussian(grid, amp=1.3, width=1.0, chirp=0.0):
    """A exp(-x^2/(4 w^2) + i b x^2) sampled on a 1d grid."""
    x = grid.x_axes[0]
    return Field(grid, amp * np.exp(-(x**2) / (4 * width**2) + 1j * chirp * x**2))


def gaussian_free_evolution(grid, tau, amp=1.3, width=1.0):
    """Closed form of exp(i tau Laplacian) applied to the plain Gaussian."""
    x = grid.x_axes[0]
    z = width**2 + 1j * tau
    return amp * np.sqrt(width**2 / z) * np.exp(-(x**2) / (4 * z))


@pytest.fixture
def grid1d():
    return make_grid(32.0, 256)


def test_grid_geometry(grid1d):
    assert grid1d.d == 1
    assert grid1d.dx == (0.125,)
    assert math.isclose(grid1d.dxi[0], 2 * np.pi / 32.0)
    assert math.isclose(grid1d.xi_max[0], np.pi / 0.125)
    # frequency lattice is 2 pi k / L in FFT order
    assert math.isclose(grid1d.xi_axes[0][1], 2 * np.pi / 32.0)
    assert grid1d.xi_axes[0][-1] < 0


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        make_grid(32.0, 255)  # odd
    with pytest.raises(ConfigurationError):
        make_grid(32.0, 4)  # too coarse
    with pytest.raises(ConfigurationError):
        make_grid(-1.0, 64)
    with pytest.raises(ConfigurationError):
        make_grid((32.0, 16.0), 64, d=3)


def test_field_rejects_nan(grid1d):
    vals = np.ones(grid1d.n)
    vals[3] = np.nan
    with pytest.raises(DomainError):
        Field(grid1d, vals)


def test_transform_roundtrip(grid1d):
    rng = np.random.default_rng(7)
    u = Field(grid1d, rng.standard_normal(grid1d.n) + 1j * rng.standard_normal(grid1d.n))
    v = from_freq(grid1d, to_freq(u))
    np.testing.assert_allclose(v.values, u.values, atol=1e-13)


def test_transform_matches_continuum_gaussian(grid1d):
    # unitary continuum transform of A exp(-x^2/4w^2) is A w sqrt(2) exp(-w^2 xi^2),
    # real and positive -- this pins the centering phase.
    amp, width = 1.3, 1.0
    uhat = to_freq(gaussian(grid1d, amp, width))
    xi = grid1d.xi_axes[0]
    expected = amp * width * np.sqrt(2.0) * np.exp(-(width**2) * xi**2)
    np.testing.assert_allclose(uhat, expected, atol=1e-13)


def test_plancherel(grid1d):
    rng = np.random.default_rng(11)
    u = Field(grid1d, rng.standard_normal(grid1d.n) + 1j * rng.standard_normal(grid1d.n))
    phys = np.sum(np.abs(u.values) ** 2) * grid1d.cell_volume
    freq = np.sum(np.abs(to_freq(u)) ** 2) * grid1d.freq_cell_volume
    assert math.isclose(phys, freq, rel_tol=1e-13)


# |tau| small enough that the spread Gaussian's periodic image stays below 1e-12
@pytest.mark.parametrize("tau", [0.3, -0.8])
def test_free_propagate_gaussian_closed_form(grid1d, tau):
    out = free_propagate(gaussian(grid1d), tau)
    np.testing.assert_allclose(out.values, gaussian_free_evolution(grid1d, tau), atol=1e-12)


def test_free_propagate_group_law(grid1d):
    u = gaussian(grid1d, chirp=0.2)
    ab = free_propagate(free_propagate(u, 0.4, coeff=-1.0), 0.9, coeff=-1.0)
    once = free_propagate(u, 1.3, coeff=-1.0)
    np.testing.assert_allclose(ab.values, once.values, atol=1e-12)
    # unitarity
    m0 = lebesgue_norm(u, 2)
    m1 = lebesgue_norm(once, 2)
    assert math.isclose(m0, m1, rel_tol=1e-13)


def test_gradient_gaussian(grid1d):
    amp, width = 1.3, 1.0
    u = gaussian(grid1d, amp, width)
    (du,) = gradient(u)
    x = grid1d.x_axes[0]
    np.testing.assert_allclose(du.values, -x / (2 * width**2) * u.values, atol=1e-11)


def test_lebesgue_norms_gaussian(grid1d):
    amp, width = 1.3, 1.0
    u = gaussian(grid1d, amp, width)
    assert math.isclose(lebesgue_norm(u, 2) ** 2, amp**2 * width * math.sqrt(2 * math.pi), rel_tol=1e-12)
    assert math.isclose(lebesgue_norm(u, 4) ** 4, amp**4 * width * math.sqrt(math.pi), rel_tol=1e-12)
    assert math.isclose(lebesgue_norm(u, math.inf), amp, rel_tol=1e-12)
    with pytest.raises(DomainError):
        lebesgue_norm(u, 0.5)


def test_sobolev_norms_gaussian(grid1d):
    amp, width = 1.3, 1.0
    u = gaussian(grid1d, amp, width)
    mass = amp**2 * width * math.sqrt(2 * math.pi)
    grad_sq = amp**2 * math.sqrt(2 * math.pi) / (4 * width)
    assert math.isclose(sobolev_norm(u, 0.0) ** 2, mass, rel_tol=1e-12)
    assert math.isclose(sobolev_norm(u, 1.0, homogeneous=True) ** 2, grad_sq, rel_tol=1e-12)
    # inhomogeneous H^1 splits exactly into L^2 + homogeneous parts
    h1 = sobolev_norm(u, SobolevIndex(1.0))
    assert math.isclose(h1**2, mass + grad_sq, rel_tol=1e-12)


def test_homogeneous_negative_zero_mode_policy(grid1d):
    u = gaussian(grid1d)  # nonzero mean
    with pytest.raises(DomainError):
        sobolev_norm(u, -0.5, homogeneous=True)
    # odd field has no zero mode; the norm must be finite and zero-mode free
    x = grid1d.x_axes[0]
    odd = Field(grid1d, x * np.exp(-(x**2) / 4))
    val = sobolev_norm(odd, -0.5, homogeneous=True)
    assert np.isfinite(val) and val > 0


def test_moment_variance_and_radial_momentum(grid1d):
    amp, width, chirp = 1.3, 1.0, 0.35
    v_exact = amp**2 * math.sqrt(2 * math.pi) * width**3
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # no boundary warning expected
        v = moment_variance(gaussian(grid1d, amp, width))
        vdot_real = radial_momentum(gaussian(grid1d, amp, width))
        vdot_chirped = radial_momentum(gaussian(grid1d, amp, width, chirp))
    assert math.isclose(v, v_exact, rel_tol=1e-12)
    assert abs(vdot_real) < 1e-12
    assert math.isclose(vdot_chirped, 8 * chirp * v_exact, rel_tol=1e-11)


def test_boundary_warning_for_wide_data():
    grid = make_grid(8.0, 64)
    wide = gaussian(grid, width=2.0)  # mass reaches the edge of the small box
    assert boundary_mass_fraction(wide) > 1e-4
    with pytest.warns(AccuracyWarning):
        moment_variance(wide)


def test_2d_transform_roundtrip_and_plancherel():
    grid = make_grid((16.0, 12.0), (32, 48))
    rng = np.random.default_rng(3)
    u = Field(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
    np.testing.assert_allclose(from_freq(grid, to_freq(u)).values, u.values, atol=1e-13)
    phys = np.sum(np.abs(u.values) ** 2) * grid.cell_volume
    freq = np.sum(np.abs(to_freq(u)) ** 2) * grid.freq_cell_volume
    assert math.isclose(phys, freq, rel_tol=1e-13)
