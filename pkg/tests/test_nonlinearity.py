"""Sigma-averaged nonlinearity vs brute-force convolution and closed forms."""

import math

import numpy as np
import pytest

from gtsim.core import ConfigurationError, Field, make_grid, to_freq
from gtsim.nonlinearity import (
    GTConfig,
    SigmaQuadrature,
    energy,
    gt_nonlinearity,
    mass,
    potential_at_sigmas,
    potential_energy,
    resolve_quadrature,
    sigma_product_hat,
)


def plane_wave(grid, amp=0.7 + 0.2j, k=3.0):
    return Field(grid, amp * np.exp(1j * k * grid.x_axes[0]))


def gaussian(grid, amp=1.1, width=1.0):
    x = grid.x_axes[0]
    return Field(grid, amp * np.exp(-(x**2) / (4 * width**2)))


def gaussian_potential_density(sigma, p, amp=1.1, width=1.0):
    """Closed form of P(sigma) = int |exp(i sigma Lap) gaussian|^{p+2} dx."""
    W = np.sqrt(width**4 + np.asarray(sigma) ** 2)
    return 2 * math.sqrt(math.pi / (p + 2)) * amp ** (p + 2) * width ** (p + 1) * W ** (-p / 2)


def brute_cubic_product(uhat, grid, quad):
    """O(n^3) frequency-lattice evaluation of the cubic sigma product:

    G(xi) = sum_m w_m e^{i s_m xi^2} (2 pi)^{-1} dxi^2 *
            sum_{k1,k2} e^{-i s_m (xi1^2 - xi2^2 + xi3^2)} uh(k1) conj(uh(k2)) uh(k3),
    with xi3 = xi - xi1 + xi2 and out-of-band terms dropped.
    """
    n = grid.n[0]
    dxi = grid.dxi[0]
    us = np.fft.fftshift(uhat)
    xs = np.fft.fftshift(grid.xi_axes[0])
    i1, i2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        i3 = i - i1 + i2
        ok = (i3 >= 0) & (i3 < n)
        i3c = np.clip(i3, 0, n - 1)
        amp3 = us[i1] * np.conj(us[i2]) * us[i3c] * ok
        phi = xs[i] ** 2 - xs[i1] ** 2 + xs[i2] ** 2 - xs[i3c] ** 2
        sig_sum = np.exp(1j * np.multiply.outer(quad.nodes, phi))
        out[i] = np.einsum("m,mab,ab->", quad.weights, sig_sum, amp3)
    return np.fft.ifftshift(out) * dxi**2 / (2 * np.pi)


def test_cubic_product_matches_brute_force():
    grid = make_grid(2 * np.pi, 32)
    rng = np.random.default_rng(5)
    # band-limited random data (|k| <= 6) so every triple interaction is represented
    uhat = np.zeros(32, dtype=complex)
    for k in range(-6, 7):
        uhat[k % 32] = rng.standard_normal() + 1j * rng.standard_normal()
    quad = SigmaQuadrature.gauss_legendre(1.0, grid.xi_sq_max)
    got = sigma_product_hat([uhat] * 3, grid, 2, quad)
    want = brute_cubic_product(uhat, grid, quad)
    np.testing.assert_allclose(got, want, atol=1e-12 * np.max(np.abs(want)))


@pytest.mark.parametrize("p", [2, 8])
@pytest.mark.parametrize("variant,lam", [("averaged-unit", 1.0), ("integrated-interval", 2.5)])
def test_plane_wave_eigenvector(p, variant, lam):
    # a single mode is an exact eigenvector: G[u] = mu([0,lam]) * |a|^p u
    grid = make_grid(2 * np.pi, 32)
    amp = 0.7 + 0.2j
    u = plane_wave(grid, amp)
    cfg = GTConfig(p=p, gamma=-1.0, variant=variant, lam=lam)
    factor = abs(amp) ** p * (1.0 if variant != "integrated-interval" else lam)
    Gu = gt_nonlinearity(u, cfg)
    np.testing.assert_allclose(Gu.values, factor * u.values, atol=1e-13)


def test_distinct_slot_path_matches_fast_path():
    grid = make_grid(16.0, 64)
    rng = np.random.default_rng(9)
    u = Field(grid, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    uhat = to_freq(u)
    quad = SigmaQuadrature.gauss_legendre(1.0, grid.xi_sq_max)
    fast = sigma_product_hat([uhat] * 3, grid, 2, quad)
    slow = sigma_product_hat([uhat, uhat.copy(), uhat.copy()], grid, 2, quad)
    np.testing.assert_allclose(fast, slow, atol=1e-13 * np.max(np.abs(fast)))


def test_conjugate_multilinearity():
    # scaling an even slot scales the output; scaling an odd slot conjugates the scale
    grid = make_grid(16.0, 64)
    rng = np.random.default_rng(13)
    hats = [
        to_freq(Field(grid, rng.standard_normal(64) + 1j * rng.standard_normal(64)))
        for _ in range(3)
    ]
    quad = SigmaQuadrature.gauss_legendre(1.0, grid.xi_sq_max)
    base = sigma_product_hat(hats, grid, 2, quad)
    c = 0.3 - 1.2j
    scaled_even = sigma_product_hat([c * hats[0], hats[1], hats[2]], grid, 2, quad)
    scaled_odd = sigma_product_hat([hats[0], c * hats[1], hats[2]], grid, 2, quad)
    np.testing.assert_allclose(scaled_even, c * base, atol=1e-12 * np.max(np.abs(base)))
    np.testing.assert_allclose(scaled_odd, np.conj(c) * base, atol=1e-12 * np.max(np.abs(base)))


def test_gaussian_potential_density_closed_form():
    grid = make_grid(48.0, 512)
    u = gaussian(grid)
    sig = np.array([0.0, 0.3, 1.0])
    got = potential_at_sigmas(u, 8, sig)
    np.testing.assert_allclose(got, gaussian_potential_density(sig, 8), rtol=1e-12)


def test_potential_energy_table_and_refinement():
    grid = make_grid(48.0, 256)
    u = gaussian(grid)
    cfg = GTConfig(p=2, gamma=1.0)
    quad = resolve_quadrature(grid, cfg)
    expected = np.dot(quad.weights, gaussian_potential_density(quad.nodes, 2)) / 4
    got = potential_energy(u, cfg)
    assert math.isclose(got, expected, rel_tol=1e-12)
    # the table itself is converged: doubling panels moves nothing
    fine = GTConfig(p=2, gamma=1.0, sigma_quad=quad.refined(2))
    assert math.isclose(got, potential_energy(u, fine), rel_tol=1e-10)


def test_energy_sign_convention():
    grid = make_grid(48.0, 256)
    u = gaussian(grid)
    pot = potential_energy(u, GTConfig(p=2, gamma=-1.0))
    kin = float(np.sum(grid.xi_sq * np.abs(to_freq(u)) ** 2) * grid.freq_cell_volume)
    assert math.isclose(energy(u, GTConfig(p=2, gamma=-1.0)), 0.5 * kin + pot, rel_tol=1e-12)
    assert math.isclose(energy(u, GTConfig(p=2, gamma=1.0)), -0.5 * kin + pot, rel_tol=1e-12)


def test_mass_plancherel_consistency():
    grid = make_grid(16.0, 64)
    rng = np.random.default_rng(3)
    u = Field(grid, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    freq_mass = float(np.sum(np.abs(to_freq(u)) ** 2) * grid.freq_cell_volume)
    assert math.isclose(mass(u), freq_mass, rel_tol=1e-13)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        GTConfig(p=3)
    with pytest.raises(ConfigurationError):
        GTConfig(p=0)
    with pytest.raises(ConfigurationError):
        GTConfig(gamma=0.0)
    with pytest.raises(ConfigurationError):
        GTConfig(variant="averaged-unit", lam=2.0)
    with pytest.raises(ConfigurationError):
        GTConfig(variant="unknown")
    # averaged variant rejects integral-normalized weights
    table = SigmaQuadrature.gauss_legendre(2.0, 10.0, averaged=False)
    with pytest.raises(ConfigurationError):
        GTConfig(variant="averaged-interval", lam=2.0, sigma_quad=table)
    # and accepts matching normalization
    GTConfig(variant="integrated-interval", lam=2.0, sigma_quad=table)


def test_under_resolved_table_rejected_with_required_count():
    grid = make_grid(16.0, 128)
    coarse = SigmaQuadrature.gauss_legendre(1.0, 10.0)  # validated only up to rate 10
    cfg = GTConfig(p=2, sigma_quad=coarse)
    with pytest.raises(ConfigurationError) as err:
        resolve_quadrature(grid, cfg)
    need = SigmaQuadrature.required_nodes(1.0, grid.xi_sq_max)
    assert str(need) in str(err.value)
    # the same node table marked unvalidated is accepted as-is
    free = SigmaQuadrature(coarse.nodes, coarse.weights, 1.0, resolved_rate=None)
    assert resolve_quadrature(grid, GTConfig(p=2, sigma_quad=free)) is free


def test_quadrature_rule_properties():
    quad = SigmaQuadrature.gauss_legendre(1.0, 200.0)
    assert quad.count == SigmaQuadrature.required_nodes(1.0, 200.0)
    assert quad.count >= 4 * math.ceil(200.0 / math.pi)
    assert math.isclose(quad.total, 1.0, rel_tol=1e-12)
    integral = SigmaQuadrature.gauss_legendre(2.0, 50.0, averaged=False)
    assert math.isclose(integral.total, 2.0, rel_tol=1e-12)
    refined = integral.refined(3)
    assert refined.count >= 3 * integral.count
    assert math.isclose(refined.total, 2.0, rel_tol=1e-12)
    # four-point panels of width pi/rate integrate the design-rate oscillation
    # to ~4e-8; doubling the panels gains the expected 2^9
    rate = 200.0
    exact = (np.exp(1j * rate) - 1) / (1j * rate)
    got = np.dot(quad.weights, np.exp(1j * rate * quad.nodes))
    assert abs(got - exact) < 1e-7
    fine = quad.refined(2)
    got2 = np.dot(fine.weights, np.exp(1j * rate * fine.nodes))
    assert abs(got2 - exact) < abs(got - exact) / 256
