from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_fb import spectral as S
from willmore_fb.errors import AliasRisk, SupportViolation


@pytest.mark.parametrize("y", [0.1, 0.5, 1.0, 2.0])
def test_kernel_has_unit_mass(y):
    assert abs(S.kernel_mass(y) - 1.0) < 1e-10


@pytest.mark.parametrize("y", [0.1, 1.0])
def test_closed_form_with_extra_constant_has_mass_two(y):
    # (1/2pi)(e^y - cos x)/(cosh y - cos x) = Poisson kernel + 1/(2pi)
    assert abs(S.kernel_mass(y, kernel=S.poisson_kernel_printed) - 2.0) < 1e-10
    x = np.linspace(-math.pi, math.pi, 101)
    direct = (math.exp(y) - np.cos(x)) / (2 * math.pi * (math.cosh(y) - np.cos(x)))
    assert np.allclose(S.poisson_kernel_printed(x, y), direct, rtol=1e-13)


def test_kernel_matches_its_mode_series():
    x = np.linspace(-math.pi, math.pi, 77)
    y = 0.4
    k = np.arange(1, 200)
    series = (1 + 2 * np.sum(np.exp(-k * y)[:, None] * np.cos(np.outer(k, x)), axis=0)) / (2 * math.pi)
    assert np.max(np.abs(S.poisson_kernel(x, y) - series)) < 1e-14


def test_kernel_and_series_extensions_agree():
    x = S.periodic_nodes(513)
    fd = S.fourier_decompose(S.bump(x), 128)
    xe = np.linspace(-math.pi, math.pi, 201)
    for y in (0.05, 0.1, 0.3, 1.0):
        k = S.harmonic_extension_kernel(S.bump, xe, y)
        s = S.harmonic_extension_series(fd, xe, np.array([y])).values[0]
        assert np.max(np.abs(k - s)) < 1e-8


def test_harmonic_extension_of_a_mode():
    xe = np.linspace(-math.pi, math.pi, 101)
    u = S.harmonic_extension_kernel(lambda t: np.cos(3 * t), xe, 0.3)
    assert np.max(np.abs(u - math.exp(-0.9) * np.cos(3 * xe))) < 1e-12


def test_bump_is_resolved_at_128_modes():
    x = S.periodic_nodes(513)
    fd = S.fourier_decompose(S.bump(x), 128)
    xf = np.linspace(-math.pi, math.pi, 2001)
    assert np.max(np.abs(fd.evaluate(xf) - S.bump(xf))) < 1e-12
    S.check_support(S.bump(x), x)
    with pytest.raises(SupportViolation):
        S.check_support(np.cos(x), x)


def test_decomposition_limits():
    x = S.periodic_nodes(65)
    with pytest.raises(ValueError):
        S.fourier_decompose(np.cos(x), 40)
    with pytest.warns(AliasRisk):
        S.fourier_decompose(np.cos(30 * x), 8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_decomposition_round_trip(seed, K):
    fd = S.random_band_limited(np.random.default_rng(seed), K=K)
    x = S.periodic_nodes(2 * K + 3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasRisk)    # top modes are not small here
        back = S.fourier_decompose(fd.evaluate(x), K)
    assert np.allclose(back.a, fd.a, atol=1e-12) and np.allclose(back.b, fd.b, atol=1e-12)


def test_biharmonic_extension_closed_form():
    x = S.periodic_nodes(129)
    y = np.linspace(0, 1, 33)
    phi = S.from_coefficients(a=[1.0])
    psi = S.from_coefficients(b=[1.0])
    X, Y = np.meshgrid(x, y)
    u = S.biharmonic_extension(phi, S.from_coefficients(K=1), x, y)
    assert np.max(np.abs(u.values - (1 + Y) * np.exp(-Y) * np.cos(X))) < 1e-15
    v = S.biharmonic_extension(S.from_coefficients(K=1), psi, x, y)
    assert np.max(np.abs(v.values - Y * np.exp(-Y) * np.sin(X))) < 1e-15


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_biharmonic_extension_reproduces_boundary_data(seed):
    rng = np.random.default_rng(seed)
    phi, psi = S.random_band_limited(rng, K=20), S.random_band_limited(rng, K=20)
    x = S.periodic_nodes(257)
    u0 = S.biharmonic_extension(phi, psi, x, np.array([0.0])).values[0]
    u1 = S.biharmonic_extension(phi, psi, x, np.array([0.0]), y_order=1).values[0]
    assert np.max(np.abs(u0 - phi.evaluate(x))) < 1e-9
    assert np.max(np.abs(u1 - psi.evaluate(x))) < 1e-9


def test_discrete_bilaplacian_decays_at_second_order():
    phi = S.from_coefficients(a=[1.0, 0.5, 0.0, 0.25], b=[0.0, 0.3, 0.2])
    psi = S.from_coefficients(a=[0.0, 0.4], b=[0.5, 0.0, 0.1, 0.2])
    res = []
    for n in (33, 65, 129):
        u = S.biharmonic_extension(phi, psi, S.periodic_nodes(2 * n - 1), np.linspace(0, 1, n))
        res.append(S.bilaplacian_residual(u))
    assert 1.8 < math.log2(res[-2] / res[-1]) < 2.3


def test_harmonic_extension_is_harmonic():
    fd = S.from_coefficients(a=[0.3, 0.0, 1.0])
    res = []
    for n in (33, 65):
        u = S.harmonic_extension_series(fd, S.periodic_nodes(2 * n - 1), np.linspace(0, 1, n))
        res.append(S.harmonic_residual(u))
    assert math.log2(res[0] / res[1]) > 1.8


@pytest.mark.parametrize("s", [-0.5, 0.5, 1.0, 1.5, 2.0])
def test_l2_identity(s):
    fd = S.random_band_limited(np.random.default_rng(1), K=16, decay=2.0)
    rep = S.l2_identity_check(fd, s)
    assert rep.residual < 1e-12
    assert rep.quadrature_residual < 1e-11 * max(1.0, rep.rhs)


def test_boundary_integration_by_parts_sign():
    c2 = S.from_coefficients(a=[0.0, 1.0])        # cos 2x
    rep = S.boundary_ibp_identity(c2, c2)
    assert math.isclose(rep.quadrature, 8 * math.pi, rel_tol=1e-13)
    assert math.isclose(rep.coefficient, 8 * math.pi, rel_tol=1e-13)


@given(st.floats(-1, 3), st.floats(0.1, 10))
def test_seminorm_homogeneity(s, c):
    fd = S.from_coefficients(a=[1.0, 0.5], b=[0.0, 0.0, 2.0])
    scaled = S.from_coefficients(a=c * fd.a, b=c * fd.b)
    assert math.isclose(S.sobolev_seminorm(scaled, s), c * S.sobolev_seminorm(fd, s), rel_tol=1e-12)
    assert S.sobolev_norm(fd, s) >= S.sobolev_seminorm(fd, s)


def test_cutoff_properties():
    x = np.linspace(-math.pi, math.pi, 401)
    y = np.linspace(0, 2, 201)
    eta = S.cutoff(x, y)
    assert eta.min() >= 0 and eta.max() <= 1
    X, Y = np.meshgrid(x, y)
    assert np.all(eta[(np.abs(X) <= math.pi / 2) & (Y <= 0.5)] == 1.0)
    assert np.all(eta[:, [0, -1]] == 0.0)


def test_estimate_audit_reports_ratios():
    audit = S.estimate_audit(seed=3, n_pairs=4)
    assert audit["pairs"] == 4
    assert math.isclose(audit["max"]["grad_l2_over_half_seminorm"], 1.0, rel_tol=1e-12)
    assert all(np.isfinite(v) for v in audit["max"].values())
