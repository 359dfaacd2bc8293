"""Small closed-form cases and pointwise invariants across modules."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import window_field
from willmore_fb import energies as En, free_boundary as FB, gallery, reflection as R
from willmore_fb import spectral as S
from willmore_fb.geometry import (compute_geometry, conformality_residual, geometry_from_jet,
                                  weak_immersion_check)
from willmore_fb.grid import Immersion, ParamGrid, d1


def _affine(A, grid=None):
    grid = grid or ParamGrid(9, 9, (-1, 1), (0, 1))
    X, Y = grid.mesh()
    return Immersion(grid, X[..., None] * A[:, 0] + Y[..., None] * A[:, 1])


# ---------------------------------------------------------------- geometry

@pytest.mark.parametrize("sid", ["mercator_sphere", "helicoid", "inverted_catenoid", "morin",
                                 "spherical_cap"])
def test_pointwise_geometry_invariants(sid):
    f = gallery.sample(sid, nx=33, ny=17)
    g = compute_geometry(f)
    assert np.allclose(np.linalg.norm(g.nu, axis=-1), 1.0, atol=1e-12)
    H = np.einsum("...ab,...ab->...", np.linalg.inv(g.g), g.h)
    assert np.allclose(g.H, H, atol=1e-10 * max(1, np.abs(H).max()))
    assert np.allclose(g.h_norm2, g.h0_norm2 + 0.5 * g.H**2, atol=1e-10 * max(1, g.h_norm2.max()))
    assert np.abs(np.einsum("...ab,...ab->...", g.inv_g, g.h0)).max() < 1e-10 * max(1, np.abs(g.H).max())
    jet = f.jet()
    for key in ("x", "y"):
        assert np.abs(np.einsum("...c,...c->...", jet[key], g.nu)).max() < 1e-10 * f.scale()
    assert np.allclose(g.K_gauss, 0.5 * (0.5 * g.H**2 - g.h0_norm2), atol=1e-9 * max(1, g.h_norm2.max()))


def test_orientation_flip():
    grid = ParamGrid(33, 17, (-math.pi, math.pi), (0.0, 1.0))
    s = gallery.get("catenoid")
    X, Y = grid.mesh()
    a = geometry_from_jet(s.jet(X, Y))
    raw = s.jet(-X, Y)
    flipped = {k: (-1) ** k.count("x") * v for k, v in raw.items()}
    b = geometry_from_jet(flipped)
    sph = gallery.get("mercator_sphere")
    c = geometry_from_jet(sph.jet(X, Y))
    raw = sph.jet(-X, Y)
    d = geometry_from_jet({k: (-1) ** k.count("x") * v for k, v in raw.items()})
    assert np.allclose(b.nu[:, ::-1], -a.nu, atol=1e-14)
    assert np.allclose(d.H[:, ::-1], -c.H, atol=1e-13)
    assert np.allclose(d.det_g[:, ::-1], c.det_g, rtol=1e-13)
    assert np.allclose(d.h0_norm2[:, ::-1], c.h0_norm2, atol=1e-13)


def test_helicoid_metric():
    f = gallery.sample("helicoid", nx=33, ny=17)
    g = compute_geometry(f)
    _, Y = f.grid.mesh()
    assert np.allclose(g.g[..., 0, 0], np.cosh(Y) ** 2, rtol=1e-14)
    assert np.allclose(g.g[..., 1, 1], np.cosh(Y) ** 2, rtol=1e-14)
    assert conformality_residual(g).sup < 1e-12
    assert weak_immersion_check(g).min_det_g == pytest.approx(1.0, rel=1e-14)


def test_graph_is_not_conformal():
    grid = ParamGrid(17, 17, (-1, 1), (-1, 1))
    X, Y = grid.mesh()
    f = Immersion(grid, np.stack([X, Y, 0.3 * X * Y], axis=-1))
    rep = conformality_residual(compute_geometry(f))
    assert np.allclose(rep.off, 0.09 * X * Y, atol=1e-14)
    assert rep.sup > 0.05


def test_weak_immersion_thresholds():
    g = compute_geometry(gallery.sample("mercator_sphere", nx=33, ny=17))
    cert = weak_immersion_check(g, eps=0.1)
    assert cert.passed and cert.min_det_g == pytest.approx(1 / math.cosh(1) ** 4, rel=1e-12)
    grid = ParamGrid(9, 9, (0, 1), (0, 1))
    zero = Immersion(grid, np.zeros((9, 9, 3)))
    assert not weak_immersion_check(compute_geometry(zero, allow_degenerate=True)).passed


# ---------------------------------------------------------------- energies

def test_sphere_band_energy_equals_area():
    g = compute_geometry(gallery.sample("mercator_sphere", nx=257, ny=129))
    area = En.surface_integral(g.area_elem, g.grid)
    assert math.isclose(En.willmore_energy(g), area, rel_tol=1e-14)
    assert math.isclose(area, 2 * math.pi * math.tanh(1.0), rel_tol=1e-4)


def test_catenoid_energy_zero():
    g = compute_geometry(gallery.sample("catenoid", nx=65, ny=33))
    assert abs(En.willmore_energy(g)) < 1e-25


def test_operator_stencils_agree_on_perturbed_sphere():
    errs = []
    for n in (33, 65, 129):
        f = gallery.sample("mercator_sphere", nx=2 * n - 1, ny=n)
        X, Y = f.grid.mesh()
        pert = 0.05 * np.cos(X)[..., None] * np.sin(np.pi * Y)[..., None] * f.positions
        g = compute_geometry(Immersion(f.grid, f.positions + pert))
        inner = (np.abs(X) <= math.pi - 0.5) & (Y >= 0.25) & (Y <= 0.75)
        errs.append(np.abs(En.willmore_operator(g) - En.willmore_operator(g, oracle=True))[inner].max())
    assert math.log2(errs[-2] / errs[-1]) > 1.8


def test_translation_variation_vanishes():
    grid = ParamGrid(65, 65, (-2, 2), (0, 2))
    X, Y = grid.mesh()
    r2 = X**2 + (Y - 1) ** 2
    z = np.where(r2 < 0.25, 0.1 * np.exp(-1 / np.maximum(0.25 - r2, 1e-300)), 0.0)
    f = Immersion(grid, np.stack([X, Y, z], axis=-1))
    # phi = e3 well beyond the curved disk, tapered to zero where the surface is flat
    w = np.clip((0.95 - np.sqrt(r2)) / 0.15, 0, 1) ** 3
    phi = w[..., None] * np.array([0.0, 0.0, 1.0])
    assert abs(En.first_variation_willmore(compute_geometry(f), phi).total) < 1e-8


def test_sphere_is_willmore_critical_for_interior_fields():
    totals = []
    for n in (33, 65, 129):
        grid = ParamGrid(2 * n - 1, n, (-math.pi, math.pi), (0.0, 1.0))
        g = compute_geometry(gallery.sample("mercator_sphere", grid=grid))
        X, Y = grid.mesh()
        w = (np.sin(np.pi * Y) ** 4 * (1 + np.cos(X)) ** 2)[..., None]
        phi = w * np.stack([np.cos(2 * X), np.sin(Y), np.cos(X + Y)], axis=-1)
        phi[-1] = 0
        rep = En.first_variation_willmore(g, phi)
        totals.append(abs(rep.total) / max(abs(t) for t in rep.terms))
    assert totals[-1] < 1e-3
    assert math.log2(totals[-2] / totals[-1]) > 1.8


def test_boundary_forms_special_cases(rng):
    grid = ParamGrid(129, 65, (-math.pi, math.pi), (0.0, 1.0))
    g = compute_geometry(gallery.sample("mercator_sphere", grid=grid))
    X, Y = grid.mesh()
    away = window_field(grid, rng) * (Y >= 0.3)[..., None] * np.sin(np.pi * Y)[..., None] ** 4
    forms = En.boundary_forms(g, En.VariationField.from_values(away, g))
    assert all(np.max(np.abs(f.values)) == 0.0 for f in forms.values())
    # umbilic with constant H: alpha vanishes for any field
    forms = En.boundary_forms(g, En.VariationField.from_values(window_field(grid, rng), g))
    assert np.max(np.abs(forms["alpha"].values)) < 1e-12


def test_boundary_forms_for_horizontal_translation():
    grid = ParamGrid(257, 129, (-math.pi, math.pi), (0.0, 6.0))
    g = compute_geometry(gallery.sample("hemisphere", grid=grid))
    X, Y = grid.mesh()
    w = np.cos(0.5 * np.pi * Y / 6.0) ** 3 * np.sin(0.5 * (X + math.pi)) ** 2
    phi = w[..., None] * np.array([1.0, 0.0, 0.0])
    phi[:, [0, -1]] = 0
    phi[-1] = 0
    forms = En.boundary_forms(g, En.VariationField.from_values(phi, g))
    assert all(np.isfinite(f.integral) for f in forms.values())
    assert np.max(np.abs(forms["tau"].values - forms["alpha"].values
                         - 0.5 * forms["omega"].values)) < 1e-13


def test_evolution_trivial_cases():
    g = compute_geometry(gallery.sample("mercator_sphere", nx=33, ny=17))
    assert En.evolution_identities_check(g, np.zeros(g.H.shape)).sup == 0.0
    h = gallery.sample("helicoid", nx=65, ny=33)
    X, Y = h.grid.mesh()
    rep = En.evolution_identities_check(compute_geometry(h), np.exp(-4 * (X**2 + (Y - 0.5) ** 2)))
    assert rep.area < 1e-8


def test_cubic_identity_closed_cases():
    h = np.array([[[1.0, 0.0], [0.0, 0.0]], [[2.5, 0.0], [0.0, 2.5]]])
    assert np.max(np.abs(En.cubic_identity_check(h))) < 1e-15
    assert np.trace(h[0] @ h[0] @ h[0]) == 1.0


def test_geodesic_curvature_two_ways():
    grid = ParamGrid(257, 129, (-math.pi, math.pi), (0.0, 5.0))
    g = compute_geometry(gallery.sample("spherical_cap", grid=grid, r=0.7))
    rep = En.energy_report(g, chi=1, support="sphere:1")
    assert math.isclose(rep.boundary_geodesic_integral, rep.boundary_support_integral,
                        rel_tol=1e-10)


# ---------------------------------------------------------------- reflection

def test_injected_asymmetry_is_read_back():
    full = R.reflect(gallery.sample("mercator_sphere", nx=65, ny=33))
    X, Y = full.grid.mesh()
    bump = 1e-3 * np.exp(-20 * (X**2 + (Y - 0.5) ** 2)) * (Y > 0)
    pos = full.positions.copy()
    pos[..., 0] += bump
    audit = R.parity_audit(Immersion(full.grid, pos), "plane")
    assert audit.residuals["f"] == pytest.approx(np.max(bump), rel=1e-12)
    dby = d1(bump, full.grid.hy, 0)
    assert audit.residuals["y"] == pytest.approx(np.max(np.abs(dby + dby[::-1])), rel=1e-9)


def test_reflection_idempotent_and_metric_even():
    half = gallery.sample("helicoid", nx=33, ny=17)
    full = R.reflect(half, "line")
    again = R.reflect(R.restrict_upper(full), "line")
    assert np.array_equal(again.positions, full.positions)
    g = compute_geometry(full)
    assert np.array_equal(g.det_g[::-1], g.det_g)


@pytest.mark.parametrize("sid,kind", [("mercator_sphere", "plane"), ("helicoid", "line")])
def test_reflected_surfaces_are_willmore(sid, kind):
    full = R.reflect(gallery.sample(sid, nx=129, ny=65), kind)
    g = compute_geometry(Immersion(full.grid, full.positions))
    X, Y = full.grid.mesh()
    inner = (np.abs(X) <= math.pi - 0.5) & (np.abs(Y) <= 0.75)
    assert np.max(np.abs(En.willmore_operator(g)[inner])) < 1e-4


def test_reflection_constraint_traces_mercator():
    rep = R.check_constraints(gallery.sample("mercator_sphere", nx=33, ny=17), "plane")
    assert rep.sup["constraint"] < 1e-16 and rep.sup["normal_constraint"] < 1e-16
    assert rep.sup["dx_f3"] < 1e-16 and rep.sup["dy_f1"] < 1e-16 and rep.sup["dy_f2"] < 1e-16


# ---------------------------------------------------------------- free boundary

def test_conormal_of_conformal_chart():
    g = compute_geometry(gallery.sample("helicoid", nx=33, ny=17))
    eta = FB.conormal(g)
    u = g.u_conf[0]
    assert np.allclose(eta[:, 0], 0.0, atol=1e-15)
    assert np.allclose(eta[:, 1], np.exp(-u), rtol=1e-14)
    eta = FB.conormal(compute_geometry(gallery.sample("mercator_sphere", nx=33, ny=17)))
    assert np.allclose(eta, [0.0, 1.0], atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_conormal_against_gram_schmidt(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 2))
    if abs(np.linalg.det(A.T @ A)) < 1e-2:
        A[:, 1] += np.cross(A[:, 0], [0.3, -0.5, 0.8])
    g = compute_geometry(_affine(A))
    G = A.T @ A
    e1 = np.array([1.0, 0.0]) / math.sqrt(G[0, 0])
    v = np.array([0.0, 1.0]) - (np.array([0.0, 1.0]) @ G @ e1) * e1
    e2 = v / math.sqrt(v @ G @ v)
    eta = FB.conormal(g)
    assert np.allclose(eta, e2, atol=1e-10)
    tau = FB.unit_tangent(g)
    assert np.allclose(np.einsum("ia,ab,ib->i", eta, G, tau), 0.0, atol=1e-10)


def test_plane_contact_direction():
    g = compute_geometry(gallery.sample("hemisphere", nx=65, ny=33))
    eta = FB.conormal(g)
    df_eta = eta[:, :1] * g.jet["x"][0] + eta[:, 1:] * g.jet["y"][0]
    assert np.allclose(np.abs(df_eta @ np.array([0, 0, 1.0])), 1.0, atol=1e-12)


def test_constant_field_admissibility():
    grid = ParamGrid(65, 33, (-math.pi, math.pi), (0.0, 6.0))
    g = compute_geometry(gallery.sample("hemisphere", grid=grid))
    X, Y = grid.mesh()
    w = (np.cos(0.5 * np.pi * Y / 6.0) ** 3 * np.sin(0.5 * (X + math.pi)) ** 2)[..., None]
    horiz = w * np.array([1.0, 0.0, 0.0])
    vert = w * np.array([0.0, 0.0, 1.0])
    for arr in (horiz, vert):
        arr[:, [0, -1]] = 0
        arr[-1] = 0
    assert FB.admissibility(g, FB.VariationField.from_values(horiz, g), "plane").b_resid < 1e-3
    assert FB.admissibility(g, FB.VariationField.from_values(horiz, g), "plane").a_resid == 0.0
    assert FB.admissibility(g, FB.VariationField.from_values(vert, g), "plane").a_resid == pytest.approx(1.0)


def test_even_fields_are_admissible(rng):
    half = gallery.sample("mercator_sphere", nx=65, ny=33)
    full = R.reflect(half)
    g = compute_geometry(full)
    phi = R.reflect_field(window_field(half.grid, rng), "plane", "even")
    rep = FB.admissibility(g, FB.VariationField.from_values(phi, g, check_support=False), "plane",
                           tol=1e-13)
    assert rep.passed


def test_zero_data_gives_zero_extension():
    grid = ParamGrid(129, 33, (-math.pi, math.pi), (0.0, 6.0))
    g = compute_geometry(gallery.sample("hemisphere", grid=grid))
    phi = FB.phi_extension(g, np.zeros(129), np.zeros(129), modes=32)
    assert np.max(np.abs(phi.values)) == 0.0


def test_extension_kernel_is_trivial():
    grid = ParamGrid(513, 65, (-math.pi, math.pi), (0.0, 6.0))
    g = compute_geometry(gallery.sample("hemisphere", grid=grid))
    x = grid.x
    for k in (1, 2):
        a = np.sin(k * x) * S.bump(x)
        A, B = FB.lf_operator(g, FB.phi_extension(g, a, 0 * x))
        # L_f of a nonzero extension is nonzero: it returns its data
        assert np.max(np.abs(A)) == pytest.approx(np.max(np.abs(a)), rel=1e-10)


# ---------------------------------------------------------------- spectral

def test_fourier_single_modes():
    x = S.periodic_nodes(65)
    fd = S.fourier_decompose(np.cos(x), 16)
    assert fd.a[0] == pytest.approx(1.0, abs=1e-15) and np.abs(fd.a[1:]).max() < 1e-15
    assert S.fourier_decompose(np.ones_like(x), 16).a0 == pytest.approx(1.0, abs=1e-15)


def test_parseval():
    x = S.periodic_nodes(1025)
    fd = S.fourier_decompose(S.bump(x), 128)
    t = S.periodic_nodes(4097)[:-1]
    quad = 2 * math.pi / t.size * np.sum(S.bump(t) ** 2)
    assert math.isclose(fd.l2_norm2(), quad, rel_tol=1e-12)


def test_constant_and_single_mode_extensions():
    xe = np.linspace(-math.pi, math.pi, 41)
    one = S.from_coefficients(a0=1.0, K=4)
    assert np.allclose(S.harmonic_extension_series(one, xe, np.array([0.2, 1.0])).values, 1.0)
    assert np.allclose(S.harmonic_extension_kernel(lambda t: np.ones_like(t), xe, 0.5), 1.0,
                       atol=1e-12)
    cos1 = S.from_coefficients(a=[1.0])
    u = S.harmonic_extension_series(cos1, xe, np.array([0.7])).values[0]
    assert np.allclose(u, math.exp(-0.7) * np.cos(xe), atol=1e-15)


def test_kernel_is_even():
    x = np.linspace(0, math.pi, 50)
    assert np.array_equal(S.poisson_kernel(-x, 0.3), S.poisson_kernel(x, 0.3))


def test_biharmonic_normal_traces():
    x = S.periodic_nodes(65)
    zero = S.from_coefficients(K=1)
    uy = S.biharmonic_extension(S.from_coefficients(a=[1.0]), zero, x, np.array([0.0]),
                                y_order=1).values[0]
    assert np.max(np.abs(uy)) < 1e-15
    uy = S.biharmonic_extension(zero, S.from_coefficients(b=[1.0]), x, np.array([0.0]),
                                y_order=1).values[0]
    assert np.allclose(uy, np.sin(x), atol=1e-15)


def test_l2_identity_single_modes():
    rep = S.l2_identity_check(S.from_coefficients(a=[1.0]), 1.0)
    assert rep.lhs == pytest.approx(math.pi / 2) and rep.rhs == pytest.approx(math.pi / 2)
    rep = S.l2_identity_check(S.from_coefficients(a=[0.0, 1.0]), 0.0)
    assert rep.lhs == pytest.approx(math.pi / 4) and rep.rhs == pytest.approx(math.pi / 4)


def test_seminorm_index_shift():
    fd = S.random_band_limited(np.random.default_rng(4), K=12)
    assert S.sobolev_seminorm(fd.derivative(1), -0.5) == pytest.approx(S.sobolev_seminorm(fd, 0.5))
    assert S.sobolev_seminorm(fd.derivative(2), -0.5) == pytest.approx(S.sobolev_seminorm(fd, 1.5))


def test_cutoff_on_constant_and_supported_data():
    x = S.periodic_nodes(129)
    y = np.linspace(0, 2, 65)
    ones = S.HalfplaneField(x, y, np.ones((65, 129)))
    assert np.array_equal(S.apply_cutoff(ones).values, S.cutoff(x, y))
    fd = S.fourier_decompose(S.bump(x), 32)
    u = S.biharmonic_extension(fd, S.from_coefficients(K=32), x, y)
    assert np.array_equal(S.apply_cutoff(u).values[0], u.values[0] * S.cutoff(x, y)[0])
    inside = np.abs(x) <= math.pi / 2
    assert np.array_equal(S.apply_cutoff(u).values[0][inside], u.values[0][inside])


def test_c1_ratio_for_single_mode():
    x = S.periodic_nodes(257)
    y = np.linspace(0, 1, 129)
    u = S.biharmonic_extension(S.from_coefficients(a=[1.0]), S.from_coefficients(K=1), x, y)
    ratio = S.c1_norm(u) / 2.0          # ||phi||_{W^{1,inf}} + ||psi||_inf = 1 + 1... of cos
    assert np.isfinite(ratio) and 0 < ratio < 2
    cut = S.c1_norm(S.apply_cutoff(u)) / S.c1_norm(u)
    assert np.isfinite(cut)
