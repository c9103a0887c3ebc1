"""Boundary and region quadrature: densities, grids, masses, rule checks."""

import numpy as np
import pytest

from clfkit.domains import Ball, Ellipsoid, quasimetric, radial_boundary_point
from clfkit.errors import ConfigError, ResolutionTooCoarse, RootNotBracketed
from clfkit.measures import (
    Quasiball,
    build_cap_grid,
    build_region_grid,
    build_shell_grid,
    build_surface_grid,
    convergence_order,
    fubini_rule_check,
    leray_levy_density,
    nu_weights,
    quasiball_measure,
    region_integral,
    region_radial_rule_check,
    surface_integral,
    volume_density,
)
from clfkit.regions import (
    RegionSpec,
    in_external_region,
    in_internal_region,
    in_model_region,
)

from helpers import boundary_points, catalog, seeded_directions, shell_points
from oracles import mc_surface_sample

SPHERE_AREA = 2.0 * np.pi**2


def lens_sigma(delta: float) -> float:
    """Exact ball quasiball measure: 2*pi times the area of the unit disc
    intersected with the disc of radius delta centered at 1.

    For the unit sphere the pairing <z, w> of a fixed boundary z with a
    uniformly distributed w is uniform on the unit disc, so the quasimetric
    sublevel set {|1 - <z,w>| < delta} pushes forward to a disc lens.
    """
    d, big_r, r = 1.0, 1.0, delta
    if r >= d + big_r:
        return SPHERE_AREA
    area = (
        r**2 * np.arccos((d**2 + r**2 - big_r**2) / (2 * d * r))
        + big_r**2 * np.arccos((d**2 + big_r**2 - r**2) / (2 * d * big_r))
        - 0.5 * np.sqrt((-d + r + big_r) * (d + r - big_r) * (d - r + big_r) * (d + r + big_r))
    )
    return 2.0 * np.pi * area


# ---------------------------------------------------------------- densities


def test_weighted_density_ball_constant():
    ball = Ball()
    pts = boundary_points(ball, 100, seed=11)
    dens = leray_levy_density(ball, pts)
    assert np.all(np.abs(dens - 1.0 / SPHERE_AREA) < 1e-10)


def test_weighted_density_positive_on_catalog():
    for name, dom in catalog().items():
        pts = boundary_points(dom, 10_000, seed=7)
        dens = leray_levy_density(dom, pts)
        assert np.all(dens > 0), name
        assert np.all(np.isfinite(dens)), name


def test_volume_density_closed_forms():
    ball = Ball()
    ell = Ellipsoid((2.0, 1.0))
    assert np.allclose(volume_density(ball, shell_points(ball, 50, 3)), 8.0, atol=1e-12)
    assert np.allclose(volume_density(ell, shell_points(ell, 50, 3)), 2.0, atol=1e-12)
    for name, dom in catalog().items():
        pts = shell_points(dom, 200, seed=5)
        dens = volume_density(dom, pts)
        det = np.linalg.det(dom.hermitian(pts)).real
        assert np.allclose(dens, 8.0 * det, rtol=1e-12), name
        assert np.all(dens > 0), name


# ------------------------------------------------------------ surface grids


def test_surface_grid_ball_exact_masses():
    grid = build_surface_grid(Ball(), t=0.0, resolution=16)
    assert abs(np.sum(grid.sigma) - SPHERE_AREA) < 1e-10
    assert abs(np.sum(grid.s) - 1.0) < 1e-10
    assert np.all(grid.sigma > 0) and np.all(grid.s > 0)


def test_surface_grid_ball_ladder_converged():
    totals = [
        float(np.sum(build_surface_grid(Ball(), resolution=r).sigma))
        for r in (8, 16, 32)
    ]
    order = convergence_order(totals)
    assert order >= 2.0 or order == np.inf


def test_surface_grid_ellipsoid_mass():
    grid = build_surface_grid(Ellipsoid((2.0, 1.0)), t=0.0, resolution=24)
    assert abs(np.sum(grid.s) - 1.0) < 1e-6
    assert np.all(grid.s > 0)


def test_surface_grid_ellipsoid_smooth_integrand_ladder():
    ell = Ellipsoid((2.0, 1.0))
    vals = []
    for r in (6, 12, 24):
        g = build_surface_grid(ell, resolution=r)
        vals.append(float(np.real(surface_integral(g, np.real(g.nodes[:, 0]) ** 2))))
    order = convergence_order(vals)
    assert order >= 2.0 or order == np.inf


def test_surface_grid_perturbed_mass():
    # weighted total mass of the cubically perturbed ball: 1 + delta^2/2
    dom = catalog()["perturbed_ball"]
    grid = build_surface_grid(dom, t=0.0, resolution=24)
    total = float(np.sum(grid.s))
    assert abs(total - 1.00125) < 2e-4
    assert np.all(grid.s > 0)


def test_surface_grid_offset_level():
    t = 0.05
    grid = build_surface_grid(Ball(), t=t, resolution=12)
    assert np.max(np.abs(np.real(Ball().rho(grid.nodes)) - t)) < 1e-12
    expected = SPHERE_AREA * (1.0 + t) ** 1.5
    assert abs(np.sum(grid.sigma) - expected) < 1e-8 * expected


def test_surface_grid_requires_star_shaped_domain():
    shifted = Ball(center=(0.0, -1.0))
    with pytest.raises((RootNotBracketed, ConfigError)):
        build_surface_grid(shifted, t=0.0, resolution=6)


def test_surface_grid_table_layout():
    grid = build_surface_grid(Ball(), resolution=6)
    tab = grid.table()
    assert tab.shape == (grid.nodes.shape[0], 6)
    assert np.all(np.isfinite(tab))
    assert grid.resolution == {"n_u": 6, "n_phi": 12}


def test_shell_grid_ball_volume():
    eps = 0.05
    nodes, w = build_shell_grid(Ball(), 0.0, eps, resolution=16, levels=8)
    vol = float(np.sum(w))
    exact = 0.5 * np.pi**2 * ((1.0 + eps) ** 2 - 1.0)
    assert abs(vol - exact) < 1e-6 * exact
    rho = np.real(Ball().rho(nodes))
    assert np.all((rho > 0) & (rho < eps))


# ------------------------------------------------------------- region grids


def test_region_grid_external_membership_and_weights():
    for name, dom in catalog().items():
        xi = boundary_points(dom, 3, seed=21)[0]
        spec = RegionSpec("external", 0.05, 0.05, vertex=xi)
        grid = build_region_grid(dom, spec, l=1)
        assert np.all(in_external_region(dom, spec, grid.nodes)), name
        assert np.all(grid.mu > 0), name
        assert np.all(grid.rho > 0), name
        assert np.all(np.isfinite(grid.nu)), name


def test_region_grid_model_membership():
    spec = RegionSpec("model", 0.05, 0.05)
    grid = build_region_grid(Ball(), spec, l=1)
    assert np.all(in_model_region(spec, grid.nodes))
    assert np.all(grid.mu > 0)


def test_region_grid_internal_membership():
    dom = Ball()
    xi = boundary_points(dom, 1, seed=33)[0]
    spec = RegionSpec("internal", 0.05, 0.05, vertex=xi)
    grid = build_region_grid(dom, spec, l=1)
    ok = in_internal_region(dom, spec, grid.nodes)
    assert np.mean(ok) >= 0.9
    assert np.all(grid.rho < 0)
    assert np.all(grid.mu > 0)


def test_region_grid_nu_conventions():
    # n=2, l=1: default exponent n-2l+1 = 1, printed override n-2l-1 = -1
    assert nu_weights(np.array([2.5]), np.array([0.01]), 2, 1)[0] == pytest.approx(250.0)
    assert nu_weights(np.array([2.5]), np.array([0.01]), 2, 1, "printed")[0] == pytest.approx(0.025)
    with pytest.raises(ConfigError):
        nu_weights(np.array([1.0]), np.array([0.01]), 2, 1, "bogus")
    xi = boundary_points(Ball(), 1, seed=2)[0]
    spec = RegionSpec("external", 0.05, 0.05, vertex=xi)
    grid = build_region_grid(Ball(), spec, l=1)
    assert np.allclose(grid.nu, grid.mu / grid.rho)


def test_region_grid_quadrature_vs_level_profile():
    # integral over the external region of a function of the level alone
    # factorizes: sum mu * f(rho) = integral f(s) * (slice area) ds; checked
    # against the closed flat-model form on the ball at small eta.
    dom = Ball()
    xi = boundary_points(dom, 1, seed=4)[0]
    eta = eps = 0.02
    spec = RegionSpec("external", eta, eps, vertex=xi)
    grid = build_region_grid(dom, spec, l=1)
    q = float(np.real(region_integral(grid, np.ones_like(grid.rho))))
    model = np.pi * eta**2 * eps**3 / 3.0
    assert q == pytest.approx(model, rel=0.1)


def test_region_radial_rule_bands():
    for name, dom in catalog().items():
        xi = boundary_points(dom, 1, seed=13)[0]
        rep = region_radial_rule_check(dom, xi)
        assert rep["passed"], (name, rep)
        assert rep["band_constant"] < 2.0, name


def test_fubini_rule_band_and_stability():
    rep = fubini_rule_check(Ball(), outer_resolution=6)
    assert rep["passed"], rep
    coarse = fubini_rule_check(Ball(), outer_resolution=4)
    assert abs(coarse["normalized_ratio"] - rep["normalized_ratio"]) < 0.15 * rep["normalized_ratio"]
    rep_e = fubini_rule_check(Ellipsoid((2.0, 1.0)), outer_resolution=5)
    assert rep_e["passed"], rep_e


# ---------------------------------------------------------- quasiball sizes


def test_quasiball_full_and_empty():
    ball = Ball()
    grid = build_surface_grid(ball, resolution=16)
    z = np.array([1.0, 0.0], dtype=complex)
    assert quasiball_measure(grid, Quasiball(z, 2.0001)) == pytest.approx(SPHERE_AREA)
    assert quasiball_measure(grid, Quasiball(z, 0.0)) == 0.0
    with pytest.raises(ResolutionTooCoarse):
        quasiball_measure(grid, Quasiball(z, 1e-4))


def test_quasiball_lens_closed_form():
    ball = Ball()
    z = boundary_points(ball, 1, seed=9)[0]
    grid = build_surface_grid(ball, resolution=32)
    for delta in (0.3, 0.15):
        est = quasiball_measure(grid, Quasiball(z, delta))
        assert est == pytest.approx(lens_sigma(delta), rel=0.08), delta
    for delta in (0.1, 0.03):
        cap = build_cap_grid(ball, z, delta, resolution=24)
        est = quasiball_measure(cap, Quasiball(z, delta))
        assert est == pytest.approx(lens_sigma(delta), rel=0.05), delta


def test_quasiball_monte_carlo_oracle():
    ball = Ball()
    z = boundary_points(ball, 1, seed=14)[0]
    nodes, w = mc_surface_sample(ball, 400_000, seed=5)
    for delta in (0.3, 0.1):
        inside = quasimetric(ball, nodes, z) < delta
        est = float(np.sum(w[inside]))
        assert est == pytest.approx(lens_sigma(delta), rel=0.05), delta


def test_quasiball_dimension_slope():
    # log-measure vs log-radius slope equals the homogeneous dimension 2
    deltas = np.logspace(-3, -1, 5)
    for name, dom in catalog().items():
        z = boundary_points(dom, 1, seed=17)[0]
        sizes = []
        for d in deltas:
            cap = build_cap_grid(dom, z, float(d), resolution=20)
            sizes.append(quasiball_measure(cap, Quasiball(z, float(d))))
        slope = np.polyfit(np.log(deltas), np.log(sizes), 1)[0]
        assert abs(slope - 2.0) < 0.1, (name, slope)


def test_quasiball_doubling_bounded():
    for name, dom in catalog().items():
        centers = boundary_points(dom, 3, seed=23)
        for z in centers:
            for d in (1e-3, 1e-2):
                cap = build_cap_grid(dom, z, 2.0 * d, resolution=20)
                big = quasiball_measure(cap, Quasiball(z, 2.0 * d))
                small = quasiball_measure(cap, Quasiball(z, d))
                assert 2.0 < big / small < 8.0, (name, d)
        # largest radius pair measured on a full boundary grid
        grid = build_surface_grid(dom, resolution=40)
        z = centers[0]
        big = quasiball_measure(grid, Quasiball(z, 0.2))
        small = quasiball_measure(grid, Quasiball(z, 0.1))
        assert 2.0 < big / small < 8.0, name


def test_cap_grid_matches_radial_grid():
    # two independent surface Jacobians (chart graph vs radial push) agree
    ell = Ellipsoid((2.0, 1.0))
    z = radial_boundary_point(ell, seeded_directions(ell, 2, 19)[1])
    delta = 0.08
    cap = build_cap_grid(ell, z, delta, resolution=24)
    full = build_surface_grid(ell, resolution=40)
    a = quasiball_measure(cap, Quasiball(z, delta))
    b = quasiball_measure(full, Quasiball(z, delta))
    assert a == pytest.approx(b, rel=0.1)
    assert np.max(np.abs(np.real(ell.rho(cap.nodes)))) < 1e-10


def test_convergence_order_guards():
    with pytest.raises(ConfigError):
        convergence_order([1.0, 2.0])
    assert convergence_order([1.0, 1.25, 1.3125]) == pytest.approx(2.0)
    assert convergence_order([1.0, 1.0, 1.0]) == np.inf
