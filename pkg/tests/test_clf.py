"""Reproducing kernel, operator quadrature, and surface-vs-volume identity."""

import numpy as np
import pytest

from clfkit.clf import (
    HoloTestFunction,
    PRODUCTION_RESOLUTION,
    clf_apply,
    clf_kernel,
    exterior_pole,
    holomorphy_defect,
    monomial,
    random_poly,
    reproduction_report,
    rough,
    standard_suite,
    stokes_identity_check,
)
from clfkit.domains import Ball, Ellipsoid, boundary_distance, radial_boundary_point
from clfkit.errors import ConfigError, SingularPairing, TooCloseToBoundary
from clfkit.measures import (
    build_adapted_surface_grid,
    build_adapted_volume_grid,
    build_surface_grid,
    volume_density,
)
from helpers import boundary_points
from oracles import ball_frozen_power_integral
from oracles import holomorphy_defect as oracle_defect

BALL = Ball()
ELLIPSOID = Ellipsoid()


@pytest.fixture(scope="module")
def production_grid():
    return build_surface_grid(BALL, t=0.0, resolution=PRODUCTION_RESOLUTION)


@pytest.fixture(scope="module")
def ball_report():
    return reproduction_report(BALL)


@pytest.fixture(scope="module")
def ellipsoid_report():
    return reproduction_report(ELLIPSOID)


@pytest.fixture(scope="module")
def stokes_ball_l1():
    return stokes_identity_check(BALL, l=1)


@pytest.fixture(scope="module")
def stokes_ellipsoid_l1():
    return stokes_identity_check(ELLIPSOID, l=1, tau_count=8)


# ---------------------------------------------------------------------------
# kernel values


def test_kernel_point_examples():
    xi = np.array([1.0, 0.0], dtype=complex)
    assert clf_kernel(BALL, xi, np.zeros(2)) == pytest.approx(1.0, abs=1e-14)
    assert clf_kernel(BALL, xi, np.array([0.5, 0.0])) == pytest.approx(4.0, abs=1e-12)
    xi2 = np.array([0.0, 1.0], dtype=complex)
    z2 = np.array([0.5j, 0.0])
    assert clf_kernel(BALL, xi2, z2) == pytest.approx(1.0, abs=1e-14)


def test_kernel_ball_closed_form():
    xi = boundary_points(BALL, 60, seed=3)
    rng = np.random.default_rng(4)
    z = 0.6 * (rng.normal(size=(60, 4)).view(complex))
    z /= np.maximum(1.0, 2.0 * np.linalg.norm(z, axis=-1, keepdims=True))
    kernel = clf_kernel(BALL, xi, z)
    closed = 1.0 / (1.0 - np.einsum("ik,ik->i", np.conj(xi), z)) ** 2
    assert np.max(np.abs(kernel - closed) / np.abs(closed)) < 1e-13


def test_kernel_singular_pairing_raises():
    xi = np.array([1.0, 0.0], dtype=complex)
    with pytest.raises(SingularPairing):
        clf_kernel(BALL, xi, xi)


def test_apply_rejects_near_boundary_point(production_grid):
    with pytest.raises(TooCloseToBoundary):
        clf_apply(BALL, production_grid, monomial((1, 0)), np.array([0.95, 0.0]))


def test_apply_is_linear(production_grid):
    f = monomial((2, 1))
    g = random_poly(7, degree=3)
    a, b = 1.3 - 0.4j, -0.7 + 2.1j
    combo = HoloTestFunction(
        kind="combo",
        evaluator=lambda z: a * f(z) + b * g(z),
    )
    z = np.array([0.3, -0.25 + 0.1j])
    lhs = clf_apply(BALL, production_grid, combo, z)
    rhs = a * clf_apply(BALL, production_grid, f, z) + b * clf_apply(
        BALL, production_grid, g, z
    )
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_pairing_dominates_boundary_distance():
    """|<grad rho(xi), xi - z>| >= c * dist(z, boundary) with stable c > 0."""

    def min_ratio(n_xi):
        xi = boundary_points(BALL, n_xi, seed=11)
        rng = np.random.default_rng(12)
        dirs = rng.normal(size=(40, 4)).view(complex)
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        worst = np.inf
        for frac in (0.2, 0.5, 0.8, 0.95):
            z = frac * radial_boundary_point(BALL, dirs, t=0.0)
            pair = np.abs(
                np.einsum("ik,ijk->ij", np.conj(xi), xi[:, None, :] - z[None, :, :])
            )
            dist = boundary_distance(BALL, z)
            worst = min(worst, float(np.min(pair.min(axis=0) / dist)))
        return worst

    c_coarse = min_ratio(150)
    c_fine = min_ratio(400)
    assert c_fine > 0.5  # exact lower bound on the ball is 1
    assert 0.5 < c_coarse / c_fine < 2.0


# ---------------------------------------------------------------------------
# test-function suite


def test_suite_members_and_holomorphy():
    suite = standard_suite(BALL)
    kinds = {f.kind.split("(")[0] for f in suite}
    assert {"monomial", "exterior_pole", "random_poly", "rough"} <= kinds
    rng = np.random.default_rng(21)
    pts = 0.5 * (rng.normal(size=(10, 4)).view(complex))
    pts /= np.maximum(1.0, 2.5 * np.linalg.norm(pts, axis=-1, keepdims=True))
    for f in suite:
        defect = holomorphy_defect(f, pts)
        if f.holomorphic:
            assert defect < 1e-8, f.kind
        else:
            assert defect > 1e-2, f.kind
        # library defect agrees with the independent per-point oracle
        # (exact match only above finite-difference roundoff ~1e-10)
        worst_oracle = max(oracle_defect(f, p) for p in pts)
        if worst_oracle > 1e-8:
            assert defect == pytest.approx(worst_oracle, rel=1e-6)
        else:
            assert defect < 1e-8


def test_exterior_pole_requires_exterior_anchor():
    with pytest.raises(ConfigError):
        exterior_pole(BALL, np.array([0.5, 0.0]))


def test_rough_member_not_holomorphic():
    f = rough(99)
    assert not f.holomorphic


# ---------------------------------------------------------------------------
# reproduction


def test_reproduce_constant_and_monomial(production_grid):
    one = clf_apply(BALL, production_grid, monomial((0, 0)), np.zeros(2))
    assert abs(one - 1.0) < 1e-10
    z = np.array([0.3, 0.2j])
    val = clf_apply(BALL, production_grid, monomial((2, 1)), z)
    assert abs(val - 0.018j) < 1e-6


def test_ellipsoid_pole_reproduces():
    grid = build_surface_grid(ELLIPSOID, t=0.0, resolution=PRODUCTION_RESOLUTION)
    f = exterior_pole(ELLIPSOID, np.array([3.0, 0.0]), m=2)
    z = np.array([0.5, 0.2])
    exact = complex(f(z[None, :])[0])
    assert abs(clf_apply(ELLIPSOID, grid, f, z) - exact) < 1e-5 * max(1.0, abs(exact))


@pytest.mark.parametrize("report_name", ["ball_report", "ellipsoid_report"])
def test_reproduction_report_passes(report_name, request):
    report = request.getfixturevalue(report_name)
    assert report["passed"]
    assert report["holomorphic_reproduce"]
    assert report["negative_control_fails_to_reproduce"]
    finest = str(report["resolutions"][-1])
    assert report["worst_by_resolution"][finest] < 1e-6


def test_reproduction_monotone_with_order(ball_report):
    res = ball_report["resolutions"]
    for member in ball_report["members"]:
        if not member["holomorphic"]:
            continue
        errs = [member["errors"][str(r)] for r in res]
        assert member["monotone"], member["kind"]
        # each resolution doubling must gain at least order 2 until roundoff
        if errs[-1] > 1e-12:
            assert np.log2(errs[-2] / errs[-1]) >= 2.0, member["kind"]


def test_nonholomorphic_error_bounded_away(ball_report):
    finest = str(ball_report["resolutions"][-1])
    controls = [m for m in ball_report["members"] if not m["holomorphic"]]
    assert controls
    assert all(m["errors"][finest] > 1e-2 for m in controls)


# ---------------------------------------------------------------------------
# surface-vs-volume identity for frozen-gradient powers


def test_frozen_power_closed_form_two_resolutions():
    """Ball closed form |tau|^(-2(n+l)) at two grid resolutions, all l."""
    tau = radial_boundary_point(BALL, np.array([1.0, 0.0], complex), t=0.05)
    g = BALL.grad(tau)
    for l in (0, 1, 2):
        exact = ball_frozen_power_integral(tau, 2, l)
        if l == 0:
            resolutions = (
                {"polar_nodes": 6, "angle_nodes": 8, "azimuth": 24},
                {"polar_nodes": 7, "angle_nodes": 9, "azimuth": 28},
            )
        elif l == 1:
            resolutions = (
                {"polar_nodes": 8, "angle_nodes": 10, "azimuth": 32},
                {"polar_nodes": 8, "angle_nodes": 12, "azimuth": 32},
            )
        else:
            resolutions = (
                {"polar_nodes": 10, "angle_nodes": 12, "azimuth": 40},
                {"polar_nodes": 10, "angle_nodes": 14, "azimuth": 40},
            )
        for res in resolutions:
            grid = build_adapted_surface_grid(BALL, tau, **res)
            pair = np.einsum("k,...k->...", g, tau[None, :] - grid.nodes)
            a_val = complex(np.sum(grid.s / pair ** (2 + l)))
            assert abs(a_val - exact) / exact < 1e-6, (l, res)


def test_frozen_power_volume_side_closed_form():
    tau = radial_boundary_point(BALL, np.array([1.0, 0.0], complex), t=0.05)
    g = BALL.grad(tau)
    settings = {
        0: {"level_nodes": 2, "polar_nodes": 4, "angle_nodes": 4, "azimuth": 12},
        1: {"level_nodes": 2, "polar_nodes": 4, "angle_nodes": 4, "azimuth": 12},
        2: {"level_nodes": 4, "polar_nodes": 6, "angle_nodes": 8, "azimuth": 20},
    }
    tol = {0: 1e-4, 1: 5e-3, 2: 1e-4}
    for l, res in settings.items():
        exact = ball_frozen_power_integral(tau, 2, l)
        nodes, leb = build_adapted_volume_grid(BALL, tau, **res)
        weights = leb * volume_density(BALL, nodes) / (2.0 * np.pi) ** 2
        pair = np.einsum("k,...k->...", g, tau[None, :] - nodes)
        b_val = complex(np.sum(weights / pair ** (2 + l)))
        assert abs(b_val - exact) / exact < tol[l], l


@pytest.mark.parametrize("check_name", ["stokes_ball_l1", "stokes_ellipsoid_l1"])
def test_stokes_identity_l1(check_name, request):
    report = request.getfixturevalue(check_name)
    assert report["passed"]
    assert report["best_candidate"] == "identity"
    assert report["candidate_distances"]["identity"] < 0.01
    assert report["kappa_drift_half_sample"] < 0.01


def test_stokes_identity_l2_scalar_is_one():
    report = stokes_identity_check(BALL, l=2, tau_count=6)
    assert report["best_candidate"] == "identity"
    assert report["candidate_distances"]["identity"] < 0.01


def test_stokes_surface_integral_uniformly_bounded(stokes_ball_l1, stokes_ellipsoid_l1):
    """The l=1 boundary integrals stay O(1) over the whole exterior shell."""
    for report in (stokes_ball_l1, stokes_ellipsoid_l1):
        assert np.all(np.isfinite(np.abs(report["A"])))
        assert report["sup_abs_A"] <= 2.0
