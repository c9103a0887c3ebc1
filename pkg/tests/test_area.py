"""Square function over external approach regions: evaluator, norms, reports."""

import numpy as np
import pytest

from clfkit.area import (
    BoundaryFunction,
    VertexAreaEvaluator,
    _prefix_max_trend,
    area_integrand,
    area_integral_Il,
    bmo_inequality_report,
    bmo_seminorm,
    boundary_family,
    constant_function,
    halton_surface_design,
    indicator_smoothed,
    log_singular,
    lp_inequality_report,
    lp_norm,
    rough_random,
    smooth_member,
)
from clfkit.domains import Ball, quasimetric, radial_boundary_point
from clfkit.errors import ConfigError, ResolutionTooCoarse, ZeroDenominator
from clfkit.measures import Quasiball, build_surface_grid

from helpers import boundary_points, seeded_directions

E1 = np.array([1.0 + 0j, 0.0 + 0j])
SPHERE_AREA = 2.0 * np.pi**2


@pytest.fixture(scope="module")
def ball():
    return Ball()


@pytest.fixture(scope="module")
def ev_ball(ball):
    return VertexAreaEvaluator(ball, E1)


# ---------------------------------------------------------------------------
# pointwise kernel power


def test_area_integrand_closed_form_on_ball(ball):
    s = 0.05
    tau = np.sqrt(1.0 + s) * E1
    # pairing <conj(tau), tau - w> evaluated by hand
    near = np.abs(area_integrand(ball, tau, E1, l=1))
    assert near == pytest.approx(((1.0 + s) - np.sqrt(1.0 + s)) ** -3, rel=1e-12)
    far = np.abs(area_integrand(ball, tau, -E1, l=1))
    assert far == pytest.approx(((1.0 + s) + np.sqrt(1.0 + s)) ** -3, rel=1e-12)
    assert near > far  # kernel peaks under the vertex


def test_area_integrand_l_dependence(ball):
    tau = np.sqrt(1.1) * E1
    v1 = np.abs(area_integrand(ball, tau, E1, l=1))
    v2 = np.abs(area_integrand(ball, tau, E1, l=2))
    pairing = 1.1 - np.sqrt(1.1)
    assert v2 / v1 == pytest.approx(1.0 / pairing, rel=1e-10)


def test_area_integrand_size_band(ball):
    # |pairing| comparable to (height of tau) + (quasidistance to the foot)
    w = boundary_points(ball, 300, seed=11)
    for s in (0.01, 0.05):
        for k in range(4):
            direction = seeded_directions(ball, 5, seed=23 + k)[0]
            tau = radial_boundary_point(ball, direction, t=s)
            foot = radial_boundary_point(ball, direction)
            size = np.abs(area_integrand(ball, tau, w, l=1)) ** (-1.0 / 3.0)
            scale = s + quasimetric(ball, w, foot)
            ratio = size / scale
            assert np.all(ratio > 1.0 / 8.0)
            assert np.all(ratio < 8.0)


# ---------------------------------------------------------------------------
# evaluator algebra


def test_zero_data_gives_zero(ev_ball):
    zero = BoundaryFunction("zero", lambda w: np.zeros(w.shape[0], dtype=complex), "smooth")
    assert ev_ball.area_norms([zero])[0] == 0.0


def test_homogeneity_and_subadditivity(ev_ball):
    g1 = rough_random(7)
    g2 = indicator_smoothed(ev_ball.domain, E1, 0.3)
    scaled = BoundaryFunction("3*g1", lambda w: 3.0 * np.asarray(g1(w)), "rough_random")
    total = BoundaryFunction("g1+g2", lambda w: np.asarray(g1(w)) + np.asarray(g2(w)), "mixed")
    v1, v2, v3, vsum = ev_ball.area_norms([g1, g2, scaled, total])
    assert v3 == pytest.approx(3.0 * v1, rel=1e-12)
    assert vsum <= v1 + v2 + 1e-12


def test_inner_integrals_shape_and_linearity(ev_ball):
    g = rough_random(3)
    double = BoundaryFunction("2g", lambda w: 2.0 * np.asarray(g(w)), "rough_random")
    rows = ev_ball.inner_integrals([g, double])
    assert rows.shape == (2, ev_ball.region.nodes.shape[0])
    assert np.allclose(rows[1], 2.0 * rows[0], rtol=1e-12)


def test_ball_constant_value_rotation_invariant(ball):
    # the ball, its kernel, and the adapted grids are all unitarily
    # equivariant, so I_l(1, z) cannot depend on the vertex
    vals = [
        area_integral_Il(ball, constant_function(), z)
        for z in boundary_points(ball, 3, seed=41)
    ]
    assert np.ptp(vals) <= 1e-6 * vals[0]


def test_ball_constant_value_pinned_and_stable(ball):
    base = area_integral_Il(ball, constant_function(), E1)
    fine = area_integral_Il(
        ball,
        constant_function(),
        E1,
        region_resolution={"per_segment": 3, "disc_t": 8},
        inner_resolution={"polar_nodes": 4, "angle_nodes": 4, "azimuth": 16},
    )
    assert 0.002 < base < 0.004
    assert abs(base - fine) <= 0.04 * fine


def test_region_monotone_in_aperture_and_height(ball):
    g = constant_function()
    tall = area_integral_Il(ball, g, E1, eps=0.06)
    short = area_integral_Il(ball, g, E1, eps=0.03)
    assert short < 1.01 * tall
    wide = area_integral_Il(ball, g, E1, eta=0.06)
    narrow = area_integral_Il(ball, g, E1, eta=0.03)
    assert narrow < 1.01 * wide


def test_l_validation(ball):
    with pytest.raises(ConfigError):
        area_integral_Il(ball, constant_function(), E1, l=0)


# ---------------------------------------------------------------------------
# norms


def test_lp_norm_pinned_values(ball):
    grid = build_surface_grid(ball, t=0.0, resolution=24)
    one = constant_function()
    # normalized boundary measure has unit mass; raw area is 2 pi^2
    assert lp_norm(grid, one, 2.0, measure="S") == pytest.approx(1.0, abs=2e-4)
    assert lp_norm(grid, one, 2.0, measure="sigma") == pytest.approx(
        np.sqrt(SPHERE_AREA), rel=1e-3
    )
    re_z1 = BoundaryFunction("Re z1", lambda w: np.real(w[:, 0]) + 0j, "smooth")
    ratio = lp_norm(grid, re_z1, 2.0, measure="sigma") / lp_norm(grid, one, 2.0, measure="sigma")
    assert ratio == pytest.approx(0.5, rel=1e-3)


def test_lp_norm_validation(ball):
    grid = build_surface_grid(ball, t=0.0, resolution=8)
    with pytest.raises(ConfigError):
        lp_norm(grid, constant_function(), 0.5)
    with pytest.raises(ConfigError):
        lp_norm(grid, constant_function(), 2.0, measure="volume")


def test_bmo_constant_is_zero(ball):
    grid = build_surface_grid(ball, t=0.0, resolution=16)
    assert bmo_seminorm(ball, grid, constant_function(5.0)) <= 1e-13


def test_bmo_bounded_by_twice_sup(ball):
    grid = build_surface_grid(ball, t=0.0, resolution=16)
    g = rough_random(9)
    sup = float(np.max(np.abs(g(grid.nodes))))
    assert bmo_seminorm(ball, grid, g) <= 2.0 * sup + 1e-12


def test_bmo_skip_accounting(ball):
    grid = build_surface_grid(ball, t=0.0, resolution=16)
    family = [Quasiball(E1, 1e-6), Quasiball(E1, 0.5)]
    details = bmo_seminorm(ball, grid, rough_random(1), ball_family=family, details=True)
    assert details["balls_used"] == 1
    assert details["balls_skipped"] == 1
    with pytest.raises(ResolutionTooCoarse):
        bmo_seminorm(ball, grid, rough_random(1), ball_family=[Quasiball(E1, 1e-6)])
    with pytest.raises(ConfigError):
        bmo_seminorm(ball, grid, rough_random(1), ball_family=[])


def test_bmo_log_witness_finite_while_sup_grows(ball):
    g = log_singular(ball, E1)
    coarse = build_surface_grid(ball, t=0.0, resolution=16)
    fine = build_surface_grid(ball, t=0.0, resolution=28)
    sup_c = float(np.max(np.abs(g(coarse.nodes))))
    sup_f = float(np.max(np.abs(g(fine.nodes))))
    assert sup_f > sup_c + 0.3  # unbounded data: sup keeps climbing with resolution
    bmo_c = bmo_seminorm(ball, coarse, g)
    bmo_f = bmo_seminorm(ball, fine, g)
    assert np.isfinite(bmo_f)
    assert abs(bmo_f - bmo_c) <= 0.4 * bmo_f  # oscillation roughly saturates ...
    assert bmo_f / sup_f < bmo_c / sup_c  # ... so it loses ground against the sup


# ---------------------------------------------------------------------------
# designs and families


def test_halton_design_on_boundary_and_deterministic(ball):
    nodes, weights = halton_surface_design(ball, 32, seed=3)
    assert nodes.shape == (32, 2)
    assert np.max(np.abs(ball.rho(nodes))) < 1e-9
    assert np.sum(weights) == pytest.approx(SPHERE_AREA, rel=1e-12)
    again, _ = halton_surface_design(ball, 32, seed=3)
    assert np.array_equal(nodes, again)
    other, _ = halton_surface_design(ball, 32, seed=4)
    assert not np.array_equal(nodes, other)


def test_boundary_family_composition(ball):
    family = boundary_family(ball, count=30, seed=2024)
    assert len(family) == 30
    tags = [g.tag for g in family]
    assert tags.count("smooth") == 10
    assert tags.count("rough_random") == 10
    assert tags.count("indicator_smoothed") == 10
    again = boundary_family(ball, count=30, seed=2024)
    assert [g.kind for g in family] == [g.kind for g in again]


def test_smooth_member_evaluates_monomials():
    g = smooth_member((1, 0), (1, 1))
    w = np.array([[0.3 + 0.1j, 0.2 - 0.4j]])
    expected = w[0, 0] * np.conj(w[0, 0]) * np.conj(w[0, 1])
    assert g(w)[0] == pytest.approx(expected, rel=1e-14)


def test_indicator_support_and_range(ball):
    g = indicator_smoothed(ball, E1, 0.3)
    inside = g(E1[None, :])[0]
    far = g(-E1[None, :])[0]
    assert inside == pytest.approx(1.0, abs=1e-12)
    assert far == pytest.approx(0.0, abs=1e-12)
    samples = g(boundary_points(ball, 100, seed=5))
    assert np.all(np.real(samples) >= 0.0) and np.all(np.real(samples) <= 1.0)


# ---------------------------------------------------------------------------
# trend logic


def test_prefix_max_trend_flags_growth():
    growing = np.linspace(1.0, 2.0, 12)
    out = _prefix_max_trend(growing, (4, 8, 12))
    assert out["slope"] > 0
    assert not out["passed"]


def test_prefix_max_trend_accepts_plateau():
    ratios = np.array([0.5, 2.0, 1.0, 1.5, 0.7, 1.9, 0.2, 1.0, 1.1, 0.9, 1.3, 0.4])
    out = _prefix_max_trend(ratios, (4, 8, 12))
    assert out["prefix_max"] == [2.0, 2.0, 2.0]
    assert out["passed"]


# ---------------------------------------------------------------------------
# report mechanics at toy scale


def test_lp_report_scaling_invariance_and_shape(ball):
    g = rough_random(21)
    scaled = BoundaryFunction("5g", lambda w: 5.0 * np.asarray(g(w)), "rough_random")
    rep = lp_inequality_report(
        ball,
        family=[g, scaled],
        p_values=(2.0,),
        z_count=4,
        trend_sizes=(1, 2),
    )
    m0, m1 = rep["members"]
    assert m1["norm_g"]["2"] == pytest.approx(5.0 * m0["norm_g"]["2"], rel=1e-12)
    assert m1["ratio"]["2"] == pytest.approx(m0["ratio"]["2"], rel=1e-10)
    assert rep["domain"] == "Ball"
    assert set(rep["trend"]) == {"2"}
    assert rep["trend"]["2"]["prefix_max"][0] == pytest.approx(m0["ratio"]["2"], rel=1e-12)


def test_lp_report_validation(ball):
    with pytest.raises(ConfigError):
        lp_inequality_report(ball, family=[constant_function()], p_values=(1.0,), z_count=2)


def test_bmo_report_rejects_zero_oscillation(ball):
    with pytest.raises(ZeroDenominator):
        bmo_inequality_report(
            ball,
            family=[constant_function(2.0)],
            centers=2,
            radii=(0.3,),
            nodes_per_ball=8,
            base_resolution=12,
            check_shift=False,
        )
