"""Straightening charts: linear data, inversion, residual grading, Lipschitz."""

import numpy as np
import pytest

from clfkit.charts import chart_lipschitz_probe, normal_form_chart, standard_form_residual
from clfkit.domains import Ball, Ellipsoid, PerturbedBall, radial_boundary_point

from helpers import catalog, shell_points
from oracles import holomorphy_defect

DOMAINS = catalog()


def chart_at(name, seed=3):
    dom = DOMAINS[name]
    rng = np.random.default_rng(seed)
    d = rng.normal(size=2 * dom.n).view(complex)
    xi = radial_boundary_point(dom, d / np.linalg.norm(d))
    return dom, normal_form_chart(dom, xi)


def test_shifted_ball_chart_is_identity():
    # rho = 2 Re z2 + |z|^2 is already in standard form at the origin
    dom = Ball(center=(0.0, -1.0))
    chart = normal_form_chart(dom, np.zeros(2, dtype=complex))
    assert np.allclose(chart.Phi, np.eye(2), atol=1e-14)
    assert np.allclose(chart.B, 0.0, atol=1e-14)
    rep = standard_form_residual(dom, chart)
    assert rep["exact_to_machine_precision"]
    assert rep["slope"] == float("inf")
    assert np.allclose(rep["hermitian_form"], np.eye(2), atol=1e-10)
    assert rep["passed"]


def test_ball_chart_linear_data():
    dom = Ball()
    chart = normal_form_chart(dom, np.array([1.0, 0.0j]))
    assert np.allclose(chart.Phi, [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)
    assert np.allclose(chart.B, 0.0, atol=1e-14)
    rep = standard_form_residual(dom, chart)
    assert rep["exact_to_machine_precision"]
    assert np.allclose(sorted(rep["eigenvalues"]), [1.0, 1.0], atol=1e-10)
    assert rep["positive_definite"]


def test_chart_maps_base_to_zero_and_normal_to_en():
    for name in sorted(DOMAINS):
        dom, chart = chart_at(name)
        assert np.allclose(chart.forward(chart.base), 0.0, atol=1e-14)
        image = chart.Phi @ chart.frame.normal
        assert abs(image[0]) < 1e-13
        assert image[1].imag == pytest.approx(0.0, abs=1e-13)
        assert image[1].real > 0


def test_ellipsoid_chart_exact_quadratic():
    dom = Ellipsoid((2.0, 1.0))
    chart = normal_form_chart(dom, np.array([2.0, 0.0j]))
    rep = standard_form_residual(dom, chart)
    assert rep["exact_to_machine_precision"]
    assert rep["positive_definite"]
    assert rep["passed"]


def test_perturbed_ball_cubic_remainder_slope():
    dom = DOMAINS["perturbed_ball"]
    xi = radial_boundary_point(dom, np.array([0.8, 0.6j]))
    chart = normal_form_chart(dom, xi)
    assert np.linalg.norm(chart.B) > 1e-3
    rep = standard_form_residual(dom, chart)
    assert not rep["exact_to_machine_precision"]
    assert 2.7 <= rep["slope"] <= 3.3
    assert rep["positive_definite"]
    assert rep["passed"]


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_round_trip_on_shell(name):
    dom = DOMAINS[name]
    rng = np.random.default_rng(21)
    for xi in shell_points(dom, 3, seed=6):
        chart = normal_form_chart(dom, xi)
        z = xi + 0.3 * rng.uniform(0.01, 1.0, size=(40, 1)) * _unit_rows(rng, 40, dom.n)
        err = np.linalg.norm(chart.inverse(chart.forward(z)) - z, axis=-1)
        assert np.max(err) < 1e-10
        tau = 0.2 * _unit_rows(rng, 40, dom.n)
        err2 = np.linalg.norm(chart.forward(chart.inverse(tau)) - tau, axis=-1)
        assert np.max(err2) < 1e-10


def _unit_rows(rng, count, n):
    v = rng.normal(size=(count, 2 * n)).view(complex)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_forward_map_is_holomorphic(name):
    dom, chart = chart_at(name)
    rng = np.random.default_rng(9)
    pts = chart.base + 0.1 * _unit_rows(rng, 5, dom.n)
    for z in pts:
        for j in range(dom.n):
            defect = holomorphy_defect(lambda w: chart.forward(w)[j], z)
            assert defect < 1e-8


def test_jacobian_matches_fd_determinant():
    for name in sorted(DOMAINS):
        dom, chart = chart_at(name)
        rng = np.random.default_rng(13)
        for tau in 0.08 * _unit_rows(rng, 4, dom.n):
            J = chart.jacobian(tau)
            assert np.isfinite(J) and abs(J) > 1e-6
            h = 1e-6
            D = np.zeros((dom.n, dom.n), dtype=complex)
            for k in range(dom.n):
                e = np.zeros(dom.n, dtype=complex)
                e[k] = h
                D[:, k] = (chart.inverse(tau + e) - chart.inverse(tau - e)) / (2 * h)
            assert np.isclose(np.linalg.det(D), J, rtol=1e-6)


def test_ball_jacobian_constant_in_tau():
    dom = Ball()
    chart = normal_form_chart(dom, np.array([1.0, 0.0j]))
    rng = np.random.default_rng(2)
    taus = 0.1 * _unit_rows(rng, 10, 2)
    vals = chart.jacobian(taus)
    assert np.max(np.abs(vals - vals[0])) < 1e-12


@pytest.mark.parametrize("name", ["ball", "perturbed_ball"])
def test_chart_lipschitz_probe(name):
    rep = chart_lipschitz_probe(DOMAINS[name], centers=4, pairs_per_center=24, seed=11)
    assert rep["passed"]
    assert rep["sup_jacobian_quotient"] < 100.0
    assert rep["sup_inverse_quotient"] < 100.0
