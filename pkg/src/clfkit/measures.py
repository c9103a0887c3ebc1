"""Quadrature grids carrying the boundary and region measures.

Boundary grids hold two weight columns: Euclidean surface measure and the
holomorphically weighted surface measure given by the modulus of the wedge
form (2 pi i)^{-n} d rho ^ (dbar d rho)^{n-1} evaluated on an orthonormal
real tangent frame.  The modulus does not depend on the frame choice (a
top-degree form on the tangent space changes by a unimodular determinant
under orthonormal frame changes), which lets the density evaluation run
batched with a single smooth tangent formula.

Region grids fiber the approach regions over the defining-function level s:
the slice at level s is a tangential disc of radius sqrt(eta*s) times an
imaginary-normal band of half-width eta*s, and the real-normal coordinate is
solved so each node sits exactly on its level.  Lebesgue weights come from
the triangular Jacobian of that fibration; the singular measure attaches
1/rho^(n-2l+1) per node.

Grid builders are n = 2 specific (torus-angle parametrization of the
3-sphere); pointwise densities work for any n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import (
    Domain,
    project_to_boundary,
    quasimetric,
    radial_boundary_point,
    tangent_frame,
)
from .errors import ConfigError, EmptyRegion, NoConvergence, ResolutionTooCoarse
from .regions import RegionSpec, boundary_chart_point, external_point

__all__ = [
    "SurfaceGrid",
    "RegionGrid",
    "Quasiball",
    "leray_levy_density",
    "volume_density",
    "build_surface_grid",
    "build_region_grid",
    "build_shell_grid",
    "build_volume_grid",
    "build_adapted_surface_grid",
    "build_adapted_volume_grid",
    "build_cap_grid",
    "surface_integral",
    "region_integral",
    "quasiball_measure",
    "nu_weights",
    "convergence_order",
    "region_radial_rule_check",
    "fubini_rule_check",
]


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Quadrature nodes on one defining-function level set.

    sigma carries Euclidean surface measure, s the weighted surface measure;
    resolution records per-axis node counts.
    """

    domain: Domain = field(repr=False)
    level: float
    nodes: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    resolution: dict

    def table(self) -> np.ndarray:
        """Flat (count, 2n+2) real table: coordinates, sigma-weight, s-weight."""
        flat = np.column_stack(
            [self.nodes.real, self.nodes.imag, self.sigma, self.s]
        )
        return flat


@dataclass(frozen=True, eq=False)
class RegionGrid:
    """Quadrature nodes in an approach region with Lebesgue and nu weights."""

    domain: Domain = field(repr=False)
    spec: RegionSpec
    l: int
    nodes: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    resolution: dict
    nu_exponent: str = "proofs"


@dataclass(frozen=True)
class Quasiball:
    """Quasimetric ball on the boundary: {w : d(w, center) < radius}."""

    center: np.ndarray
    radius: float


def _batched_frames(domain: Domain, xi: np.ndarray):
    """Normal and one smooth unit tangent for a batch of points (n = 2)."""
    g = domain.grad(xi)
    gn = np.linalg.norm(g, axis=-1, keepdims=True)
    normal = np.conj(g) / gn
    v = np.stack([-np.conj(normal[..., 1]), np.conj(normal[..., 0])], axis=-1)
    return normal, v


def leray_levy_density(domain: Domain, xi: np.ndarray) -> np.ndarray:
    """Density of the weighted surface measure against Euclidean measure.

    Evaluates the wedge form on the orthonormal real frame (i*n, v, i*v) by
    the three-shuffle expansion of a 1-form wedged with a 2-form; returns
    its modulus (frame independent).  n = 2 only for the batched frame.
    """
    xi = np.asarray(xi, dtype=complex)
    if domain.n != 2:
        raise ConfigError("leray_levy_density is implemented for n = 2")
    g = domain.grad(xi)
    H = domain.hermitian(xi)
    normal, v = _batched_frames(domain, xi)
    t1 = 1j * normal
    t2 = v
    t3 = 1j * v

    def alpha(u):
        return np.einsum("...k,...k->...", g, u)

    def beta(u, w):
        hw_u = np.einsum("...jk,...k->...j", H, np.conj(u))
        hw_w = np.einsum("...jk,...k->...j", H, np.conj(w))
        return np.einsum("...j,...j->...", w, hw_u) - np.einsum("...j,...j->...", u, hw_w)

    wedge = alpha(t1) * beta(t2, t3) - alpha(t2) * beta(t1, t3) + alpha(t3) * beta(t1, t2)
    return np.abs(wedge) / (2.0 * np.pi) ** 2


def volume_density(domain: Domain, z: np.ndarray) -> np.ndarray:
    """Density of (dbar d rho)^n against Lebesgue volume (2^n n! det H for n=2).

    Evaluated by the pair-partition expansion of the squared 2-form on the
    standard real basis (e1, i e1, e2, i e2).
    """
    z = np.asarray(z, dtype=complex)
    if domain.n != 2:
        raise ConfigError("volume_density is implemented for n = 2")
    H = domain.hermitian(z)

    def beta(u, w):
        hu = np.einsum("...jk,k->...j", H, np.conj(u))
        hw = np.einsum("...jk,k->...j", H, np.conj(w))
        return np.einsum("j,...j->...", w, hu) - np.einsum("j,...j->...", u, hw)

    e1 = np.array([1.0, 0.0], dtype=complex)
    e2 = np.array([0.0, 1.0], dtype=complex)
    terms = (
        beta(e1, 1j * e1) * beta(e2, 1j * e2)
        - beta(e1, e2) * beta(1j * e1, 1j * e2)
        + beta(e1, 1j * e2) * beta(1j * e1, e2)
    )
    return np.abs(2.0 * terms)


def _s3_product_grid(n_u: int, n_phi: int):
    """Torus-angle product rule on the 3-sphere: nodes and exact dsigma weights."""
    u, wu = np.polynomial.legendre.leggauss(n_u)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi
    U, P1, P2 = np.meshgrid(u, phi, phi, indexing="ij")
    WU = np.broadcast_to(wu[:, None, None], U.shape)
    omega = np.stack(
        [np.sqrt(1.0 - U) * np.exp(1j * P1), np.sqrt(U) * np.exp(1j * P2)], axis=-1
    ).reshape(-1, 2)
    w = (0.5 * WU * wphi * wphi).reshape(-1)
    return omega, w


def build_surface_grid(domain: Domain, t: float = 0.0, resolution: int = 32) -> SurfaceGrid:
    """Product grid on the level set rho = t with both measure columns.

    Angular nodes on the 3-sphere are pushed radially onto the level set;
    Euclidean weights carry the radial-graph surface Jacobian
    r^3 |grad rho| / Re<grad rho, omega>.
    """
    if domain.n != 2:
        raise ConfigError("build_surface_grid is implemented for n = 2")
    n_u = int(resolution)
    n_phi = 2 * n_u
    omega, w = _s3_product_grid(n_u, n_phi)
    nodes = radial_boundary_point(domain, omega, t=t)
    r = np.linalg.norm(nodes, axis=-1) / np.linalg.norm(omega, axis=-1)
    g = domain.grad(nodes)
    gnorm = np.linalg.norm(g, axis=-1)
    radial_cos = np.real(np.einsum("...k,...k->...", g, omega)) / gnorm
    if np.any(radial_cos <= 0):
        raise ConfigError("level set is not star-shaped about the origin")
    sigma = w * r**3 / radial_cos
    s_weights = sigma * leray_levy_density(domain, nodes)
    return SurfaceGrid(
        domain=domain,
        level=float(t),
        nodes=nodes,
        sigma=sigma,
        s=s_weights,
        resolution={"n_u": n_u, "n_phi": n_phi},
    )


def surface_integral(grid: SurfaceGrid, values: np.ndarray, measure: str = "sigma") -> complex:
    w = grid.sigma if measure == "sigma" else grid.s
    return complex(np.sum(np.asarray(values) * w))


def _gauss_on(a: float, b: float, k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    return 0.5 * (b + a) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def _graded_levels(eps: float, n_segments: int, nodes_per_segment: int):
    """Geometrically graded Gauss levels on (0, eps), finest near 0."""
    edges = eps * 2.0 ** (-np.arange(n_segments + 1, dtype=float))
    s_all, w_all = [], []
    for j in range(n_segments):
        hi, lo = edges[j], edges[j + 1]
        if j == n_segments - 1:
            lo = 0.0
        s, w = _gauss_on(lo, hi, nodes_per_segment)
        s_all.append(s)
        w_all.append(w)
    return np.concatenate(s_all), np.concatenate(w_all)


def nu_weights(mu: np.ndarray, rho: np.ndarray, n: int, l: int, convention: str = "proofs") -> np.ndarray:
    """Singular region weights mu / rho^e; e = n-2l+1 (default) or n-2l-1."""
    if convention == "proofs":
        e = n - 2 * l + 1
    elif convention == "printed":
        e = n - 2 * l - 1
    else:
        raise ConfigError("nu convention must be 'proofs' or 'printed'")
    return mu / rho**e


def build_region_grid(
    domain: Domain,
    spec: RegionSpec,
    l: int = 1,
    resolution: dict | None = None,
    nu_exponent: str = "proofs",
) -> RegionGrid:
    """Fibered product grid over an approach region with exact level placement.

    External and internal grids place nodes by the constructive level solve
    (tangential disc x imaginary-normal band x Newton along the normal);
    model grids are literal product rules.  Lebesgue weights multiply the
    fibration Jacobian 1/(2 Re<grad rho, normal>) for solved coordinates.
    """
    if domain.n != 2 and spec.kind != "model":
        raise ConfigError("region grids are implemented for n = 2")
    res = {"segments": 9, "per_segment": 3, "disc_r": 5, "disc_t": 8, "band": 5}
    if resolution:
        res.update(resolution)
    eta, eps = spec.eta, spec.eps
    s_lev, w_lev = _graded_levels(eps, res["segments"], res["per_segment"])
    if s_lev.size == 0:
        raise EmptyRegion("level grading produced no nodes")
    ur, wr = _gauss_on(0.0, 1.0, res["disc_r"])  # radial-area coordinate of the disc
    th = 2.0 * np.pi * np.arange(res["disc_t"]) / res["disc_t"]
    yb, wy = _gauss_on(-1.0, 1.0, res["band"])  # scaled imaginary-normal band

    S, U, T, Y = np.meshgrid(s_lev, ur, th, yb, indexing="ij")
    WS, WU, WT, WY = np.meshgrid(w_lev, wr, np.full_like(th, 2.0 * np.pi / res["disc_t"]), wy, indexing="ij")
    a = np.sqrt(eta * S * U) * np.exp(1j * T)
    y = eta * S * Y
    # slice Lebesgue measure: disc area (pi eta s) du * dtheta/(2 pi) * band (eta s) dy
    w_slice = (np.pi * eta * S * WU) * (WT / (2.0 * np.pi)) * (eta * S * WY)
    base_w = (WS * w_slice).reshape(-1)
    S_f, a_f, y_f = S.reshape(-1), a.reshape(-1), y.reshape(-1)

    if spec.kind == "model":
        nodes = np.stack([a_f, S_f + 1j * y_f], axis=-1)
        mu = base_w
        rho = S_f.copy()
    elif spec.kind == "external":
        frame = tangent_frame(domain, spec.vertex)
        nodes = external_point(domain, frame, a_f, y_f, S_f)
        mu = base_w / (2.0 * np.real(np.einsum("...k,k->...", domain.grad(nodes), frame.normal)))
        rho = np.real(domain.rho(nodes))
    elif spec.kind == "internal":
        frame = tangent_frame(domain, spec.vertex)
        # first-order chart: boundary foot over (a, y), then inward to level -s
        feet = boundary_chart_point(domain, frame, a_f, y_f)
        d = quasimetric(domain, feet, spec.vertex)
        keep = d < eta * S_f
        if not np.any(keep):
            raise EmptyRegion("no internal-region nodes after the quasiball filter")
        feet, S_k, base_k = feet[keep], S_f[keep], base_w[keep]
        g = domain.grad(feet)
        normals = np.conj(g) / np.linalg.norm(g, axis=-1, keepdims=True)
        from .regions import _normal_level_offset

        x = _normal_level_offset(
            domain, feet, -normals, -S_k, S_k / (2.0 * np.linalg.norm(g, axis=-1))
        )
        nodes = feet - x[..., None] * normals
        mu = base_k / (2.0 * np.real(np.einsum("...k,...k->...", domain.grad(nodes), normals)))
        rho = np.real(domain.rho(nodes))
    else:
        raise ConfigError(f"unknown region kind {spec.kind!r}")

    nu = nu_weights(mu, np.abs(rho), domain.n, l, nu_exponent)
    return RegionGrid(
        domain=domain,
        spec=spec,
        l=int(l),
        nodes=nodes,
        mu=mu,
        rho=rho,
        nu=nu,
        resolution=res,
        nu_exponent=nu_exponent,
    )


def region_integral(grid: RegionGrid, values: np.ndarray, weight: str = "mu") -> complex:
    w = grid.mu if weight == "mu" else grid.nu
    return complex(np.sum(np.asarray(values) * w))


def build_volume_grid(domain: Domain, resolution: int = 20, radial_nodes: int = 20):
    """Lebesgue quadrature over the whole domain via its radial parametrization.

    Returns (nodes, weights): angular product grid scaled by Gauss nodes in
    the radial fraction, with the polar-coordinate Jacobian r^3 relative to
    the boundary radius in each direction.  Requires the domain to be
    star-shaped about the origin.
    """
    if domain.n != 2:
        raise ConfigError("build_volume_grid is implemented for n = 2")
    omega, w_ang = _s3_product_grid(int(resolution), 2 * int(resolution))
    bdry = radial_boundary_point(domain, omega, t=0.0)
    r_max = np.linalg.norm(bdry, axis=-1)
    s, ws = _gauss_on(0.0, 1.0, int(radial_nodes))
    nodes = s[:, None, None] * bdry[None, :, :]
    w = (ws[:, None] * s[:, None] ** 3) * (w_ang[None, :] * r_max[None, :] ** 4)
    return nodes.reshape(-1, domain.n), w.reshape(-1)


def build_shell_grid(domain: Domain, t_lo: float, t_hi: float, resolution: int = 16, levels: int = 8):
    """Volume grid for the shell t_lo < rho < t_hi via the coarea formula.

    Returns (nodes, weights): surface grids at Gauss levels, each weighted by
    dt / |real gradient|.
    """
    t, wt = _gauss_on(t_lo, t_hi, levels)
    all_nodes, all_w = [], []
    for tj, wj in zip(t, wt):
        g = build_surface_grid(domain, t=float(tj), resolution=resolution)
        grad_norm = 2.0 * np.linalg.norm(domain.grad(g.nodes), axis=-1)
        all_nodes.append(g.nodes)
        all_w.append(g.sigma * wj / grad_norm)
    return np.concatenate(all_nodes), np.concatenate(all_w)


def build_adapted_volume_grid(
    domain: Domain,
    focus: np.ndarray,
    inner_scale: float | None = None,
    level_nodes: int = 4,
    polar_nodes: int = 5,
    angle_nodes: int = 6,
    azimuth: int = 20,
):
    """Lebesgue quadrature over the whole domain graded toward `focus`.

    Stacks boundary-adapted surface grids over interior level sets via the
    coarea formula, grading the levels geometrically toward the boundary so
    that integrands peaked near the boundary point closest to `focus` (with
    depth scale `inner_scale`) are resolved both along and across the level
    sets.  Returns (nodes, weights).
    """
    if domain.n != 2:
        raise ConfigError("build_adapted_volume_grid is implemented for n = 2")
    focus = np.asarray(focus, dtype=complex)
    s0 = inner_scale if inner_scale is not None else abs(float(np.real(domain.rho(focus))))
    s0 = float(np.clip(s0, 1e-8, 0.5))
    depth0 = abs(float(np.real(domain.rho(np.zeros(domain.n, dtype=complex)))))
    d_lev, w_lev = _graded_line(depth0, 0.5 * s0, level_nodes)
    all_nodes, all_w = [], []
    for dj, wj in zip(d_lev, w_lev):
        g = build_adapted_surface_grid(
            domain,
            focus,
            inner_scale=s0 + float(dj),
            polar_nodes=polar_nodes,
            angle_nodes=angle_nodes,
            azimuth=azimuth,
            level=-float(dj),
        )
        grad_norm = 2.0 * np.linalg.norm(domain.grad(g.nodes), axis=-1)
        all_nodes.append(g.nodes)
        all_w.append(g.sigma * wj / grad_norm)
    return np.concatenate(all_nodes), np.concatenate(all_w)


def _probe_cap_extent(domain, frame, center, radius: float, tangential: bool) -> float:
    """Chart half-width needed to cover the quasiball along one axis family.

    Walks a geometric ladder of chart offsets along several directions until
    the quasimetric to the center exceeds the radius with margin; clamps at
    the last reachable offset if the boundary graph ends first.  This adapts
    the cap box to anisotropic domains, where the tangential quasiball extent
    varies with the local Levi form.
    """
    margin = 1.3
    if tangential:
        dirs = np.exp(1j * np.pi * np.arange(8) / 4.0)
        scale0 = 0.6 * np.sqrt(radius)
    else:
        dirs = np.array([1.0, -1.0], dtype=complex)
        scale0 = 0.6 * radius
    ext = np.full(dirs.shape, np.nan)
    last_good = scale0
    for k in range(18):
        step = scale0 * 1.35**k
        todo = np.isnan(ext)
        if not np.any(todo):
            break
        offs = step * dirs[todo]
        try:
            if tangential:
                pts = boundary_chart_point(domain, frame, offs, np.zeros(offs.shape))
            else:
                pts = boundary_chart_point(
                    domain, frame, np.zeros(offs.shape, dtype=complex), np.real(offs)
                )
        except NoConvergence:
            ext[todo] = last_good
            break
        d = quasimetric(domain, pts, center)
        idx = np.where(todo)[0]
        ext[idx[d >= margin * radius]] = step
        last_good = step
    ext[np.isnan(ext)] = last_good
    return float(np.max(ext))


def build_cap_grid(
    domain: Domain,
    center: np.ndarray,
    radius: float,
    resolution: int = 24,
    pad: float = 1.2,
) -> SurfaceGrid:
    """Local boundary grid covering the quasiball of the given radius.

    Chart box half-widths (tangential disc, imaginary-normal band) are sized
    per center by probing the quasimetric along the chart axes, then padded;
    Euclidean weights use the exact graph formula
    |real gradient| / (2 Re<grad rho, normal>) over the flat chart measure.
    """
    if domain.n != 2:
        raise ConfigError("build_cap_grid is implemented for n = 2")
    if radius <= 0:
        raise ConfigError("cap radius must be positive")
    center = np.asarray(center, dtype=complex)
    frame = tangent_frame(domain, center)
    n_r, n_t, n_y = resolution, 2 * resolution, resolution
    ur, wr = _gauss_on(0.0, 1.0, n_r)
    th = 2.0 * np.pi * np.arange(n_t) / n_t
    yb, wy = _gauss_on(-1.0, 1.0, n_y)
    R = pad * _probe_cap_extent(domain, frame, center, radius, tangential=True)
    Y0 = pad * _probe_cap_extent(domain, frame, center, radius, tangential=False)
    # shrink until the box corners stay inside the boundary graph footprint
    corner = np.exp(1j * np.pi * (2.0 * np.arange(8) + 1.0) / 8.0)
    for _ in range(12):
        try:
            boundary_chart_point(
                domain, frame, np.repeat(R * corner, 2), np.tile([Y0, -Y0], 8)
            )
            break
        except NoConvergence:
            R *= 0.9
            Y0 *= 0.9
    else:
        raise ConfigError("cap chart box cannot fit inside the boundary graph at this center")
    U, T, Yb = np.meshgrid(ur, th, yb, indexing="ij")
    WU, WT, WY = np.meshgrid(wr, np.full_like(th, 2.0 * np.pi / n_t), wy, indexing="ij")
    a = R * np.sqrt(U) * np.exp(1j * T)
    y = Y0 * Yb
    w_flat = (np.pi * R**2 * WU) * (WT / (2.0 * np.pi)) * (Y0 * WY)
    a_f, y_f = a.reshape(-1), y.reshape(-1)
    try:
        nodes = boundary_chart_point(domain, frame, a_f, y_f)
    except NoConvergence as exc:
        raise ConfigError(
            "cap chart box escapes the boundary graph at this center/radius; "
            "use a full surface grid for large quasiballs"
        ) from exc
    g = domain.grad(nodes)
    sigma = (
        w_flat.reshape(-1)
        * 2.0
        * np.linalg.norm(g, axis=-1)
        / (2.0 * np.real(np.einsum("...k,k->...", g, frame.normal)))
    )
    s_weights = sigma * leray_levy_density(domain, nodes)
    return SurfaceGrid(
        domain=domain,
        level=0.0,
        nodes=nodes,
        sigma=sigma,
        s=s_weights,
        resolution={"n_r": n_r, "n_t": n_t, "n_y": n_y, "pad": pad},
    )


def _graded_line(outer: float, inner: float, nodes_per_segment: int):
    """Geometric segments from `outer` down toward 0 with Gauss nodes.

    Segment edges halve until they reach `inner`; the last segment extends
    to 0, so the rule resolves features of width `inner` while covering the
    whole interval (0, outer].
    """
    n_seg = max(1, int(np.ceil(np.log2(max(outer / max(inner, 1e-300), 2.0)))))
    edges = outer * 2.0 ** (-np.arange(n_seg + 1, dtype=float))
    xs, ws = [], []
    for j in range(n_seg):
        hi, lo = edges[j], edges[j + 1]
        if j == n_seg - 1:
            lo = 0.0
        x, w = _gauss_on(lo, hi, nodes_per_segment)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def build_adapted_surface_grid(
    domain: Domain,
    focus: np.ndarray,
    inner_scale: float | None = None,
    polar_nodes: int = 6,
    angle_nodes: int = 5,
    azimuth: int = 24,
    level: float = 0.0,
) -> SurfaceGrid:
    """Boundary grid graded toward the point nearest `focus`.

    Rotates the sphere parametrization so the peak direction sits at the
    coordinate pole, then grades both polar coordinates (the area coordinate
    and the polar angle, whose combination controls the quasimetric distance
    to the pole) geometrically down to `inner_scale`.  Kernels peaked at the
    nearest boundary point with width `inner_scale` in the quasimetric are
    then resolved at every scale, while the grid still covers the whole
    boundary.
    """
    if domain.n != 2:
        raise ConfigError("build_adapted_surface_grid is implemented for n = 2")
    focus = np.asarray(focus, dtype=complex)
    p0 = project_to_boundary(domain, focus)
    s0 = inner_scale if inner_scale is not None else abs(float(np.real(domain.rho(focus))))
    s0 = float(np.clip(s0, 1e-8, 0.5))
    w0 = p0 / np.linalg.norm(p0)
    v0 = np.array([-np.conj(w0[1]), np.conj(w0[0])])

    u, wu = _graded_line(1.0, 0.5 * s0, polar_nodes)
    phi1, wp1 = _graded_line(np.pi, 0.5 * s0, angle_nodes)
    phi1 = np.concatenate([phi1, -phi1])
    wp1 = np.concatenate([wp1, wp1])
    phi2 = 2.0 * np.pi * np.arange(azimuth) / azimuth
    wp2 = 2.0 * np.pi / azimuth

    U, P1, P2 = np.meshgrid(u, phi1, phi2, indexing="ij")
    WU, WP1, WP2 = np.meshgrid(wu, wp1, np.full_like(phi2, wp2), indexing="ij")
    omega = (
        np.sqrt(1.0 - U)[..., None] * np.exp(1j * P1)[..., None] * w0
        + np.sqrt(U)[..., None] * np.exp(1j * P2)[..., None] * v0
    ).reshape(-1, 2)
    w = (0.5 * WU * WP1 * WP2).reshape(-1)

    nodes = radial_boundary_point(domain, omega, t=level)
    r = np.linalg.norm(nodes, axis=-1)
    g = domain.grad(nodes)
    gnorm = np.linalg.norm(g, axis=-1)
    radial_cos = np.real(np.einsum("...k,...k->...", g, omega)) / gnorm
    if np.any(radial_cos <= 0):
        raise ConfigError("level set is not star-shaped about the origin")
    sigma = w * r**3 / radial_cos
    s_weights = sigma * leray_levy_density(domain, nodes)
    return SurfaceGrid(
        domain=domain,
        level=float(level),
        nodes=nodes,
        sigma=sigma,
        s=s_weights,
        resolution={
            "polar_levels": int(u.size),
            "angle_levels": int(phi1.size),
            "azimuth": int(azimuth),
            "inner_scale": s0,
        },
    )


def quasiball_measure(grid: SurfaceGrid, ball: Quasiball, measure: str = "sigma") -> float:
    """Quadrature measure of a quasimetric ball from grid nodes inside it.

    The empty ball is exactly 0 (no resolution question); otherwise fewer
    than 50 interior nodes makes the estimate unreliable and raises.
    """
    if ball.radius <= 0.0:
        return 0.0
    d = quasimetric(grid.domain, grid.nodes, np.asarray(ball.center, dtype=complex))
    inside = d < ball.radius
    if int(np.sum(inside)) < 50:
        raise ResolutionTooCoarse(
            f"only {int(np.sum(inside))} grid nodes inside the quasiball (need 50)"
        )
    w = grid.sigma if measure == "sigma" else grid.s
    return float(np.sum(w[inside]))


def convergence_order(values: list[float], floor: float = 1e-12) -> float:
    """Empirical order from a resolution ladder (coarse to fine).

    Uses successive differences; returns inf when the ladder is already
    converged to the floor (exact rules on symmetric integrands).
    """
    if len(values) < 3:
        raise ConfigError("need at least three ladder values")
    d1 = abs(values[1] - values[0])
    d2 = abs(values[2] - values[1])
    if d2 <= floor:
        return float("inf")
    return float(np.log2(d1 / d2))


def region_radial_rule_check(
    domain: Domain,
    xi: np.ndarray,
    eta: float = 0.05,
    eps: float = 0.05,
    s_exponents: tuple = (0, 1),
    resolution: dict | None = None,
) -> dict:
    """Region quadrature of rho^s against the exact flat-model value.

    The flat model (half-space with the same gradient scale) gives
    integral_0^eps s^p * (pi eta s) * (2 eta s) / (2 |grad rho|) ds; the
    ratio of the curved-region quadrature to this is the rule constant,
    expected in [1/c, c] with c < 2 for small eta, eps.
    """
    spec = RegionSpec("external", eta, eps, vertex=xi)
    grid = build_region_grid(domain, spec, l=1, resolution=resolution)
    gn = float(np.linalg.norm(domain.grad(np.asarray(xi, dtype=complex))))
    ratios = {}
    for p in s_exponents:
        q = float(np.real(region_integral(grid, grid.rho ** float(p))))
        model = (np.pi * eta**2 / gn) * eps ** (p + 3) / (p + 3)
        ratios[p] = q / model
    vals = np.array(list(ratios.values()))
    c = float(np.max(np.maximum(vals, 1.0 / vals)))
    return {
        "ratios": {str(k): float(v) for k, v in ratios.items()},
        "band_constant": c,
        "passed": bool(c < 2.0),
    }


def fubini_rule_check(
    domain: Domain,
    eta: float = 0.05,
    eps: float = 0.05,
    outer_resolution: int = 6,
    region_resolution: dict | None = None,
) -> dict:
    """Shell volume vs boundary-integrated region masses, flat-normalized.

    Compares the Lebesgue volume of the outer shell {0 < rho < eps} with
    the boundary integral of the per-vertex region integral of rho^{-n},
    divided by the flat-model factor 2 pi eta^2.  The ratio lands in a
    stable O(1) band when the region rule and the coarea shell rule agree.
    """
    shell_nodes, shell_w = build_shell_grid(domain, 0.0, eps, resolution=24, levels=10)
    lhs = float(np.sum(shell_w))
    outer = build_surface_grid(domain, t=0.0, resolution=outer_resolution)
    region_res = dict(region_resolution or {})
    region_res.setdefault("disc_r", 3)
    region_res.setdefault("disc_t", 6)
    region_res.setdefault("band", 3)
    inner_vals = []
    for xi in outer.nodes:
        spec = RegionSpec("external", eta, eps, vertex=xi)
        grid = build_region_grid(domain, spec, l=1, resolution=region_res)
        inner_vals.append(float(np.real(region_integral(grid, grid.rho ** (-domain.n)))))
    rhs = float(np.sum(outer.sigma * np.asarray(inner_vals)))
    ratio = rhs / (2.0 * np.pi * eta**2 * lhs)
    return {
        "shell_volume": lhs,
        "double_integral": rhs,
        "normalized_ratio": float(ratio),
        "passed": bool(0.5 < ratio < 2.0),
    }
