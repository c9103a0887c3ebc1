"""Reproducing integral operator with kernel <grad rho(xi), xi - z>^(-n).

The kernel pairs the holomorphic gradient at the boundary integration point
with the displacement to the evaluation point; integration against the
weighted surface measure reproduces functions holomorphic on the closure.
All powers are integer powers of the complex pairing (binary exponentiation,
no logarithms), so there is no branch ambiguity anywhere.

The Stokes cross-check integrates the frozen-gradient power
V(tau, w)^(-(n+l)), with tau fixed outside the closure, once over the
boundary against the weighted surface measure and once over the domain
against the normalized volume form; exactness of the comparison scalar
(kappa = 1) follows because the differential of V wedges to zero against
the (1,0)-factor of the surface form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import Domain, boundary_distance, radial_boundary_point
from .errors import ConfigError, SingularPairing, TooCloseToBoundary
from .measures import (
    SurfaceGrid,
    build_adapted_surface_grid,
    build_adapted_volume_grid,
    build_surface_grid,
    volume_density,
)

__all__ = [
    "HoloTestFunction",
    "PRODUCTION_RESOLUTION",
    "SEPARATION",
    "monomial",
    "exterior_pole",
    "random_poly",
    "rough",
    "standard_suite",
    "clf_kernel",
    "clf_apply",
    "holomorphy_defect",
    "reproduction_report",
    "stokes_identity_check",
]

PRODUCTION_RESOLUTION = 40
SEPARATION = 0.1


@dataclass(frozen=True, eq=False)
class HoloTestFunction:
    """Test integrand with an exact evaluator and metadata for reporting."""

    kind: str
    evaluator: object = field(repr=False)
    holomorphic: bool = True
    has_exact: bool = True

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.evaluator(np.asarray(z, dtype=complex))


def monomial(alpha: tuple) -> HoloTestFunction:
    """z^alpha with integer multi-exponent alpha."""
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ConfigError("monomial exponents must be non-negative")

    def ev(z):
        out = np.ones(z.shape[:-1], dtype=complex)
        for k, a in enumerate(alpha):
            out = out * z[..., k] ** a
        return out

    return HoloTestFunction(kind=f"monomial{alpha}", evaluator=ev)


def exterior_pole(domain: Domain, a, m: int = 2) -> HoloTestFunction:
    """<grad rho(a), a - z>^(-m) for a outside the closure.

    Holomorphic on the closure: the supporting level set through a keeps the
    pairing away from zero on the closed domain by convexity.
    """
    a = np.asarray(a, dtype=complex)
    if float(np.real(domain.rho(a))) <= 0:
        raise ConfigError("pole anchor must lie strictly outside the domain")
    g = domain.grad(a)

    def ev(z):
        pair = np.einsum("k,...k->...", g, a - z)
        return 1.0 / _int_power(pair, int(m))

    return HoloTestFunction(kind=f"exterior_pole(m={int(m)})", evaluator=ev)


def random_poly(seed: int, degree: int = 3) -> HoloTestFunction:
    """Random holomorphic polynomial with seeded standard-normal coefficients."""
    rng = np.random.default_rng(seed)
    alphas = [
        (i, j)
        for i in range(degree + 1)
        for j in range(degree + 1 - i)
    ]
    coef = rng.normal(size=len(alphas)) + 1j * rng.normal(size=len(alphas))

    def ev(z):
        out = np.zeros(z.shape[:-1], dtype=complex)
        for c, (i, j) in zip(coef, alphas):
            out = out + c * z[..., 0] ** i * z[..., 1] ** j
        return out

    return HoloTestFunction(kind=f"random_poly(seed={seed},deg={degree})", evaluator=ev)


def rough(seed: int) -> HoloTestFunction:
    """Smooth but non-holomorphic control (conjugate-coordinate mixture)."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 1.5, size=3)

    def ev(z):
        return (
            c[0] * np.real(z[..., 0])
            + c[1] * np.imag(z[..., 1])
            + c[2] * np.abs(z[..., 0]) ** 2
        )

    return HoloTestFunction(
        kind=f"rough(seed={seed})", evaluator=ev, holomorphic=False, has_exact=False
    )


def standard_suite(domain: Domain, max_degree: int = 4) -> list:
    """Monomials through max_degree plus poles, a random polynomial, and a
    non-holomorphic control."""
    suite = [
        monomial((i, j))
        for i in range(max_degree + 1)
        for j in range(max_degree + 1 - i)
    ]
    anchor_dir = np.array([1.0, 0.0], dtype=complex)
    anchor = 1.5 * radial_boundary_point(domain, anchor_dir)
    suite.append(exterior_pole(domain, anchor, m=2))
    suite.append(random_poly(seed=1234, degree=3))
    suite.append(rough(seed=99))
    return suite


def _int_power(p: np.ndarray, m: int) -> np.ndarray:
    """p**m for integer m >= 1 by binary exponentiation (no logarithms)."""
    if m < 1:
        raise ConfigError("integer power expects a positive exponent")
    result = None
    base = p
    e = int(m)
    while e:
        if e & 1:
            result = base if result is None else result * base
        e >>= 1
        if e:
            base = base * base
    return result


def holomorphy_defect(f, points: np.ndarray, h: float = 1e-5) -> float:
    """Largest numeric conjugate-derivative magnitude of f over the points.

    Central differences give dbar_k f = (d/dx_k + i d/dy_k) f / 2 in each
    complex coordinate; holomorphic functions return ~h^2 round-off, while
    anything with genuine conjugate dependence returns an O(1) value.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    worst = 0.0
    for k in range(pts.shape[1]):
        e = np.zeros(pts.shape[1], dtype=complex)
        e[k] = 1.0
        dx = (f(pts + h * e) - f(pts - h * e)) / (2.0 * h)
        dy = (f(pts + 1j * h * e) - f(pts - 1j * h * e)) / (2.0 * h)
        worst = max(worst, float(np.max(np.abs((dx + 1j * dy) / 2.0))))
    return worst


def _pairing(domain: Domain, xi: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.einsum("...k,...k->...", domain.grad(xi), xi - z)


def clf_kernel(domain: Domain, xi: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Kernel <grad rho(xi), xi - z>^(-n); raises on near-singular pairings."""
    xi = np.asarray(xi, dtype=complex)
    z = np.asarray(z, dtype=complex)
    pair = _pairing(domain, xi, z)
    if np.min(np.abs(pair)) < 1e-14:
        raise SingularPairing("kernel pairing vanishes at an evaluation pair")
    return 1.0 / _int_power(pair, domain.n)


def clf_apply(domain: Domain, grid: SurfaceGrid, f, z, separation: float = SEPARATION) -> complex:
    """Quadrature of f against the kernel and the weighted surface measure.

    The evaluation point must keep the configured distance from the boundary
    so the kernel stays resolvable at the grid scale.
    """
    z = np.asarray(z, dtype=complex)
    dist = boundary_distance(domain, z)
    if dist < separation:
        raise TooCloseToBoundary(
            f"evaluation point at distance {dist:.3g} < separation {separation}"
        )
    kernel = clf_kernel(domain, grid.nodes, z[None, :])
    values = f(grid.nodes)
    return complex(np.sum(values * kernel * grid.s))


def _interior_points(domain: Domain, count: int, seed: int) -> np.ndarray:
    """Seeded interior sample at comfortable separation (radial fractions)."""
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(count, 2 * domain.n)).view(complex)
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    bdry = radial_boundary_point(domain, dirs, t=0.0)
    frac = rng.uniform(0.25, 0.7, size=count)
    return frac[:, None] * bdry


def reproduction_report(
    domain: Domain,
    suite: list | None = None,
    points: np.ndarray | None = None,
    resolutions: tuple = (10, 20, PRODUCTION_RESOLUTION),
    tol: float = 1e-6,
    seed: int = 0,
) -> dict:
    """Reproduction errors of the operator over a test suite and point sample.

    For each suite member and resolution the report records the worst
    relative error |applied - exact| / max(1, |exact|) over the points,
    whether the member reproduces at the finest resolution, and whether the
    error ladder is monotone; non-holomorphic members must *fail* to
    reproduce (negative control).
    """
    if suite is None:
        suite = standard_suite(domain)
    if points is None:
        points = _interior_points(domain, 20, seed)
    points = np.asarray(points, dtype=complex)
    grids = {r: build_surface_grid(domain, t=0.0, resolution=r) for r in resolutions}
    members = []
    for f in suite:
        errs = {}
        for r in resolutions:
            worst = 0.0
            for z in points:
                applied = clf_apply(domain, grids[r], f, z)
                exact = complex(f(z[None, :])[0])
                worst = max(worst, abs(applied - exact) / max(1.0, abs(exact)))
            errs[r] = worst
        ladder = [errs[r] for r in resolutions]
        monotone = all(
            b <= max(1.05 * a, 1e-11) for a, b in zip(ladder, ladder[1:])
        )
        reproduces = ladder[-1] < tol
        members.append(
            {
                "kind": f.kind,
                "holomorphic": f.holomorphic,
                "errors": {str(r): e for r, e in errs.items()},
                "monotone": monotone,
                "reproduces": reproduces,
            }
        )
    worst_by_res = {
        str(r): max(m["errors"][str(r)] for m in members if m["holomorphic"])
        for r in resolutions
    }
    holo_ok = all(
        m["reproduces"] and m["monotone"] for m in members if m["holomorphic"]
    )
    control_ok = all(
        m["errors"][str(resolutions[-1])] > 1e-2
        for m in members
        if not m["holomorphic"]
    )
    return {
        "domain": repr(domain),
        "resolutions": list(resolutions),
        "worst_by_resolution": worst_by_res,
        "members": members,
        "holomorphic_reproduce": holo_ok,
        "negative_control_fails_to_reproduce": control_ok,
        "passed": bool(holo_ok and control_ok),
    }


def stokes_identity_check(
    domain: Domain,
    l: int = 1,
    tau_count: int = 12,
    shell: tuple = (0.02, 0.1),
    surface_resolution: dict | None = None,
    volume_resolution: dict | None = None,
    seed: int = 0,
) -> dict:
    """Boundary vs volume integral of the frozen-gradient power V^-(n+l).

    For each exterior sample tau: A = boundary integral of V(tau,.)^-(n+l)
    against the weighted surface measure, B = domain integral of the same
    power against the normalized volume form (2 pi)^-n (d dbar rho)^n.
    Both sides use quadrature graded toward the boundary point nearest tau,
    since the integrand peaks there at the scale of tau's level.  The
    least-squares scalar kappa fitting A = kappa * B is reported together
    with its distance to the two candidate values 1 and -l/n.
    """
    n = domain.n
    # steeper powers need more nodes per dyadic band on both sides
    if l >= 2:
        sres = {"polar_nodes": 8, "angle_nodes": 10, "azimuth": 32}
        vres = {"level_nodes": 3, "polar_nodes": 5, "angle_nodes": 6, "azimuth": 16}
    else:
        sres = {"polar_nodes": 6, "angle_nodes": 8, "azimuth": 24}
        vres = {"level_nodes": 2, "polar_nodes": 4, "angle_nodes": 4, "azimuth": 12}
    if surface_resolution:
        sres.update(surface_resolution)
    if volume_resolution:
        vres.update(volume_resolution)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(tau_count, 2 * n)).view(complex)
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    levels = rng.uniform(shell[0], shell[1], size=tau_count)
    taus = radial_boundary_point(domain, dirs, t=levels)

    A, B = [], []
    for tau in taus:
        g = domain.grad(tau)
        sgrid = build_adapted_surface_grid(domain, tau, **sres)
        pair_s = np.einsum("k,...k->...", g, tau[None, :] - sgrid.nodes)
        A.append(complex(np.sum(sgrid.s / _int_power(pair_s, n + l))))
        vnodes, vleb = build_adapted_volume_grid(domain, tau, **vres)
        vweights = vleb * volume_density(domain, vnodes) / (2.0 * np.pi) ** n
        pair_v = np.einsum("k,...k->...", g, tau[None, :] - vnodes)
        B.append(complex(np.sum(vweights / _int_power(pair_v, n + l))))
    A = np.array(A)
    B = np.array(B)
    kappa = complex(np.sum(np.conj(B) * A) / np.sum(np.abs(B) ** 2))
    half = tau_count // 2
    kappa_first = complex(
        np.sum(np.conj(B[:half]) * A[:half]) / np.sum(np.abs(B[:half]) ** 2)
    )
    drift = abs(kappa - kappa_first) / abs(kappa)
    candidates = {"identity": 1.0, "derivative_factor": -l / n}
    dists = {k: abs(kappa - v) for k, v in candidates.items()}
    best = min(dists, key=dists.get)
    return {
        "domain": repr(domain),
        "l": int(l),
        "tau_levels": levels.tolist(),
        "A": A.tolist(),
        "B": B.tolist(),
        "kappa": kappa,
        "kappa_drift_half_sample": float(drift),
        "candidate_distances": dists,
        "best_candidate": best,
        "sup_abs_A": float(np.max(np.abs(A))),
        "passed": bool(dists[best] < 0.01 and drift < 0.01 and np.all(np.isfinite(np.abs(A)))),
    }
