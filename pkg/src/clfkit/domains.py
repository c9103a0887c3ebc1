"""Strongly convex domains in C^n given by a smooth defining function.

A domain is described by a real-valued defining function rho with rho < 0
inside, rho > 0 outside, and nonvanishing gradient near the zero set.  The
catalog carries closed-form jets (holomorphic gradient, Hermitian and
holomorphic second derivatives), so no finite differences are used anywhere
in production code; difference quotients appear only in tests as oracles.

Points are numpy arrays of shape (..., n) with complex entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DegenerateGradient,
    NoConvergence,
    NonConvexShell,
    RootNotBracketed,
)

__all__ = [
    "CJet",
    "Domain",
    "Ball",
    "Ellipsoid",
    "PerturbedBall",
    "make_domain",
    "strong_convexity_margin",
    "radial_boundary_point",
    "project_to_boundary",
    "boundary_distance",
    "leray_pairing",
    "quasimetric",
    "TangentFrame",
    "tangent_frame",
    "tangent_decompose",
]

ROOT_TOL = 1e-12
GRAD_FLOOR = 1e-12


@dataclass(frozen=True)
class CJet:
    """Second-order complex jet of the defining function at one or more points.

    Attributes
    ----------
    value : ndarray, shape (...,)
        rho(z).
    grad : ndarray, shape (..., n)
        Holomorphic gradient, component k equal to d rho / d z_k.
    hermitian : ndarray, shape (..., n, n)
        Mixed second derivatives d^2 rho / d z_j d zbar_k.
    holomorphic : ndarray, shape (..., n, n)
        Pure second derivatives d^2 rho / d z_j d z_k (symmetric).
    """

    value: np.ndarray
    grad: np.ndarray
    hermitian: np.ndarray
    holomorphic: np.ndarray


class Domain:
    """Base class: a strongly convex domain with closed-form jets."""

    kind = "abstract"
    n: int
    search_radius: float

    def rho(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hermitian(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def holomorphic_hessian(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jet(self, z: np.ndarray) -> CJet:
        z = np.asarray(z, dtype=complex)
        return CJet(self.rho(z), self.grad(z), self.hermitian(z), self.holomorphic_hessian(z))

    def contains(self, z: np.ndarray) -> np.ndarray:
        return self.rho(np.asarray(z, dtype=complex)) < 0.0

    def real_gradient(self, z: np.ndarray) -> np.ndarray:
        """Real gradient of rho as a complex vector (2 dbar rho)."""
        return 2.0 * np.conj(self.grad(z))

    def real_hessian(self, z: np.ndarray) -> np.ndarray:
        """Real 2n x 2n Hessian in coordinates (x1, y1, ..., xn, yn)."""
        z = np.asarray(z, dtype=complex)
        n = self.n
        H = self.hermitian(z)
        A2 = self.holomorphic_hessian(z)
        basis = np.zeros((2 * n, n), dtype=complex)
        for k in range(n):
            basis[2 * k, k] = 1.0
            basis[2 * k + 1, k] = 1.0j
        # d^2rho[u, v] = 2 Re( sum H_jk u_j conj(v_k) + sum A2_jk u_j v_k )
        herm = np.einsum("...jk,aj,bk->...ab", H, basis, np.conj(basis))
        holo = np.einsum("...jk,aj,bk->...ab", A2, basis, basis)
        return 2.0 * np.real(herm + holo)

    def config(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        cfg = self.config()
        extras = ",".join(f"{k}={v}" for k, v in cfg.items() if k != "kind")
        return cfg["kind"] + (f"({extras})" if extras else "")


class Ball(Domain):
    """Unit ball, optionally translated: rho(z) = |z - center|^2 - 1."""

    kind = "ball"

    def __init__(self, n: int = 2, center=None):
        self.n = int(n)
        self.center = np.zeros(self.n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        self.search_radius = 2.5 + float(np.linalg.norm(self.center))

    def rho(self, z):
        z = np.asarray(z, dtype=complex)
        u = z - self.center
        return np.sum(np.abs(u) ** 2, axis=-1) - 1.0

    def grad(self, z):
        z = np.asarray(z, dtype=complex)
        return np.conj(z - self.center)

    def hermitian(self, z):
        z = np.asarray(z, dtype=complex)
        eye = np.eye(self.n, dtype=complex)
        return np.broadcast_to(eye, z.shape[:-1] + (self.n, self.n)).copy()

    def holomorphic_hessian(self, z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape[:-1] + (self.n, self.n), dtype=complex)

    def config(self):
        cfg = {"kind": "ball", "n": self.n}
        if np.any(self.center != 0):
            cfg["center"] = [complex(c) for c in self.center]
        return cfg


class Ellipsoid(Domain):
    """Axis-aligned ellipsoid: rho(z) = sum |z_k|^2 / a_k^2 - 1."""

    kind = "ellipsoid"

    def __init__(self, axes=(2.0, 1.0)):
        self.axes = np.asarray(axes, dtype=float)
        if np.any(self.axes <= 0):
            raise ConfigError("ellipsoid axes must be positive")
        self.n = len(self.axes)
        self.inv2 = 1.0 / self.axes**2
        self.search_radius = 1.5 * float(np.max(self.axes)) + 1.0

    def rho(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z) ** 2 * self.inv2, axis=-1) - 1.0

    def grad(self, z):
        z = np.asarray(z, dtype=complex)
        return np.conj(z) * self.inv2

    def hermitian(self, z):
        z = np.asarray(z, dtype=complex)
        diag = np.diag(self.inv2).astype(complex)
        return np.broadcast_to(diag, z.shape[:-1] + (self.n, self.n)).copy()

    def holomorphic_hessian(self, z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape[:-1] + (self.n, self.n), dtype=complex)

    def config(self):
        return {"kind": "ellipsoid", "axes": [float(a) for a in self.axes]}


class PerturbedBall(Domain):
    """Cubically perturbed ball: rho(z) = |z|^2 - 1 + delta * Re(z_1^3).

    The perturbation is pluriharmonic, so the Hermitian part stays the
    identity while the holomorphic second derivative becomes nontrivial.
    """

    kind = "perturbed_ball"

    def __init__(self, delta: float = 0.05, n: int = 2):
        self.delta = float(delta)
        self.n = int(n)
        self.search_radius = 2.5

    def rho(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z) ** 2, axis=-1) - 1.0 + self.delta * np.real(z[..., 0] ** 3)

    def grad(self, z):
        z = np.asarray(z, dtype=complex)
        g = np.conj(z).copy()
        g[..., 0] += 1.5 * self.delta * z[..., 0] ** 2
        return g

    def hermitian(self, z):
        z = np.asarray(z, dtype=complex)
        eye = np.eye(self.n, dtype=complex)
        return np.broadcast_to(eye, z.shape[:-1] + (self.n, self.n)).copy()

    def holomorphic_hessian(self, z):
        z = np.asarray(z, dtype=complex)
        A2 = np.zeros(z.shape[:-1] + (self.n, self.n), dtype=complex)
        A2[..., 0, 0] = 3.0 * self.delta * z[..., 0]
        return A2

    def config(self):
        return {"kind": "perturbed_ball", "delta": self.delta, "n": self.n}


_CATALOG = {"ball": Ball, "ellipsoid": Ellipsoid, "perturbed_ball": PerturbedBall}


def make_domain(kind: str, validate: bool = True, shell: float = 0.1, **params) -> Domain:
    """Build a catalog domain and (by default) verify strong convexity.

    Parameters
    ----------
    kind : str
        One of "ball", "ellipsoid", "perturbed_ball".
    validate : bool
        When true, sample the real Hessian on the shell |rho| <= `shell`
        and raise NonConvexShell if the smallest eigenvalue is not positive.
    """
    if kind not in _CATALOG:
        raise ConfigError(f"unknown domain kind {kind!r}; expected one of {sorted(_CATALOG)}")
    dom = _CATALOG[kind](**params)
    if validate:
        strong_convexity_margin(dom, shell=shell)
    return dom


def strong_convexity_margin(domain: Domain, shell: float = 0.1, samples: int = 160, seed: int = 7) -> float:
    """Smallest real-Hessian eigenvalue over a seeded sample of the shell.

    Raises NonConvexShell if the margin is not strictly positive.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, 2 * domain.n)).view(complex)
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    levels = np.linspace(-shell, shell, 7)
    pts = []
    try:
        for t in levels:
            pts.append(radial_boundary_point(domain, dirs, t=float(t)))
    except (RootNotBracketed, NoConvergence) as exc:
        # shell level sets escape the search radius: not a convex shell at all
        raise NonConvexShell(f"{domain.label()}: shell level sets are unbounded ({exc})") from exc
    pts = np.concatenate(pts, axis=0)
    eigs = np.linalg.eigvalsh(domain.real_hessian(pts))
    margin = float(eigs.min())
    if margin <= 0.0:
        raise NonConvexShell(
            f"{domain.label()}: real Hessian has eigenvalue {margin:.4g} <= 0 on shell |rho| <= {shell}"
        )
    return margin


def radial_boundary_point(domain: Domain, direction: np.ndarray, t=0.0) -> np.ndarray:
    """Point r*omega on the level set rho = t along each unit direction.

    Uses bracketed Newton from the origin side; requires rho(0) < t, which
    holds for every catalog domain on the working shell.  Roots are solved
    to |rho - t| <= 1e-12.  The level t may be a scalar or one level per
    direction.
    """
    omega = np.asarray(direction, dtype=complex)
    t = np.asarray(t, dtype=float)
    shape = omega.shape[:-1]
    lo = np.zeros(shape)
    hi = np.full(shape, domain.search_radius)
    if np.any(domain.rho(np.zeros(omega.shape)) >= t):
        raise RootNotBracketed("origin is not strictly inside the requested level set")
    if np.any(domain.rho(hi[..., None] * omega) <= t):
        raise RootNotBracketed("search radius does not enclose the level set")
    r = np.ones(shape)
    for _ in range(80):
        z = r[..., None] * omega
        f = domain.rho(z) - t
        lo = np.where(f < 0, r, lo)
        hi = np.where(f > 0, r, hi)
        df = 2.0 * np.real(np.einsum("...k,...k->...", domain.grad(z), omega))
        step = np.divide(f, df, out=np.zeros_like(f), where=df > 1e-30)
        cand = r - step
        bad = (cand <= lo) | (cand >= hi) | (df <= 1e-30)
        r = np.where(bad, 0.5 * (lo + hi), cand)
        if np.all(np.abs(f) <= ROOT_TOL) and np.all(hi - lo < 1e-10):
            break
    z = r[..., None] * omega
    if np.any(np.abs(domain.rho(z) - t) > 1e-10):
        raise NoConvergence("radial root did not reach tolerance")
    return z


def _project_newton(domain: Domain, z: np.ndarray, w0: np.ndarray, iters: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched Newton for the nearest-point stationarity system."""
    n = domain.n
    m = 2 * n
    zr = _c2r(z)
    w = _c2r(w0)
    G = _c2r(domain.real_gradient(_r2c(w, n)))
    lam = np.einsum("...a,...a->...", zr - w, G) / np.einsum("...a,...a->...", G, G)
    for _ in range(iters):
        wc = _r2c(w, n)
        G = _c2r(domain.real_gradient(wc))
        F1 = w - zr + lam[..., None] * G
        F2 = domain.rho(wc)
        Hr = domain.real_hessian(wc)
        J = np.zeros(w.shape[:-1] + (m + 1, m + 1))
        J[..., :m, :m] = np.eye(m) + lam[..., None, None] * Hr
        J[..., :m, m] = G
        J[..., m, :m] = G
        F = np.concatenate([F1, F2[..., None]], axis=-1)
        try:
            step = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        w = w - step[..., :m]
        lam = lam - step[..., m]
        if np.max(np.abs(F)) < 1e-13:
            break
    res = np.max(np.abs(np.concatenate([F1, F2[..., None]], axis=-1)), axis=-1)
    return _r2c(w, n), res


def project_to_boundary(domain: Domain, z: np.ndarray) -> np.ndarray:
    """Nearest boundary point for points in a thin shell around the boundary.

    Damped-free batched Newton on the stationarity system
    {rho(w) = 0, z - w parallel to grad rho(w)} initialized from the radial
    boundary point; stragglers fall back to iterated roots along the current
    gradient line.  Raises NoConvergence if any point fails both.
    """
    z = np.asarray(z, dtype=complex)
    norms = np.linalg.norm(z, axis=-1, keepdims=True)
    safe = np.where(norms < 1e-9, 1.0, norms)
    dirs = np.where(norms < 1e-9, _unit_dir(domain.n), z / safe)
    w0 = radial_boundary_point(domain, dirs)
    w, res = _project_newton(domain, z, w0, iters=40)
    ok = res < 1e-10
    if np.all(ok):
        return w
    # Fallback: alternate 1-D boundary roots along the gradient line through z.
    bad = ~ok
    zb = z[bad] if z.ndim > 1 else z
    wb = w0[bad] if z.ndim > 1 else w0
    for _ in range(200):
        g = domain.real_gradient(wb)
        g = g / np.linalg.norm(g, axis=-1, keepdims=True)
        s = _line_root(domain, zb, g)
        wn = zb + s[..., None] * g
        if np.max(np.abs(wn - wb)) < 1e-13:
            wb = wn
            break
        wb = wn
    wn2, res2 = _project_newton(domain, zb, wb, iters=20)
    if np.any(res2 > 1e-9):
        raise NoConvergence("boundary projection failed to converge")
    if z.ndim > 1:
        w[bad] = wn2
        return w
    return wn2


def _line_root(domain: Domain, z: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Root of rho along z + s*direction nearest to s = 0."""
    s = np.zeros(z.shape[:-1])
    for _ in range(60):
        p = z + s[..., None] * direction
        f = domain.rho(p)
        df = np.einsum("...a,...a->...", _c2r(domain.real_gradient(p)), _c2r(direction))
        s = s - f / df
        if np.max(np.abs(f)) < 1e-14:
            break
    return s


def boundary_distance(domain: Domain, z: np.ndarray) -> np.ndarray:
    """Euclidean distance to the boundary (via nearest-point projection)."""
    z = np.asarray(z, dtype=complex)
    w = project_to_boundary(domain, z)
    return np.linalg.norm(z - w, axis=-1)


def leray_pairing(domain: Domain, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Complex pairing <grad rho(w), w - z> = sum_k d_k rho(w) (w_k - z_k)."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return np.einsum("...k,...k->...", domain.grad(w), w - z)


def quasimetric(domain: Domain, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Boundary quasimetric d(w, z) = |<grad rho(w), w - z>|."""
    return np.abs(leray_pairing(domain, w, z))


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal frames of the boundary at a base point.

    ``normal`` is the complex unit normal (conjugate gradient direction);
    ``tangents`` spans the complex tangent space; ``real_frame`` lists the
    2n-1 real tangent vectors (i*normal, v_1, i*v_1, ...) as complex vectors.
    """

    base: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray
    real_frame: np.ndarray = field(repr=False)


def tangent_frame(domain: Domain, xi: np.ndarray, pivot: int | None = None) -> TangentFrame:
    """Build the orthonormal boundary frames at a single point xi.

    The complex tangent basis is the pivoted Gram-Schmidt projection of the
    standard basis onto the orthogonal complement of the normal, taking the
    basis vector least aligned with the normal first.  Passing ``pivot``
    forces the index projected first; probes that compare charts at nearby
    base points share one pivot so the frame varies smoothly across the pair
    (the projection is smooth wherever the pivot column keeps a residual).
    """
    xi = np.asarray(xi, dtype=complex)
    g = domain.grad(xi)
    gn = np.linalg.norm(g)
    if gn < GRAD_FLOOR:
        raise DegenerateGradient("holomorphic gradient vanished at the base point")
    normal = np.conj(g) / gn
    n = domain.n
    order = list(np.argsort(np.abs(normal), kind="stable"))
    if pivot is not None:
        if not 0 <= pivot < n:
            raise ConfigError(f"pivot index {pivot} out of range for n={n}")
        if 1.0 - abs(normal[pivot]) ** 2 < 1e-6:
            raise ConfigError("forced pivot column is parallel to the normal")
        order = [pivot] + [k for k in order if k != pivot]
    eye = np.eye(n, dtype=complex)
    cols: list[np.ndarray] = []
    for k in order:
        v = eye[k] - np.vdot(normal, eye[k]) * normal
        for c in cols:
            v = v - np.vdot(c, v) * c
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
        if len(cols) == n - 1:
            break
    tangents = np.array(cols)
    reals = [1j * normal]
    for v in tangents:
        reals.extend([v, 1j * v])
    return TangentFrame(xi, normal, tangents, np.array(reals))


def tangent_decompose(frame: TangentFrame, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split tau - base into tangential coefficients and a complex normal part.

    Returns (w, t) with tau - base = sum_j w_j v_j + t * normal exactly.
    """
    u = np.asarray(tau, dtype=complex) - frame.base
    w = np.einsum("...k,jk->...j", u, np.conj(frame.tangents))
    t = np.einsum("...k,k->...", u, np.conj(frame.normal))
    return w, t


def _c2r(z: np.ndarray) -> np.ndarray:
    """View complex (..., n) as real (..., 2n), interleaved (x1, y1, ...)."""
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def _r2c(x: np.ndarray, n: int) -> np.ndarray:
    return x[..., 0::2] + 1j * x[..., 1::2]


def _unit_dir(n: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[0] = 1.0
    return e
