"""Approach regions attached to boundary points, and the flat model region.

Three region families share the aperture/height parameters (eta, eps):

* internal: points inside the domain whose boundary projection stays within
  a quasimetric ball of radius eta*|rho| around the vertex,
* external: points outside the domain whose displacement from the vertex,
  split into complex-tangential and normal parts, satisfies
  |w| < sqrt(eta*rho), |Im t| < eta*rho, 0 < rho < eps,
* model: the chart-coordinate template {|tau'|^2 < eta*Re(tau_n),
  |Im tau_n| < eta*Re(tau_n), Re(tau_n) < eps}.

The inclusion probe measures the empirical constant c for which the chart
carries the external region into the model region (and back): the content of
the straightening construction.  Constructive samplers place points exactly
on prescribed defining-function levels with a scalar Newton solve along the
normal line, so membership is guaranteed by construction, not by rejection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import normal_form_chart
from .domains import (
    Domain,
    TangentFrame,
    project_to_boundary,
    quasimetric,
    radial_boundary_point,
    tangent_decompose,
    tangent_frame,
)
from .errors import ConfigError, NoConvergence

__all__ = [
    "EPS0",
    "RegionSpec",
    "in_internal_region",
    "in_external_region",
    "in_model_region",
    "external_point",
    "boundary_chart_point",
    "sample_external_region",
    "sample_model_region",
    "sample_internal_region",
    "region_inclusion_probe",
    "qm_comparability_probe",
]

EPS0 = 0.1

_KINDS = ("internal", "external", "model")


@dataclass(frozen=True, eq=False)
class RegionSpec:
    """Region descriptor: kind, aperture eta, height eps, optional vertex."""

    kind: str
    eta: float
    eps: float
    vertex: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown region kind {self.kind!r}; expected one of {_KINDS}")
        if not (0.0 < self.eta <= EPS0 and 0.0 < self.eps <= EPS0):
            raise ConfigError(
                f"region parameters eta={self.eta}, eps={self.eps} must lie in (0, {EPS0}]"
            )
        if self.kind == "model":
            if self.vertex is not None:
                raise ConfigError("model region carries no vertex")
        else:
            if self.vertex is None:
                raise ConfigError(f"{self.kind} region requires a vertex")
            object.__setattr__(self, "vertex", np.asarray(self.vertex, dtype=complex))


def in_internal_region(domain: Domain, spec: RegionSpec, tau: np.ndarray) -> np.ndarray:
    """Membership in the internal region at spec.vertex.

    True iff rho(tau) in (-eps, 0) and the boundary projection of tau lies
    quasimetrically within eta*|rho(tau)| of the vertex.  Points at or
    outside the boundary are simply not members (no error).
    """
    if spec.kind != "internal":
        raise ConfigError(f"expected an internal RegionSpec, got {spec.kind!r}")
    tau = np.asarray(tau, dtype=complex)
    r = np.real(domain.rho(tau))
    out = np.zeros(np.shape(r), dtype=bool)
    mask = (r < 0.0) & (r > -spec.eps)
    if np.any(mask):
        sub = tau[mask] if tau.ndim > 1 else tau
        pr = project_to_boundary(domain, sub)
        d = quasimetric(domain, pr, spec.vertex)
        inside = d < -spec.eta * (r[mask] if tau.ndim > 1 else r)
        if tau.ndim > 1:
            out[mask] = inside
        else:
            out = inside
    return out


def in_external_region(domain: Domain, spec: RegionSpec, tau: np.ndarray) -> np.ndarray:
    """Membership in the external region at spec.vertex.

    Decomposes tau - vertex into tangential and normal parts at the vertex
    and tests |w|^2 < eta*rho, |Im t| < eta*rho, 0 < rho < eps.
    """
    if spec.kind != "external":
        raise ConfigError(f"expected an external RegionSpec, got {spec.kind!r}")
    tau = np.asarray(tau, dtype=complex)
    frame = tangent_frame(domain, spec.vertex)
    w, t = tangent_decompose(frame, tau)
    r = np.real(domain.rho(tau))
    wsq = np.sum(np.abs(w) ** 2, axis=-1)
    return (r > 0.0) & (r < spec.eps) & (wsq < spec.eta * r) & (np.abs(np.imag(t)) < spec.eta * r)


def in_model_region(spec: RegionSpec, tau: np.ndarray) -> np.ndarray:
    """Membership in the flat model region (no domain needed)."""
    if spec.kind != "model":
        raise ConfigError(f"expected a model RegionSpec, got {spec.kind!r}")
    tau = np.asarray(tau, dtype=complex)
    head = np.sum(np.abs(tau[..., :-1]) ** 2, axis=-1)
    x = np.real(tau[..., -1])
    y = np.abs(np.imag(tau[..., -1]))
    return (head < spec.eta * x) & (y < spec.eta * x) & (x < spec.eps)


def _normal_level_offset(
    domain: Domain,
    anchor: np.ndarray,
    direction: np.ndarray,
    target: np.ndarray,
    x0: np.ndarray,
    iters: int = 60,
    tol: float = 1e-13,
) -> np.ndarray:
    """Solve rho(anchor + x*direction) = target for scalar x, batched.

    The defining function is strictly increasing along the outward normal
    line on the working shell, so Newton from a first-order initial guess
    converges quadratically.
    """
    x = np.array(x0, dtype=float)
    for _ in range(iters):
        p = anchor + x[..., None] * direction
        f = np.real(domain.rho(p)) - target
        if np.all(np.abs(f) <= tol):
            break
        df = 2.0 * np.real(
            np.einsum("...k,...k->...", domain.grad(p), direction)
        )
        x = x - f / df
    else:
        raise NoConvergence("normal-line level solve did not converge")
    return x


def external_point(
    domain: Domain, frame: TangentFrame, a: np.ndarray, y: np.ndarray, s: np.ndarray
) -> np.ndarray:
    """Point of the external fibration: tangential offset a, normal offset
    x + i*y with x solved so that rho = s exactly."""
    v = frame.tangents[0]
    anchor = frame.base + a[..., None] * v + 1j * y[..., None] * frame.normal
    gn = np.linalg.norm(domain.grad(frame.base))
    x = _normal_level_offset(domain, anchor, frame.normal, s, s / (2.0 * gn))
    return anchor + x[..., None] * frame.normal


def boundary_chart_point(
    domain: Domain, frame: TangentFrame, a: np.ndarray, y: np.ndarray, level: float = 0.0
) -> np.ndarray:
    """Boundary (or level-set) point over tangential chart coordinates (a, y)."""
    v = frame.tangents[0]
    anchor = frame.base + a[..., None] * v + 1j * y[..., None] * frame.normal
    x = _normal_level_offset(domain, anchor, frame.normal, np.full(np.shape(a), float(level)), np.zeros(np.shape(a)))
    return anchor + x[..., None] * frame.normal


def sample_external_region(
    domain: Domain, xi: np.ndarray, eta: float, eps: float, count: int, seed: int
) -> np.ndarray:
    """Seeded sample of the external region, exact membership by construction.

    Levels s are uniform in (0, eps); each slice is filled uniformly in the
    tangential disc of radius sqrt(eta*s) and the imaginary-normal interval
    (-eta*s, eta*s), with a safety margin keeping samples strictly interior
    to the strict inequalities.
    """
    if domain.n != 2:
        raise ConfigError("region samplers are implemented for n = 2 only")
    rng = np.random.default_rng(seed)
    frame = tangent_frame(domain, xi)
    s = eps * rng.uniform(1e-4, 1.0 - 1e-4, size=count)
    rad = np.sqrt(eta * s * rng.uniform(0.0, 1.0 - 1e-6, size=count))
    ang = rng.uniform(0.0, 2.0 * np.pi, size=count)
    a = rad * np.exp(1j * ang)
    y = eta * s * rng.uniform(-1.0 + 1e-6, 1.0 - 1e-6, size=count)
    return external_point(domain, frame, a, y, s)


def sample_model_region(eta: float, eps: float, count: int, seed: int, n: int = 2) -> np.ndarray:
    """Seeded sample of the model region (uniform in level, disc and band)."""
    rng = np.random.default_rng(seed)
    x = eps * rng.uniform(1e-4, 1.0 - 1e-4, size=count)
    rad = np.sqrt(eta * x * rng.uniform(0.0, 1.0 - 1e-6, size=count))
    ang = rng.uniform(0.0, 2.0 * np.pi, size=count)
    y = eta * x * rng.uniform(-1.0 + 1e-6, 1.0 - 1e-6, size=count)
    tau = np.zeros((count, n), dtype=complex)
    tau[:, 0] = rad * np.exp(1j * ang)
    tau[:, -1] = x + 1j * y
    return tau


def sample_internal_region(
    domain: Domain, xi: np.ndarray, eta: float, eps: float, count: int, seed: int
) -> np.ndarray:
    """Seeded sample of the internal region.

    Draws a boundary point p in the quasiball of radius eta*s around the
    vertex (tangential scale sqrt(eta*s), rejection on the exact quasimetric)
    and walks inward along the normal at p to the level rho = -s; the
    boundary projection of the result is p itself, so membership reduces to
    the quasimetric condition enforced here.
    """
    if domain.n != 2:
        raise ConfigError("region samplers are implemented for n = 2 only")
    rng = np.random.default_rng(seed)
    frame = tangent_frame(domain, xi)
    out = np.empty((count, domain.n), dtype=complex)
    made = 0
    while made < count:
        todo = count - made
        s = eps * rng.uniform(1e-3, 1.0 - 1e-3, size=todo)
        delta = eta * s
        rad = 0.9 * np.sqrt(delta * rng.uniform(0.0, 1.0, size=todo))
        ang = rng.uniform(0.0, 2.0 * np.pi, size=todo)
        a = rad * np.exp(1j * ang)
        y = 0.45 * delta * rng.uniform(-1.0, 1.0, size=todo)
        p = boundary_chart_point(domain, frame, a, y)
        keep = quasimetric(domain, p, xi) < 0.98 * delta
        p, s = p[keep], s[keep]
        if p.shape[0] == 0:
            continue
        g = domain.grad(p)
        normals = np.conj(g) / np.linalg.norm(g, axis=-1, keepdims=True)
        gn = np.linalg.norm(g, axis=-1)
        x = _normal_level_offset(domain, p, -normals, -s, s / (2.0 * gn))
        tau = p - x[..., None] * normals
        take = min(todo, tau.shape[0])
        out[made : made + take] = tau[:take]
        made += take
    return out


def _model_fit_constant(tau: np.ndarray, eta: float, eps: float) -> float:
    """Smallest c >= 1 with every tau in the model region at (c*eta, c*eps)."""
    head = np.sum(np.abs(tau[..., :-1]) ** 2, axis=-1)
    x = np.real(tau[..., -1])
    y = np.abs(np.imag(tau[..., -1]))
    if np.any(x <= 0.0):
        return float("inf")
    c = np.max(np.stack([head / (eta * x), y / (eta * x), x / eps]))
    return float(max(1.0, c))


def _external_fit_constant(
    domain: Domain, frame: TangentFrame, pts: np.ndarray, eta: float, eps: float
) -> float:
    """Smallest c >= 1 with every point in the external region at (c*eta, c*eps)."""
    w, t = tangent_decompose(frame, pts)
    r = np.real(domain.rho(pts))
    if np.any(r <= 0.0):
        return float("inf")
    wsq = np.sum(np.abs(w) ** 2, axis=-1)
    c = np.max(np.stack([wsq / (eta * r), np.abs(np.imag(t)) / (eta * r), r / eps]))
    return float(max(1.0, c))


def region_inclusion_probe(
    domain: Domain,
    xi: np.ndarray,
    eta: float,
    eps: float,
    samples: int = 2000,
    seed: int = 23,
) -> dict:
    """Empirical chart-inclusion constants between external and model regions.

    Forward: sample the external region at the vertex, push through the
    chart, fit the smallest c >= 1 landing every image in the model region
    at (c*eta, c*eps).  Reverse: sample the model region, pull back through
    the inverse chart, fit the analogous c into the external region.  Both
    sups are re-fit on a doubled sample; the probe passes when they are
    finite, containment at the (slightly inflated) fitted c is complete,
    and doubling moves neither constant by more than 10%.
    """
    if eta > EPS0 or eps > EPS0:
        raise ConfigError(f"probe refuses eta or eps above {EPS0}")
    chart = normal_form_chart(domain, xi)
    frame = chart.frame

    def fit(count: int, seed_shift: int) -> tuple[float, float, np.ndarray]:
        ext = sample_external_region(domain, xi, eta, eps, count, seed + seed_shift)
        imgs = chart.forward(ext)
        fwd = _model_fit_constant(imgs, eta, eps)
        model = sample_model_region(eta, eps, count, seed + seed_shift + 1, n=domain.n)
        rev = _external_fit_constant(domain, frame, chart.inverse(model), eta, eps)
        return fwd, rev, imgs

    c_fwd, c_rev, imgs1 = fit(samples, 0)
    c_fwd2, c_rev2, imgs2 = fit(2 * samples, 7)
    # containment re-check on the fitted sample itself, at the fitted constant
    # inflated off the strict inequalities; inline because c*eta may exceed
    # the RegionSpec cap
    c_pad = (1.0 + 1e-9) * max(c_fwd, c_fwd2)
    imgs = np.concatenate([imgs1, imgs2])
    head = np.sum(np.abs(imgs[..., :-1]) ** 2, axis=-1)
    x = np.real(imgs[..., -1])
    y = np.abs(np.imag(imgs[..., -1]))
    contained = (x > 0) & (head < c_pad * eta * x) & (y < c_pad * eta * x) & (x < c_pad * eps)
    frac = float(np.mean(contained))
    change_fwd = abs(c_fwd2 - c_fwd) / c_fwd2
    change_rev = abs(c_rev2 - c_rev) / c_rev2
    passed = (
        np.isfinite(c_fwd2)
        and np.isfinite(c_rev2)
        and frac == 1.0
        and change_fwd <= 0.1
        and change_rev <= 0.1
    )
    return {
        "vertex": np.asarray(xi, dtype=complex).tolist(),
        "eta": eta,
        "eps": eps,
        "c_forward": float(max(c_fwd, c_fwd2)),
        "c_reverse": float(max(c_rev, c_rev2)),
        "containment_fraction": frac,
        "doubling_change_forward": float(change_fwd),
        "doubling_change_reverse": float(change_rev),
        "passed": bool(passed),
    }


def qm_comparability_probe(
    domain: Domain,
    mode: str,
    eta: float = 0.1,
    eps: float = 0.1,
    samples: int = 2000,
    seed: int = 29,
) -> dict:
    """Band of quasimetric comparability ratios near the boundary.

    mode "lemma1": for exterior shell points w and boundary points z, the
    ratio d(w,z) / (rho(w) + d(pr(w), z)).  mode "lemma2": for tau drawn
    from external regions at vertices z and boundary points w, the ratio
    d(tau,w) / (rho(tau) + d(z,w)).  Reports min and max over the sample
    and their stability under doubling.
    """
    if mode not in ("lemma1", "lemma2"):
        raise ConfigError("mode must be 'lemma1' or 'lemma2'")
    rng = np.random.default_rng(seed)

    def ratios(count: int) -> np.ndarray:
        dirs = rng.normal(size=(count, 2 * domain.n)).view(complex)
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        zdirs = rng.normal(size=(count, 2 * domain.n)).view(complex)
        zdirs /= np.linalg.norm(zdirs, axis=-1, keepdims=True)
        z = radial_boundary_point(domain, zdirs)
        if mode == "lemma1":
            levels = rng.uniform(0.0, eps, size=count)
            w = radial_boundary_point(domain, dirs, t=levels)
            pr = project_to_boundary(domain, w)
            num = quasimetric(domain, w, z)
            den = np.real(domain.rho(w)) + quasimetric(domain, pr, z)
            return num / den
        vertices = radial_boundary_point(domain, dirs[: max(4, count // 500)])
        chunks = []
        per = count // len(vertices)
        for i, v in enumerate(vertices):
            tau = sample_external_region(domain, v, eta, eps, per, seed + 31 * i)
            wb = radial_boundary_point(
                domain,
                (lambda u: u / np.linalg.norm(u, axis=-1, keepdims=True))(
                    rng.normal(size=(per, 2 * domain.n)).view(complex)
                ),
            )
            num = quasimetric(domain, tau, wb)
            den = np.real(domain.rho(tau)) + quasimetric(domain, v[None, :], wb)
            chunks.append(num / den)
        return np.concatenate(chunks)

    r1 = ratios(samples)
    r2 = np.concatenate([r1, ratios(samples)])
    lo, hi = float(r2.min()), float(r2.max())
    change = max(
        abs(float(r1.min()) - lo) / lo if lo > 0 else np.inf,
        abs(float(r1.max()) - hi) / hi,
    )
    passed = lo > 0.0 and np.isfinite(hi) and change <= 0.1
    return {
        "mode": mode,
        "ratio_min": lo,
        "ratio_max": hi,
        "doubling_change": float(change),
        "samples": int(2 * samples),
        "passed": bool(passed),
    }
