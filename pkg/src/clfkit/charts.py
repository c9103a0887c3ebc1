"""Holomorphic straightening charts at boundary base points.

A chart sends the ambient coordinates to adapted ones in which the defining
function reads 2*Re(tau_n) + Hermitian quadratic + cubic remainder.  The
linear part stacks the conjugated complex tangent vectors over the raw
(unnormalized) holomorphic gradient, which makes the linear term of the
pushed-forward defining function exactly 2*Re(tau_n).  The quadratic part
folds half the holomorphic Hessian into the last coordinate, cancelling the
pure second-order terms; what survives at order two is the Hermitian form,
positive definite by strong convexity.

The forward map is a quadratic polynomial, so the inverse reduces to one
scalar equation: writing u = psi(tau) - base, p = Phi^{-1} tau and
m = Phi^{-1} e_n, the displacement is u = p - q*m where q = u^T B u solves a
scalar quadratic; we run Newton on it from q0 = p^T B p.  The Jacobian
determinant of the forward map follows from the rank-one update formula,
det DPhi = det(Phi) * (1 + 2 u^T B m).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import Domain, TangentFrame, tangent_frame
from .errors import NoConvergence

__all__ = [
    "NormalFormChart",
    "normal_form_chart",
    "standard_form_residual",
    "chart_lipschitz_probe",
    "RESIDUAL_RADII",
]

RESIDUAL_RADII = (1e-1, 10.0**-1.5, 1e-2, 10.0**-2.5)
RESIDUAL_FLOOR = 1e-13


@dataclass(frozen=True)
class NormalFormChart:
    """Quadratic-polynomial chart phi and its closed-form inverse psi.

    forward: phi(z) = Phi (z - base) + ((z - base)^T B (z - base)) e_n
    inverse: psi(tau) with psi(phi(z)) = z
    jacobian: complex Jacobian determinant of psi at tau
    """

    domain: Domain
    base: np.ndarray
    frame: TangentFrame
    Phi: np.ndarray
    Phi_inv: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    det_Phi: complex = field(repr=False)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def m(self) -> np.ndarray:
        """Last column of the inverse linear map, Phi^{-1} e_n."""
        return self.Phi_inv[:, -1]

    def forward(self, z: np.ndarray) -> np.ndarray:
        u = np.asarray(z, dtype=complex) - self.base
        out = np.einsum("jk,...k->...j", self.Phi, u)
        out[..., -1] += np.einsum("...j,jk,...k->...", u, self.B, u)
        return out

    def inverse(self, tau: np.ndarray, tol: float = 1e-14, iters: int = 60) -> np.ndarray:
        tau = np.asarray(tau, dtype=complex)
        p = np.einsum("jk,...k->...j", self.Phi_inv, tau)
        m = self.m
        q = np.einsum("...j,jk,...k->...", p, self.B, p)
        u = p
        for _ in range(iters):
            u = p - q[..., None] * m
            f = np.einsum("...j,jk,...k->...", u, self.B, u) - q
            if np.all(np.abs(f) <= tol * (1.0 + np.abs(q))):
                break
            fp = -2.0 * np.einsum("...j,jk,k->...", u, self.B, m) - 1.0
            q = q - f / fp
        else:
            raise NoConvergence("chart inversion did not converge")
        return self.base + u

    def jacobian(self, tau: np.ndarray) -> np.ndarray:
        """Complex Jacobian determinant of the inverse map at tau."""
        u = self.inverse(tau) - self.base
        det_fwd = self.det_Phi * (1.0 + 2.0 * np.einsum("...j,jk,k->...", u, self.B, self.m))
        return 1.0 / det_fwd

    def jacobian_at_source(self, z: np.ndarray) -> np.ndarray:
        """Same determinant expressed at the source point z = psi(tau)."""
        u = np.asarray(z, dtype=complex) - self.base
        det_fwd = self.det_Phi * (1.0 + 2.0 * np.einsum("...j,jk,k->...", u, self.B, self.m))
        return 1.0 / det_fwd


def normal_form_chart(domain: Domain, xi: np.ndarray, pivot: int | None = None) -> NormalFormChart:
    """Build the straightening chart at boundary point xi.

    Rows of the linear map: conjugated complex tangent frame, then the raw
    holomorphic gradient (its scale fixes the linear term at 2*Re(tau_n)).
    ``pivot`` is forwarded to the frame construction so that families of
    charts at nearby base points can share a smooth frame convention.
    """
    frame = tangent_frame(domain, xi, pivot=pivot)
    g = domain.grad(frame.base)
    Phi = np.vstack([np.conj(frame.tangents), g[None, :]])
    Phi_inv = np.linalg.inv(Phi)
    B = 0.5 * domain.holomorphic_hessian(frame.base)
    return NormalFormChart(
        domain=domain,
        base=frame.base,
        frame=frame,
        Phi=Phi,
        Phi_inv=Phi_inv,
        B=B,
        det_Phi=complex(np.linalg.det(Phi)),
    )


def _hermitian_design(tau: np.ndarray, n: int) -> np.ndarray:
    """Real regression features for a Hermitian form tau^H A tau."""
    cols = [np.abs(tau[..., j]) ** 2 for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            cross = tau[..., j] * np.conj(tau[..., k])
            cols.append(2.0 * np.real(cross))
            cols.append(-2.0 * np.imag(cross))
    return np.stack(cols, axis=-1)


def _hermitian_from_coef(coef: np.ndarray, n: int) -> np.ndarray:
    A = np.zeros((n, n), dtype=complex)
    for j in range(n):
        A[j, j] = coef[j]
    idx = n
    for j in range(n):
        for k in range(j + 1, n):
            A[j, k] = coef[idx] + 1j * coef[idx + 1]
            A[k, j] = np.conj(A[j, k])
            idx += 2
    return A


def _sphere_samples(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    v = rng.normal(size=(count, 2 * n)).view(complex)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return radius * v


def standard_form_residual(
    domain: Domain,
    chart: NormalFormChart,
    radii: tuple[float, ...] = RESIDUAL_RADII,
    samples: int = 160,
    seed: int = 5,
) -> dict:
    """Fit the Hermitian term of rho in chart coordinates and grade the rest.

    On each sphere |tau| = r the Hermitian form is fit by least squares to
    rho(psi(tau)) - 2 Re(tau_n); the fit is per radius so that the measured
    residual is purely the cubic-and-higher remainder.  Reports the log-log
    slope of the max residual versus r (infinity when every residual sits at
    machine precision, as happens when rho is exactly quadratic), the fitted
    form at the smallest radius, and its eigenvalues.
    """
    rng = np.random.default_rng(seed)
    n = domain.n
    max_res = []
    forms = []
    for r in radii:
        tau = _sphere_samples(rng, samples, n, r)
        y = np.real(domain.rho(chart.inverse(tau))) - 2.0 * np.real(tau[..., -1])
        X = _hermitian_design(tau, n)
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        forms.append(_hermitian_from_coef(coef, n))
        max_res.append(float(np.max(np.abs(y - X @ coef))))
    max_res_arr = np.asarray(max_res)
    valid = max_res_arr > RESIDUAL_FLOOR
    exact = not bool(valid.any())
    if int(valid.sum()) >= 2:
        slope = float(np.polyfit(np.log(np.asarray(radii)[valid]), np.log(max_res_arr[valid]), 1)[0])
    else:
        slope = float("inf")
    A = forms[-1]
    eigs = np.linalg.eigvalsh(A)
    pos_def = all(float(np.linalg.eigvalsh(F).min()) > 0.0 for F in forms)
    passed = (exact or slope >= 2.7) and pos_def
    return {
        "base_point": chart.base.tolist(),
        "radii": list(radii),
        "max_residual": max_res,
        "slope": slope,
        "exact_to_machine_precision": exact,
        "hermitian_form": A,
        "eigenvalues": [float(e) for e in eigs],
        "positive_definite": pos_def,
        "passed": bool(passed),
    }


def _ball_cloud(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    v = rng.normal(size=(count, 2 * n)).view(complex)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / (2 * n))
    return r * v


def chart_lipschitz_probe(
    domain: Domain,
    centers: int = 5,
    pairs_per_center: int = 32,
    tau_samples: int = 24,
    seed: int = 11,
    min_sep: float = 1e-3,
    max_sep: float = 0.2,
    tau_radius: float = 0.1,
) -> dict:
    """Difference quotients of the chart family across nearby base points.

    Pairs of base points are drawn in clusters; all charts in one cluster
    share the pivot chosen at the cluster center, so every compared pair
    uses one smooth frame convention.  For each pair the sup over a fixed
    cloud of standard-coordinate points of |J(xi,tau) - J(xi',tau)| and
    |psi(xi,tau) - psi(xi',tau)|, divided by |xi - xi'|, is recorded; the
    report carries the overall sup and its change between the first half of
    the pair sample and the whole (the stability flag).
    """
    from .domains import radial_boundary_point

    rng = np.random.default_rng(seed)
    n = domain.n
    quot_J: list[float] = []
    quot_psi: list[float] = []
    for _ in range(centers):
        d0 = rng.normal(size=2 * n).view(complex)
        d0 /= np.linalg.norm(d0)
        xi0 = radial_boundary_point(domain, d0)
        g0 = domain.grad(xi0)
        normal0 = np.conj(g0) / np.linalg.norm(g0)
        piv = int(np.argmin(np.abs(normal0)))
        tau = _ball_cloud(rng, tau_samples, n, tau_radius)
        made = 0
        while made < pairs_per_center:
            d1 = d0 + 0.06 * rng.normal(size=2 * n).view(complex)
            d2 = d0 + 0.06 * rng.normal(size=2 * n).view(complex)
            x1 = radial_boundary_point(domain, d1 / np.linalg.norm(d1))
            x2 = radial_boundary_point(domain, d2 / np.linalg.norm(d2))
            sep = float(np.linalg.norm(x1 - x2))
            if not (min_sep <= sep <= max_sep):
                continue
            c1 = normal_form_chart(domain, x1, pivot=piv)
            c2 = normal_form_chart(domain, x2, pivot=piv)
            dJ = float(np.max(np.abs(c1.jacobian(tau) - c2.jacobian(tau))))
            dpsi = float(np.max(np.linalg.norm(c1.inverse(tau) - c2.inverse(tau), axis=-1)))
            quot_J.append(dJ / sep)
            quot_psi.append(dpsi / sep)
            made += 1
    quot_J_arr = np.asarray(quot_J)
    quot_psi_arr = np.asarray(quot_psi)
    half = len(quot_J_arr) // 2
    sup_J = float(quot_J_arr.max())
    sup_psi = float(quot_psi_arr.max())
    change_J = abs(sup_J - float(quot_J_arr[:half].max())) / sup_J
    change_psi = abs(sup_psi - float(quot_psi_arr[:half].max())) / sup_psi
    passed = np.isfinite(sup_J) and np.isfinite(sup_psi) and change_J <= 0.1 and change_psi <= 0.1
    return {
        "pairs": int(len(quot_J_arr)),
        "sup_jacobian_quotient": sup_J,
        "sup_inverse_quotient": sup_psi,
        "halfsample_change_jacobian": float(change_J),
        "halfsample_change_inverse": float(change_psi),
        "passed": bool(passed),
    }
