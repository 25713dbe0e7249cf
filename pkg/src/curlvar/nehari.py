"""Projection onto the generalized Nehari set.

A field u belongs to the constraint set when the action derivative vanishes
along its own ray and along every degenerate direction (gradients, plus the
low spectral block in the shifted case).  The projection of a solenoidal
field v is  m(v) = t(v) (v + w(v)): first the inner minimizer w(v) kills the
degenerate derivatives, then the closed-form scalar

    t = (|curl u|_2^2 / |u|_6^6)^(1/4)

places the ray.  On any projected point the two identities

    |curl u|_2^2 = |u|_6^6      and      J(u) = |u|_6^6 / 3

hold by construction, and the action value determines the Sobolev-type
quotient through  J = A^(3/2) / 3.

For the shifted action (lambda < 0) no closed-form t exists; the projection
alternates the inner concave maximization over the degenerate space with a
golden-section maximization over t, which is a coordinate ascent on the
jointly concave restriction of the action to the half-space through v+.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegenerateInputError, DomainError, SolverNonConvergence
from .fields import VectorField, dot_l2, energy, lp_norm, norm_l2
from .grids import EDGE
from .inner import InnerSolution, NonlinearitySpec, _InnerProblem, _minimize_inner
from .operators import _edge_cc_arrays, curl

__all__ = [
    "NehariPoint",
    "scalar_t",
    "project_nehari",
    "project_nehari_lambda",
    "ray_kernel_gap",
]

DEFAULT_TOL = 1e-8
GOLDEN_TOL = 1e-10
ALTERNATE_CAP = 200


@dataclass(frozen=True)
class NehariPoint:
    """A field on the (generalized) Nehari set with its certificates.

    ``residual_ray`` is the normalized ray derivative |J'(u)u| / |u|_6^6;
    ``residual_W`` the largest normalized derivative over the degenerate
    test directions.  ``witness_v`` is the solenoidal source the point was
    projected from.
    """

    u: VectorField
    t: float
    J_value: float
    residual_ray: float
    residual_W: float
    witness_v: VectorField
    lam: float = 0.0
    inner: InnerSolution | None = None

    @property
    def sobolev_quotient(self) -> float:
        """A = (3 J)^(2/3), the Rayleigh-type quotient of the point."""
        return (3.0 * self.J_value) ** (2.0 / 3.0)


def scalar_t(curl_sq: float, l6_6: float) -> float:
    """Ray parameter placing t*(v + w) on the Nehari set.

    ``curl_sq`` and ``l6_6`` are the curl energy and sextic mass of v + w;
    the returned t satisfies  t^2 * curl_sq = t^6 * l6_6  identically.
    """
    if not (curl_sq > 0.0) or not (l6_6 > 0.0):
        raise DomainError(f"scalar_t needs positive inputs, got {curl_sq}, {l6_6}")
    return (curl_sq / l6_6) ** 0.25


def _ray_residual(rep) -> float:
    """|J'(u)u| / |u|_6^6 from an EnergyReport-like object."""
    jpu = rep.curl_energy - rep.l6_6
    if rep.J_lambda is not None:
        # J_lambda'(u)u adds lam |u|_2^2
        jpu = jpu + (rep.J_lambda - rep.J) * 2.0
    return abs(jpu) / max(rep.l6_6, np.finfo(float).tiny)


def _w_residual(u: VectorField, lam: float, basis) -> float:
    """Largest normalized derivative of the (shifted) action over the kernel basis."""
    prob = _InnerProblem(u, lam, list(basis))
    _, cache = prob.eval(np.zeros(prob.K), np.zeros(u.grid.node_shape))
    g_z, g_xi = prob.gradient(np.zeros(prob.K), np.zeros(u.grid.node_shape), cache)
    return prob.residual(g_z, g_xi)


def project_nehari(v: VectorField, tol: float = DEFAULT_TOL,
                   max_iter: int = 200, xi0=None) -> NehariPoint:
    """Project a solenoidal field onto the Nehari set (pure critical case).

    By exact homogeneity of the discrete inner problem, the optimality of
    w(v) transfers to the scaled point, so a single inner solve suffices.
    Degenerate inputs (curl-free v) are rejected.
    """
    cv = curl(v)
    curl_sq = dot_l2(cv, cv)
    if curl_sq <= 0.0 or curl_sq <= 1e-28 * dot_l2(v, v):
        raise DegenerateInputError("project_nehari needs a field with nonzero curl")
    sol = _minimize_inner(v, 0.0, [], tol, max_iter, xi0=xi0)
    vw = v + sol.w_tilde
    l6_6 = lp_norm(vw, 6) ** 6
    t = scalar_t(curl_sq, l6_6)
    u = t * vw
    rep = energy(u)
    residual_ray = _ray_residual(rep)
    # exact 5-homogeneity of the flux: the kernel residual at u is t^5 times
    # the one certified at v + w(v), so the relative residual transfers as is
    residual_W = sol.optimality_residual / max(lp_norm(v, 6) ** 5, np.finfo(float).tiny)
    return NehariPoint(u=u, t=t, J_value=rep.J, residual_ray=residual_ray,
                       residual_W=residual_W, witness_v=v, lam=0.0, inner=sol)


class _RaySection:
    """The shifted action restricted to t -> J_lambda(t v+ + w) at fixed w.

    psi(t) = (t^2/2) Q(v+) + t * lam <v+, w>_2 + [w quadratics]
             - (1/6) |t v+ + w|_6^6;
    each evaluation is one fused cell pass over precomputed cell-centered
    arrays of v+ and w.
    """

    def __init__(self, vplus_cc, w_cc, q_vplus, quad_w, lam_l2_cross, h3):
        self.P = vplus_cc
        self.Q = w_cc
        self.q = q_vplus
        self.quad_w = quad_w
        self.b = lam_l2_cross
        self.h3 = h3

    def value(self, t):
        px, py, pz = self.P
        qx, qy, qz = self.Q
        ax, ay, az = t * px + qx, t * py + qy, t * pz + qz
        m2 = ax * ax + ay * ay + az * az
        l6 = float(np.sum(m2 ** 3)) * self.h3
        return 0.5 * t * t * self.q + t * self.b + self.quad_w - l6 / 6.0

    def d1_d2(self, t):
        px, py, pz = self.P
        qx, qy, qz = self.Q
        ax, ay, az = t * px + qx, t * py + qy, t * pz + qz
        m2 = ax * ax + ay * ay + az * az
        up = ax * px + ay * py + az * pz
        p2 = px * px + py * py + pz * pz
        m4 = m2 * m2
        d1 = self.q * t + self.b - float(np.sum(m4 * up)) * self.h3
        d2 = self.q - float(np.sum(m4 * p2 + 4.0 * m2 * up * up)) * self.h3
        return d1, d2


def _bracket_local_max(sec: _RaySection, t0: float):
    """Walk from t0 to a 3-point bracket (a < c < b, f(c) >= f(a), f(b))."""
    c = max(t0, 1e-8)
    fc = sec.value(c)
    fu = sec.value(2.0 * c)
    if fu > fc:
        a = c
        c, fc = 2.0 * c, fu
        for _ in range(300):
            fu = sec.value(2.0 * c)
            if fu < fc:
                return a, c, 2.0 * c, fc
            a, c, fc = c, 2.0 * c, fu
        raise DegenerateInputError("action unbounded along the ray; input is degenerate")
    fd = sec.value(0.5 * c)
    if fd <= fc:
        return 0.5 * c, c, 2.0 * c, fc
    b = c
    c, fc = 0.5 * c, fd
    for _ in range(300):
        fd = sec.value(0.5 * c)
        if fd < fc:
            return 0.5 * c, c, b, fc
        b, c, fc = c, 0.5 * c, fd
    raise DegenerateInputError("ray maximum collapsed toward t = 0")


def _maximize_t(sec: _RaySection, t0: float):
    """Golden-section ascent to the local maximum bracketed from t0."""
    a, c, b, _fc = _bracket_local_max(sec, t0)
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = sec.value(x1), sec.value(x2)
    while (b - a) > GOLDEN_TOL * max(1.0, b):
        if f1 > f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = sec.value(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = sec.value(x2)
    t = 0.5 * (a + b)
    # Newton polish on psi'(t) = 0 (quadratic convergence, no extra passes
    # beyond a handful of cell sweeps)
    for _ in range(40):
        d1, d2 = sec.d1_d2(t)
        if d2 >= 0.0:
            break
        step = d1 / d2
        t_new = t - step
        if t_new <= 0.0:
            break
        t = t_new
        if abs(step) <= 1e-14 * max(1.0, t):
            break
    if t <= 1e-12:
        raise DegenerateInputError("ray maximum collapsed to t = 0; shifted form is "
                                   "not positive on this direction")
    return t, sec.value(t)


def project_nehari_lambda(v_plus: VectorField, lam: float, vtilde,
                          tol: float = DEFAULT_TOL, max_iter: int = ALTERNATE_CAP,
                          inner_tol: float | None = None) -> NehariPoint:
    """Project onto the generalized Nehari set of the shifted action.

    Alternates (i) the inner concave maximization over the degenerate space
    at fixed t with (ii) golden-section maximization over t at fixed
    w-tilde, until the action value settles and both residuals pass.
    Inputs on which the shifted quadratic form is not positive are rejected.
    """
    if lam > 0.0:
        raise DomainError(f"lambda must be <= 0, got {lam}")
    basis = list(vtilde.fields) if hasattr(vtilde, "fields") else list(vtilde)
    if lam == 0.0 and not basis:
        return project_nehari(v_plus, tol=tol, max_iter=max_iter)

    grid = v_plus.grid
    cv = curl(v_plus)
    q_vplus = dot_l2(cv, cv) + lam * dot_l2(v_plus, v_plus)
    if q_vplus <= 0.0:
        raise DegenerateInputError(
            f"shifted quadratic form is {q_vplus:.3e} <= 0 on v_plus; "
            "the input does not point into the positive cone")
    if inner_tol is None:
        inner_tol = tol

    h3 = grid.cell_volume
    vp_cc = _edge_cc_arrays(*(v_plus.components))

    def ray_step(t, xi_warm, z_warm):
        sol = _minimize_inner(t * v_plus, lam, basis, inner_tol, 400,
                              xi0=xi_warm, z0=z_warm)
        w = sol.w_tilde
        cw = curl(w)
        quad_w = 0.5 * dot_l2(cw, cw) + 0.5 * lam * dot_l2(w, w)
        lam_l2_cross = lam * dot_l2(v_plus, w)
        sec = _RaySection(vp_cc, _edge_cc_arrays(*w.components),
                          q_vplus, quad_w, lam_l2_cross, h3)
        t_new, j_new = _maximize_t(sec, t)
        return sol, t_new, j_new

    t = 1.0
    sol = None
    j_prev = None
    xi_warm, z_warm = None, None
    iterations = 0
    for iterations in range(1, max_iter + 1):
        sol, t_new, j_new = ray_step(t, xi_warm, z_warm)
        # w-tilde scales roughly with t; rescale the warm start accordingly
        ratio = t_new / t if t > 0 else 1.0
        xi_warm = sol.potential.values * ratio
        z_warm = sol.z * ratio
        converged_j = j_prev is not None and abs(j_new - j_prev) <= tol * max(1.0, abs(j_new))
        t, j_prev = t_new, j_new
        if converged_j:
            break

    # polish: the action is flat in t at the maximum, so the J-based stop
    # leaves a t-offset ~ sqrt(tol); a few exact (w, t) rounds remove it
    for _ in range(3):
        sol, t, j_prev = ray_step(t, xi_warm, z_warm)
        xi_warm, z_warm = sol.potential.values, sol.z

    sol = _minimize_inner(t * v_plus, lam, basis, inner_tol, 400, xi0=xi_warm, z0=z_warm)
    u = t * v_plus + sol.w_tilde
    rep = energy(u, lam)
    residual_ray = _ray_residual(rep)
    residual_W = sol.optimality_residual / max(1.0, lp_norm(t * v_plus, 6) ** 5)
    if residual_ray > 100 * max(tol, 1e-12):
        raise SolverNonConvergence(
            f"alternating projection stalled: ray residual {residual_ray:.3e}",
            residual=residual_ray, iterations=iterations)
    return NehariPoint(u=u, t=t, J_value=rep.J_lambda, residual_ray=residual_ray,
                       residual_W=residual_W, witness_v=v_plus, lam=lam, inner=sol)


def ray_kernel_gap(u: VectorField, t: float, w: VectorField,
                   curl_free_tol: float = 1e-10, return_pointwise: bool = False):
    """Convexity gap of the action along ray-plus-kernel perturbations.

    gap(t, w) = J(u) - J(t u + w) + J'(u)[((t^2 - 1)/2) u + t w]  >= 0
    for every t >= 0 and curl-free w, with equality only at (1, 0).  The
    identity reduces the gap to a pointwise nonnegative integrand, which is
    returned per cell when ``return_pointwise`` is set.
    """
    if t < 0.0:
        raise DomainError(f"gap is defined for t >= 0, got {t}")
    cw = curl(w)
    wnorm = norm_l2(w)
    if norm_l2(cw) > curl_free_tol * max(1.0, wnorm):
        raise ContractViolation(
            f"w must be curl-free: |curl w| = {norm_l2(cw):.3e} at |w| = {wnorm:.3e}")
    grid = u.grid
    h3 = grid.cell_volume
    ux, uy, uz = _edge_cc_arrays(*u.components)
    wx, wy, wz = _edge_cc_arrays(*w.components)
    mag2 = ux * ux + uy * uy + uz * uz
    pert_x = 0.5 * (t * t - 1.0) * ux + t * wx
    pert_y = 0.5 * (t * t - 1.0) * uy + t * wy
    pert_z = 0.5 * (t * t - 1.0) * uz + t * wz
    tu_x, tu_y, tu_z = t * ux + wx, t * uy + wy, t * uz + wz
    phi = (
        -(mag2 * mag2) * (ux * pert_x + uy * pert_y + uz * pert_z)
        - mag2 ** 3 / 6.0
        + (tu_x * tu_x + tu_y * tu_y + tu_z * tu_z) ** 3 / 6.0
    )
    gap = float(np.sum(phi)) * h3
    if return_pointwise:
        return gap, phi
    return gap
