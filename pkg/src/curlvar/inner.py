"""Inner convex minimization over the degenerate directions.

Given a fixed field v, the solver finds the unique w-tilde in
W-tilde = span{e_1..e_K} (+) grad-potentials  that makes the shifted action
stationary in every W-tilde direction.  Working in potential form (unknown
node potential xi plus K spectral coordinates z) removes the divergence
constraint exactly and leaves an unconstrained, strictly convex problem:

    minimize  Psi(z, xi) = -J_lambda(v + sum_k z_k e_k + grad xi)

whose first-order conditions are exactly the vanishing of J_lambda' along
the ray-free directions of the generalized Nehari set.  With lambda = 0 and
no spectral block, Psi differs from the sextic mass integral by a constant,
so the problem reduces to the pure kernel minimizer w(v) and inherits its
exact positive homogeneity  w(a v) = a w(v).

Algorithm: a short preconditioned nonlinear-conjugate-gradient phase
(inverse node Laplacian as preconditioner, Armijo backtracking), then
damped Newton-CG refinement with matrix-free Hessian products.  The
objective is convex, so Newton directions are descent directions and the
iteration is globally convergent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError, SolverNonConvergence
from .fields import ScalarPotential, VectorField, dot_l2, lp_norm
from .grids import EDGE, GridSpec
from .operators import (
    _cc_adjoint_arrays,
    _div_node_arrays,
    _edge_cc_arrays,
    _grad_arrays,
    curl,
    gradient,
    poisson_node_solve,
)

__all__ = ["NonlinearitySpec", "InnerSolution", "minimize_w", "minimize_w_tilde"]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
_NCG_WARMUP = 6


@dataclass(frozen=True)
class NonlinearitySpec:
    """Sextic nonlinearity with an optional quadratic spectral shift.

    Models F(x, u) = |u|^6 / 6 - (lam/2) |u|^2 with lam <= 0 (lam = 0 is the
    pure critical case).  The quadratic weight is spatially constant; that is
    the only case the solvers ship and test.
    """

    lam: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam > 0.0:
            raise DomainError(f"the spectral shift must satisfy lam <= 0, got {self.lam}")

    def f_value(self, l6_6: float, l2_sq: float) -> float:
        return l6_6 / 6.0 - 0.5 * self.lam * l2_sq


@dataclass(frozen=True)
class InnerSolution:
    """Result of the inner minimization.

    ``w_tilde`` is the minimizer (gradient part plus spectral part),
    ``optimality_residual`` the largest normalized derivative of the shifted
    action over all basis test directions, ``F_value`` the nonlinearity
    integral at v + w_tilde.
    """

    w_tilde: VectorField
    potential: ScalarPotential
    z: np.ndarray
    optimality_residual: float
    F_value: float
    objective: float
    iterations: int
    converged: bool
    threshold: float


_GRAD_DIR_L6: dict = {}


def _grad_direction_l6(grid: GridSpec) -> float:
    """L6 norm of the gradient of a unit interior node potential (grid constant)."""
    key = (grid.lengths, grid.cells)
    if key not in _GRAD_DIR_L6:
        vals = np.zeros(grid.node_shape)
        c = tuple(m // 2 for m in grid.cells)
        vals[c] = 1.0
        _GRAD_DIR_L6[key] = lp_norm(gradient(ScalarPotential(grid, vals)), 6)
    return _GRAD_DIR_L6[key]


class _InnerProblem:
    """State for Psi(z, xi) = -J_lambda(v + sum z_k e_k + grad xi)."""

    def __init__(self, v_fixed: VectorField, lam: float, basis: list[VectorField]):
        self.grid = v_fixed.grid
        self.vf = v_fixed.components
        self.lam = float(lam)
        self.basis = [b.components for b in basis]
        self.h3 = self.grid.cell_volume
        # the gradient block is curl-free, so the curl part of Psi is an
        # exact quadratic in z; precompute it
        cvf = curl(v_fixed)
        self.curl_vf_sq = dot_l2(cvf, cvf)
        cb = [curl(b) for b in basis]
        self.curl_cross = np.array([dot_l2(cvf, c) for c in cb])
        self.curl_gram = np.array([[dot_l2(ci, cj) for cj in cb] for ci in cb])
        if not basis:
            self.curl_cross = np.zeros(0)
            self.curl_gram = np.zeros((0, 0))
        self.basis_l6 = np.array([lp_norm(b, 6) for b in basis])
        self.grad_l6 = _grad_direction_l6(self.grid)
        self.K = len(basis)
        # convexity guard: each basis direction must have nonpositive shifted
        # quadratic curvature, else the problem is not a minimization at all
        for j, b in enumerate(basis):
            l2b = dot_l2(b, b)
            lam_eff = self.curl_gram[j, j] / l2b
            if lam_eff + self.lam > 1e-6 * max(1.0, lam_eff):
                raise ContractViolation(
                    f"basis field {j} has shifted curvature {lam_eff + self.lam:.3e} > 0; "
                    "only eigenfields at or below the spectral cut are admissible")

    def assemble(self, z, xi):
        gx, gy, gz = _grad_arrays(self.grid, xi)
        ux = self.vf[0] + gx
        uy = self.vf[1] + gy
        uz = self.vf[2] + gz
        for zk, b in zip(z, self.basis):
            ux = ux + zk * b[0]
            uy = uy + zk * b[1]
            uz = uz + zk * b[2]
        return ux, uy, uz

    def eval(self, z, xi):
        # psi omits the (z, xi)-independent curl energy of v so that Armijo
        # decreases are not swamped by a large additive constant
        triple = self.assemble(z, xi)
        cc = _edge_cc_arrays(*triple)
        ax, ay, az = cc
        mag2 = ax * ax + ay * ay + az * az
        l6_6 = float(np.sum(mag2 ** 3)) * self.h3
        l2 = self.h3 * sum(float(np.dot(c.ravel(), c.ravel())) for c in triple)
        curl_var = 2.0 * float(self.curl_cross @ z) + float(z @ self.curl_gram @ z)
        psi = -(0.5 * curl_var + 0.5 * self.lam * l2 - l6_6 / 6.0)
        return psi, (triple, cc, mag2, l6_6, l2, curl_var + self.curl_vf_sq)

    def flux(self, cc, mag2):
        ax, ay, az = cc
        m4 = mag2 * mag2
        return _cc_adjoint_arrays(self.grid, m4 * ax, m4 * ay, m4 * az)

    def gradient(self, z, xi, cache):
        (ux, uy, uz), cc, mag2, _, _, _ = cache
        fx, fy, fz = self.flux(cc, mag2)
        rx = self.lam * ux - fx
        ry = self.lam * uy - fy
        rz = self.lam * uz - fz
        g_xi = self.h3 * _div_node_arrays(self.grid, rx, ry, rz)
        g_z = np.empty(self.K)
        for j, b in enumerate(self.basis):
            pair = self.h3 * (
                np.dot(rx.ravel(), b[0].ravel())
                + np.dot(ry.ravel(), b[1].ravel())
                + np.dot(rz.ravel(), b[2].ravel())
            )
            cuce = self.curl_cross[j] + float(self.curl_gram[j] @ z)
            g_z[j] = -(cuce + pair)
        return g_z, g_xi

    def residual(self, g_z, g_xi) -> float:
        # g_xi[n] and g_z[j] already equal -J_lambda'(U) paired with the
        # basis direction, so only the direction norms remain
        r = float(np.max(np.abs(g_xi))) / self.grad_l6
        for j in range(self.K):
            r = max(r, abs(g_z[j]) / self.basis_l6[j])
        return r

    def hessvec(self, cache, dz, dxi):
        _, cc, mag2, _, _, _ = cache
        ax, ay, az = cc
        px, py, pz = _grad_arrays(self.grid, dxi)
        for zk, b in zip(dz, self.basis):
            px = px + zk * b[0]
            py = py + zk * b[1]
            pz = pz + zk * b[2]
        bx, by, bz = _edge_cc_arrays(px, py, pz)
        m4 = mag2 * mag2
        dotp = ax * bx + ay * by + az * bz
        wx = m4 * bx + 4.0 * mag2 * dotp * ax
        wy = m4 * by + 4.0 * mag2 * dotp * ay
        wz = m4 * bz + 4.0 * mag2 * dotp * az
        bkx, bky, bkz = _cc_adjoint_arrays(self.grid, wx, wy, wz)
        rx = self.lam * px - bkx
        ry = self.lam * py - bky
        rz = self.lam * pz - bkz
        # dg_xi[phi] = h3 * div(lam * phi - DN[phi]), mirroring gradient()
        H_xi = self.h3 * _div_node_arrays(self.grid, rx, ry, rz)
        H_z = np.empty(self.K)
        for j, b in enumerate(self.basis):
            pair = self.h3 * (
                np.dot(rx.ravel(), b[0].ravel())
                + np.dot(ry.ravel(), b[1].ravel())
                + np.dot(rz.ravel(), b[2].ravel())
            )
            H_z[j] = -(float(self.curl_gram[j] @ dz) + pair)
        return H_z, H_xi

    def precondition(self, g_z, g_xi, curv_scale):
        m_xi = -poisson_node_solve(self.grid, g_xi) / (self.h3 * curv_scale)
        m_z = np.empty(self.K)
        for j in range(self.K):
            # z-block curvature: -(lambda_j + lam) from the quadratic part
            # (basis fields are L2-normalized) plus the sextic scale
            q = max(-(self.curl_gram[j, j] + self.lam), 0.0)
            m_z[j] = g_z[j] / (q + curv_scale)
        return m_z, m_xi


def _dot(a_z, a_xi, b_z, b_xi):
    return float(a_z @ b_z) + float(np.dot(a_xi.ravel(), b_xi.ravel()))


def _minimize_inner(v_fixed: VectorField, lam: float, basis: list[VectorField],
                    tol: float, max_iter: int, xi0=None, z0=None) -> InnerSolution:
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    prob = _InnerProblem(v_fixed, lam, basis)
    grid = prob.grid
    scale6 = lp_norm(v_fixed, 6)
    # scale-homogeneous stopping: the whole iteration commutes with field
    # scaling (for lam = 0 exactly), so a relative threshold preserves the
    # exact homogeneity w(a v) = a w(v) down to rounding
    threshold = tol * max(scale6 ** 5, np.finfo(float).tiny)

    if xi0 is None:
        xi = np.zeros(grid.node_shape)
    else:
        xi = np.array(xi0, dtype=np.float64)
        xi[0] = xi[-1] = 0.0
        xi[:, 0] = xi[:, -1] = 0.0
        xi[:, :, 0] = xi[:, :, -1] = 0.0
    z = np.zeros(prob.K) if z0 is None else np.array(z0, dtype=np.float64)

    psi, cache = prob.eval(z, xi)
    g_z, g_xi = prob.gradient(z, xi, cache)
    res = prob.residual(g_z, g_xi)
    iterations = 0

    def curvature_scale(cache):
        mag2 = cache[2]
        c = float(np.mean(mag2 * mag2))
        return max(c - prob.lam, 1e-30)

    # phase 1: preconditioned NCG with Armijo backtracking
    d_z = d_xi = None
    pg_z = pg_xi = pmg_z = pmg_xi = None
    for _ in range(_NCG_WARMUP):
        if res <= threshold:
            break
        if not np.isfinite(psi):
            raise SolverNonConvergence("inner objective became non-finite",
                                       residual=res, iterations=iterations)
        mg_z, mg_xi = prob.precondition(g_z, g_xi, curvature_scale(cache))
        if d_z is None:
            d_z, d_xi = -mg_z, -mg_xi
        else:
            beta = max(0.0, (_dot(mg_z, mg_xi, g_z, g_xi)
                             - _dot(mg_z, mg_xi, pg_z, pg_xi))
                       / max(_dot(pmg_z, pmg_xi, pg_z, pg_xi), 1e-300))
            d_z = beta * d_z - mg_z
            d_xi = beta * d_xi - mg_xi
        slope = _dot(g_z, g_xi, d_z, d_xi)
        if slope >= 0.0:
            d_z, d_xi = -mg_z, -mg_xi
            slope = _dot(g_z, g_xi, d_z, d_xi)
        step = 1.0
        accepted = False
        for _bt in range(40):
            z_new = z + step * d_z
            xi_new = xi + step * d_xi
            psi_new, cache_new = prob.eval(z_new, xi_new)
            if np.isfinite(psi_new) and psi_new <= psi + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        pg_z, pg_xi, pmg_z, pmg_xi = g_z, g_xi, mg_z, mg_xi
        z, xi, psi, cache = z_new, xi_new, psi_new, cache_new
        g_z, g_xi = prob.gradient(z, xi, cache)
        res = prob.residual(g_z, g_xi)
        iterations += 1

    # phase 2: damped Newton-CG
    best_res = res
    since_improved = 0
    while res > threshold and iterations < max_iter:
        # noise floor of the objective; Armijo cannot resolve decreases
        # below it, so full steps are admitted there (gradient information
        # keeps improving even when psi differences are pure rounding)
        psi_scale = abs(psi) + cache[3] / 6.0 + abs(0.5 * prob.lam * cache[4])
        noise = 64.0 * np.finfo(float).eps * (psi_scale + 1e-300)
        curv = curvature_scale(cache)
        b_z, b_xi = -g_z, -g_xi
        x_z, x_xi = np.zeros_like(z), np.zeros_like(xi)
        r_z, r_xi = b_z.copy(), b_xi.copy()
        s_z, s_xi = prob.precondition(r_z, r_xi, curv)
        p_z, p_xi = s_z.copy(), s_xi.copy()
        rs = _dot(r_z, r_xi, s_z, s_xi)
        bnorm = np.sqrt(max(_dot(b_z, b_xi, b_z, b_xi), 1e-300))
        eta = min(0.5, 0.1 * np.sqrt(res / max(threshold, 1e-300)) + 1e-4)
        for _cg in range(200):
            hp_z, hp_xi = prob.hessvec(cache, p_z, p_xi)
            php = _dot(p_z, p_xi, hp_z, hp_xi)
            if php <= 0.0:
                if _cg == 0:
                    x_z, x_xi = s_z, s_xi
                break
            alpha = rs / php
            x_z = x_z + alpha * p_z
            x_xi = x_xi + alpha * p_xi
            r_z = r_z - alpha * hp_z
            r_xi = r_xi - alpha * hp_xi
            if np.sqrt(_dot(r_z, r_xi, r_z, r_xi)) <= eta * bnorm:
                break
            s_z, s_xi = prob.precondition(r_z, r_xi, curv)
            rs_new = _dot(r_z, r_xi, s_z, s_xi)
            p_z = s_z + (rs_new / rs) * p_z
            p_xi = s_xi + (rs_new / rs) * p_xi
            rs = rs_new
        d_z, d_xi = x_z, x_xi
        slope = _dot(g_z, g_xi, d_z, d_xi)
        if slope >= 0.0:
            d_z, d_xi = prob.precondition(-g_z, -g_xi, curv)
            slope = _dot(g_z, g_xi, d_z, d_xi)
        step = 1.0
        accepted = False
        for _bt in range(60):
            z_new = z + step * d_z
            xi_new = xi + step * d_xi
            psi_new, cache_new = prob.eval(z_new, xi_new)
            if np.isfinite(psi_new) and psi_new <= psi + 1e-4 * step * slope + noise:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise SolverNonConvergence("inner line search failed to make progress",
                                       residual=res, iterations=iterations)
        z, xi, psi, cache = z_new, xi_new, psi_new, cache_new
        g_z, g_xi = prob.gradient(z, xi, cache)
        res = prob.residual(g_z, g_xi)
        iterations += 1
        if res < 0.7 * best_res:
            best_res = res
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= 15:
                break  # rounding-limited; report the residual we reached

    converged = res <= threshold
    if not converged:
        raise SolverNonConvergence(
            f"inner minimization stopped at residual {res:.3e} > {threshold:.3e} "
            f"after {iterations} iterations", residual=res, iterations=iterations)

    pot = ScalarPotential(grid, xi)
    w = gradient(pot)
    for zk, b in zip(z, basis):
        w = w + float(zk) * b
    _, _, _, l6_6, l2, _ = cache
    f_val = l6_6 / 6.0 - 0.5 * lam * l2
    return InnerSolution(
        w_tilde=w, potential=pot, z=z, optimality_residual=res, F_value=f_val,
        objective=psi, iterations=iterations, converged=converged, threshold=threshold)


def minimize_w(u: VectorField, spec: NonlinearitySpec | None = None,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
               xi0=None) -> InnerSolution:
    """Pure-case kernel minimizer: w(u) = argmin of the sextic mass over gradients.

    The first-order condition is the vanishing of the discrete divergence of
    |u + w|^4 (u + w); by strict convexity the minimizer is unique and
    positively homogeneous in u.
    """
    if spec is not None and spec.lam != 0.0:
        raise DomainError("minimize_w is the lam = 0 case; use minimize_w_tilde")
    return _minimize_inner(u, 0.0, [], tol, max_iter, xi0=xi0)


def minimize_w_tilde(v_plus: VectorField, spec: NonlinearitySpec, vtilde,
                     tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     xi0=None, z0=None, check_input: bool = True) -> InnerSolution:
    """Joint minimizer over the enlarged degenerate space (spectral + gradient).

    ``vtilde`` is a :class:`~curlvar.spectrum.SpectralSubspace` (or a plain
    list of eigenfields); they span the spectral block.  The returned point
    makes the shifted action stationary along every basis direction of the
    enlarged space, which is the fixed-ray membership condition of the
    generalized Nehari set.
    """
    basis = list(vtilde.fields) if hasattr(vtilde, "fields") else list(vtilde)
    if check_input and basis:
        from .fields import norm_l2

        nv = norm_l2(v_plus)
        for k, e in enumerate(basis):
            overlap = abs(dot_l2(v_plus, e))
            if overlap > 1e-6 * max(nv, 1e-300) * norm_l2(e):
                raise ContractViolation(
                    f"v_plus is not orthogonal to spectral direction {k} "
                    f"(overlap {overlap:.3e})")
    return _minimize_inner(v_plus, spec.lam, basis, tol, max_iter, xi0=xi0, z0=z0)
