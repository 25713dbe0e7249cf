"""Mimetic difference operators and fast direct solvers on the Yee grid.

The chain  potential --grad--> edge field --curl--> face field --div--> cell
is realized with two-point differences so that ``curl(grad) = 0`` and
``div(curl) = 0`` hold exactly (telescoping sums, no rounding beyond the
subtraction itself).  The node divergence of an edge field is the exact
negative transpose of the gradient, so summation by parts has no boundary
remainder for fields with zero tangential trace.

Two derived operators drive every solver in the package:

* ``curl_curl``      C^T C, the Maxwell cavity operator on edge fields;
* ``vector_laplacian``  C^T C - G div, which decouples into independent
  1-D second differences per component (the cross terms cancel exactly on
  this staggering) and is therefore diagonalized by DST-I along the
  node-like axes and DCT-II along the cell-like axis.  That gives machine
  precision direct solves used for Helmholtz projection, preconditioning
  and eigeniteration.

All functions here take and return plain ndarrays (component triples);
the field-level API wraps them in :class:`~curlvar.fields.VectorField`.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dctn, dstn, idctn, idstn

from .errors import SolverNonConvergence
from .fields import ScalarPotential, VectorField
from .grids import EDGE, FACE, GridSpec, zero_tangential_trace

__all__ = [
    "curl",
    "divergence",
    "gradient",
    "to_cell_centers",
    "from_cell_centers_adjoint",
    "sextic_flux",
    "curl_curl",
    "vector_laplacian",
    "poisson_node_solve",
    "poisson_node_cg",
    "vector_laplacian_solve",
]


# -- raw stencils --------------------------------------------------------

def _grad_arrays(grid: GridSpec, p: np.ndarray):
    h1, h2, h3 = grid.h
    return (np.diff(p, axis=0) / h1, np.diff(p, axis=1) / h2, np.diff(p, axis=2) / h3)


def _curl_edge_arrays(grid: GridSpec, ex, ey, ez):
    h1, h2, h3 = grid.h
    fx = np.diff(ez, axis=1) / h2 - np.diff(ey, axis=2) / h3
    fy = np.diff(ex, axis=2) / h3 - np.diff(ez, axis=0) / h1
    fz = np.diff(ey, axis=0) / h1 - np.diff(ex, axis=1) / h2
    return fx, fy, fz


def _bdiff(a: np.ndarray, axis: int) -> np.ndarray:
    """Backward difference with zero extension: out_j = a_j - a_{j-1}."""
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 1)
    return np.diff(np.pad(a, pad), axis=axis)


def _curl_face_arrays(grid: GridSpec, fx, fy, fz):
    # exact transpose of the edge curl (dual curl), up to structurally-zero entries
    h1, h2, h3 = grid.h
    ex = _bdiff(fz, axis=1) / h2 - _bdiff(fy, axis=2) / h3
    ey = _bdiff(fx, axis=2) / h3 - _bdiff(fz, axis=0) / h1
    ez = _bdiff(fy, axis=0) / h1 - _bdiff(fx, axis=1) / h2
    return ex, ey, ez


def _div_node_arrays(grid: GridSpec, ex, ey, ez):
    # defined on interior nodes only; the boundary shell carries no dof
    h1, h2, h3 = grid.h
    out = np.zeros(grid.node_shape)
    out[1:-1, :, :] = np.diff(ex, axis=0) / h1
    out[:, 1:-1, :] += np.diff(ey, axis=1) / h2
    out[:, :, 1:-1] += np.diff(ez, axis=2) / h3
    out[0, :, :] = out[-1, :, :] = 0.0
    out[:, 0, :] = out[:, -1, :] = 0.0
    out[:, :, 0] = out[:, :, -1] = 0.0
    return out


def _div_cell_arrays(grid: GridSpec, fx, fy, fz):
    h1, h2, h3 = grid.h
    return np.diff(fx, axis=0) / h1 + np.diff(fy, axis=1) / h2 + np.diff(fz, axis=2) / h3


# -- field-level API -----------------------------------------------------

def gradient(p: ScalarPotential) -> VectorField:
    """Edge gradient of a zero-boundary node potential.

    The output has zero tangential trace automatically, and
    ``dot_l2(gradient(p), u) == -sum(p * divergence_nodes(u))`` exactly.
    """
    gx, gy, gz = _grad_arrays(p.grid, p.values)
    return VectorField(p.grid, gx, gy, gz, EDGE)


def curl(u: VectorField) -> VectorField:
    """Curl onto the dual staggering: edge -> face, face -> edge."""
    if u.location == EDGE:
        fx, fy, fz = _curl_edge_arrays(u.grid, *u.components)
        return VectorField(u.grid, fx, fy, fz, FACE)
    ex, ey, ez = _curl_face_arrays(u.grid, *u.components)
    zero_tangential_trace(u.grid, ex, ey, ez, location=EDGE)
    return VectorField(u.grid, ex, ey, ez, EDGE)


def divergence(u: VectorField) -> np.ndarray:
    """Discrete divergence: node array for edge fields, cell array for face fields.

    For edge fields this is the negative adjoint of :func:`gradient`; for
    face fields it is the forward-difference cell divergence, which kills
    curls of edge fields exactly.
    """
    if u.location == EDGE:
        return _div_node_arrays(u.grid, *u.components)
    return _div_cell_arrays(u.grid, *u.components)


def _edge_cc_arrays(cx, cy, cz):
    gx = 0.25 * (cx[:, :-1, :-1] + cx[:, 1:, :-1] + cx[:, :-1, 1:] + cx[:, 1:, 1:])
    gy = 0.25 * (cy[:-1, :, :-1] + cy[1:, :, :-1] + cy[:-1, :, 1:] + cy[1:, :, 1:])
    gz = 0.25 * (cz[:-1, :-1, :] + cz[1:, :-1, :] + cz[:-1, 1:, :] + cz[1:, 1:, :])
    return gx, gy, gz


def to_cell_centers(u: VectorField):
    """Average each staggered component to the cell centers."""
    cx, cy, cz = u.components
    if u.location == EDGE:
        return _edge_cc_arrays(cx, cy, cz)
    gx = 0.5 * (cx[:-1, :, :] + cx[1:, :, :])
    gy = 0.5 * (cy[:, :-1, :] + cy[:, 1:, :])
    gz = 0.5 * (cz[:, :, :-1] + cz[:, :, 1:])
    return gx, gy, gz


def _cc_adjoint_arrays(grid: GridSpec, qx, qy, qz):
    sx, sy, sz = grid.component_shapes(EDGE)
    ex = np.zeros(sx)
    for dj in (slice(None, -1), slice(1, None)):
        for dk in (slice(None, -1), slice(1, None)):
            ex[:, dj, dk] += 0.25 * qx
    ey = np.zeros(sy)
    for di in (slice(None, -1), slice(1, None)):
        for dk in (slice(None, -1), slice(1, None)):
            ey[di, :, dk] += 0.25 * qy
    ez = np.zeros(sz)
    for di in (slice(None, -1), slice(1, None)):
        for dj in (slice(None, -1), slice(1, None)):
            ez[di, dj, :] += 0.25 * qz
    zero_tangential_trace(grid, ex, ey, ez, location=EDGE)
    return ex, ey, ez


def from_cell_centers_adjoint(grid: GridSpec, qx, qy, qz) -> VectorField:
    """Transpose of :func:`to_cell_centers` for edge fields (plain dof pairing)."""
    return VectorField(grid, *_cc_adjoint_arrays(grid, qx, qy, qz), EDGE)


def sextic_flux(u: VectorField) -> VectorField:
    """Discrete representation of |u|^4 u.

    Defined as the exact derivative of the cell-centered sextic quadrature:
    ``d/du [ (1/6) * l6_6(u) ][delta] = dot_l2(sextic_flux(u), delta)``.
    """
    gx, gy, gz = to_cell_centers(u)
    mag4 = (gx * gx + gy * gy + gz * gz) ** 2
    return from_cell_centers_adjoint(u.grid, mag4 * gx, mag4 * gy, mag4 * gz)


def curl_curl(u: VectorField) -> VectorField:
    """C^T C on edge fields: ``dot_l2(curl_curl(u), d) == dot_l2(curl u, curl d)``."""
    return curl(curl(u))


def vector_laplacian(u: VectorField) -> VectorField:
    """C^T C - G div on edge fields (the positive vector Laplacian).

    Preserves both the divergence-free and the gradient subspaces exactly.
    """
    cc = curl_curl(u)
    p = _div_node_arrays(u.grid, *u.components)
    gx, gy, gz = _grad_arrays(u.grid, p)
    return VectorField(u.grid, cc.cx - gx, cc.cy - gy, cc.cz - gz, EDGE)


# -- spectral direct solvers ---------------------------------------------

def _dirichlet_symbols(m: int, h: float) -> np.ndarray:
    k = np.arange(1, m)
    return (2.0 - 2.0 * np.cos(np.pi * k / m)) / (h * h)


def _neumann_symbols(m: int, h: float) -> np.ndarray:
    k = np.arange(m)
    return (2.0 - 2.0 * np.cos(np.pi * k / m)) / (h * h)


def poisson_node_solve(grid: GridSpec, rhs: np.ndarray) -> np.ndarray:
    """Direct solve of the 7-point node Laplacian with zero Dirichlet boundary.

    Solves ``div(grad p) = rhs`` on the interior nodes via DST-I; exact to
    rounding.  ``rhs`` is a full node array whose boundary shell is ignored.
    """
    m1, m2, m3 = grid.cells
    h1, h2, h3 = grid.h
    r = rhs[1:-1, 1:-1, 1:-1]
    rhat = dstn(r, type=1, norm="ortho")
    s1 = _dirichlet_symbols(m1, h1)
    s2 = _dirichlet_symbols(m2, h2)
    s3 = _dirichlet_symbols(m3, h3)
    denom = -(s1[:, None, None] + s2[None, :, None] + s3[None, None, :])
    phat = rhat / denom
    p = np.zeros(grid.node_shape)
    p[1:-1, 1:-1, 1:-1] = idstn(phat, type=1, norm="ortho")
    return p


def poisson_node_cg(grid: GridSpec, rhs: np.ndarray, tol: float = 1e-10,
                    max_iter: int | None = None) -> tuple[np.ndarray, float, int]:
    """Matrix-free conjugate gradient for the same node Poisson problem.

    Kept as the dependency-light fallback; returns (solution, relative
    residual, iterations).  Raises :class:`SolverNonConvergence` on budget
    exhaustion.
    """
    h1, h2, h3 = grid.h

    def lap(p):
        out = np.zeros_like(p)
        out[1:-1, :, :] += (p[2:, :, :] - 2 * p[1:-1, :, :] + p[:-2, :, :]) / (h1 * h1)
        out[:, 1:-1, :] += (p[:, 2:, :] - 2 * p[:, 1:-1, :] + p[:, :-2, :]) / (h2 * h2)
        out[:, :, 1:-1] += (p[:, :, 2:] - 2 * p[:, :, 1:-1] + p[:, :, :-2]) / (h3 * h3)
        out[0] = out[-1] = 0.0
        out[:, 0] = out[:, -1] = 0.0
        out[:, :, 0] = out[:, :, -1] = 0.0
        return out

    b = rhs.copy()
    b[0] = b[-1] = 0.0
    b[:, 0] = b[:, -1] = 0.0
    b[:, :, 0] = b[:, :, -1] = 0.0
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(grid.node_shape), 0.0, 0
    if max_iter is None:
        max_iter = 10 * max(grid.cells) ** 2
    x = np.zeros(grid.node_shape)
    r = b.copy()
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    for it in range(1, max_iter + 1):
        ap = -lap(p)  # negate: CG needs an SPD operator
        alpha = rs / float(np.vdot(p, ap).real)
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r).real)
        if np.sqrt(rs_new) <= tol * bnorm:
            return -x, np.sqrt(rs_new) / bnorm, it
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise SolverNonConvergence("node Poisson CG exhausted its iteration budget",
                               residual=np.sqrt(rs) / bnorm, iterations=max_iter)


def vector_laplacian_solve(grid: GridSpec, rhs: VectorField) -> VectorField:
    """Direct solve of ``vector_laplacian(u) = rhs`` on edge fields.

    Each component is independent: DCT-II along its cell-like axis, DST-I
    along the two node-like axes.  Exact to rounding; preserves the
    Helmholtz splitting, so it doubles as the H(curl) Riesz map on the
    divergence-free subspace.
    """
    m = grid.cells
    h = grid.h
    out = []
    for comp, arr in enumerate(rhs.components):
        inner = [slice(None)] * 3
        dst_axes = []
        for a in range(3):
            if a != comp:
                inner[a] = slice(1, -1)
                dst_axes.append(a)
        r = arr[tuple(inner)]
        rhat = dctn(r, type=2, norm="ortho", axes=(comp,))
        rhat = dstn(rhat, type=1, norm="ortho", axes=dst_axes)
        sym = []
        for a in range(3):
            s = _neumann_symbols(m[a], h[a]) if a == comp else _dirichlet_symbols(m[a], h[a])
            shape = [1, 1, 1]
            shape[a] = s.size
            sym.append(s.reshape(shape))
        denom = sym[0] + sym[1] + sym[2]
        uhat = rhat / denom
        u = idstn(uhat, type=1, norm="ortho", axes=dst_axes)
        u = idctn(u, type=2, norm="ortho", axes=(comp,))
        full = np.zeros(arr.shape)
        full[tuple(inner)] = u
        out.append(full)
    zero_tangential_trace(grid, *out, location=EDGE)
    return VectorField(grid, *out, EDGE)
