"""Vector fields and scalar potentials on the staggered grid.

A :class:`VectorField` is a triple of component arrays at either the edge or
the face staggering of its :class:`~curlvar.grids.GridSpec`.  Edge fields are
the primal unknowns u, v, w of the solver; face fields arise as curls.  All
constructors validate finiteness and the structural zero-trace pattern and
freeze the arrays, so every field in circulation satisfies the metallic
boundary condition by construction.

Quadrature conventions
----------------------
The L2 inner product is the native staggered one: cell-volume weight per
degree of freedom.  Because boundary entries vanish, this is simultaneously
the trapezoid rule in the node-like directions and the midpoint rule in the
cell-like direction, and it makes the discrete gradient and divergence exact
negative adjoints of each other.  For p != 2 the components are averaged to
cell centers first and the midpoint rule is applied there; the sextic terms
of the energy use the same cell-centered rule, so all energy derivatives in
this package are derivatives of these exact discrete expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DomainError, InvalidFieldError
from .grids import EDGE, FACE, GridSpec, boundary_trace_max, zero_tangential_trace

__all__ = [
    "VectorField",
    "ScalarPotential",
    "EnergyReport",
    "dot_l2",
    "norm_l2",
    "lp_norm",
    "energy",
    "rescale",
    "sample_edge_field",
    "sample_face_field",
    "sample_potential",
    "random_field",
    "random_potential",
]


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class VectorField:
    """Three staggered component arrays on a grid.

    ``location`` is ``"edge"`` for primal fields and ``"face"`` for curls.
    Instances are immutable; all operations return new fields.
    """

    grid: GridSpec
    cx: np.ndarray
    cy: np.ndarray
    cz: np.ndarray
    location: str = EDGE

    def __post_init__(self):
        shapes = self.grid.component_shapes(self.location)
        comps = (self.cx, self.cy, self.cz)
        for name, arr, want in zip("xyz", comps, shapes):
            if arr.shape != want:
                raise InvalidFieldError(
                    f"{self.location} component {name} has shape {arr.shape}, expected {want}"
                )
        for name, arr in zip("xyz", comps):
            if not np.all(np.isfinite(arr)):
                raise InvalidFieldError(f"component {name} contains non-finite entries")
        trace = boundary_trace_max(self.grid, *comps, location=self.location)
        if trace != 0.0:
            raise InvalidFieldError(
                f"boundary trace is {trace:g}, expected exactly zero; "
                "use from_components() to project raw arrays"
            )
        for attr, arr in (("cx", self.cx), ("cy", self.cy), ("cz", self.cz)):
            object.__setattr__(self, attr, _freeze(arr))

    @classmethod
    def from_components(cls, grid: GridSpec, cx, cy, cz, location: str = EDGE) -> "VectorField":
        """Build a field from raw arrays, zeroing the boundary trace."""
        cx = np.array(cx, dtype=np.float64)
        cy = np.array(cy, dtype=np.float64)
        cz = np.array(cz, dtype=np.float64)
        zero_tangential_trace(grid, cx, cy, cz, location=location)
        return cls(grid, cx, cy, cz, location)

    @classmethod
    def zeros(cls, grid: GridSpec, location: str = EDGE) -> "VectorField":
        sx, sy, sz = grid.component_shapes(location)
        return cls(grid, np.zeros(sx), np.zeros(sy), np.zeros(sz), location)

    @property
    def components(self):
        return (self.cx, self.cy, self.cz)

    def with_components(self, cx, cy, cz) -> "VectorField":
        return VectorField.from_components(self.grid, cx, cy, cz, self.location)

    def _check_mate(self, other: "VectorField"):
        if not isinstance(other, VectorField):
            raise TypeError(f"expected VectorField, got {type(other).__name__}")
        if other.grid != self.grid or other.location != self.location:
            raise InvalidFieldError("fields live on different grids or staggerings")

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check_mate(other)
        return VectorField(self.grid, self.cx + other.cx, self.cy + other.cy,
                           self.cz + other.cz, self.location)

    def __sub__(self, other: "VectorField") -> "VectorField":
        self._check_mate(other)
        return VectorField(self.grid, self.cx - other.cx, self.cy - other.cy,
                           self.cz - other.cz, self.location)

    def __mul__(self, a: float) -> "VectorField":
        a = float(a)
        return VectorField(self.grid, a * self.cx, a * self.cy, a * self.cz, self.location)

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return self * -1.0


@dataclass(frozen=True)
class ScalarPotential:
    """Node-located scalar with exactly zero boundary values.

    Its gradient is an edge field with vanishing tangential trace, which is
    how the curl-free subspace is represented on a box.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != self.grid.node_shape:
            raise InvalidFieldError(f"potential shape {v.shape}, expected {self.grid.node_shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidFieldError("potential contains non-finite entries")
        b = max(
            float(np.max(np.abs(v[0]))), float(np.max(np.abs(v[-1]))),
            float(np.max(np.abs(v[:, 0]))), float(np.max(np.abs(v[:, -1]))),
            float(np.max(np.abs(v[:, :, 0]))), float(np.max(np.abs(v[:, :, -1]))),
        )
        if b != 0.0:
            raise InvalidFieldError(
                f"boundary values reach {b:g}, expected exactly zero; "
                "use from_values() to clamp raw arrays"
            )
        object.__setattr__(self, "values", _freeze(v))

    @classmethod
    def from_values(cls, grid: GridSpec, values) -> "ScalarPotential":
        v = np.array(values, dtype=np.float64)
        v[0] = v[-1] = 0.0
        v[:, 0] = v[:, -1] = 0.0
        v[:, :, 0] = v[:, :, -1] = 0.0
        return cls(grid, v)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarPotential":
        return cls(grid, np.zeros(grid.node_shape))


@dataclass(frozen=True)
class EnergyReport:
    """The scalars entering the action functional, from a single pass.

    ``J = curl_energy/2 - l6_6/6`` and, when a spectral shift ``lam`` is
    supplied, ``J_lambda = J + (lam/2) * l2_sq``.
    """

    curl_energy: float
    l2_sq: float
    l6_6: float
    J: float
    J_lambda: float | None = None


# -- quadrature ---------------------------------------------------------

def dot_l2(u: VectorField, v: VectorField) -> float:
    """Native L2 inner product (cell-volume weight per degree of freedom)."""
    u._check_mate(v)
    w = u.grid.cell_volume
    return w * (
        float(np.dot(u.cx.ravel(), v.cx.ravel()))
        + float(np.dot(u.cy.ravel(), v.cy.ravel()))
        + float(np.dot(u.cz.ravel(), v.cz.ravel()))
    )


def norm_l2(u: VectorField) -> float:
    return np.sqrt(max(dot_l2(u, u), 0.0))


def lp_norm(u: VectorField, p: float) -> float:
    """L^p norm of a staggered field.

    p = 2 uses the native staggered quadrature (exact adjointness with the
    difference operators); other p average the components to cell centers
    and apply the midpoint rule to |u|^p there.
    """
    p = float(p)
    if p < 1.0:
        raise DomainError(f"lp_norm requires p >= 1, got {p}")
    if p == 2.0:
        return norm_l2(u)
    from .operators import to_cell_centers

    gx, gy, gz = to_cell_centers(u)
    mag_sq = gx * gx + gy * gy + gz * gz
    val = float(np.sum(mag_sq ** (p / 2.0))) * u.grid.cell_volume
    return val ** (1.0 / p)


def energy(u: VectorField, lam: float | None = None) -> EnergyReport:
    """Curl energy, L2 mass, sextic mass and the action(s) of ``u``."""
    from .operators import curl, to_cell_centers

    c = curl(u)
    curl_energy = dot_l2(c, c)
    l2_sq = dot_l2(u, u)
    gx, gy, gz = to_cell_centers(u)
    mag_sq = gx * gx + gy * gy + gz * gz
    l6_6 = float(np.sum(mag_sq * mag_sq * mag_sq)) * u.grid.cell_volume
    J = 0.5 * curl_energy - l6_6 / 6.0
    J_lambda = None if lam is None else J + 0.5 * float(lam) * l2_sq
    return EnergyReport(curl_energy, l2_sq, l6_6, J, J_lambda)


def rescale(u: VectorField, s: float, y=(0.0, 0.0, 0.0)) -> VectorField:
    """Amplitude-preserving dilation x -> sqrt(s) * u(s x + y).

    Samples outside the source box are zero.  In the continuum this map is an
    isometry of both the curl energy and the L6 norm; on the grid it is exact
    up to (tri)linear interpolation error.
    """
    s = float(s)
    if s <= 0.0:
        raise DomainError(f"rescale requires s > 0, got {s}")
    y = np.asarray(y, dtype=np.float64)
    grid = u.grid
    h = grid.h
    amp = np.sqrt(s)
    out = []
    for comp, arr in enumerate(u.components):
        axes = grid.component_axes(u.location, comp)
        # physical target positions mapped into fractional source indices
        coords = np.meshgrid(*axes, indexing="ij")
        idx = []
        for a in range(3):
            src = s * coords[a] + y[a]
            offset = 0.5 if len(axes[a]) == grid.cells[a] else 0.0
            idx.append(src / h[a] - offset)
        vals = ndimage.map_coordinates(arr, np.stack(idx), order=1, mode="constant", cval=0.0)
        out.append(amp * vals)
    return VectorField.from_components(grid, *out, location=u.location)


# -- samplers -----------------------------------------------------------

def sample_edge_field(grid: GridSpec, fx, fy, fz) -> VectorField:
    """Evaluate callables (x, y, z) -> component at the edge positions."""
    comps = []
    for comp, f in enumerate((fx, fy, fz)):
        ax = grid.component_axes(EDGE, comp)
        X, Y, Z = np.meshgrid(*ax, indexing="ij")
        comps.append(np.asarray(f(X, Y, Z), dtype=np.float64))
    return VectorField.from_components(grid, *comps, location=EDGE)


def sample_face_field(grid: GridSpec, fx, fy, fz) -> VectorField:
    comps = []
    for comp, f in enumerate((fx, fy, fz)):
        ax = grid.component_axes(FACE, comp)
        X, Y, Z = np.meshgrid(*ax, indexing="ij")
        comps.append(np.asarray(f(X, Y, Z), dtype=np.float64))
    return VectorField.from_components(grid, *comps, location=FACE)


def sample_potential(grid: GridSpec, f) -> ScalarPotential:
    X, Y, Z = np.meshgrid(*grid.node_axes(), indexing="ij")
    return ScalarPotential.from_values(grid, np.asarray(f(X, Y, Z), dtype=np.float64))


def random_field(grid: GridSpec, rng: np.random.Generator, location: str = EDGE,
                 smooth: bool = False) -> VectorField:
    """Seeded random field with the correct zero trace.

    ``smooth=True`` applies a few nearest-neighbour averaging sweeps so the
    field is resolved on the grid (useful for quadrature-sensitive checks).
    """
    comps = [rng.standard_normal(s) for s in grid.component_shapes(location)]
    if smooth:
        for _ in range(3):
            comps = [ndimage.uniform_filter(c, size=3, mode="nearest") for c in comps]
    return VectorField.from_components(grid, *comps, location=location)


def random_potential(grid: GridSpec, rng: np.random.Generator) -> ScalarPotential:
    return ScalarPotential.from_values(grid, rng.standard_normal(grid.node_shape))
