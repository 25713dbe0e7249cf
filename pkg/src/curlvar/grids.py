"""Staggered (Yee) grid layout on a box.

All fields live on the box (0, L1) x (0, L2) x (0, L3) with m1 x m2 x m3
cells of spacing h_i = L_i / m_i.  Degrees of freedom are placed at the
standard Yee positions:

* scalar potentials on nodes,      shape (m1+1, m2+1, m3+1)
* vector fields on edges,          x-component at ((i+1/2)h1, j h2, k h3)
* curls on faces,                  x-component at (i h1, (j+1/2)h2, (k+1/2)h3)
* divergences on nodes (of edge fields) or cell centers (of face fields).

This placement makes grad -> curl -> div an exact chain complex:
curl(grad) = 0 and div(curl) = 0 hold to machine precision, and the node
gradient and node divergence are exact negative transposes of each other.
The metallic (perfectly conducting) boundary condition is encoded
structurally: tangential edge entries on the boundary faces are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFieldError

EDGE = "edge"
FACE = "face"

_MIN_CELLS = 4


@dataclass(frozen=True)
class GridSpec:
    """Box geometry and resolution of a staggered grid.

    ``lengths`` are the box side lengths, ``cells`` the number of cells per
    direction.  The only supported scheme is the Yee staggering described in
    the module docstring.
    """

    lengths: tuple[float, float, float] = (np.pi, np.pi, np.pi)
    cells: tuple[int, int, int] = (16, 16, 16)
    scheme: str = "yee_staggered"

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        cells = tuple(int(n) for n in self.cells)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "cells", cells)
        if self.scheme != "yee_staggered":
            raise InvalidFieldError(f"unknown staggering scheme {self.scheme!r}")
        if len(lengths) != 3 or len(cells) != 3:
            raise InvalidFieldError("grid must be three-dimensional")
        if any(L <= 0 for L in lengths):
            raise InvalidFieldError(f"box lengths must be positive, got {lengths}")
        if any(n < _MIN_CELLS for n in cells):
            raise InvalidFieldError(f"need at least {_MIN_CELLS} cells per direction, got {cells}")

    @property
    def h(self) -> tuple[float, float, float]:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        h1, h2, h3 = self.h
        return h1 * h2 * h3

    @property
    def volume(self) -> float:
        L1, L2, L3 = self.lengths
        return L1 * L2 * L3

    @property
    def node_shape(self) -> tuple[int, int, int]:
        m1, m2, m3 = self.cells
        return (m1 + 1, m2 + 1, m3 + 1)

    @property
    def cell_shape(self) -> tuple[int, int, int]:
        return self.cells

    def component_shapes(self, location: str) -> tuple[tuple[int, int, int], ...]:
        """Array shapes of the (x, y, z) components at the given staggering."""
        m1, m2, m3 = self.cells
        if location == EDGE:
            return ((m1, m2 + 1, m3 + 1), (m1 + 1, m2, m3 + 1), (m1 + 1, m2 + 1, m3))
        if location == FACE:
            return ((m1 + 1, m2, m3), (m1, m2 + 1, m3), (m1, m2, m3 + 1))
        raise InvalidFieldError(f"unknown field location {location!r}")

    def component_axes(self, location: str, comp: int):
        """1-D coordinate arrays of component ``comp`` at ``location``.

        Staggered offsets: an axis is cell-like (offset h/2, length m) when it
        matches the component direction on edges, or is transverse to it on
        faces; node-like (offset 0, length m+1) otherwise.
        """
        h = self.h
        m = self.cells
        axes = []
        for a in range(3):
            cell_like = (a == comp) if location == EDGE else (a != comp)
            if cell_like:
                axes.append((np.arange(m[a]) + 0.5) * h[a])
            else:
                axes.append(np.arange(m[a] + 1) * h[a])
        return axes

    def node_axes(self):
        return [np.arange(m + 1) * hh for m, hh in zip(self.cells, self.h)]

    def cell_center_axes(self):
        return [(np.arange(m) + 0.5) * hh for m, hh in zip(self.cells, self.h)]

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple(L / 2 for L in self.lengths)


def zero_tangential_trace(grid: GridSpec, cx, cy, cz, location=EDGE):
    """Zero the boundary entries of a staggered component triple, in place.

    For edge fields these are the tangential components on the boundary
    (the metallic condition); for face fields the normal components on the
    boundary, which is where curls of metallic fields vanish identically.
    """
    if location == EDGE:
        cx[:, 0, :] = 0.0
        cx[:, -1, :] = 0.0
        cx[:, :, 0] = 0.0
        cx[:, :, -1] = 0.0
        cy[0, :, :] = 0.0
        cy[-1, :, :] = 0.0
        cy[:, :, 0] = 0.0
        cy[:, :, -1] = 0.0
        cz[0, :, :] = 0.0
        cz[-1, :, :] = 0.0
        cz[:, 0, :] = 0.0
        cz[:, -1, :] = 0.0
    elif location == FACE:
        cx[0, :, :] = 0.0
        cx[-1, :, :] = 0.0
        cy[:, 0, :] = 0.0
        cy[:, -1, :] = 0.0
        cz[:, :, 0] = 0.0
        cz[:, :, -1] = 0.0
    else:
        raise InvalidFieldError(f"unknown field location {location!r}")
    return cx, cy, cz


def boundary_trace_max(grid: GridSpec, cx, cy, cz, location=EDGE) -> float:
    """Largest magnitude among the structurally-zero boundary entries."""
    if location == EDGE:
        pieces = [
            cx[:, 0, :], cx[:, -1, :], cx[:, :, 0], cx[:, :, -1],
            cy[0, :, :], cy[-1, :, :], cy[:, :, 0], cy[:, :, -1],
            cz[0, :, :], cz[-1, :, :], cz[:, 0, :], cz[:, -1, :],
        ]
    else:
        pieces = [cx[0, :, :], cx[-1, :, :], cy[:, 0, :], cy[:, -1, :], cz[:, :, 0], cz[:, :, -1]]
    return max(float(np.max(np.abs(p))) if p.size else 0.0 for p in pieces)
