"""Reference partition of 1D domains and the moving high-order geometry map.

The reference domain is a chain of unit cells [0, 1].  A continuous,
piecewise-polynomial map u takes reference coordinates to physical
coordinates; its dofs are nodal values at Gauss-Lobatto points, with vertex
values shared between neighbouring cells.  For a valid (orientation
preserving) map u'(xi) > 0 everywhere, u' on a cell equals the physical
cell length when the cell is affine, and integrating u' recovers the cell
volume in general.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .basis import NodalBasis, QuadratureRule
from .errors import ConfigError


@dataclass(frozen=True)
class ReferenceMesh:
    """Ordered chain of cell_count unit reference cells.

    Interfaces are indexed 0..cell_count: index 0 is the left (inflow side)
    boundary, index cell_count the right boundary, the rest interior.  An
    interior interface k has left cell k-1 (trace at xi=1, outward sign +1)
    and right cell k (trace at xi=0, outward sign -1).
    """

    cell_count: int

    def __post_init__(self):
        if self.cell_count < 1:
            raise ConfigError(f"cell_count must be positive, got {self.cell_count}")

    @property
    def interface_count(self) -> int:
        return self.cell_count + 1

    @property
    def interior_interfaces(self) -> range:
        return range(1, self.cell_count)


@lru_cache(maxsize=None)
def _nodal_basis(degree: int) -> NodalBasis:
    return NodalBasis(degree)


@dataclass(frozen=True)
class GeometryField:
    """Continuous piecewise-polynomial map from the reference chain to physics.

    dofs holds nodal Gauss-Lobatto values, cell c owning the slice
    [c*degree, c*degree + degree]; the shared entries are the physical
    vertex positions.
    """

    degree: int
    dofs: np.ndarray
    domain_bounds: tuple[float, float]

    def __post_init__(self):
        if self.degree < 1:
            raise ConfigError(f"geometry degree must be >= 1, got {self.degree}")
        n_dofs = len(self.dofs)
        if (n_dofs - 1) % self.degree != 0:
            raise ConfigError(f"{n_dofs} dofs incompatible with degree {self.degree}")

    @property
    def cell_count(self) -> int:
        return (len(self.dofs) - 1) // self.degree

    @property
    def basis(self) -> NodalBasis:
        return _nodal_basis(self.degree)

    def cell_slice(self, cell: int) -> slice:
        return slice(cell * self.degree, cell * self.degree + self.degree + 1)

    def cell_dofs(self, cell: int) -> np.ndarray:
        return self.dofs[self.cell_slice(cell)]

    def vertices(self) -> np.ndarray:
        """Physical positions of the cell_count+1 mesh vertices."""
        return self.dofs[:: self.degree]

    def with_dofs(self, dofs: np.ndarray) -> "GeometryField":
        return replace(self, dofs=np.asarray(dofs, dtype=float))


def uniform_geometry(cell_count: int, bounds: tuple[float, float], degree: int = 1) -> GeometryField:
    """Affine map onto a uniform partition of [bounds[0], bounds[1]]."""
    x_left, x_right = bounds
    nodes = _nodal_basis(degree).nodes
    dofs = np.empty(cell_count * degree + 1)
    vertices = np.linspace(x_left, x_right, cell_count + 1)
    for c in range(cell_count):
        dofs[c * degree : c * degree + degree + 1] = vertices[c] + (vertices[c + 1] - vertices[c]) * nodes
    return GeometryField(degree=degree, dofs=dofs, domain_bounds=(x_left, x_right))


def evaluate_mapping(g: GeometryField, cell: int, xi) -> tuple[np.ndarray, np.ndarray]:
    """Physical coordinate x = u(xi) and Jacobian u'(xi) on one cell."""
    vals, derivs = g.basis.eval(np.asarray(xi, dtype=float))
    cd = g.cell_dofs(cell)
    return vals @ cd, derivs @ cd


def check_validity(g: GeometryField, quad: QuadratureRule) -> float:
    """Minimum of u' over all quadrature points of all cells.

    Reporting only: the caller decides what threshold renders the map
    invalid (solver steps are rejected below a small positive tolerance).
    """
    _, derivs = g.basis.eval(quad.points)
    du = np.empty((g.cell_count, quad.n))
    for c in range(g.cell_count):
        du[c] = derivs @ g.cell_dofs(c)
    return float(du.min())


def validity_tolerance(g: GeometryField) -> float:
    """Default invalidity threshold: 1e-10 times the mean cell length."""
    x_left, x_right = g.domain_bounds
    return 1e-10 * abs(x_right - x_left) / g.cell_count


def project_boundary(g: GeometryField) -> GeometryField:
    """Pin the two boundary dofs to the physical domain bounds (idempotent)."""
    dofs = g.dofs.copy()
    dofs[0], dofs[-1] = g.domain_bounds
    return g.with_dofs(dofs)


def project_boundary_tangent(delta: np.ndarray) -> np.ndarray:
    """Derivative of the boundary projection: zero the boundary entries."""
    out = np.asarray(delta, dtype=float).copy()
    out[0] = 0.0
    out[-1] = 0.0
    return out


def cell_volume(g: GeometryField, cell: int, quad: QuadratureRule) -> float:
    """Physical cell length, computed as the quadrature of u' over the cell."""
    _, du = evaluate_mapping(g, cell, quad.points)
    return quad.integrate(du)


def cell_volumes(g: GeometryField, quad: QuadratureRule) -> np.ndarray:
    return np.array([cell_volume(g, c, quad) for c in range(g.cell_count)])


def save_geometry_csv(g: GeometryField, path) -> None:
    """One row per geometry dof: cell_id, local_index, x (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "local_index", "x"])
        for c in range(g.cell_count):
            for j, x in enumerate(g.cell_dofs(c)):
                writer.writerow([c, j, f"{x:.17g}"])


def load_geometry_csv(path, domain_bounds: tuple[float, float]) -> GeometryField:
    """Rebuild a GeometryField from its CSV serialization."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((int(row["cell_id"]), int(row["local_index"]), float(row["x"])))
    if not rows:
        raise ConfigError(f"no geometry rows in {path}")
    degree = max(j for _, j, _ in rows)
    n_cells = max(c for c, _, _ in rows) + 1
    dofs = np.empty(n_cells * degree + 1)
    for c, j, x in rows:
        dofs[c * degree + j] = x
    return GeometryField(degree=degree, dofs=dofs, domain_bounds=domain_bounds)
