"""Uniform finite-difference grids on axis-aligned boxes.

A field is a plain 1-D ``numpy`` array holding one value per *interior*
node; boundary values are implicitly zero. Nodes are ordered with axis 0
varying fastest, so ``field.reshape(grid.interior_shape, order="F")`` gives
the tensor view.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import GridError

__all__ = [
    "Grid",
    "build_grid",
    "apply_neg_laplacian",
    "inner_h10",
    "norm_h10",
    "norm_l2",
    "integrate",
    "weighted_integral",
    "positive_part",
    "negative_part",
    "write_field",
    "read_field",
]


@dataclass(frozen=True, eq=False)
class Grid:
    dimension: int
    extents: tuple[float, ...]
    nodes: tuple[int, ...]
    spacing: tuple[float, ...] = dc_field(init=False)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise GridError(f"dimension must be 2 or 3, got {self.dimension}")
        if len(self.extents) != self.dimension or len(self.nodes) != self.dimension:
            raise GridError("extents and node counts must have one entry per axis")
        if any(not np.isfinite(e) or e <= 0 for e in self.extents):
            raise GridError(f"extents must be positive, got {self.extents}")
        if any(int(n) != n for n in self.nodes):
            raise GridError(f"node counts must be integers, got {self.nodes}")
        if any(n < 3 for n in self.nodes):
            raise GridError(f"no interior nodes: node counts {self.nodes} (need >= 3)")
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "nodes", tuple(int(n) for n in self.nodes))
        object.__setattr__(
            self, "spacing", tuple(e / (n - 1) for e, n in zip(self.extents, self.nodes))
        )

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.dimension, self.extents, self.nodes) == (
            other.dimension, other.extents, other.nodes)

    def __hash__(self):
        return hash((self.dimension, self.extents, self.nodes))

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return tuple(n - 2 for n in self.nodes)

    @property
    def size(self) -> int:
        """Number of interior nodes (unknowns)."""
        return int(np.prod(self.interior_shape))

    @property
    def cell_volume(self) -> float:
        """Quadrature weight attached to every interior node."""
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    def to_array(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.interior_shape, order="F")

    def to_field(self, array: np.ndarray) -> np.ndarray:
        return np.asarray(array, dtype=float).reshape(-1, order="F")

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Coordinates of the interior nodes, one flat array per axis."""
        axes = [h * np.arange(1, n - 1) for h, n in zip(self.spacing, self.nodes)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return tuple(self.to_field(m) for m in mesh)

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(x, y[, z])`` at the interior nodes."""
        return np.asarray(func(*self.coordinates), dtype=float) * np.ones(self.size)

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Sparse matrix of the discrete -Laplacian with zero Dirichlet data."""
        shape = self.interior_shape
        eyes = [sp.identity(m, format="csr") for m in shape]
        total = None
        for axis, (m, h) in enumerate(zip(shape, self.spacing)):
            t = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)],
                         [-1, 0, 1], format="csr") / h**2
            # axis 0 fastest -> it is the rightmost Kronecker factor
            factors = [eyes[k] if k != axis else t for k in range(self.dimension)]
            term = factors[-1]
            for fac in reversed(factors[:-1]):
                term = sp.kron(term, fac, format="csr")
            total = term if total is None else total + term
        return total.tocsr()

    @cached_property
    def laplacian_factor(self):
        """Cached sparse LU of the Laplacian, used as an H^1_0 Riesz map."""
        from scipy.sparse.linalg import splu
        return splu(self.laplacian.tocsc())

    def riesz(self, r: np.ndarray) -> np.ndarray:
        """H^1_0 representative of the functional phi -> <r, phi>_quadrature."""
        return self.laplacian_factor.solve(np.asarray(r, dtype=float))

    def check(self, *fields: np.ndarray) -> None:
        for f in fields:
            if np.shape(f) != (self.size,):
                raise GridError(
                    f"field of shape {np.shape(f)} does not belong to grid with "
                    f"{self.size} interior nodes")


def build_grid(dimension: int, extents, node_counts) -> Grid:
    return Grid(int(dimension), tuple(extents), tuple(node_counts))


def apply_neg_laplacian(grid: Grid, values: np.ndarray) -> np.ndarray:
    grid.check(values)
    return grid.laplacian @ values


def _edge_differences(grid: Grid, values: np.ndarray):
    arr = np.pad(grid.to_array(values), 1)
    for axis, h in enumerate(grid.spacing):
        yield np.diff(arr, axis=axis) / h


def inner_h10(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """Discrete ``int grad a . grad b`` as a sum over grid edges.

    Equals ``<A a, b>`` up to rounding and is exactly symmetric.
    """
    grid.check(a, b)
    total = 0.0
    for da, db in zip(_edge_differences(grid, a), _edge_differences(grid, b)):
        total += float(np.sum(da * db))
    return grid.cell_volume * total


def norm_h10(grid: Grid, a: np.ndarray) -> float:
    return float(np.sqrt(inner_h10(grid, a, a)))


def integrate(grid: Grid, values) -> float:
    values = np.broadcast_to(np.asarray(values, dtype=float), (grid.size,))
    return grid.cell_volume * float(np.sum(values))


def weighted_integral(grid: Grid, weight, values: np.ndarray, power: float = 1) -> float:
    """``int weight * values**power``."""
    grid.check(values)
    return integrate(grid, np.asarray(weight, dtype=float) * values**power)


def norm_l2(grid: Grid, values: np.ndarray) -> float:
    grid.check(values)
    return float(np.sqrt(integrate(grid, values * values)))


def positive_part(values: np.ndarray) -> np.ndarray:
    return np.maximum(values, 0.0)


def negative_part(values: np.ndarray) -> np.ndarray:
    return np.maximum(-values, 0.0)


# --- field files -----------------------------------------------------------

def write_field(path, grid: Grid, values: np.ndarray) -> None:
    """Write a field as text; ``repr`` of a float is its shortest round-trip form."""
    grid.check(values)
    lines = [" ".join([str(grid.dimension), *map(str, grid.nodes)]),
             " ".join(repr(float(e)) for e in grid.extents)]
    lines.extend(repr(float(x)) for x in values)
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> tuple[Grid, np.ndarray]:
    lines = Path(path).read_text().split("\n")
    try:
        head = [int(tok) for tok in lines[0].split()]
        extents = [float(tok) for tok in lines[1].split()]
    except (IndexError, ValueError) as exc:
        raise GridError(f"{path}: malformed field header") from exc
    if not head:
        raise GridError(f"{path}: empty header")
    grid = build_grid(head[0], extents, head[1:])
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != grid.size:
        raise GridError(f"{path}: expected {grid.size} values, found {len(body)}")
    values = np.array([float(x) for x in body])
    if not np.all(np.isfinite(values)):
        raise GridError(f"{path}: non-finite values")
    return grid, values
