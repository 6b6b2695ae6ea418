"""Periodic rectangular grids and node-sampled scalar fields.

The convention throughout: a grid of ``nx`` by ``ny`` nodes covers
``[x_min, x_max] x [y_min, y_max]`` with the last node in each direction an
alias of the first (periodic closure). Only the ``(nx-1) x (ny-1)``
independent unknowns are stored; the alias is materialized at output time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid2D", "Field2D", "make_grid2d", "wrap", "sample"]


@dataclass(frozen=True)
class Grid2D:
    """Uniform doubly periodic grid.

    Node ``i`` (1-based) carries coordinate ``x_min + (i-1)*dx`` for
    ``i = 1..nx``; node ``nx`` aliases node 1, likewise in y.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    dx: float
    dy: float

    @property
    def lx(self) -> float:
        return self.x_max - self.x_min

    @property
    def ly(self) -> float:
        return self.y_max - self.y_min

    def x_nodes(self) -> np.ndarray:
        """Coordinates of the nx-1 independent x-nodes."""
        return self.x_min + self.dx * np.arange(self.nx - 1)

    def y_nodes(self) -> np.ndarray:
        """Coordinates of the ny-1 independent y-nodes."""
        return self.y_min + self.dy * np.arange(self.ny - 1)


def make_grid2d(x_min: float, x_max: float, y_min: float, y_max: float,
                nx: int, ny: int) -> Grid2D:
    """Build a periodic grid with ``nx`` x ``ny`` nodes (alias included).

    Spacings are ``dx = (x_max-x_min)/(nx-1)`` and likewise for ``dy``.
    Raises ValueError for degenerate bounds or node counts below 3.
    """
    if nx < 3 or ny < 3:
        raise ValueError(f"invalid dimension: need nx >= 3 and ny >= 3, got {nx} x {ny}")
    if not (x_max > x_min) or not (y_max > y_min):
        raise ValueError("invalid dimension: domain bounds must satisfy "
                         f"x_max > x_min and y_max > y_min, got [{x_min}, {x_max}] x [{y_min}, {y_max}]")
    dx = (x_max - x_min) / (nx - 1)
    dy = (y_max - y_min) / (ny - 1)
    return Grid2D(float(x_min), float(x_max), float(y_min), float(y_max),
                  int(nx), int(ny), dx, dy)


def wrap(i: int, n: int) -> int:
    """Periodic index wrap onto ``1..n`` (1-based).

    ``wrap(0, n) == n`` and ``wrap(n+1, n) == 1``.
    """
    if n < 1:
        raise ValueError(f"wrap needs n >= 1, got {n}")
    return (i - 1) % n + 1


@dataclass(frozen=True, eq=False)
class Field2D:
    """Scalar samples on the independent grid nodes at one time level.

    ``values[i, j]`` lives at ``(x_nodes()[i], y_nodes()[j])``. Values are
    validated finite on construction, so a blown-up step surfaces as an
    error instead of propagating NaNs.
    """

    grid: Grid2D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        expected = (self.grid.nx - 1, self.grid.ny - 1)
        if vals.shape != expected:
            raise ValueError(f"field shape {vals.shape} does not match grid interior {expected}")
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("non-finite field values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "time", float(self.time))

    def at(self, i: int, j: int) -> float:
        """Value at 1-based node indices, aliased nodes included."""
        ii = wrap(i, self.grid.nx - 1) - 1
        jj = wrap(j, self.grid.ny - 1) - 1
        return float(self.values[ii, jj])

    def full_values(self) -> np.ndarray:
        """Values on all ``nx x ny`` nodes, alias row/column materialized."""
        out = np.empty((self.grid.nx, self.grid.ny))
        out[:-1, :-1] = self.values
        out[-1, :-1] = self.values[0, :]
        out[:, -1] = out[:, 0]
        return out

    def with_values(self, values: np.ndarray, time: float | None = None) -> "Field2D":
        """New field on the same grid."""
        return Field2D(self.grid, values, self.time if time is None else time)


def sample(grid: Grid2D, g, t: float = 0.0) -> Field2D:
    """Sample ``g(x, y)`` on the independent nodes of ``grid`` at time ``t``.

    ``g`` may be vectorized over NumPy arrays or a plain scalar function.
    Non-finite samples raise FloatingPointError.
    """
    x = grid.x_nodes()
    y = grid.y_nodes()
    try:
        vals = np.asarray(g(x[:, None], y[None, :]), dtype=float)
        if vals.shape != (x.size, y.size):
            vals = np.broadcast_to(vals, (x.size, y.size)).copy()
    except (TypeError, ValueError):
        vals = np.empty((x.size, y.size))
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                vals[i, j] = g(xi, yj)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite sample")
    return Field2D(grid, vals, t)
