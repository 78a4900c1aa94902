"""Torus geometry: points, uniform periodic grids, scalar fields, the linear flow.

Everything lives on the flat torus T^n = R^n/Z^n with fundamental domain
[0,1)^n.  Scalar fields are sampled on uniform N^n grids and stored as flat
arrays with axis 0 fastest, i.e. flat index = i0 + N*i1 + N^2*i2 + ...
Interpolation is multilinear with periodic wrapping: it is monotone, exact
on constants and at grid nodes, properties the evolution scheme depends on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def wrap_coords(x) -> np.ndarray:
    """Reduce coordinates mod 1 into [0,1).

    Floor-based, so values within one ulp below 1.0 wrap to 0.0 rather than
    producing a coordinate equal to 1.0.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot wrap non-finite coordinates")
    r = x - np.floor(x)
    # x - floor(x) can round up to exactly 1.0 for tiny negative x
    if r.ndim == 0:
        return np.asarray(0.0) if r >= 1.0 else r
    r[r >= 1.0] = 0.0
    return r


@dataclass(frozen=True)
class TorusPoint:
    """A point on T^n, stored with every coordinate in [0,1)."""

    coords: np.ndarray

    def __init__(self, coords):
        object.__setattr__(self, "coords", np.atleast_1d(wrap_coords(coords)))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __iter__(self):
        return iter(self.coords)


def wrap(x) -> TorusPoint:
    """Project a real vector onto the torus fundamental domain."""
    return TorusPoint(x)


def torus_distance(a: TorusPoint, b: TorusPoint) -> float:
    """Euclidean length of the shortest wrapped difference between two points."""
    ca, cb = np.atleast_1d(a.coords), np.atleast_1d(b.coords)
    if ca.shape != cb.shape:
        raise ValueError(f"dimension mismatch: {ca.shape} vs {cb.shape}")
    return float(np.linalg.norm(wrapped_difference(ca, cb)))


def wrapped_difference(a, b) -> np.ndarray:
    """Componentwise lift of a - b into [-1/2, 1/2], vectorized."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return d - np.round(d)


def linear_flow(x0: TorusPoint, t: float, omega) -> TorusPoint:
    """Linear flow x -> x + omega*t projected back onto the torus."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    c = np.atleast_1d(x0.coords)
    if c.shape != omega.shape:
        raise ValueError(f"dimension mismatch: point {c.shape}, omega {omega.shape}")
    return wrap(c + omega * float(t))


@dataclass(frozen=True)
class UniformGrid:
    """Uniform periodic grid on T^n with N nodes per axis, spacing h = 1/N.

    Node (i0,...,i_{n-1}) sits at (i0*h, ..., i_{n-1}*h); indices wrap mod N.
    Flat ordering has axis 0 fastest.
    """

    n: int
    N: int

    def __post_init__(self):
        if self.n < 1 or self.N < 2:
            raise ValueError(f"need n >= 1 and N >= 2, got n={self.n}, N={self.N}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def num_nodes(self) -> int:
        return self.N**self.n

    def node_coords(self) -> np.ndarray:
        """All node coordinates, shape (num_nodes, n), in flat order."""
        idx = np.arange(self.num_nodes)
        multi = np.empty((self.num_nodes, self.n), dtype=float)
        for ax in range(self.n):
            multi[:, ax] = (idx // self.N**ax) % self.N
        return multi * self.h

    def node_index(self, multi) -> int:
        """Flat index of a multi-index (wrapping each axis mod N)."""
        multi = np.atleast_1d(np.asarray(multi, dtype=int)) % self.N
        return int(sum(multi[ax] * self.N**ax for ax in range(self.n)))

    def nearest_node(self, x: TorusPoint) -> int:
        """Flat index of the grid node nearest to x."""
        multi = np.round(np.atleast_1d(x.coords) / self.h).astype(int) % self.N
        return self.node_index(multi)


@dataclass
class ScalarField:
    """Snapshot of a scalar function on a grid, tagged with the time it represents."""

    grid: UniformGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.num_nodes,):
            raise ValueError(
                f"values length {self.values.size} != {self.grid.num_nodes} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def as_nd(self) -> np.ndarray:
        """View as an n-dimensional array indexed [i0, i1, ...]."""
        return self.values.reshape((self.grid.N,) * self.grid.n, order="F")

    def copy(self, time: float | None = None) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(),
                           self.time if time is None else time)

    @staticmethod
    def from_nd(grid: UniformGrid, nd: np.ndarray, time: float = 0.0) -> "ScalarField":
        return ScalarField(grid, nd.reshape(-1, order="F"), time)

    @staticmethod
    def constant(grid: UniformGrid, value: float, time: float = 0.0) -> "ScalarField":
        return ScalarField(grid, np.full(grid.num_nodes, float(value)), time)

    def to_dict(self) -> dict:
        return {"n": self.grid.n, "N": self.grid.N, "time": self.time,
                "values": self.values.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "ScalarField":
        return ScalarField(UniformGrid(int(d["n"]), int(d["N"])),
                           np.asarray(d["values"], dtype=float), float(d["time"]))


def _check_same_grid(f: ScalarField, g: ScalarField):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def sup_norm_diff(f: ScalarField, g: ScalarField) -> float:
    """Max over nodes of |f - g|; grids must be identical."""
    _check_same_grid(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def pointwise_min(f: ScalarField, g: ScalarField) -> ScalarField:
    """Nodewise minimum of two fields at the same time on the same grid."""
    _check_same_grid(f, g)
    if f.time != g.time:
        raise ValueError(f"time tag mismatch: {f.time} vs {g.time}")
    return ScalarField(f.grid, np.minimum(f.values, g.values), f.time)


def interpolate_many(f: ScalarField, pts: np.ndarray) -> np.ndarray:
    """Multilinear periodic interpolation at a batch of points, shape (m, n)."""
    grid = f.grid
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != grid.n:
        raise ValueError(f"points have dim {pts.shape[1]}, field has dim {grid.n}")
    s = pts * grid.N
    base = np.floor(s).astype(int)
    frac = s - base
    out = np.zeros(pts.shape[0])
    # accumulate the 2^n corner contributions
    for corner in range(2**grid.n):
        w = np.ones(pts.shape[0])
        idx = np.zeros(pts.shape[0], dtype=int)
        for ax in range(grid.n):
            bit = (corner >> ax) & 1
            w = w * (frac[:, ax] if bit else 1.0 - frac[:, ax])
            idx += ((base[:, ax] + bit) % grid.N) * grid.N**ax
        out += w * f.values[idx]
    return out


def interpolate(f: ScalarField, x: TorusPoint) -> float:
    """Multilinear periodic interpolation at a single point; exact at nodes."""
    return float(interpolate_many(f, np.atleast_1d(x.coords)[None, :])[0])


def shift_lerp(nd: np.ndarray, axis: int, displacement_cells: float) -> np.ndarray:
    """Linearly interpolated periodic shift along one axis.

    Returns the array whose node value is the input read at (node - d), with
    d = displacement_cells grid cells; the workhorse of the foot-point reads.
    """
    q = int(np.floor(displacement_cells))
    fr = displacement_cells - q
    a = np.roll(nd, q, axis=axis)
    if fr == 0.0:
        return a.copy() if a is nd else a
    b = np.roll(nd, q + 1, axis=axis)
    return (1.0 - fr) * a + fr * b
