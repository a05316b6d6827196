"""Tensor-product grids over boxes in R^n x R^m.

Axes are ordered ``x1..xn, y1..ym``. Scalar fields are plain numpy arrays
of shape ``grid.shape`` (lexicographic node order when flattened).
Quadrature is the tensor trapezoid rule; first derivatives use central
differences inside and second-order one-sided stencils on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DomainError", "DomainSpec", "Grid", "SplitGradient", "BumpSpec",
    "build_grid", "integrate", "grad_split", "diff_matrix", "apply_axis",
    "apply_axis_transpose", "make_bump", "bump_integral", "random_bumps",
]


class DomainError(ValueError):
    """Raised for domain specifications outside the admissible setting."""


@dataclass(frozen=True)
class DomainSpec:
    n: int
    m: int
    bounds: tuple[tuple[float, float], ...]
    nodes: tuple[int, ...]

    @classmethod
    def box(cls, n: int, m: int, lo: float = -1.0, hi: float = 1.0,
            resolution: int = 17) -> "DomainSpec":
        """Cube ``(lo, hi)^(n+m)`` with ``resolution`` nodes on every axis."""
        N = n + m
        return cls(n, m, ((lo, hi),) * N, (resolution,) * N)

    @property
    def N(self) -> int:
        return self.n + self.m


@dataclass(frozen=True, eq=False)
class Grid:
    spec: DomainSpec
    axes: tuple[np.ndarray, ...]
    coords: tuple[np.ndarray, ...]
    weights: np.ndarray
    boundary: np.ndarray
    spacing: tuple[float, ...]
    _dmats: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def shape(self) -> tuple[int, ...]:
        return self.weights.shape

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.spec.bounds]))

    @property
    def axis_names(self) -> tuple[str, ...]:
        return (tuple(f"x{i + 1}" for i in range(self.n))
                + tuple(f"y{j + 1}" for j in range(self.m)))

    @property
    def x(self) -> tuple[np.ndarray, ...]:
        return self.coords[:self.n]

    @property
    def y(self) -> tuple[np.ndarray, ...]:
        return self.coords[self.n:]

    def abs_x(self) -> np.ndarray:
        """Euclidean norm of the x-block at each node."""
        return np.sqrt(sum(c * c for c in self.x))

    def abs_y(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.y))

    def x_weight(self, gamma: float) -> np.ndarray:
        """Degenerate weight ``|x|^gamma``; vanishes on the layer x = 0."""
        return np.power(self.abs_x(), gamma)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def dirichlet(self, u: np.ndarray) -> np.ndarray:
        """Copy of ``u`` with boundary nodes set to zero."""
        out = np.array(u, dtype=float, copy=True)
        out[self.boundary] = 0.0
        return out


@dataclass(frozen=True)
class SplitGradient:
    """Unweighted x- and y-blocks of the nodal gradient.

    ``gx`` has shape ``(n, *grid.shape)``, ``gy`` has ``(m, *grid.shape)``.
    """
    gx: np.ndarray
    gy: np.ndarray

    def abs_x(self) -> np.ndarray:
        return np.sqrt(np.sum(self.gx ** 2, axis=0))

    def abs_y(self) -> np.ndarray:
        return np.sqrt(np.sum(self.gy ** 2, axis=0))


def diff_matrix(k: int, h: float) -> np.ndarray:
    """1-D first-derivative matrix on ``k`` equispaced nodes.

    Central differences inside, ``(-3, 4, -1)/2h`` one-sided stencils at
    both ends (second order everywhere, same as ``np.gradient(edge_order=2)``).
    """
    D = np.zeros((k, k))
    i = np.arange(1, k - 1)
    D[i, i - 1] = -0.5
    D[i, i + 1] = 0.5
    D[0, :3] = (-1.5, 2.0, -0.5)
    D[-1, -3:] = (0.5, -2.0, 1.5)
    return D / h


def _trapezoid_weights(k: int, h: float) -> np.ndarray:
    w = np.full(k, h)
    w[0] = w[-1] = h / 2
    return w


def build_grid(spec: DomainSpec) -> Grid:
    """Build the tensor grid for ``spec``.

    Raises
    ------
    DomainError
        If ``N = n + m < 3`` (the exponent band ``(2, N)`` is empty), if the
        x-projection of the box does not contain 0 in its interior, or on
        malformed bounds/node counts.
    """
    n, m = spec.n, spec.m
    N = n + m
    if n < 1 or m < 0:
        raise DomainError(f"need n >= 1 and m >= 0, got n={n}, m={m}")
    if N < 3:
        raise DomainError(
            f"N = n + m = {N} < 3: the exponent band 2 < G < N is empty")
    if len(spec.bounds) != N or len(spec.nodes) != N:
        raise DomainError("bounds and nodes must list one entry per axis")
    for k, ((a, b), cnt) in enumerate(zip(spec.bounds, spec.nodes)):
        if not b > a:
            raise DomainError(f"axis {k}: empty interval ({a}, {b})")
        if cnt < 5:
            raise DomainError(f"axis {k}: need at least 5 nodes, got {cnt}")
    for k in range(n):
        a, b = spec.bounds[k]
        if not a < 0.0 < b:
            raise DomainError(
                f"x{k + 1}-interval ({a}, {b}) does not contain 0 in its "
                "interior: the domain must meet the degeneracy set x = 0")

    axes = tuple(np.linspace(a, b, cnt) for (a, b), cnt in zip(spec.bounds, spec.nodes))
    spacing = tuple(float((b - a) / (cnt - 1)) for (a, b), cnt in zip(spec.bounds, spec.nodes))
    coords = tuple(np.meshgrid(*axes, indexing="ij"))
    weights = _trapezoid_weights(spec.nodes[0], spacing[0])
    for cnt, h in zip(spec.nodes[1:], spacing[1:]):
        weights = np.multiply.outer(weights, _trapezoid_weights(cnt, h))
    weights = np.asarray(weights).reshape(spec.nodes)
    boundary = np.zeros(spec.nodes, dtype=bool)
    for k in range(N):
        idx = [slice(None)] * N
        idx[k] = 0
        boundary[tuple(idx)] = True
        idx[k] = -1
        boundary[tuple(idx)] = True
    dmats = tuple(diff_matrix(cnt, h) for cnt, h in zip(spec.nodes, spacing))
    for arr in (weights, boundary, *coords, *axes, *dmats):
        arr.setflags(write=False)
    return Grid(spec, axes, coords, weights, boundary, spacing, dmats)


def integrate(f: np.ndarray, grid: Grid) -> float:
    """Trapezoid approximation of the integral of ``f`` over the box."""
    return float(np.sum(grid.weights * f))


def apply_axis(M: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    """Apply the matrix ``M`` along ``axis`` of ``u``."""
    return np.moveaxis(np.tensordot(M, u, axes=(1, axis)), 0, axis)


def apply_axis_transpose(M: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(M.T, u, axes=(1, axis)), 0, axis)


def partial(u: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    return apply_axis(grid._dmats[axis], u, axis)


def partial_transpose(u: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Adjoint (Euclidean) of :func:`partial` along ``axis``."""
    return apply_axis_transpose(grid._dmats[axis], u, axis)


def grad_split(u: np.ndarray, grid: Grid) -> SplitGradient:
    """Nodal gradient split into the x-block and the y-block."""
    u = np.asarray(u, dtype=float)
    parts = [partial(u, grid, k) for k in range(grid.N)]
    gx = np.stack(parts[:grid.n])
    gy = np.stack(parts[grid.n:]) if grid.m else np.zeros((0,) + grid.shape)
    return SplitGradient(gx, gy)


@dataclass(frozen=True)
class BumpSpec:
    center: tuple[float, ...]
    radii: tuple[float, ...]
    amplitude: float = 1.0


def _bump_factor(t: np.ndarray, c: float, r: float) -> np.ndarray:
    z = (t - c) / r
    return np.where(np.abs(z) < 1.0, np.cos(0.5 * np.pi * z) ** 2, 0.0)


def make_bump(grid: Grid, center: Sequence[float], radii: Sequence[float],
              amplitude: float = 1.0) -> np.ndarray:
    """Separable C^1 bump ``amplitude * prod cos^2(pi (z_i - c_i) / (2 r_i))``.

    The support box ``|z_i - c_i| < r_i`` must lie strictly inside the
    domain, so the result vanishes on every boundary node.
    """
    center = tuple(float(c) for c in center)
    radii = tuple(float(r) for r in radii)
    if len(center) != grid.N or len(radii) != grid.N:
        raise ValueError("center and radii need one entry per axis")
    for k, ((a, b), c, r) in enumerate(zip(grid.spec.bounds, center, radii)):
        if r <= 0:
            raise ValueError(f"axis {k}: radius must be positive")
        if not (a < c - r and c + r < b):
            raise ValueError(
                f"axis {k}: support ({c - r}, {c + r}) touches or leaves ({a}, {b})")
    out = np.full(grid.shape, float(amplitude))
    for k, (c, r) in enumerate(zip(center, radii)):
        out = out * _bump_factor(grid.coords[k], c, r)
    return out


def bump_integral(spec: BumpSpec) -> float:
    """Closed-form integral of a bump: each cos^2 factor integrates to r_i."""
    return float(spec.amplitude * np.prod(spec.radii))


def random_bumps(rng: np.random.Generator, count: int, spec: DomainSpec,
                 radius_range: tuple[float, float] = (0.2, 0.9),
                 amplitude_range: tuple[float, float] = (0.1, 2.0),
                 margin: float = 1e-3) -> list[BumpSpec]:
    """Draw ``count`` bump parameter sets whose supports fit strictly in the box.

    Parameters are grid-independent so the same ensemble can be sampled at
    several resolutions.
    """
    out = []
    lo_r, hi_r = radius_range
    for _ in range(count):
        center, radii = [], []
        for a, b in spec.bounds:
            half = 0.5 * (b - a)
            r = rng.uniform(lo_r, min(hi_r, half - margin)) if lo_r < half - margin \
                else 0.5 * (half - margin)
            c = rng.uniform(a + r + margin, b - r - margin)
            center.append(float(c))
            radii.append(float(r))
        amp = float(rng.uniform(*amplitude_range))
        out.append(BumpSpec(tuple(center), tuple(radii), amp))
    return out
