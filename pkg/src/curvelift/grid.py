"""Staggered grids and linear operators for orientation-lifted flux fields.

A grayscale image ``u`` is sampled at the N1 x N2 sites of a pixel lattice
with spacing ``delta_x``.  On top of it sits a 3D volume grid with two
spatial axes and one periodic orientation axis of ``ntheta`` slabs of width
``delta_theta = 2*pi/ntheta``.  A flux field stores one scalar per volume
facet: ``s1`` for facets orthogonal to the first spatial axis, ``s2`` for
facets orthogonal to the second, ``st`` for facets orthogonal to the
orientation axis.

Arrays are stored orientation-outermost.  Index order is ``[k, j, i]`` for
facet and volume data and ``[j, i]`` for pixel and edge data, ``i`` running
along the first spatial axis.  Shapes:

    image      (n2, n1)
    s1         (ntheta, n2-1, n1)
    s2         (ntheta, n2, n1-1)
    st         (ntheta, n2-1, n1-1)      periodic in k
    volumes    (ntheta, n2-1, n1-1)
    edge e1    (n2-1, n1)
    edge e2    (n2, n1-1)

Volume ``(i, j, k)`` (1-based, ``1 <= i < n1``, ``1 <= j < n2``,
``1 <= k <= ntheta``) is centered at ``(i*dx, j*dx, k*dt)``; its facets in
array coordinates are ``s1[k-1, j-1, i-1]`` / ``s1[k-1, j-1, i]``,
``s2[k-1, j-1, i-1]`` / ``s2[k-1, j, i-1]`` and ``st[k-1, j-1, i-1]`` /
``st[k % ntheta, j-1, i-1]``.

Four linear operators couple these spaces:

* :func:`divergence`        flux -> volumes, conservation stencil
* :func:`flux_projection`   flux -> edges, orientation-integrated flux
* :func:`rotated_gradient`  image -> edges, 90-degree rotated differences
* :func:`face_average`      flux -> per-volume 3-vectors

together with their exact adjoints for the unweighted Euclidean inner
products, and a pointwise evaluator of the lowest-order face-element
interpolant (linear along each facet normal, constant transversally).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "FluxField",
    "EdgeField",
    "divergence",
    "divergence_adjoint",
    "flux_projection",
    "flux_projection_adjoint",
    "rotated_gradient",
    "rotated_gradient_adjoint",
    "face_average",
    "face_average_adjoint",
    "rt_evaluate",
]


@dataclass(frozen=True)
class GridSpec:
    """Dimensions and step sizes of the pixel grid and its lifted volume grid."""

    n1: int
    n2: int
    ntheta: int
    delta_x: float = 1.0

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least 2 pixels along each spatial axis")
        if self.ntheta < 2:
            raise ValueError("grid needs at least 2 orientation slabs")
        if not self.delta_x > 0:
            raise ValueError("delta_x must be positive")

    @property
    def delta_theta(self) -> float:
        # derived, never stored: the orientation axis must close up exactly
        return 2.0 * math.pi / self.ntheta

    @property
    def shape_image(self) -> tuple[int, int]:
        return (self.n2, self.n1)

    @property
    def shape_s1(self) -> tuple[int, int, int]:
        return (self.ntheta, self.n2 - 1, self.n1)

    @property
    def shape_s2(self) -> tuple[int, int, int]:
        return (self.ntheta, self.n2, self.n1 - 1)

    @property
    def shape_st(self) -> tuple[int, int, int]:
        return (self.ntheta, self.n2 - 1, self.n1 - 1)

    @property
    def shape_volumes(self) -> tuple[int, int, int]:
        return (self.ntheta, self.n2 - 1, self.n1 - 1)

    @property
    def shape_e1(self) -> tuple[int, int]:
        return (self.n2 - 1, self.n1)

    @property
    def shape_e2(self) -> tuple[int, int]:
        return (self.n2, self.n1 - 1)

    def theta_centers(self) -> np.ndarray:
        """Center angle of orientation slab k (1-based): theta_k = k*delta_theta."""
        return np.arange(1, self.ntheta + 1) * self.delta_theta

    def pixel_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel site coordinates ``(x1, x2)`` as 1D arrays (half-integer sites)."""
        x1 = (np.arange(self.n1) + 0.5) * self.delta_x
        x2 = (np.arange(self.n2) + 0.5) * self.delta_x
        return x1, x2

    def volume_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Volume center coordinates ``(x1, x2)`` as 1D arrays (integer sites)."""
        x1 = np.arange(1, self.n1) * self.delta_x
        x2 = np.arange(1, self.n2) * self.delta_x
        return x1, x2


@dataclass
class FluxField:
    """One scalar per facet of the lifted volume grid."""

    s1: np.ndarray
    s2: np.ndarray
    st: np.ndarray

    @classmethod
    def zeros(cls, grid: GridSpec) -> "FluxField":
        return cls(
            np.zeros(grid.shape_s1),
            np.zeros(grid.shape_s2),
            np.zeros(grid.shape_st),
        )

    def check(self, grid: GridSpec) -> None:
        if (
            self.s1.shape != grid.shape_s1
            or self.s2.shape != grid.shape_s2
            or self.st.shape != grid.shape_st
        ):
            raise ValueError(
                f"flux field shapes {self.s1.shape}/{self.s2.shape}/{self.st.shape} "
                f"do not match grid {grid.shape_s1}/{grid.shape_s2}/{grid.shape_st}"
            )

    def copy(self) -> "FluxField":
        return FluxField(self.s1.copy(), self.s2.copy(), self.st.copy())


@dataclass
class EdgeField:
    """One scalar per pixel edge, split by edge direction."""

    e1: np.ndarray
    e2: np.ndarray

    @classmethod
    def zeros(cls, grid: GridSpec) -> "EdgeField":
        return cls(np.zeros(grid.shape_e1), np.zeros(grid.shape_e2))

    def check(self, grid: GridSpec) -> None:
        if self.e1.shape != grid.shape_e1 or self.e2.shape != grid.shape_e2:
            raise ValueError(
                f"edge field shapes {self.e1.shape}/{self.e2.shape} "
                f"do not match grid {grid.shape_e1}/{grid.shape_e2}"
            )

    def copy(self) -> "EdgeField":
        return EdgeField(self.e1.copy(), self.e2.copy())


def _check_image(u: np.ndarray, grid: GridSpec) -> None:
    if u.shape != grid.shape_image:
        raise ValueError(f"image shape {u.shape} does not match grid {grid.shape_image}")


def _check_volumes(v: np.ndarray, grid: GridSpec) -> None:
    if v.shape != grid.shape_volumes:
        raise ValueError(
            f"volume array shape {v.shape} does not match grid {grid.shape_volumes}"
        )


def divergence(sigma: FluxField, grid: GridSpec) -> np.ndarray:
    """Per-volume net outflow:

    (s1[i+1/2] - s1[i-1/2])/dx + (s2[j+1/2] - s2[j-1/2])/dx
        + (st[k+1/2] - st[k-1/2])/dt,

    periodic along the orientation axis.
    """
    sigma.check(grid)
    dx, dt = grid.delta_x, grid.delta_theta
    d = (sigma.s1[:, :, 1:] - sigma.s1[:, :, :-1]) / dx
    d += (sigma.s2[:, 1:, :] - sigma.s2[:, :-1, :]) / dx
    d += (np.roll(sigma.st, -1, axis=0) - sigma.st) / dt
    return d


def divergence_adjoint(phi: np.ndarray, grid: GridSpec) -> FluxField:
    """Adjoint of :func:`divergence`: negative difference of zero-padded phi
    along each facet normal (periodic along the orientation axis)."""
    _check_volumes(phi, grid)
    dx, dt = grid.delta_x, grid.delta_theta
    a1 = np.zeros(grid.shape_s1)
    a1[:, :, 1:] += phi / dx
    a1[:, :, :-1] -= phi / dx
    a2 = np.zeros(grid.shape_s2)
    a2[:, 1:, :] += phi / dx
    a2[:, :-1, :] -= phi / dx
    at = (np.roll(phi, 1, axis=0) - phi) / dt
    return FluxField(a1, a2, at)


def flux_projection(sigma: FluxField, grid: GridSpec) -> EdgeField:
    """Spatial flux integrated over orientations: e = dt * sum_k s."""
    sigma.check(grid)
    dt = grid.delta_theta
    return EdgeField(dt * sigma.s1.sum(axis=0), dt * sigma.s2.sum(axis=0))


def flux_projection_adjoint(psi: EdgeField, grid: GridSpec) -> FluxField:
    """Adjoint of :func:`flux_projection`: broadcast dt * psi over orientations."""
    psi.check(grid)
    dt = grid.delta_theta
    s1 = np.broadcast_to(dt * psi.e1, grid.shape_s1).copy()
    s2 = np.broadcast_to(dt * psi.e2, grid.shape_s2).copy()
    return FluxField(s1, s2, np.zeros(grid.shape_st))


def rotated_gradient(u: np.ndarray, grid: GridSpec) -> EdgeField:
    """90-degree rotated pixel differences:

    e1[j, i] = (u[j+1, i] - u[j, i]) / dx
    e2[j, i] = -(u[j, i+1] - u[j, i]) / dx

    so level lines of ``u`` follow the edge field rather than cross it.
    """
    _check_image(u, grid)
    dx = grid.delta_x
    e1 = (u[1:, :] - u[:-1, :]) / dx
    e2 = -(u[:, 1:] - u[:, :-1]) / dx
    return EdgeField(e1, e2)


def rotated_gradient_adjoint(psi: EdgeField, grid: GridSpec) -> np.ndarray:
    """Adjoint of :func:`rotated_gradient` (a rotated negative divergence)."""
    psi.check(grid)
    dx = grid.delta_x
    g = np.zeros(grid.shape_image)
    g[1:, :] += psi.e1 / dx
    g[:-1, :] -= psi.e1 / dx
    g[:, 1:] -= psi.e2 / dx
    g[:, :-1] += psi.e2 / dx
    return g


def face_average(sigma: FluxField, grid: GridSpec) -> np.ndarray:
    """Mean of opposite facets per volume, shape ``(3,) + shape_volumes``."""
    sigma.check(grid)
    hat = np.empty((3,) + grid.shape_volumes)
    hat[0] = 0.5 * (sigma.s1[:, :, 1:] + sigma.s1[:, :, :-1])
    hat[1] = 0.5 * (sigma.s2[:, 1:, :] + sigma.s2[:, :-1, :])
    hat[2] = 0.5 * (np.roll(sigma.st, -1, axis=0) + sigma.st)
    return hat


def face_average_adjoint(xi: np.ndarray, grid: GridSpec) -> FluxField:
    """Adjoint of :func:`face_average`: half-sum of the adjacent volume values."""
    if xi.shape != (3,) + grid.shape_volumes:
        raise ValueError(
            f"averaged field shape {xi.shape} does not match grid "
            f"{(3,) + grid.shape_volumes}"
        )
    a1 = np.zeros(grid.shape_s1)
    a1[:, :, 1:] += 0.5 * xi[0]
    a1[:, :, :-1] += 0.5 * xi[0]
    a2 = np.zeros(grid.shape_s2)
    a2[:, 1:, :] += 0.5 * xi[1]
    a2[:, :-1, :] += 0.5 * xi[1]
    at = 0.5 * (xi[2] + np.roll(xi[2], 1, axis=0))
    return FluxField(a1, a2, at)


def rt_evaluate(
    sigma: FluxField, grid: GridSpec, x1: float, x2: float, theta: float
) -> np.ndarray:
    """Evaluate the face-element interpolant of ``sigma`` at one point.

    Each component is linear along its own facet normal and piecewise
    constant across the two transverse axes; at a facet midpoint the value
    is that facet's flux, at a volume center it is the face average.  The
    spatial point must lie inside the volume grid
    ``[dx/2, (n-1/2)*dx]`` per axis; ``theta`` wraps periodically.
    """
    sigma.check(grid)
    dx, dt = grid.delta_x, grid.delta_theta
    K = grid.ntheta
    t1, t2 = x1 / dx, x2 / dx
    if not (0.5 <= t1 <= grid.n1 - 0.5) or not (0.5 <= t2 <= grid.n2 - 0.5):
        raise ValueError(f"point ({x1}, {x2}) outside the volume grid")
    tt = (theta / dt) % K

    def cell(t: float, n: int) -> int:
        # volume slab containing coordinate t (in steps), clipped at the rim
        return int(min(max(math.floor(t + 0.5), 1), n - 1)) - 1

    def lin(values: np.ndarray, t: float, periodic: bool = False) -> float:
        # interpolate along facet positions a + 1/2 (0-based)
        s = t - 0.5
        if periodic:
            a0 = math.floor(s) % K
            w = (s - math.floor(s))
            return (1.0 - w) * values[a0] + w * values[(a0 + 1) % K]
        a0 = int(min(max(math.floor(s), 0), values.shape[0] - 2))
        w = s - a0
        return (1.0 - w) * values[a0] + w * values[a0 + 1]

    # orientation slab k covers tt in [k - 1/2, k + 1/2), periodic (1-based k)
    kc = (int(math.floor(tt + 0.5)) - 1) % K
    jc = cell(t2, grid.n2)
    ic = cell(t1, grid.n1)

    v1 = lin(sigma.s1[kc, jc, :], t1)
    v2 = lin(sigma.s2[kc, :, ic], t2)
    vt = lin(sigma.st[:, jc, ic], tt, periodic=True)
    return np.array([v1, v2, vt])
