"""Ready-made experiment setups: benchmark disk, noise, masks, field export.

These helpers build the problems the command line runs: the disk
completion benchmark whose converged diagnostics have known targets, noise
injection for denoising runs, random mask generators for inpainting, and a
CSV exporter for the converged face-averaged field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataterms import InpaintTerm
from .energy import EnergyDiagnostics, diagnostics
from .grid import (
    FluxField,
    GridSpec,
    divergence,
    divergence_adjoint,
    face_average,
    face_average_adjoint,
)
from .models import CurvatureModel
from .solver import ConvergenceReport, SolverConfig, init_state, solve

__all__ = [
    "make_disk_problem",
    "add_noise",
    "make_pixel_mask",
    "make_line_mask",
    "facet_pins_from_pixels",
    "export_field",
    "read_field",
    "DiskResult",
    "run_disk",
]


def make_disk_problem(
    n: int = 40, r: float = 10.0, band: float = 10.0
) -> tuple[np.ndarray, np.ndarray]:
    """Disk completion setup: known disk interior/exterior, free annulus.

    Pixels closer to the center than ``r - band/2`` are 1, pixels beyond
    ``r + band/2`` are 0, and the annulus between them is left free.
    Returns ``(u0, free_mask)`` on an ``n`` x ``n`` pixel grid.
    """
    if not 0 <= band / 2 < r:
        raise ValueError("band must be nonnegative and narrower than the disk")
    if r + band / 2 >= n / 2:
        raise ValueError("annulus does not fit inside the grid")
    x = np.arange(n) + 0.5
    cx = cy = n / 2.0
    d = np.hypot(x[None, :] - cx, x[:, None] - cy)
    u0 = np.where(d < r - band / 2, 1.0, 0.0)
    free = (d >= r - band / 2) & (d <= r + band / 2)
    u0[free] = 0.5
    return u0, free


def add_noise(img: np.ndarray, kind: str, level: float, seed: int = 0) -> np.ndarray:
    """Corrupt an image: ``gaussian`` (stddev ``level``, clipped to [0, 1])
    or ``salt-pepper`` (fraction ``level`` of pixels forced to 0 or 1)."""
    rng = np.random.default_rng(seed)
    img = np.asarray(img, dtype=float)
    if kind == "gaussian":
        return np.clip(img + rng.normal(0.0, level, img.shape), 0.0, 1.0)
    if kind == "salt-pepper":
        if not 0.0 <= level <= 1.0:
            raise ValueError("salt-pepper fraction must lie in [0, 1]")
        out = img.copy()
        npix = img.size
        hit = rng.choice(npix, size=round(level * npix), replace=False)
        values = rng.integers(0, 2, size=hit.size).astype(float)
        out.reshape(-1)[hit] = values
        return out
    raise ValueError(f"unknown noise kind {kind!r}")


def make_pixel_mask(shape: tuple[int, int], fraction: float, seed: int = 0) -> np.ndarray:
    """Random free mask removing the given fraction of pixels."""
    rng = np.random.default_rng(seed)
    free = np.zeros(shape, dtype=bool)
    npix = free.size
    hit = rng.choice(npix, size=round(fraction * npix), replace=False)
    free.reshape(-1)[hit] = True
    return free


def make_line_mask(shape: tuple[int, int], fraction: float, seed: int = 0) -> np.ndarray:
    """Random free mask removing the given fraction of image rows."""
    rng = np.random.default_rng(seed)
    free = np.zeros(shape, dtype=bool)
    rows = rng.choice(shape[0], size=round(fraction * shape[0]), replace=False)
    free[rows, :] = True
    return free


def facet_pins_from_pixels(region: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet pins from a pixel region: a facet is pinned when both pixels
    it separates lie inside the region."""
    region = np.asarray(region, dtype=bool)
    pin1 = region[:-1, :] & region[1:, :]
    pin2 = region[:, :-1] & region[:, 1:]
    return pin1, pin2


_FIELD_HEADER = "i,j,k,theta,sigma1,sigma2,sigma_theta"


def export_field(sigma: FluxField, grid: GridSpec, path) -> None:
    """Write the face-averaged field as CSV, one row per volume (1-based
    indices, slab center angle, three components; full float precision)."""
    hat = face_average(sigma, grid)
    K, J, I = grid.shape_volumes
    kk, jj, ii = np.meshgrid(
        np.arange(1, K + 1), np.arange(1, J + 1), np.arange(1, I + 1), indexing="ij"
    )
    theta = kk * grid.delta_theta
    with open(path, "w") as f:
        f.write(_FIELD_HEADER + "\n")
        rows = zip(
            ii.ravel(), jj.ravel(), kk.ravel(), theta.ravel(),
            hat[0].ravel(), hat[1].ravel(), hat[2].ravel(),
        )
        for i, j, k, th, a, b, c in rows:
            f.write("%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n" % (i, j, k, th, a, b, c))


def read_field(path) -> np.ndarray:
    """Read a field CSV back as a record array of its seven columns."""
    return np.loadtxt(path, delimiter=",", skiprows=1)


@dataclass
class DiskResult:
    u: np.ndarray
    sigma: FluxField
    report: ConvergenceReport
    diag: EnergyDiagnostics
    grid: GridSpec
    model: CurvatureModel


def _pinned(sigma: FluxField, pins) -> FluxField:
    out = sigma.copy()
    out.s1[:, pins.pin1] = 0.0
    out.s2[:, pins.pin2] = 0.0
    return out


def _ring_lift_seed(state, grid: GridSpec, cx: float, cy: float, r: float,
                    width: float = 1.5) -> None:
    """Initialize the flux with the lifted tangent field of a circle.

    Mass sits in a triangular radial bump of half-width ``width`` around
    radius ``r`` and, at each point, in the one or two orientation slabs
    closest to the local tangent direction (piecewise-linear angular hat,
    so the slab weights form an exact partition of unity).  The angular
    component carries the matching turning density 1/r.
    """
    dx, dt, K = grid.delta_x, grid.delta_theta, grid.ntheta

    def ring(rho):
        return np.maximum(0.0, 1.0 - np.abs(rho - r) / width) / width

    def hat(d):
        d = (d + np.pi) % (2.0 * np.pi) - np.pi
        return np.maximum(0.0, 1.0 - np.abs(d) / dt) / dt

    def density(x1, x2, theta, comp):
        rho = np.hypot(x1 - cx, x2 - cy)
        tang = np.arctan2(x2 - cy, x1 - cx) + np.pi / 2.0
        g = ring(rho) * hat(theta - tang)
        if comp == 0:
            return g * np.cos(theta)
        if comp == 1:
            return g * np.sin(theta)
        return g / r

    th = grid.theta_centers()
    a1 = (np.arange(grid.n1) + 0.5) * dx
    b1 = np.arange(1, grid.n2) * dx
    X1, Y1 = np.meshgrid(a1, b1)
    for c in range(K):
        state.sigma.s1[c] = density(X1, Y1, th[c], 0)
    a2 = np.arange(1, grid.n1) * dx
    b2 = (np.arange(grid.n2) + 0.5) * dx
    X2, Y2 = np.meshgrid(a2, b2)
    for c in range(K):
        state.sigma.s2[c] = density(X2, Y2, th[c], 1)
    Xt, Yt = np.meshgrid(a2, b1)
    for c in range(K):
        state.sigma.st[c] = density(Xt, Yt, (c + 0.5) * dt, 2)
    state.sigma.s1[:, state.pins.pin1] = 0.0
    state.sigma.s2[:, state.pins.pin2] = 0.0
    state.sigma_bar = state.sigma.copy()


def _make_divergence_free(state, grid: GridSpec, tol: float = 1e-10,
                          maxiter: int = 600) -> int:
    """Remove the flux's divergence by conjugate gradients on potentials.

    Solves ``div pin(div*) z = div sigma`` and subtracts ``pin(div* z)``,
    so the correction never touches pinned facets.  Returns the CG
    iteration count.
    """
    pins = state.pins
    b = divergence(_pinned(state.sigma, pins), grid)

    def amul(z):
        return divergence(_pinned(divergence_adjoint(z, grid), pins), grid)

    z = np.zeros_like(b)
    resid = b - amul(z)
    p = resid.copy()
    rs = float((resid * resid).sum())
    b0 = float(np.sqrt((b * b).sum())) + 1e-30
    done = 0
    for done in range(maxiter):
        ap = amul(p)
        step = rs / (float((p * ap).sum()) + 1e-300)
        z += step * p
        resid -= step * ap
        rs_new = float((resid * resid).sum())
        if np.sqrt(rs_new) / b0 < tol:
            break
        p = resid + (rs_new / rs) * p
        rs = rs_new
    corr = _pinned(divergence_adjoint(z, grid), pins)
    state.sigma = _pinned(
        FluxField(state.sigma.s1 - corr.s1, state.sigma.s2 - corr.s2,
                  state.sigma.st - corr.st),
        pins,
    )
    state.sigma_bar = state.sigma.copy()
    return done + 1


def _stationary_duals(state, grid: GridSpec, model: CurvatureModel,
                      act_tol: float = 1e-3) -> None:
    """Warm-start the multipliers so the angular-flux force vanishes.

    On cells where the seed carries spatial mass, the dual field takes the
    value that makes the seed's local curvature stationary; off-support
    values are chosen so each spatial column's angular sum cancels, which
    keeps the orientation-periodic potential single-valued.  The potential
    is then accumulated to balance the angular force exactly.
    """
    a, dt = model.alpha, grid.delta_theta
    hat = face_average(state.sigma, grid)
    sx1, sx2, stt = hat[0], hat[1], hat[2]
    s = np.hypot(sx1, sx2)
    active = s > act_tol
    ss = np.maximum(s, 1e-12)
    kap = np.where(active, stt / ss, 0.0)
    xit = np.where(active, 2.0 * a * a * kap, 0.0)
    n_off = active.shape[0] - active.sum(axis=0)
    col_sum = xit.sum(axis=0)
    off_val = np.where(n_off > 0, -col_sum / np.maximum(n_off, 1), 0.0)
    xit = np.where(active, xit, off_val[None, :, :])
    ds = 1.0 - a * a * kap * kap
    xi = np.stack([
        np.where(active, ds * sx1 / ss, 0.0),
        np.where(active, ds * sx2 / ss, 0.0),
        xit,
    ])
    state.xi = model.project_dual(state.theta, xi)
    force = face_average_adjoint(state.xi, grid).st
    inc = dt * force
    phi = np.cumsum(inc, axis=0)
    drift = phi[-1]
    k = np.arange(1, grid.ntheta + 1).reshape(-1, 1, 1)
    phi = phi - drift[None] * k / grid.ntheta
    phi -= phi.mean(axis=0, keepdims=True)
    state.phi = phi


def _interp_orientations(arr: np.ndarray, pos_c: np.ndarray,
                         pos_f: np.ndarray) -> np.ndarray:
    """Periodic linear interpolation along the orientation axis."""
    two_pi = 2.0 * np.pi
    pc = np.concatenate([pos_c - two_pi, pos_c, pos_c + two_pi])
    flat = arr.reshape(arr.shape[0], -1)
    ext = np.concatenate([flat, flat, flat], axis=0)
    out = np.empty((len(pos_f), flat.shape[1]))
    for col in range(flat.shape[1]):
        out[:, col] = np.interp(pos_f % two_pi, pc, ext[:, col])
    return out.reshape((len(pos_f),) + arr.shape[1:])


def _prolong_orientations(state_c, grid_c: GridSpec, grid_f: GridSpec,
                          config: SolverConfig, model: CurvatureModel):
    """Transfer a state to a finer orientation grid.

    All orientation-indexed fields move by periodic linear interpolation
    (slab quantities at slab centers, angular facets at facet angles); the
    image and the spatial edge duals copy over unchanged.  The interpolated
    dual field is re-projected so the finer problem starts feasible.
    """
    dt_c, dt_f = grid_c.delta_theta, grid_f.delta_theta
    slab_c = (np.arange(grid_c.ntheta) + 1.0) * dt_c
    slab_f = (np.arange(grid_f.ntheta) + 1.0) * dt_f
    fac_c = (np.arange(grid_c.ntheta) + 0.5) * dt_c
    fac_f = (np.arange(grid_f.ntheta) + 0.5) * dt_f

    state_f = init_state(state_c.u.copy(), grid_f, config)
    state_f.sigma.s1[:] = _interp_orientations(state_c.sigma.s1, slab_c, slab_f)
    state_f.sigma.s2[:] = _interp_orientations(state_c.sigma.s2, slab_c, slab_f)
    state_f.sigma.st[:] = _interp_orientations(state_c.sigma.st, fac_c, fac_f)
    state_f.sigma.s1[:, state_f.pins.pin1] = 0.0
    state_f.sigma.s2[:, state_f.pins.pin2] = 0.0
    state_f.sigma_bar = state_f.sigma.copy()
    state_f.u_bar = state_f.u.copy()
    state_f.phi[:] = _interp_orientations(state_c.phi, slab_c, slab_f)
    xi = np.stack([
        _interp_orientations(state_c.xi[c], slab_c, slab_f) for c in range(3)
    ])
    state_f.xi = model.project_dual(state_f.theta, xi)
    state_f.psi.e1[:] = state_c.psi.e1
    state_f.psi.e2[:] = state_c.psi.e2
    return state_f


def _ladder_levels(ntheta: int) -> list[int]:
    ks = []
    k = min(8, ntheta)
    while k < ntheta:
        ks.append(k)
        k *= 2
    ks.append(ntheta)
    return ks


def _ladder_budget(ntheta: int) -> int:
    # coarse levels build the field's angular mass, which moves slowly;
    # fine levels only polish what the transfer hands them
    if ntheta <= 16:
        return 150_000
    if ntheta <= 32:
        return 50_000
    return 40_000


def run_disk(
    n: int = 40,
    r: float = 10.0,
    band: float = 10.0,
    alpha: float = 10.0,
    ntheta: int = 64,
    kind: str = "tsc",
    config: SolverConfig | None = None,
    *,
    collect: dict | None = None,
) -> DiskResult:
    """Run the disk completion benchmark and collect its diagnostics.

    With the default ``config=None`` the solver is warm-started through an
    orientation ladder: the problem is first converged on a coarse
    orientation grid from a lifted-ring initialization, then moved to
    successively finer orientation grids by periodic interpolation.  A cold
    start at the target resolution builds the field's angular mass
    excruciatingly slowly; the ladder does that work at the cheap coarse
    levels, so the fine levels converge in a fraction of the iterations.
    The default budgets make the full ``ntheta=64`` benchmark take a few
    hundred thousand total iterations (minutes, not hours).

    Passing an explicit ``config`` skips the ladder and calls ``solve`` on
    the requested grid directly.  ``collect``, if given, receives a
    :class:`DiskResult` per ladder level keyed by its orientation count.
    """
    u0, free = make_disk_problem(n, r, band)
    model = CurvatureModel(kind, alpha)
    term = InpaintTerm(u0, free)
    if config is not None or not free.any():
        grid = GridSpec(n1=n, n2=n, ntheta=ntheta)
        u, sigma, report = solve(None, grid, model, term, config)
        diag = diagnostics(face_average(sigma, grid), grid)
        return DiskResult(u, sigma, report, diag, grid, model)

    cx = cy = n / 2.0
    state = None
    grid = None
    result = None
    for k in _ladder_levels(ntheta):
        grid_new = GridSpec(n1=n, n2=n, ntheta=k)
        leg = SolverConfig(
            max_iters=_ladder_budget(k), check_every=100,
            tol_div=1e-4, tol_consistency=1e-4,
        )
        if state is None:
            x1, x2 = grid_new.pixel_coords()
            rho = np.hypot(x1[None, :] - cx, x2[:, None] - cy)
            u_seed = np.where(free, np.where(rho < r, 1.0, 0.0), u0)
            state = init_state(u_seed, grid_new, leg)
            _ring_lift_seed(state, grid_new, cx, cy, r)
            _make_divergence_free(state, grid_new)
            _stationary_duals(state, grid_new, model)
        else:
            state = _prolong_orientations(state, grid, grid_new, leg, model)
        grid = grid_new
        u, sigma, report = solve(None, grid, model, term, leg, state=state)
        diag = diagnostics(face_average(sigma, grid), grid)
        result = DiskResult(u.copy(), sigma.copy(), report, diag, grid, model)
        if collect is not None:
            collect[k] = result
    return result
