"""Convex curvature penalties and their lifted dual sets.

A model is a convex, even cost ``f`` on curvature values with ``f(0) = 1``:

    tac   f(t) = 1 + alpha*|t|          total absolute curvature
    trv   f(t) = sqrt(1 + alpha^2 t^2)  length-curvature mixed norm
    tsc   f(t) = 1 + alpha^2 t^2        total squared curvature

The lifted integrand ``h(theta, p)`` of a 3-vector ``p = (p_x, p_t)``
charges ``|p_x| * f(p_t / |p_x|)`` when the spatial part ``p_x`` points
along the unit direction ``(cos theta, sin theta)``, the recession cost
``f^inf(p_t)`` when ``p_x = 0``, and ``+inf`` otherwise.  It is the support
function of the convex dual set

    H(theta) = { xi : xi_x . (cos theta, sin theta) <= -f*(xi_t) },

whose 2D cross-section in the ``(aligned, angular)`` plane is

    tac   { s <= 1,  |t| <= alpha }
    trv   { max(0, s)^2 + (t/alpha)^2 <= 1 }
    tsc   { s + (t/(2 alpha))^2 <= 1 }.

:meth:`CurvatureModel.project_profile` computes the exact Euclidean
projection onto the cross-section (closed forms for tac and for trv with
alpha = 1, otherwise a monotone Newton iteration on the normal equation),
and :meth:`CurvatureModel.project_dual` lifts it back to 3D.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["CurvatureModel", "MODEL_KINDS"]

MODEL_KINDS = ("tac", "trv", "tsc")

# Newton solves for the projection multiplier: the residual is monotone and
# convex in the multiplier, so iteration from 0 converges from below.  Far
# from the profile the multiplier grows geometrically (ratio 3/2 per step),
# so the cap must cover log_{1.5} of the largest input magnitude; 200 covers
# anything representable in double precision.
_NEWTON_TOL = 1e-13
_NEWTON_MAX = 200
_BISECT_MAX = 200


@dataclass(frozen=True)
class CurvatureModel:
    """One of the three curvature penalties, with its weight ``alpha``."""

    kind: str
    alpha: float

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    # ------------------------------------------------------------------ costs

    def cost(self, t):
        """Curvature cost f(t); vectorized."""
        t = np.asarray(t, dtype=float)
        a = self.alpha
        if self.kind == "tac":
            return 1.0 + a * np.abs(t)
        if self.kind == "trv":
            return np.sqrt(1.0 + (a * t) ** 2)
        return 1.0 + (a * t) ** 2

    def conjugate(self, s):
        """Convex conjugate f*(s); +inf outside its domain for tac/trv."""
        s = np.asarray(s, dtype=float)
        a = self.alpha
        if self.kind == "tac":
            return np.where(np.abs(s) <= a, -1.0, np.inf)
        if self.kind == "trv":
            inside = np.abs(s) <= a
            val = -np.sqrt(np.maximum(0.0, 1.0 - (s / a) ** 2))
            return np.where(inside, val, np.inf)
        return (s / (2.0 * a)) ** 2 - 1.0

    def recession(self, t):
        """Recession cost f^inf(t) = lim f(r t)/r; the charge at zero spatial part."""
        t = np.asarray(t, dtype=float)
        a = self.alpha
        if self.kind in ("tac", "trv"):
            return a * np.abs(t)
        return np.where(t == 0.0, 0.0, np.inf)

    def growth_gamma(self) -> float:
        """Coefficient of the bound f(t) >= gamma * sqrt(1 + t^2).

        For tac/tsc the value 1 is valid when alpha >= 1, which covers every
        run this library performs by default.
        """
        if self.kind == "trv":
            return min(1.0, self.alpha)
        return 1.0

    # --------------------------------------------------------- lifted integrand

    def h_value(self, theta: float, p, align_tol: float = 1e-12) -> float:
        """Lifted integrand h(theta, p) for a single 3-vector p.

        Returns +inf when the spatial part is not (within ``align_tol``,
        relative) a nonnegative multiple of (cos theta, sin theta).
        """
        p = np.asarray(p, dtype=float)
        if p.shape != (3,):
            raise ValueError("p must be a 3-vector")
        px, py, pt = p
        nx = math.hypot(px, py)
        if nx == 0.0:
            return float(self.recession(pt))
        ct, st = math.cos(theta), math.sin(theta)
        along = px * ct + py * st
        across = -px * st + py * ct
        if abs(across) > align_tol * nx or along < -align_tol * nx:
            return math.inf
        return float(self.aligned_value(nx, pt))

    def aligned_value(self, s, t):
        """h for an aligned argument: s >= 0 along the orientation, t angular."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        a = self.alpha
        if self.kind == "tac":
            return s + a * np.abs(t)
        if self.kind == "trv":
            return np.hypot(s, a * t)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(s > 0.0, (a * t) ** 2 / np.where(s > 0.0, s, 1.0), 0.0)
        return np.where(
            s > 0.0, s + ratio, np.where(t == 0.0, 0.0, np.inf)
        )

    # ------------------------------------------------------------- projections

    def profile_violation(self, s, t):
        """How far (in constraint units) (s, t) sits outside the 2D profile."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        a = self.alpha
        if self.kind == "tac":
            return np.maximum(0.0, np.maximum(s - 1.0, np.abs(t) - a))
        if self.kind == "trv":
            return np.maximum(0.0, np.maximum(0.0, s) ** 2 + (t / a) ** 2 - 1.0)
        return np.maximum(0.0, s + (t / (2.0 * a)) ** 2 - 1.0)

    def project_profile(self, s, t):
        """Euclidean projection of (s, t) onto the 2D profile; vectorized."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        s, t = np.broadcast_arrays(s, t)
        if self.kind == "tac":
            return np.minimum(s, 1.0), np.clip(t, -self.alpha, self.alpha)
        if self.kind == "trv":
            return _project_trv(s, t, self.alpha)
        return _project_tsc(s, t, self.alpha)

    def project_dual(self, theta, eta):
        """Euclidean projection of 3-vectors ``eta`` onto H(theta).

        ``eta`` has shape ``(3,) + base``; ``theta`` broadcasts against
        ``base``.  Only the spatial component along the orientation moves;
        the transverse component is already optimal.
        """
        eta = np.asarray(eta, dtype=float)
        if eta.shape[0] != 3:
            raise ValueError("eta must have a leading axis of size 3")
        ct, st = np.cos(theta), np.sin(theta)
        along = eta[0] * ct + eta[1] * st
        ps, pt = self.project_profile(along, eta[2])
        d = along - ps
        out = np.empty(np.broadcast_shapes(eta.shape, (3,) + np.shape(d)))
        out[0] = eta[0] - ct * d
        out[1] = eta[1] - st * d
        out[2] = pt
        return out

    def support_gap(self, theta: float, p, xi, feas_tol: float = 1e-9) -> float:
        """Slack h(theta, p) - <xi, p> for a dual point xi in H(theta).

        Nonnegative for every feasible ``xi`` since h is the support
        function of H(theta); raises if ``xi`` is infeasible beyond
        ``feas_tol`` or if h is infinite at ``p``.
        """
        p = np.asarray(p, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if p.shape != (3,) or xi.shape != (3,):
            raise ValueError("p and xi must be 3-vectors")
        along = xi[0] * math.cos(theta) + xi[1] * math.sin(theta)
        if float(self.profile_violation(along, xi[2])) > feas_tol:
            raise ValueError("xi lies outside the dual set")
        h = self.h_value(theta, p)
        if math.isinf(h):
            raise ValueError("h is infinite at p; the gap is undefined")
        return h - float(xi @ p)


def _project_trv(s, t, alpha, force_newton: bool = False):
    """Projection onto { max(0,s)^2 + (t/alpha)^2 <= 1 }."""
    ps, pt = s.copy(), t.copy()
    outside = np.maximum(0.0, s) ** 2 + (t / alpha) ** 2 > 1.0
    # nonpositive aligned part: the set is a full strip there, clamp t
    strip = outside & (s <= 0.0)
    pt[strip] = np.clip(t[strip], -alpha, alpha)
    curve = outside & (s > 0.0)
    if np.any(curve):
        so, to = s[curve], t[curve]
        if alpha == 1.0 and not force_newton:
            # the profile is the unit disk capped to s > 0: normalize
            r = np.hypot(so, to)
            ps[curve] = so / r
            pt[curve] = to / r
        else:
            lam = _trv_multiplier(so, to, alpha)
            ps[curve] = so / (1.0 + 2.0 * lam)
            pt[curve] = to / (1.0 + 2.0 * lam / alpha**2)
    return ps, pt


def _trv_multiplier(s, t, alpha):
    """Root of psi(lam) = (s/(1+2 lam))^2 + (t/(alpha+2 lam/alpha))^2 - 1.

    psi is convex and strictly decreasing on lam >= 0 with psi(0) > 0 for
    points outside the profile, so Newton from 0 increases monotonically to
    the unique root.
    """
    a2 = alpha * alpha
    lam = np.zeros_like(s)
    val = np.empty_like(s)
    for _ in range(_NEWTON_MAX):
        d1 = 1.0 + 2.0 * lam
        d2 = 1.0 + 2.0 * lam / a2
        q1 = s / d1
        q2 = t / (alpha * d2)
        val = q1 * q1 + q2 * q2 - 1.0
        if np.all(np.abs(val) < _NEWTON_TOL):
            break
        deriv = -4.0 * q1 * q1 / d1 - (4.0 / a2) * q2 * q2 / d2
        step = val / deriv
        lam = np.maximum(lam - step, 0.0)
    else:
        bad = np.abs(val) >= _NEWTON_TOL
        lam[bad] = _bisect(
            lambda x: (s[bad] / (1.0 + 2.0 * x)) ** 2
            + (t[bad] / (alpha * (1.0 + 2.0 * x / a2))) ** 2
            - 1.0,
            np.zeros(int(bad.sum())),
            _trv_upper_bound(s[bad], t[bad], alpha),
        )
    return lam


def _trv_upper_bound(s, t, alpha):
    # both squared terms drop below 1/2 once the denominators pass sqrt(2)*num
    b1 = 0.5 * (math.sqrt(2.0) * np.abs(s) - 1.0)
    b2 = 0.5 * alpha * (math.sqrt(2.0) * np.abs(t) - alpha)
    return np.maximum(0.0, np.maximum(b1, b2)) + 1.0


def _project_tsc(s, t, alpha):
    """Projection onto { s + (t/(2 alpha))^2 <= 1 }."""
    ps, pt = s.copy(), t.copy()
    a2 = alpha * alpha
    c = s + (t / (2.0 * alpha)) ** 2 - 1.0
    outside = c > 0.0
    if np.any(outside):
        so, to = s[outside], t[outside]
        lam = _tsc_multiplier(so, to, alpha)
        ps[outside] = so - lam
        pt[outside] = to / (1.0 + lam / (2.0 * a2))
    return ps, pt


def _tsc_multiplier(s, t, alpha):
    """Root of phi(lam) = s - lam + (t/(2 alpha (1 + lam/(2 alpha^2))))^2 - 1.

    Convex, strictly decreasing (phi' <= -1), phi(0) > 0 outside the
    profile: Newton from 0 converges monotonically from below.
    """
    a2 = alpha * alpha
    lam = np.zeros_like(s)
    val = np.empty_like(s)
    for _ in range(_NEWTON_MAX):
        d = 1.0 + lam / (2.0 * a2)
        q = t / (2.0 * alpha * d)
        val = s - lam + q * q - 1.0
        if np.all(np.abs(val) < _NEWTON_TOL):
            break
        deriv = -1.0 - q * q / (a2 * d)
        lam = np.maximum(lam - val / deriv, 0.0)
    else:
        bad = np.abs(val) >= _NEWTON_TOL
        hi = s[bad] + (t[bad] / (2.0 * alpha)) ** 2 - 1.0  # phi(hi) <= 0
        lam[bad] = _bisect(
            lambda x: s[bad]
            - x
            + (t[bad] / (2.0 * alpha * (1.0 + x / (2.0 * a2)))) ** 2
            - 1.0,
            np.zeros(int(bad.sum())),
            hi,
        )
    return lam


def _bisect(fun, lo, hi):
    """Vectorized bisection on [lo, hi] with fun(lo) > 0 > fun(hi)."""
    warnings.warn("projection Newton did not converge; falling back to bisection")
    for _ in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        pos = fun(mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)
