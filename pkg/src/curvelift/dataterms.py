"""Pixelwise data attachment terms and their proximal maps.

Each term G couples the solved image to a reference; the solver only ever
touches it through ``prox(v, tau) = argmin_u G(u) + |u - v|^2 / (2 tau)``
evaluated with a per-pixel step array ``tau``, plus ``value(u)`` for energy
reports and ``initial_image()`` for the starting point.
"""

from __future__ import annotations

import numpy as np

__all__ = ["InpaintTerm", "ForceBoxTerm", "L2Term", "L1Term"]

_EQ_TOL = 1e-12


def _as_image(arr, name: str) -> np.ndarray:
    a = np.asarray(arr, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2D array")
    return a


class InpaintTerm:
    """Equality constraint off the free region: u = reference outside ``free``.

    ``free`` marks the pixels left to the regularizer (the region to fill
    in); everything else is pinned.  The prox is independent of tau.
    """

    def __init__(self, reference, free):
        self.reference = _as_image(reference, "reference")
        self.free = np.asarray(free, dtype=bool)
        if self.free.shape != self.reference.shape:
            raise ValueError("free mask and reference must have the same shape")

    def prox(self, v, tau):
        return np.where(self.free, v, self.reference)

    def value(self, u) -> float:
        pinned = ~self.free
        if np.any(np.abs(u[pinned] - self.reference[pinned]) > _EQ_TOL):
            return np.inf
        return 0.0

    def initial_image(self) -> np.ndarray:
        return np.where(self.free, 0.5, self.reference)


class ForceBoxTerm:
    """Linear force toward the reference shape inside the box [0, 1]:

    G(u) = sum w * u + indicator(0 <= u <= 1),   w = weight * (1/2 - reference).

    Shrinks or grows level sets of a binary reference depending on the
    balance between ``weight`` and the curvature penalty.
    """

    def __init__(self, reference, weight: float):
        self.reference = _as_image(reference, "reference")
        self.weight = float(weight)
        self.w = self.weight * (0.5 - self.reference)

    def prox(self, v, tau):
        return np.clip(v - tau * self.w, 0.0, 1.0)

    def value(self, u) -> float:
        if np.any(u < -_EQ_TOL) or np.any(u > 1.0 + _EQ_TOL):
            return np.inf
        return float(np.sum(u * self.w))

    def initial_image(self) -> np.ndarray:
        return self.reference.copy()


class L2Term:
    """Quadratic attachment G(u) = weight/2 * sum (u - reference)^2."""

    def __init__(self, reference, weight: float):
        self.reference = _as_image(reference, "reference")
        if not weight > 0:
            raise ValueError("weight must be positive")
        self.weight = float(weight)

    def prox(self, v, tau):
        lt = tau * self.weight
        return (v + lt * self.reference) / (1.0 + lt)

    def value(self, u) -> float:
        return 0.5 * self.weight * float(np.sum((u - self.reference) ** 2))

    def initial_image(self) -> np.ndarray:
        return self.reference.copy()


class L1Term:
    """Robust attachment G(u) = weight * sum |u - reference| (soft threshold)."""

    def __init__(self, reference, weight: float):
        self.reference = _as_image(reference, "reference")
        if not weight > 0:
            raise ValueError("weight must be positive")
        self.weight = float(weight)

    def prox(self, v, tau):
        d = v - self.reference
        return self.reference + np.sign(d) * np.maximum(
            0.0, np.abs(d) - tau * self.weight
        )

    def value(self, u) -> float:
        return self.weight * float(np.sum(np.abs(u - self.reference)))

    def initial_image(self) -> np.ndarray:
        return self.reference.copy()
