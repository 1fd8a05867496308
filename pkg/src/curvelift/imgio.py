"""8-bit grayscale image IO (PGM binary and PNG) mapped to [0, 1] floats."""

from __future__ import annotations

import numpy as np
from PIL import Image

__all__ = ["read_gray", "write_gray", "read_mask", "write_mask"]


def read_gray(path) -> np.ndarray:
    """Read a grayscale image as floats in [0, 1] (row = second spatial axis)."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=float)
    return arr / 255.0


def write_gray(path, u: np.ndarray) -> None:
    """Write floats in [0, 1] as an 8-bit grayscale PGM or PNG (by extension)."""
    q = np.rint(np.clip(np.asarray(u, dtype=float), 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(q, mode="L").save(path)


def read_mask(path) -> np.ndarray:
    """Read a mask image; True marks the free region (dark pixels, < 128)."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr < 128


def write_mask(path, free: np.ndarray) -> None:
    """Write a boolean mask; free pixels black, known pixels white."""
    q = np.where(np.asarray(free, dtype=bool), 0, 255).astype(np.uint8)
    Image.fromarray(q, mode="L").save(path)
