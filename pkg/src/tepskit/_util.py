"""Small shared numeric helpers."""

from __future__ import annotations

import math

import numpy as np


def wrap_half_pi(x):
    """Map an angle (or array) to the principal branch (-pi/2, pi/2]."""
    y = np.mod(np.asarray(x, dtype=float) + 0.5 * math.pi, math.pi) - 0.5 * math.pi
    y = np.where(y == -0.5 * math.pi, 0.5 * math.pi, y)
    return float(y) if y.ndim == 0 else y


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n points (n odd) with spacing h."""
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson rule needs an odd number of points >= 3")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)
