"""Central finite differences for vectorized maps R^n -> R^m."""

import numpy as np

_STENCILS = {
    2: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    4: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
}


def jacobian(func, points, h=1e-3, order=4):
    """Jacobian of ``func`` at ``points`` (shape (..., n)) -> (..., m, n)."""
    points = np.asarray(points, dtype=float)
    offsets, weights = _STENCILS[order]
    n = points.shape[-1]
    eye = np.eye(n)
    # perturbed copies: (stencil, n, ..., n)
    shifted = (points[None, None]
               + (offsets[:, None, None] * h * eye)[(slice(None), slice(None))
                                                    + (None,) * (points.ndim - 1)])
    vals = np.asarray(func(shifted))
    deriv = np.tensordot(weights, vals, axes=(0, 0)) / h  # (n, ..., m)
    return np.moveaxis(deriv, 0, -1)


def derivative(func, x, h=1e-3, order=4):
    """Derivative of a vector-valued function of a scalar array argument."""
    x = np.asarray(x, dtype=float)
    offsets, weights = _STENCILS[order]
    vals = np.stack([np.asarray(func(x + o * h)) for o in offsets])
    return np.tensordot(weights, vals, axes=(0, 0)) / h


def second_derivative(func, x, h=1e-2):
    """Fourth-order central second derivative along a scalar argument."""
    x = np.asarray(x, dtype=float)
    offs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    w = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    vals = np.stack([np.asarray(func(x + o * h)) for o in offs])
    return np.tensordot(w, vals, axes=(0, 0)) / h**2
