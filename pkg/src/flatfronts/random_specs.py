"""Seeded random scene configurations for property tests.

Curves are Fourier perturbations of a great circle followed by a random
rotation; densities are random whitelisted expressions. Everything is
returned as a plain config dict so it goes through the same parsing as
files on disk.
"""

import numpy as np

from .density import trig_expression


def random_rotation(rng, dim):
    Q, R = np.linalg.qr(rng.normal(size=(dim, dim)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_fourier_curve(rng, n, harmonics=3, amplitude=0.15):
    """Config dict for a perturbed great circle in S^n."""
    dim = n + 1
    cos = np.zeros((harmonics, dim))
    sin = np.zeros((harmonics, dim))
    cos[0, 0], sin[0, 1] = 1.0, 1.0
    cos += amplitude * rng.uniform(-1, 1, size=cos.shape) / np.arange(1, harmonics + 1)[:, None]
    sin += amplitude * rng.uniform(-1, 1, size=sin.shape) / np.arange(1, harmonics + 1)[:, None]
    c0 = amplitude * rng.uniform(-1, 1, size=dim)
    return {"preset": "fourier", "c0": c0.tolist(), "cos": cos.tolist(), "sin": sin.tolist(),
            "rotation": random_rotation(rng, dim).tolist()}


def random_density(rng, harmonics=2, scale=1.0, offset=None, polynomial=True):
    """Random whitelisted expression: trig polynomial, optionally plus c t^2."""
    c0 = rng.uniform(-0.5, 0.5) * scale if offset is None else offset
    cos = (rng.uniform(-1, 1, harmonics) * scale / np.arange(1, harmonics + 1)).round(6)
    sin = (rng.uniform(-1, 1, harmonics) * scale / np.arange(1, harmonics + 1)).round(6)
    text = trig_expression(round(float(c0), 6), cos, sin)
    if polynomial:
        text += f" + {round(float(rng.uniform(-0.05, 0.05)), 6)!r}*t**2"
    return text


def random_flat_config(rng, n, grid=(16, 4)):
    return {"kind": "flat", "n": int(n), "curve": random_fourier_curve(rng, n),
            "density": random_density(rng),
            "grid": {"t": grid[0], "w": grid[1], "w_range": 1.5}}


def random_general_config(rng, n, grid=(16, 4)):
    return {"kind": "general", "n": int(n), "curve": random_fourier_curve(rng, n),
            "densities": [random_density(rng, polynomial=False) for _ in range(n)],
            "grid": {"t": grid[0], "w": grid[1]}}


def cylinder_config(rng, n):
    """Great circle (kappa = 0) and a density bounded away from zero."""
    sign = 1.0 if rng.uniform() < 0.5 else -1.0
    amps = rng.uniform(-0.3, 0.3, 2)
    text = trig_expression(sign * round(float(rng.uniform(1.0, 2.0)), 6),
                           [round(float(amps[0]), 6)], [round(float(amps[1]), 6)])
    return {"kind": "flat", "n": int(n),
            "curve": {"preset": "great_circle", "rotation": random_rotation(rng, n + 1).tolist()},
            "density": text, "grid": {"t": 16, "w": 4, "w_range": 2.0}}
