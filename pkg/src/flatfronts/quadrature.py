"""Gauss-Legendre panel quadrature, quintic Hermite interpolation and cached
running integrals."""

import numpy as np

_RULES = {}


def _rule(order):
    if order not in _RULES:
        _RULES[order] = np.polynomial.legendre.leggauss(order)
    return _RULES[order]


def gauss_legendre(func, a, b, order=8):
    """Integrate ``func`` over [a, b] for arrays of endpoints.

    ``func`` maps an array of parameters of any shape to values of shape
    ``param.shape + value_shape``. Returns shape ``a.shape + value_shape``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = _rule(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * x
    vals = np.asarray(func(nodes), dtype=float)
    extra = vals.ndim - nodes.ndim
    wshape = (1,) * a.ndim + (order,) + (1,) * extra
    total = np.sum(vals * w.reshape(wshape), axis=a.ndim)
    return total * half.reshape(half.shape + (1,) * extra)


class CumulativeIntegral:
    """Running integral ``t -> int_origin^t func`` with a cached node table.

    Panel integrals between consecutive nodes are computed once; an
    evaluation adds a local Gauss-Legendre integral from the nearest node
    below ``t``. The node grid is refined by halving until the difference
    between two rule orders stays below ``tol``.
    """

    def __init__(self, func, t0, t1, origin=0.0, nodes=256, order=8, tol=1e-10,
                 max_nodes=1 << 15):
        if not t0 <= origin <= t1:
            raise ValueError(f"origin {origin} outside [{t0}, {t1}]")
        self.func = func
        self.order = order
        while True:
            grid = np.linspace(t0, t1, nodes + 1)
            lo, hi = grid[:-1], grid[1:]
            panels = gauss_legendre(func, lo, hi, order)
            fine = gauss_legendre(func, lo, hi, 2 * order)
            err = float(np.max(np.abs(np.sum(fine - panels, axis=0))))
            if err <= tol or nodes >= max_nodes:
                break
            nodes *= 2
        self.error_estimate = err
        self.nodes = grid
        cum = np.concatenate([np.zeros((1,) + panels.shape[1:]), np.cumsum(fine, axis=0)])
        self._table = cum
        self._shift = 0.0
        self._shift = self(np.asarray(origin))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, len(self.nodes) - 2)
        base = self._table[k]
        local = gauss_legendre(self.func, self.nodes[k], t, self.order)
        return base + local - self._shift

    @property
    def total(self):
        return self._table[-1]


def quintic_hermite(nodes, y, dy, ddy, t):
    """Evaluate piecewise quintic Hermite data of shape (N+1, ...) at t.

    ``nodes`` must be uniform; points outside are extrapolated from the end
    pieces.
    """
    t = np.asarray(t, dtype=float)
    h = nodes[1] - nodes[0]
    k = np.clip(np.floor((t - nodes[0]) / h).astype(int), 0, len(nodes) - 2)
    s = (t - nodes[k]) / h
    s2 = s * s
    s3 = s2 * s
    s4, s5 = s3 * s, s3 * s2
    H = [1 - 10 * s3 + 15 * s4 - 6 * s5,
         h * (s - 6 * s3 + 8 * s4 - 3 * s5),
         h * h * 0.5 * (s2 - 3 * s3 + 3 * s4 - s5),
         10 * s3 - 15 * s4 + 6 * s5,
         h * (-4 * s3 + 7 * s4 - 3 * s5),
         h * h * 0.5 * (s3 - 2 * s4 + s5)]
    extra = (1,) * (y.ndim - 1)
    H = [b.reshape(b.shape + extra) for b in H]
    return (H[0] * y[k] + H[1] * dy[k] + H[2] * ddy[k]
            + H[3] * y[k + 1] + H[4] * dy[k + 1] + H[5] * ddy[k + 1])


class SmoothRunningIntegral:
    """Running integral with a cached table and quintic Hermite interpolation.

    ``rate`` is the integrand and ``drate`` its derivative; both are
    evaluated only at the nodes, so lookups cost no integrand calls. The
    uniform node grid is halved until the Gauss-Legendre panel sums of two
    orders agree to ``tol``.
    """

    def __init__(self, rate, drate, t0, t1, origin=0.0, nodes=256, tol=1e-10,
                 max_nodes=1 << 15):
        if not t0 <= origin <= t1:
            raise ValueError(f"origin {origin} outside [{t0}, {t1}]")
        while True:
            grid = np.linspace(t0, t1, nodes + 1)
            lo, hi = grid[:-1], grid[1:]
            coarse = gauss_legendre(rate, lo, hi, 8)
            fine = gauss_legendre(rate, lo, hi, 16)
            err = float(np.max(np.abs(np.sum(fine - coarse, axis=0))))
            if err <= tol or nodes >= max_nodes:
                break
            nodes *= 2
        self.error_estimate = err
        self.nodes = grid
        self._y = np.concatenate([np.zeros((1,) + fine.shape[1:]), np.cumsum(fine, axis=0)])
        self._dy = np.asarray(rate(grid), dtype=float)
        self._ddy = np.asarray(drate(grid), dtype=float)
        self._shift = 0.0
        self._shift = self(np.asarray(origin))

    def __call__(self, t):
        return quintic_hermite(self.nodes, self._y, self._dy, self._ddy, t) - self._shift

    @property
    def total(self):
        return self._y[-1] - self._y[0]
