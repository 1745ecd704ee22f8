"""Bishop (parallel normal) frames along unit-speed spherical curves.

The frame {e_2, ..., e_n} spans the normal bundle (gamma')^perp inside
gamma^perp and satisfies e_j' = -mu_j e with e = gamma'. With gamma and its
derivatives known, transport reduces to the linear ODE

    E'(t) = -gamma'(t) (gamma''(t)^T E(t)),

whose columns are the e_j. mu_j = gamma'' . e_j is read off pointwise.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BadInitialFrame, FrameDriftExceeded
from .quadrature import quintic_hermite


def default_initial_frame(curve, t0):
    """Orthonormal basis of gamma(t0)^perp ∩ gamma'(t0)^perp, as columns.

    Ambient basis vectors are projected and Gram-Schmidt'ed in index order;
    a vector is kept only if its residual norm exceeds 0.1, which avoids
    ill-conditioned directions while staying deterministic. The last column
    is flipped if needed so that det[gamma, gamma', e_2, ..., e_n] > 0.
    """
    jet = curve.jet(np.asarray(t0, dtype=float), 1)
    g, e = jet[0], jet[1] / np.linalg.norm(jet[1])
    dim = curve.ambient_dim
    basis = [g, e]
    for k in range(dim):
        v = np.zeros(dim)
        v[k] = 1.0
        for b in basis:
            v = v - (v @ b) * b
        norm = np.linalg.norm(v)
        if norm > 0.1:
            v = v / norm
            # second pass keeps GS accurate to rounding
            for b in basis:
                v = v - (v @ b) * b
            basis.append(v / np.linalg.norm(v))
        if len(basis) == dim:
            break
    full = np.column_stack(basis)
    if np.linalg.det(full) < 0:
        full[:, -1] *= -1
    return full[:, 2:]


def _orthonormal_residual(E):
    m = E.shape[-1]
    return float(np.max(np.abs(np.swapaxes(E, -1, -2) @ E - np.eye(m))))


@dataclass
class BishopFrame:
    """Sampled Bishop frame with smooth interpolation.

    ``frames[k]`` holds e_2..e_n as columns at ``nodes[k]``. Evaluation
    between nodes uses quintic Hermite interpolation built from the exact
    ODE derivatives at the nodes.
    """

    curve: object
    nodes: np.ndarray
    frames: np.ndarray
    max_correction: float
    orthonormality_residual: float
    error_estimate: float
    holonomy: np.ndarray = None
    _d1: np.ndarray = field(default=None, repr=False)
    _d2: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        jet = self.curve.jet(self.nodes, 3)
        mu = np.einsum("ki,kij->kj", jet[2], self.frames)
        dmu = (np.einsum("ki,kij->kj", jet[3], self.frames)
               - mu * np.einsum("ki,ki->k", jet[2], jet[1])[:, None])
        self._d1 = -jet[1][:, :, None] * mu[:, None, :]
        self._d2 = -jet[2][:, :, None] * mu[:, None, :] - jet[1][:, :, None] * dmu[:, None, :]

    @property
    def n(self):
        return self.curve.n

    @property
    def t_span(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    @property
    def holonomy_angle(self):
        """Largest rotation angle of the frame mismatch after one period."""
        if self.holonomy is None:
            return None
        eig = np.linalg.eigvals(self.holonomy)
        return float(np.max(np.abs(np.angle(eig))))

    def frame(self, t):
        """Columns e_2..e_n at t: shape t.shape + (n+1, n-1)."""
        return quintic_hermite(self.nodes, self.frames, self._d1, self._d2, t)

    def mu(self, t):
        """Bishop functions mu_j(t) = gamma''(t) . e_j(t), shape t.shape + (n-1,)."""
        t = np.asarray(t, dtype=float)
        d2 = self.curve.derivative(t, 2)
        return np.einsum("...i,...ij->...j", d2, self.frame(t))

    def dmu(self, t):
        t = np.asarray(t, dtype=float)
        jet = self.curve.jet(t, 3)
        E = self.frame(t)
        mu = np.einsum("...i,...ij->...j", jet[2], E)
        return (np.einsum("...i,...ij->...j", jet[3], E)
                - mu * np.einsum("...i,...i", jet[2], jet[1])[..., None])

    def dframe(self, t):
        """e_j'(t) = -mu_j(t) gamma'(t), shape t.shape + (n+1, n-1)."""
        t = np.asarray(t, dtype=float)
        d1 = self.curve.derivative(t, 1)
        return -d1[..., :, None] * self.mu(t)[..., None, :]

    def kappa(self, t):
        return curvature_from_bishop(self, t)


def _rk4_propagators(curve, t0, t1, steps):
    """One-step RK4 maps M_k with E_{k+1} = M_k E_k for the linear transport ODE."""
    h = (t1 - t0) / steps
    half = np.linspace(t0, t1, 2 * steps + 1)
    jet = curve.jet(half, 2)
    A = -jet[1][:, :, None] * jet[2][:, None, :]
    A1, A2, A4 = A[0:-1:2], A[1::2], A[2::2]
    eye = np.eye(curve.ambient_dim)
    M2 = A2 @ (eye + 0.5 * h * A1)
    M3 = A2 @ (eye + 0.5 * h * M2)
    M4 = A4 @ (eye + h * M3)
    M = eye + (h / 6.0) * (A1 + 2 * M2 + 2 * M3 + M4)
    g, e = jet[0][::2], jet[1][::2]
    P = eye - g[:, :, None] * g[:, None, :] - e[:, :, None] * e[:, None, :]
    return np.linspace(t0, t1, steps + 1), M, P


def _transport(curve, E0, t0, t1, steps, tol):
    nodes, M, P = _rk4_propagators(curve, t0, t1, steps)
    m = E0.shape[1]
    out = np.empty((steps + 1,) + E0.shape)
    out[0] = E0
    E = E0
    worst = 0.0
    eye = np.eye(m)
    for k in range(steps):
        stepped = M[k] @ E
        # project onto gamma^perp ∩ e^perp, then one Newton-Schulz polar step
        proj = P[k + 1] @ stepped
        E = proj @ (1.5 * eye - 0.5 * (proj.T @ proj))
        corr = float(np.max(np.abs(E - stepped)))
        if corr > worst:
            worst = corr
            if corr > tol:
                raise FrameDriftExceeded(
                    f"re-orthonormalization correction {corr:.3e} > {tol:.3e} at t={nodes[k + 1]:.6g}")
        out[k + 1] = E
    return nodes, out, worst


def integrate_bishop_frame(curve, initial_frame=None, tol=1e-8, t_span=None,
                           rtol=1e-11, min_steps=512, max_steps=1 << 16):
    """Integrate a Bishop frame along a unit-speed spherical curve.

    ``initial_frame`` holds e_2..e_n at the start of ``t_span`` as rows (or an
    (n+1, n-1) column matrix). Step count is doubled until two successive
    RK4 solutions agree to ``rtol``; ``tol`` bounds the per-step
    re-orthonormalization correction.
    """
    if not curve.is_unit_speed:
        raise ValueError("Bishop frames need a unit-speed curve; reparametrize first")
    n = curve.n
    if n < 2:
        raise ValueError("normal bundle is trivial for n < 2")
    t0, t1 = (curve.domain if t_span is None else (float(t_span[0]), float(t_span[1])))
    if initial_frame is None:
        E0 = default_initial_frame(curve, t0)
    else:
        E0 = np.asarray(initial_frame, dtype=float)
        if E0.ndim == 1:
            E0 = E0[None, :]
        if E0.shape == (n - 1, n + 1):
            E0 = E0.T
        if E0.shape != (n + 1, n - 1):
            raise BadInitialFrame(f"initial frame must hold {n - 1} vectors in R^{n + 1}")
        jet = curve.jet(np.asarray(t0), 1)
        checks = np.concatenate([(E0.T @ E0 - np.eye(n - 1)).ravel(),
                                 jet[0] @ E0, jet[1] @ E0])
        if np.max(np.abs(checks)) > 1e-10:
            raise BadInitialFrame(f"initial frame fails orthogonality by {np.max(np.abs(checks)):.3e}")
    span = t1 - t0
    steps = max(min_steps, int(np.ceil(span / 0.01)))
    nodes, coarse, worst = _transport(curve, E0, t0, t1, steps, tol)
    while True:
        fine_nodes, fine, worst = _transport(curve, E0, t0, t1, 2 * steps, tol)
        err = float(np.max(np.abs(fine[::2] - coarse)))
        steps *= 2
        if err <= rtol or 2 * steps > max_steps:
            break
        coarse = fine
    jet = curve.jet(fine_nodes, 1)
    full = np.concatenate([jet[0][:, :, None], jet[1][:, :, None], fine], axis=2)
    residual = _orthonormal_residual(full)
    holonomy = None
    if curve.is_periodic and abs(span - curve.period) < 1e-9 * max(1.0, span):
        holonomy = fine[0].T @ fine[-1]
    return BishopFrame(curve, fine_nodes, fine, worst, residual, err, holonomy)


def curvature_from_bishop(frame, t):
    """kappa_gamma(t) = sqrt(sum_j mu_j(t)^2)."""
    return np.linalg.norm(frame.mu(t), axis=-1)


class TwistedFrame:
    """A non-Bishop orthonormal normal frame: the Bishop frame with its first
    two vectors rotated by angle ``rate * t``. Needs n >= 3."""

    def __init__(self, bishop, rate):
        if bishop.n < 3:
            raise ValueError("twisting needs at least two normal vectors")
        self.bishop = bishop
        self.curve = bishop.curve
        self.nodes = bishop.nodes
        self.rate = float(rate)

    @property
    def n(self):
        return self.curve.n

    @property
    def t_span(self):
        return self.bishop.t_span

    def _rotation(self, t):
        m = self.n - 1
        th = self.rate * np.asarray(t, dtype=float)
        R = np.broadcast_to(np.eye(m), th.shape + (m, m)).copy()
        dR = np.zeros_like(R)
        c, s = np.cos(th), np.sin(th)
        R[..., 0, 0], R[..., 0, 1], R[..., 1, 0], R[..., 1, 1] = c, -s, s, c
        dR[..., 0, 0], dR[..., 0, 1], dR[..., 1, 0], dR[..., 1, 1] = -s, -c, c, -s
        return R, dR * self.rate

    def frame(self, t):
        R, _ = self._rotation(t)
        return self.bishop.frame(t) @ R

    def dframe(self, t):
        R, dR = self._rotation(t)
        return self.bishop.dframe(t) @ R + self.bishop.frame(t) @ dR

    def mu(self, t):
        d2 = self.curve.derivative(np.asarray(t, dtype=float), 2)
        return np.einsum("...i,...ij->...j", d2, self.frame(t))
