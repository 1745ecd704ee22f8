"""Numerical checks of flatness, Codazzi, bundle curvature and umbilicity.

All checks take a front (see :mod:`flatfronts.fronts`) and a batch of
parameter points of shape (..., n). Derivatives of ambient quantities are
taken by central finite differences and projected onto the bundle
E_f = nu^perp, so the connection is D_X s = (d_X s)^T.
"""

from dataclasses import dataclass

import numpy as np

from . import fd
from .errors import NotImmersed, SingularSample
from .fronts import ParallelFront, lift_metric

EPS_RANK = 1e-6
CODAZZI_FLOOR = 5e-5
REGULARIZE_DELTA = 0.1


def _points(p):
    p = np.asarray(p, dtype=float)
    return p[None] if p.ndim == 1 else p


def _svals(M):
    return np.linalg.svd(M, compute_uv=False)


def _rank(s, eps):
    return np.sum(s > eps * (1.0 + s[..., :1]), axis=-1)


# ---------------------------------------------------------------------------
# Rank profile


@dataclass
class RankProfile:
    """Singular values of dnu and df at each sample, sorted descending."""

    points: np.ndarray
    sv_dnu: np.ndarray
    sv_df: np.ndarray
    eps_rank: float

    @property
    def rank_dnu(self):
        return _rank(self.sv_dnu, self.eps_rank)

    @property
    def rank_df(self):
        return _rank(self.sv_df, self.eps_rank)

    @property
    def secondary(self):
        """Second singular value of dnu relative to 1 + the first."""
        if self.sv_dnu.shape[-1] < 2:
            return np.zeros(self.sv_dnu.shape[:-1])
        return self.sv_dnu[..., 1] / (1.0 + self.sv_dnu[..., 0])

    @property
    def max_secondary(self):
        if self.sv_dnu.shape[-1] < 2:
            return 0.0
        return float(np.max(self.sv_dnu[..., 1]))

    @property
    def flat(self):
        return bool(np.all(self.secondary < self.eps_rank))


def gauss_rank_profile(front, points, eps_rank=EPS_RANK, method="numerical"):
    """Rank profile of (df, dnu) with a flatness verdict.

    ``method="numerical"`` differentiates f and nu by finite differences,
    independent of any closed forms the front carries.
    """
    points = _points(points)
    if method == "numerical":
        J, N = fd.jacobian(front.f, points), fd.jacobian(front.nu, points)
    else:
        J, N = front.jacobian(points), front.dnu(points)
    return RankProfile(points, _svals(N), _svals(J), eps_rank)


def frontal_residual(front, points):
    """max |df(X) . nu| over coordinate fields X."""
    points = _points(points)
    J = fd.jacobian(front.f, points)
    return float(np.max(np.abs(np.einsum("...ij,...i->...j", J, front.nu(points)))))


def lift_min_singular_value(front, points):
    """Smallest singular value of d(f, nu); positive iff the lift is immersive."""
    points = _points(points)
    return float(np.min(_svals(fd.jacobian(front.lift, points))[..., -1]))


# ---------------------------------------------------------------------------
# Codazzi and R^D


def _tangential(nu, v):
    """Remove the nu component from vectors v of shape (..., m[, k])."""
    if v.ndim == nu.ndim:
        return v - np.sum(v * nu, axis=-1, keepdims=True) * nu
    return v - nu[..., :, None] * np.einsum("...i,...ik->...k", nu, v)[..., None, :]


def _require_immersed(front, points, tol):
    s = _svals(front.jacobian(points))
    bad = s[..., -1] < tol * (1.0 + s[..., 0])
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise SingularSample(f"rank(df) < n at {points[tuple(idx)]}; use the parallel front")


def codazzi_residual(front, points, h=1e-4, eps_rank=EPS_RANK):
    """max |D_X df(Y) - D_Y df(X)| over coordinate pairs, per point.

    df(Y) is the front's own Jacobian column, differentiated along X by
    second-order central differences and projected onto nu^perp.
    """
    points = _points(points)
    _require_immersed(front, points, eps_rank)
    n = points.shape[-1]
    nu = front.nu(points)
    eye = np.eye(n)
    # dJ[i] = d/dx_i of the Jacobian, shape (..., m, n)
    dJ = [(front.jacobian(points + h * eye[i]) - front.jacobian(points - h * eye[i])) / (2 * h)
          for i in range(n)]
    worst = np.zeros(points.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            diff = _tangential(nu, dJ[i][..., :, j] - dJ[j][..., :, i])
            worst = np.maximum(worst, np.linalg.norm(diff, axis=-1))
    return worst


class _Sections:
    """Orthonormal sections of nu^perp near a set of base points.

    Ambient basis vectors are projected onto nu^perp; the one most aligned
    with nu at the base point is dropped, the rest are Gram-Schmidt'ed. The
    choice is frozen per base point so the sections are smooth nearby.
    """

    def __init__(self, front, base):
        self.front = front
        nu = front.nu(base)
        m = nu.shape[-1]
        drop = np.argmax(np.abs(nu), axis=-1)
        keep = np.array([[k for k in range(m) if k != d] for d in drop.ravel()])
        self.C = np.eye(m)[keep].reshape(drop.shape + (m - 1, m))

    def __call__(self, q):
        nu = self.front.nu(q)
        C = np.broadcast_to(self.C, nu.shape[:-1] + self.C.shape[-2:])
        out = []
        for k in range(C.shape[-2]):
            v = _tangential(nu, C[..., k, :])
            for u in out:
                v = v - np.sum(v * u, axis=-1, keepdims=True) * u
            out.append(v / np.linalg.norm(v, axis=-1, keepdims=True))
        return np.stack(out, axis=-2)  # (..., n, m): sections as rows


def _connection_terms(front, points, h):
    """Sections, D_i s and D_i D_j s at the points via nested differences."""
    n = points.shape[-1]
    eye = np.eye(n)
    sec = _Sections(front, points)

    def D(j, q):
        ds = (sec(q + h * eye[j]) - sec(q - h * eye[j])) / (2 * h)
        nu = front.nu(q)[..., None, :]
        return ds - np.sum(ds * nu, axis=-1, keepdims=True) * nu

    nu0 = front.nu(points)[..., None, :]
    first = [D(j, points) for j in range(n)]
    second = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dd = (D(j, points + h * eye[i]) - D(j, points - h * eye[i])) / (2 * h)
            second[i, j] = dd - np.sum(dd * nu0, axis=-1, keepdims=True) * nu0
    return sec(points), first, second


def bundle_curvature_residual(front, points, h=1e-4, eps_rank=EPS_RANK):
    """max over coordinate pairs and sections of |R^D(X, Y) s|, per point."""
    points = _points(points)
    _require_immersed(front, points, eps_rank)
    _, _, second = _connection_terms(front, points, h)
    n = points.shape[-1]
    worst = np.zeros(points.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            R = second[i, j] - second[j, i]
            worst = np.maximum(worst, np.max(np.linalg.norm(R, axis=-1), axis=-1))
    return worst


@dataclass
class ConnectionSample:
    """Connection data of D on nu^perp at one point.

    ``gamma[i, a, b] = <D_i s_a, s_b>`` and ``curvature[i, j, a, b] =
    <R^D(d_i, d_j) s_a, s_b>`` for the frozen orthonormal sections s_a.
    """

    point: np.ndarray
    sections: np.ndarray
    gamma: np.ndarray
    curvature: np.ndarray
    metric_residual: float


def connection_sample(front, p, h=1e-4):
    p = np.asarray(p, dtype=float)
    n = p.shape[-1]
    pts = p[None]
    S, first, second = _connection_terms(front, pts, h)
    S = S[0]
    gamma = np.stack([np.einsum("ak,bk->ab", first[i][0], S) for i in range(n)])
    curv = np.zeros((n, n) + gamma.shape[1:])
    for i in range(n):
        for j in range(n):
            if i != j:
                curv[i, j] = np.einsum("ak,bk->ab", (second[i, j] - second[j, i])[0], S)
    # X<s_a, s_b> by differences vs <D_X s_a, s_b> + <s_a, D_X s_b>
    sec = _Sections(front, pts)
    eye = np.eye(n)
    worst = 0.0
    for i in range(n):
        Sp, Sm = sec(pts + h * eye[i])[0], sec(pts - h * eye[i])[0]
        lhs = (Sp @ Sp.T - Sm @ Sm.T) / (2 * h)
        worst = max(worst, float(np.max(np.abs(lhs - gamma[i] - gamma[i].T))))
    return ConnectionSample(p, S, gamma, curv, worst)


def regularized(check, front, points, delta=REGULARIZE_DELTA, eps_rank=EPS_RANK, **kw):
    """Evaluate ``check`` on f where it is immersive and on f + delta nu elsewhere."""
    points = _points(points)
    s = _svals(front.jacobian(points))
    bad = s[..., -1] < eps_rank * (1.0 + s[..., 0])
    out = np.empty(points.shape[:-1])
    if np.any(~bad):
        out[~bad] = check(front, points[~bad], eps_rank=eps_rank, **kw)
    if np.any(bad):
        out[bad] = check(ParallelFront(front, delta), points[bad], eps_rank=eps_rank, **kw)
    return out


# ---------------------------------------------------------------------------
# Umbilics and principal curvatures


@dataclass
class UmbilicResult:
    umbilic: bool
    pair: tuple
    smallest_singular_value: float

    @property
    def label(self):
        return "umbilic" if self.umbilic else "non-umbilic"


def classify_umbilic(front, p, tol=1e-6, method="numerical"):
    """Test for (d1, d2) != 0 with d1 df = d2 dnu.

    The two-column matrix [vec df | vec dnu] has such a kernel vector iff its
    smallest singular value vanishes; the right singular vector gives
    (d1, -d2); the pair is scaled so its largest entry is 1.
    """
    p = np.asarray(p, dtype=float)
    if method == "numerical":
        J, N = fd.jacobian(front.f, p), fd.jacobian(front.nu, p)
    else:
        J, N = front.jacobian(p), front.dnu(p)
    A = np.column_stack([J.ravel(), N.ravel()])
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    smin = float(s[-1])
    umb = smin <= tol * max(float(s[0]), 1e-300)
    pair = np.array([vt[-1, 0], -vt[-1, 1]])
    pair = pair / pair[np.argmax(np.abs(pair))]
    pair = (float(pair[0]) + 0.0, float(pair[1]) + 0.0)
    return UmbilicResult(bool(umb), pair, smin)


def shape_operator_eigenvalues(front, points, method="numerical", eps_rank=EPS_RANK):
    """Principal curvatures, sorted by decreasing magnitude.

    Solves II v = lambda I v with I = df.df and II = -df.dnu (symmetrized).
    """
    points = _points(points)
    if method == "numerical":
        J, N = fd.jacobian(front.f, points), fd.jacobian(front.nu, points)
    else:
        J, N = front.jacobian(points), front.dnu(points)
    s = _svals(J)
    bad = s[..., -1] < eps_rank * (1.0 + s[..., 0])
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise NotImmersed(f"rank(df) < n at {points[tuple(idx)]}")
    JT = np.swapaxes(J, -1, -2)
    first = JT @ J
    second = -JT @ N
    second = 0.5 * (second + np.swapaxes(second, -1, -2))
    L = np.linalg.cholesky(first)
    Li = np.linalg.inv(L)
    M = Li @ second @ np.swapaxes(Li, -1, -2)
    lam = np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))
    order = np.argsort(-np.abs(lam), axis=-1)
    return np.take_along_axis(lam, order, axis=-1)


def principal_curvatures_parallel(front, points, method="numerical"):
    """Principal curvatures of a parallel front f^delta.

    Any front is accepted; a plain front is treated as its own parallel at
    delta = 0.
    """
    if not isinstance(front, ParallelFront):
        front = ParallelFront(front, 0.0)
    return shape_operator_eigenvalues(front, points, method=method)


# ---------------------------------------------------------------------------
# Lift-metric geodesics


def lift_geodesic_residual(front, points, direction, h=1e-2):
    """Tangential acceleration of x -> L(p + x d) at x = 0, L = (f, nu).

    A curve on an immersed submanifold is a geodesic of the induced metric
    iff the tangential part of its acceleration vanishes.
    """
    points = _points(points)
    d = np.asarray(direction, dtype=float)
    acc = fd.second_derivative(lambda x: front.lift(points + x[..., None] * d),
                               np.zeros(points.shape[:-1]), h=h)
    Q, _ = np.linalg.qr(fd.jacobian(front.lift, points))
    tang = np.einsum("...ik,...k->...i", Q, np.einsum("...ik,...i->...k", Q, acc))
    return np.linalg.norm(tang, axis=-1)


def lift_christoffel(front, points, h=1e-3):
    """Christoffel symbols Gamma[..., k, i, j] of the numerically assembled lift metric."""
    points = _points(points)
    n = points.shape[-1]
    eye = np.eye(n)
    G = lift_metric(front, points)
    dG = np.stack([((lift_metric(front, points - 2 * h * eye[i])
                     - 8 * lift_metric(front, points - h * eye[i])
                     + 8 * lift_metric(front, points + h * eye[i])
                     - lift_metric(front, points + 2 * h * eye[i])) / (12 * h))
                   for i in range(n)], axis=-3)  # (..., l, a, b) = d_l g_ab
    # Gamma_{l,ij} = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    low = 0.5 * (np.einsum("...ilj->...lij", dG) + np.einsum("...jli->...lij", dG) - dG)
    return np.einsum("...kl,...lij->...kij", np.linalg.inv(G), low)


def intrinsic_geodesic_residual(front, points, direction, h=1e-3):
    """|Gamma(d, d)| for the straight coordinate line with velocity d."""
    d = np.asarray(direction, dtype=float)
    Gam = lift_christoffel(front, points, h=h)
    return np.linalg.norm(np.einsum("...kij,i,j->...k", Gam, d, d), axis=-1)
