"""Flat fronts from representation data.

Parameters are stacked as the last axis of an array: ``p[..., 0]`` is t and
``p[..., 1:]`` are w_2..w_n (or v for Murata-Umehara fronts). Every front
provides ``f``, ``nu`` and their analytic Jacobians ``jacobian`` and ``dnu``
with shape ``(..., n+1, n)``.
"""

from dataclasses import dataclass
import warnings

import numpy as np

from . import fd
from .density import Density
from .errors import InflectionPoint, NotBishopFrame
from .quadrature import CumulativeIntegral, SmoothRunningIntegral
from .sphere_curves import inflection_points

CLOSURE_THRESHOLD = 1e-9


class Front:
    """Common interface; subclasses implement f, nu, jacobian, dnu."""

    n: int
    ambient_dim: int
    t_span = (-np.inf, np.inf)
    t_period = None

    def f(self, p):
        raise NotImplementedError

    def nu(self, p):
        raise NotImplementedError

    def jacobian(self, p):
        return fd.jacobian(self.f, p)

    def dnu(self, p):
        return fd.jacobian(self.nu, p)

    def lift(self, p):
        """Legendrian lift L = (f, nu) in R^{2n+2}."""
        return np.concatenate([self.f(p), self.nu(p)], axis=-1)


def grid_points(t, w_axes):
    """Cartesian parameter grid: t values times one value array per w axis.

    Returns an array of shape (len(t), prod(len(w)), n) so rows are t-slices.
    """
    t = np.asarray(t, dtype=float)
    axes = [np.asarray(w, dtype=float) for w in w_axes]
    if axes:
        mesh = np.meshgrid(*axes, indexing="ij")
        w = np.stack([m.ravel() for m in mesh], axis=-1)
    else:
        w = np.zeros((1, 0))
    out = np.empty((len(t), len(w), 1 + len(axes)))
    out[..., 0] = t[:, None]
    out[..., 1:] = w[None]
    return out


# ---------------------------------------------------------------------------
# Normal form


@dataclass
class FlatFrontSpec:
    """Unit-speed curve gamma in S^n, a normal frame along it, density a(t).

    ``shift`` is set by :func:`normal_form_reduction`; it is the map
    t -> b(t) relating the reduced front to the general one.
    """

    curve: object
    frame: object
    density: Density
    origin: float = 0.0
    shift: object = None

    def __post_init__(self):
        if not self.curve.is_unit_speed:
            raise ValueError("FlatFrontSpec needs a unit-speed curve")
        if self.frame.curve is not self.curve:
            raise ValueError("frame was integrated along a different curve")
        if self.curve.n < 2:
            raise ValueError("dimension n must be >= 2")

    @property
    def n(self):
        return self.curve.n


class FlatFront(Front):
    """f(t, w) = sigma_hat(t) + sum_j w_j e_j(t), nu = gamma(t)."""

    def __init__(self, spec, quad_tol=1e-10):
        self.spec = spec
        self.curve, self.frame, self.density = spec.curve, spec.frame, spec.density
        self.n = spec.n
        self.ambient_dim = self.n + 1
        self.t_span = self.frame.t_span
        t0, t1 = self.t_span
        origin = min(max(spec.origin, t0), t1)
        self.sigma_hat = SmoothRunningIntegral(self._sigma_rate, self._sigma_drate, t0, t1,
                                               origin=origin, nodes=len(self.frame.nodes) - 1,
                                               tol=quad_tol)
        probe = np.linspace(t0, t1, 257)
        self.totally_umbilic = bool(np.max(np.abs(self.density(probe))) < 1e-12
                                    and np.max(self.frame.kappa(probe)) < 1e-12)
        if self.totally_umbilic:
            warnings.warn("totally umbilic - outside the ruled-representation hypotheses",
                          stacklevel=2)

    def _sigma_rate(self, t):
        return self.density(t)[..., None] * self.curve.derivative(t, 1)

    def _sigma_drate(self, t):
        jet = self.curve.jet(t, 2)
        return (self.density.derivative(t)[..., None] * jet[1]
                + self.density(t)[..., None] * jet[2])

    @staticmethod
    def _split(p):
        p = np.asarray(p, dtype=float)
        return p[..., 0], p[..., 1:]

    def rho_hat(self, p):
        """a(t) - sum_j w_j mu_j(t)."""
        t, w = self._split(p)
        return self.density(t) - np.einsum("...j,...j", w, self.frame.mu(t))

    def f(self, p):
        t, w = self._split(p)
        return self.sigma_hat(t) + np.einsum("...ij,...j->...i", self.frame.frame(t), w)

    def nu(self, p):
        t, _ = self._split(p)
        return self.curve(t)

    def jacobian(self, p):
        t, w = self._split(p)
        e = self.curve.derivative(t, 1)
        rho = self.rho_hat(p)
        return np.concatenate([(rho[..., None] * e)[..., None], self.frame.frame(t)], axis=-1)

    def dnu(self, p):
        t, _ = self._split(p)
        e = self.curve.derivative(t, 1)
        out = np.zeros(e.shape + (self.n,))
        out[..., 0] = e
        return out

    def lift_metric_closed_form(self, p):
        """(1 + rho_hat^2) dt^2 + sum_j dw_j^2."""
        rho = self.rho_hat(p)
        G = np.broadcast_to(np.eye(self.n), rho.shape + (self.n, self.n)).copy()
        G[..., 0, 0] = 1.0 + rho**2
        return G


def build_flat_front(spec):
    return FlatFront(spec)


# ---------------------------------------------------------------------------
# General ruled representation


@dataclass
class GeneralRuledSpec:
    """Curve, orthonormal normal frame and densities a_1..a_n.

    sigma(t) = int_0^t (a_1 e + sum_j a_j e_j).
    """

    curve: object
    frame: object
    densities: list
    origin: float = 0.0

    def __post_init__(self):
        if not self.curve.is_unit_speed:
            raise ValueError("GeneralRuledSpec needs a unit-speed curve")
        if len(self.densities) != self.curve.n:
            raise ValueError(f"need {self.curve.n} densities a_1..a_n")

    @property
    def n(self):
        return self.curve.n


class GeneralFront(Front):
    """f(t, w) = sigma(t) + sum_j w_j e_j(t), nu = gamma(t)."""

    def __init__(self, spec, quad_tol=1e-10):
        self.spec = spec
        self.curve, self.frame = spec.curve, spec.frame
        self.n = spec.n
        self.ambient_dim = self.n + 1
        self.t_span = self.frame.t_span
        t0, t1 = self.t_span
        origin = min(max(spec.origin, t0), t1)
        self.sigma = SmoothRunningIntegral(self.eta, self._deta, t0, t1, origin=origin,
                                           nodes=len(self.frame.nodes) - 1, tol=quad_tol)

    def _coeffs(self, t):
        return np.stack([a(t) for a in self.spec.densities], axis=-1)

    def eta(self, t):
        a = self._coeffs(t)
        return (a[..., 0:1] * self.curve.derivative(t, 1)
                + np.einsum("...ij,...j->...i", self.frame.frame(t), a[..., 1:]))

    def _deta(self, t):
        a = self._coeffs(t)
        da = np.stack([d.derivative(t) for d in self.spec.densities], axis=-1)
        jet = self.curve.jet(t, 2)
        return (da[..., 0:1] * jet[1] + a[..., 0:1] * jet[2]
                + np.einsum("...ij,...j->...i", self.frame.dframe(t), a[..., 1:])
                + np.einsum("...ij,...j->...i", self.frame.frame(t), da[..., 1:]))

    def f(self, p):
        p = np.asarray(p, dtype=float)
        t, w = p[..., 0], p[..., 1:]
        return self.sigma(t) + np.einsum("...ij,...j->...i", self.frame.frame(t), w)

    def nu(self, p):
        return self.curve(np.asarray(p, dtype=float)[..., 0])

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        t, w = p[..., 0], p[..., 1:]
        ft = self.eta(t) + np.einsum("...ij,...j->...i", self.frame.dframe(t), w)
        return np.concatenate([ft[..., None], self.frame.frame(t)], axis=-1)

    def dnu(self, p):
        t = np.asarray(p, dtype=float)[..., 0]
        e = self.curve.derivative(t, 1)
        out = np.zeros(e.shape + (self.n,))
        out[..., 0] = e
        return out

    def lift_metric_closed_form(self, p):
        """(1 + rho^2 + sum a_j^2) dt^2 + sum (2 a_j dw_j dt + dw_j^2), Bishop frames only."""
        p = np.asarray(p, dtype=float)
        t, w = p[..., 0], p[..., 1:]
        a = self._coeffs(t)
        rho = a[..., 0] - np.einsum("...j,...j", w, self.frame.mu(t))
        G = np.broadcast_to(np.eye(self.n), t.shape + (self.n, self.n)).copy()
        G[..., 0, 0] = 1.0 + rho**2 + np.sum(a[..., 1:] ** 2, axis=-1)
        G[..., 0, 1:] = a[..., 1:]
        G[..., 1:, 0] = a[..., 1:]
        return G


def build_general_front(spec):
    return GeneralFront(spec)


def bishop_defect(frame, samples=513):
    """Largest component of e_j' off the tangent e, by finite differences."""
    t0, t1 = frame.t_span
    margin = 1e-3 * (t1 - t0)
    t = np.linspace(t0 + margin, t1 - margin, samples)
    dE = fd.derivative(frame.frame, t, h=1e-4)
    E = frame.frame(t)
    g = frame.curve(t)
    along_frame = np.einsum("kij,kil->kjl", E, dE)
    along_gamma = np.einsum("ki,kij->kj", g, dE)
    return float(max(np.max(np.abs(along_frame)), np.max(np.abs(along_gamma))))


def normal_form_reduction(spec, tol=1e-6):
    """Reduce a Bishop-frame general representation to the hat normal form.

    With b_j(t) = -int_0^t a_j and a = a_1 - sum_j b_j mu_j, the returned
    spec's front satisfies f_general(t, w + b(t)) = f_normal(t, w).
    """
    defect = bishop_defect(spec.frame)
    if defect > tol:
        raise NotBishopFrame(f"frame derivative has off-tangent components up to {defect:.3e}")
    n = spec.n
    t0, t1 = spec.frame.t_span
    origin = min(max(spec.origin, t0), t1)
    rest = spec.densities[1:]

    def rate(t):
        return -np.stack([a(t) for a in rest], axis=-1)

    b = CumulativeIntegral(rate, t0, t1, origin=origin,
                           nodes=len(spec.frame.nodes) - 1, tol=1e-12)
    a1 = spec.densities[0]
    frame = spec.frame

    def a(t):
        return a1(t) - np.einsum("...j,...j", b(t), frame.mu(t))

    def da(t):
        coeffs = np.stack([d(t) for d in rest], axis=-1)
        return (a1.derivative(t) + np.einsum("...j,...j", coeffs, frame.mu(t))
                - np.einsum("...j,...j", b(t), frame.dmu(t)))

    density = Density(a, da, label=f"reduced({', '.join(d.label for d in spec.densities)})")
    if n < 2:
        raise ValueError("n must be >= 2")
    return FlatFrontSpec(spec.curve, spec.frame, density, origin=spec.origin, shift=b)


def reduction_residual(general_front, reduced_front, points):
    """max |f_general(t, w + b(t)) - f_normal(t, w)| over parameter points."""
    points = np.asarray(points, dtype=float)
    shifted = points.copy()
    shifted[..., 1:] += reduced_front.spec.shift(points[..., 0])
    diff = general_front.f(shifted) - reduced_front.f(points)
    return float(np.max(np.linalg.norm(diff, axis=-1)))


# ---------------------------------------------------------------------------
# Murata-Umehara fronts in R^3


@dataclass
class MUFrontSpec:
    """Closed curve xi in S^2 with period 2 pi and the 1-form a(t) dt."""

    xi: object
    density: Density
    strict: bool = True

    def __post_init__(self):
        if self.xi.ambient_dim != 3:
            raise ValueError("Murata-Umehara data needs xi in S^2")
        if self.xi.period is None or abs(self.xi.period - 2 * np.pi) > 1e-12:
            raise ValueError("xi must be closed with period 2 pi")


def closure_check(spec, samples=512):
    """Periodic (trapezoidal) quadrature of int_{S^1} a(t) xi(t) dt."""
    t = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    vals = spec.density(t)[:, None] * spec.xi(t)
    return np.sum(vals, axis=0) * (2 * np.pi / samples)


class MUFront(Front):
    """f(t, v) = sigma_hat(t) + v xi(t), nu = xi x xi' / |xi'|."""

    n = 2
    ambient_dim = 3
    t_period = 2 * np.pi

    def __init__(self, spec, inflection_tol=1e-8):
        self.spec = spec
        self.xi, self.density = spec.xi, spec.density
        self.inflections = inflection_points(spec.xi, 1000, tol=inflection_tol)
        if self.inflections and spec.strict:
            raise InflectionPoint(f"xi has inflection intervals {self.inflections}")
        self.closure_residual = closure_check(spec)
        self.closes = bool(np.max(np.abs(self.closure_residual)) < CLOSURE_THRESHOLD)
        self.complete = self.closes and not self.inflections
        self.t_span = (0.0, 2 * np.pi)
        self._sigma = SmoothRunningIntegral(self._sigma_rate, self._sigma_drate, 0.0, 2 * np.pi,
                                            origin=0.0, nodes=1024, tol=1e-12)
        self._drift = self._sigma.total

    def _sigma_rate(self, t):
        return self.density(t)[..., None] * self.xi(t)

    def _sigma_drate(self, t):
        jet = self.xi.jet(t, 1)
        return (self.density.derivative(t)[..., None] * jet[0]
                + self.density(t)[..., None] * jet[1])

    def sigma_hat(self, t):
        t = np.asarray(t, dtype=float)
        wraps = np.floor(t / (2 * np.pi))
        r = t - wraps * 2 * np.pi
        return self._sigma(r) + wraps[..., None] * self._drift

    def f(self, p):
        p = np.asarray(p, dtype=float)
        t, v = p[..., 0], p[..., 1]
        return self.sigma_hat(t) + v[..., None] * self.xi(t)

    def nu(self, p):
        t = np.asarray(p, dtype=float)[..., 0]
        jet = self.xi.jet(t, 1)
        c = np.cross(jet[0], jet[1])
        return c / np.linalg.norm(jet[1], axis=-1)[..., None]

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        t, v = p[..., 0], p[..., 1]
        jet = self.xi.jet(t, 1)
        ft = self.density(t)[..., None] * jet[0] + v[..., None] * jet[1]
        return np.stack([ft, jet[0]], axis=-1)

    def dnu(self, p):
        t = np.asarray(p, dtype=float)[..., 0]
        jet = self.xi.jet(t, 2)
        s = np.linalg.norm(jet[1], axis=-1)[..., None]
        ds = np.einsum("...i,...i", jet[1], jet[2])[..., None] / s
        c = np.cross(jet[0], jet[1])
        nut = np.cross(jet[0], jet[2]) / s - c * ds / s**2
        return np.stack([nut, np.zeros_like(nut)], axis=-1)

    def singular_indicator(self, p):
        """Signed area density lambda(t, v) = v |xi'(t)|."""
        p = np.asarray(p, dtype=float)
        return p[..., 1] * self.xi.speed(p[..., 0])


def build_mu_front(spec, inflection_tol=1e-8):
    return MUFront(spec, inflection_tol=inflection_tol)


# ---------------------------------------------------------------------------
# Parallel fronts and control patches


class ParallelFront(Front):
    """f^delta = f + delta nu with the same Gauss map."""

    def __init__(self, base, delta):
        self.base = base
        self.delta = float(delta)
        self.n = base.n
        self.ambient_dim = base.ambient_dim
        self.t_span = base.t_span
        self.t_period = base.t_period

    def f(self, p):
        return self.base.f(p) + self.delta * self.base.nu(p)

    def nu(self, p):
        return self.base.nu(p)

    def jacobian(self, p):
        return self.base.jacobian(p) + self.delta * self.base.dnu(p)

    def dnu(self, p):
        return self.base.dnu(p)


def parallel_front(front, delta):
    return ParallelFront(front, delta)


class PlanePatch(Front):
    """f(p) = (p, 0), nu = e_{n+1}."""

    def __init__(self, n=2):
        self.n, self.ambient_dim = n, n + 1

    def f(self, p):
        p = np.asarray(p, dtype=float)
        return np.concatenate([p, np.zeros(p.shape[:-1] + (1,))], axis=-1)

    def nu(self, p):
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1] + (self.ambient_dim,))
        out[..., -1] = 1.0
        return out

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        return np.broadcast_to(np.eye(self.ambient_dim, self.n),
                               p.shape[:-1] + (self.ambient_dim, self.n)).copy()

    def dnu(self, p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (self.ambient_dim, self.n))


class SpherePatch(Front):
    """Unit sphere chart (cos u cos v, sin u cos v, sin v) with nu = f."""

    n, ambient_dim = 2, 3

    def f(self, p):
        p = np.asarray(p, dtype=float)
        u, v = p[..., 0], p[..., 1]
        return np.stack([np.cos(u) * np.cos(v), np.sin(u) * np.cos(v), np.sin(v)], axis=-1)

    nu = f

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        u, v = p[..., 0], p[..., 1]
        fu = np.stack([-np.sin(u) * np.cos(v), np.cos(u) * np.cos(v), np.zeros_like(u)], axis=-1)
        fv = np.stack([-np.cos(u) * np.sin(v), -np.sin(u) * np.sin(v), np.cos(v)], axis=-1)
        return np.stack([fu, fv], axis=-1)

    dnu = jacobian


class CylinderPatch(Front):
    """Round cylinder of radius r over the first two axes, inward normal."""

    def __init__(self, radius=1.0, n=2):
        self.r = float(radius)
        self.n, self.ambient_dim = n, n + 1

    def f(self, p):
        p = np.asarray(p, dtype=float)
        th = p[..., 0] / self.r
        return np.concatenate([np.stack([self.r * np.cos(th), self.r * np.sin(th)], axis=-1),
                               p[..., 1:]], axis=-1)

    def nu(self, p):
        p = np.asarray(p, dtype=float)
        th = p[..., 0] / self.r
        out = np.zeros(p.shape[:-1] + (self.ambient_dim,))
        out[..., 0], out[..., 1] = -np.cos(th), -np.sin(th)
        return out


# ---------------------------------------------------------------------------
# Metrics


def _forms(front, p, method):
    if method == "analytic":
        return front.jacobian(p), front.dnu(p)
    if method == "numerical":
        return fd.jacobian(front.f, p), fd.jacobian(front.nu, p)
    raise ValueError(f"unknown method {method!r}")


def first_fundamental_form(front, p, method="numerical"):
    """ds^2 = df . df as an (n x n) matrix per point."""
    J, _ = _forms(front, p, method)
    return np.swapaxes(J, -1, -2) @ J


def lift_metric(front, p, method="numerical"):
    """ds^2_# = df . df + dnu . dnu."""
    J, N = _forms(front, p, method)
    return np.swapaxes(J, -1, -2) @ J + np.swapaxes(N, -1, -2) @ N

