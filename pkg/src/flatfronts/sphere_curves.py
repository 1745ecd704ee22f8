"""Regular curves on the unit sphere S^n in R^{n+1}.

Every curve exposes ``jet(t, order)`` returning the stacked derivatives
``[gamma, gamma', ..., gamma^(order)]`` with shape ``(order+1,) + t.shape +
(n+1,)``. Presets and Fourier curves are differentiated analytically;
``SampledCurve`` falls back to central differences.
"""

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import NonRegularCurve
from .quadrature import CumulativeIntegral, SmoothRunningIntegral

MAX_ORDER = 3


class SphericalCurve:
    """Base class. Subclasses implement ``_jet``."""

    ambient_dim: int
    domain: tuple
    period = None
    is_unit_speed = False
    constant_speed = None
    fd_tolerance = 0.0

    @property
    def n(self):
        return self.ambient_dim - 1

    @property
    def is_periodic(self):
        return self.period is not None

    def jet(self, t, order=1):
        if order > MAX_ORDER:
            raise ValueError(f"derivatives above order {MAX_ORDER} are not provided")
        return self._jet(np.asarray(t, dtype=float), order)

    def _jet(self, t, order):
        raise NotImplementedError

    def __call__(self, t):
        return self.jet(t, 0)[0]

    def derivative(self, t, k=1):
        return self.jet(t, k)[k]

    def speed(self, t):
        return np.linalg.norm(self.derivative(t, 1), axis=-1)

    def sample_parameters(self, count):
        """Uniform parameter grid; periodic curves omit the duplicate endpoint."""
        t0, t1 = self.domain
        return np.linspace(t0, t1, count, endpoint=not self.is_periodic)

    def length(self, tol=1e-12):
        t0, t1 = self.domain
        integral = CumulativeIntegral(self.speed, t0, t1, origin=t0, tol=tol)
        return float(integral.total)


class AnalyticCurve(SphericalCurve):
    """Curve given by a closed-form jet function ``jet_func(t, order)``."""

    def __init__(self, jet_func, ambient_dim, domain, period=None,
                 constant_speed=None, label="analytic"):
        self._jet_func = jet_func
        self.ambient_dim = ambient_dim
        self.domain = (float(domain[0]), float(domain[1]))
        self.period = period
        self.constant_speed = constant_speed
        self.is_unit_speed = constant_speed is not None and abs(constant_speed - 1.0) < 1e-14
        self.label = label

    def _jet(self, t, order):
        return self._jet_func(t, order)


def _circle_jet(t, order, radius, height, ambient_dim, freq=1.0):
    # (r cos(wt), r sin(wt), h, 0, ...)
    out = np.zeros((order + 1,) + t.shape + (ambient_dim,))
    for m in range(order + 1):
        scale = radius * freq**m
        phase = freq * t + m * np.pi / 2
        out[m, ..., 0] = scale * np.cos(phase)
        out[m, ..., 1] = scale * np.sin(phase)
    if height:
        out[0, ..., 2] = height
    return out


def great_circle(n=2):
    """t -> (cos t, sin t, 0, ..., 0) in S^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = n + 1

    def jet(t, order):
        return _circle_jet(t, order, 1.0, 0.0, dim)

    return AnalyticCurve(jet, dim, (0.0, 2 * np.pi), period=2 * np.pi,
                         constant_speed=1.0, label="great_circle")


def small_circle(polar_angle, n=2):
    """Latitude circle at polar angle theta0, naive longitude parametrization.

    Speed is sin(theta0); geodesic curvature is cot(theta0).
    """
    if n < 2:
        raise ValueError("small circles need n >= 2")
    if not 0 < polar_angle < np.pi:
        raise ValueError("polar angle must lie in (0, pi)")
    dim = n + 1
    r, h = np.sin(polar_angle), np.cos(polar_angle)

    def jet(t, order):
        return _circle_jet(t, order, r, h, dim)

    return AnalyticCurve(jet, dim, (0.0, 2 * np.pi), period=2 * np.pi,
                         constant_speed=float(r), label=f"small_circle({polar_angle:g})")


def spherical_helix(p=1, q=2, mix_angle=np.pi / 4, n=3):
    """Torus-knot curve (cos a cos pt, cos a sin pt, sin a cos qt, sin a sin qt) on S^3."""
    if n < 3:
        raise ValueError("the spherical helix needs n >= 3")
    dim = n + 1
    ca, sa = np.cos(mix_angle), np.sin(mix_angle)

    def jet(t, order):
        first = _circle_jet(t, order, ca, 0.0, 2, freq=p)
        second = _circle_jet(t, order, sa, 0.0, 2, freq=q)
        out = np.zeros((order + 1,) + t.shape + (dim,))
        out[..., 0:2] = first
        out[..., 2:4] = second
        return out

    speed = float(np.hypot(ca * p, sa * q))
    return AnalyticCurve(jet, dim, (0.0, 2 * np.pi), period=2 * np.pi,
                         constant_speed=speed, label=f"spherical_helix({p},{q})")


def _normalize_jet(P):
    """Jet of P/|P| from the jet of P (Leibniz recursion on N r = P)."""
    order = P.shape[0] - 1
    r = [np.linalg.norm(P[0], axis=-1)]
    N = [P[0] / r[0][..., None]]
    if order >= 1:
        r.append(np.einsum("...i,...i", P[0], P[1]) / r[0])
    if order >= 2:
        r.append((np.einsum("...i,...i", P[1], P[1]) + np.einsum("...i,...i", P[0], P[2])
                  - r[1] ** 2) / r[0])
    if order >= 3:
        r.append((3 * np.einsum("...i,...i", P[1], P[2]) + np.einsum("...i,...i", P[0], P[3])
                  - 3 * r[1] * r[2]) / r[0])
    inv = 1.0 / r[0][..., None]
    if order >= 1:
        N.append((P[1] - N[0] * r[1][..., None]) * inv)
    if order >= 2:
        N.append((P[2] - 2 * N[1] * r[1][..., None] - N[0] * r[2][..., None]) * inv)
    if order >= 3:
        N.append((P[3] - 3 * N[2] * r[1][..., None] - 3 * N[1] * r[2][..., None]
                  - N[0] * r[3][..., None]) * inv)
    return np.stack(N)


class FourierCurve(SphericalCurve):
    """Truncated Fourier series in ambient coordinates, normalized onto S^n.

    P(t) = c0 + sum_k (A_k cos kt + B_k sin kt), gamma = P/|P|, period 2 pi.
    """

    def __init__(self, c0, cos_coeffs=(), sin_coeffs=()):
        c0 = np.asarray(c0, dtype=float)
        dim = c0.shape[0]
        cos_coeffs = np.asarray(cos_coeffs, dtype=float).reshape(-1, dim)
        sin_coeffs = np.asarray(sin_coeffs, dtype=float).reshape(-1, dim)
        K = max(len(cos_coeffs), len(sin_coeffs))
        A = np.zeros((K, dim))
        B = np.zeros((K, dim))
        A[: len(cos_coeffs)] = cos_coeffs
        B[: len(sin_coeffs)] = sin_coeffs
        self.c0, self.A, self.B = c0, A, B
        self.ambient_dim = dim
        self.domain = (0.0, 2 * np.pi)
        self.period = 2 * np.pi
        self.label = "fourier"
        probe = self.sample_parameters(1000)
        if np.min(np.linalg.norm(self._raw_jet(probe, 0)[0], axis=-1)) < 1e-8:
            raise NonRegularCurve("Fourier series passes through the origin")
        check_regular(self)

    def _raw_jet(self, t, order):
        k = np.arange(1, len(self.A) + 1, dtype=float)
        out = np.zeros((order + 1,) + t.shape + (self.ambient_dim,))
        angle = t[..., None] * k
        for m in range(order + 1):
            cos_m = np.cos(angle + m * np.pi / 2) * k**m
            sin_m = np.sin(angle + m * np.pi / 2) * k**m
            out[m] = cos_m @ self.A + sin_m @ self.B
        out[0] += self.c0
        return out

    def _jet(self, t, order):
        return _normalize_jet(self._raw_jet(t, order))


class SampledCurve(SphericalCurve):
    """Curve known only through an evaluator; derivatives by central differences.

    The difference step is (domain length) * 1e-5. ``fd_tolerance`` reports the
    expected error level of the third derivative, the worst of the provided.
    """

    def __init__(self, func, ambient_dim, domain, period=None, label="sampled"):
        self._func = func
        self.ambient_dim = ambient_dim
        self.domain = (float(domain[0]), float(domain[1]))
        self.period = period
        self.label = label
        self.step = (self.domain[1] - self.domain[0]) * 1e-5
        self.fd_tolerance = self.step**2 + np.finfo(float).eps / self.step**3

    def _value(self, t):
        p = np.asarray(self._func(t), dtype=float)
        return p / np.linalg.norm(p, axis=-1, keepdims=True)

    def _jet(self, t, order):
        h = self.step
        out = [self._value(t)]
        if order >= 1:
            fp, fm = self._value(t + h), self._value(t - h)
            out.append((fp - fm) / (2 * h))
        if order >= 2:
            out.append((fp - 2 * out[0] + fm) / h**2)
        if order >= 3:
            f2p, f2m = self._value(t + 2 * h), self._value(t - 2 * h)
            out.append((f2p - 2 * fp + 2 * fm - f2m) / (2 * h**3))
        return np.stack(out)


class RotatedCurve(SphericalCurve):
    """Image of a curve under a fixed orthogonal matrix Q (gamma -> Q gamma)."""

    def __init__(self, base, rotation):
        rotation = np.asarray(rotation, dtype=float)
        if not np.allclose(rotation @ rotation.T, np.eye(base.ambient_dim), atol=1e-12):
            raise ValueError("rotation must be orthogonal")
        self.base, self.rotation = base, rotation
        self.ambient_dim = base.ambient_dim
        self.domain = base.domain
        self.period = base.period
        self.constant_speed = base.constant_speed
        self.is_unit_speed = base.is_unit_speed
        self.fd_tolerance = base.fd_tolerance
        self.label = f"rotated({getattr(base, 'label', 'curve')})"

    def _jet(self, t, order):
        return self.base.jet(t, order) @ self.rotation.T


class LinearReparametrization(SphericalCurve):
    """Constant-speed curve rescaled to unit speed: s -> base(u0 + s / v)."""

    def __init__(self, base):
        v = base.constant_speed
        self.base = base
        self.ambient_dim = base.ambient_dim
        self._u0 = base.domain[0]
        self._v = v
        length = (base.domain[1] - base.domain[0]) * v
        self.domain = (0.0, length)
        self.period = None if base.period is None else base.period * v
        self.constant_speed = 1.0
        self.is_unit_speed = True
        self.fd_tolerance = base.fd_tolerance
        self.label = f"unit({getattr(base, 'label', 'curve')})"

    def _jet(self, t, order):
        u = self._u0 + t / self._v
        jet = self.base.jet(u, order)
        scale = self._v ** -np.arange(order + 1, dtype=float)
        return jet * scale.reshape((-1,) + (1,) * (jet.ndim - 1))


class ArcLengthCurve(SphericalCurve):
    """Arc-length reparametrization of a regular curve.

    The cumulative length s(u) is tabulated by Gauss-Legendre panels with
    quintic Hermite lookup, and inverted by a cubic Hermite starting guess
    followed by Newton iterations;
    derivatives come from the chain rule through the inverse map.
    """

    def __init__(self, base, tol=1e-10):
        self.base = base
        self.ambient_dim = base.ambient_dim
        u0, u1 = base.domain
        self._u0, self._span = u0, u1 - u0
        self._arc = SmoothRunningIntegral(base.speed, self._dspeed, u0, u1, origin=u0,
                                          tol=tol * 1e-2)
        self._table = self._arc(self._arc.nodes)
        self._inverse = CubicHermiteSpline(self._table, self._arc.nodes,
                                           1.0 / base.speed(self._arc.nodes))
        self.total_length = float(self._arc.total)
        self.domain = (0.0, self.total_length)
        self.period = self.total_length if base.is_periodic else None
        self.is_unit_speed = True
        self.constant_speed = None
        self.fd_tolerance = base.fd_tolerance
        self.label = f"arclength({getattr(base, 'label', 'curve')})"

    def _dspeed(self, u):
        jet = self.base.jet(u, 2)
        return np.einsum("...i,...i", jet[1], jet[2]) / np.linalg.norm(jet[1], axis=-1)

    def parameter_at(self, s):
        """Base-curve parameter u(s)."""
        s = np.asarray(s, dtype=float)
        L = self.total_length
        if self.period is not None:
            wraps = np.floor(s / L)
            r = s - wraps * L
        else:
            wraps = np.zeros_like(s)
            r = s
        u = self._inverse(r)
        for _ in range(30):
            step = (self._arc(u) - r) / self.base.speed(u)
            u = u - step
            if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(u))):
                break
        return u + wraps * self._span

    def _jet(self, s, order):
        u = self.parameter_at(s)
        c = self.base.jet(u, order)
        out = [c[0]]
        if order == 0:
            return np.stack(out)
        v = np.linalg.norm(c[1], axis=-1)
        d1 = 1.0 / v
        out.append(c[1] * d1[..., None])
        if order >= 2:
            vu = np.einsum("...i,...i", c[1], c[2]) / v
            d2 = -vu / v**3
            out.append(c[2] * (d1**2)[..., None] + c[1] * d2[..., None])
        if order >= 3:
            vuu = (np.einsum("...i,...i", c[2], c[2]) + np.einsum("...i,...i", c[1], c[3])
                   - vu**2) / v
            d3 = -vuu / v**4 + 3 * vu**2 / v**5
            out.append(c[3] * (d1**3)[..., None] + 3 * c[2] * (d1 * d2)[..., None]
                       + c[1] * d3[..., None])
        return np.stack(out)


def check_regular(curve, samples=1000, tol=1e-10):
    """Raise NonRegularCurve unless |gamma'| > tol * max|gamma'| on a sample grid."""
    speeds = curve.speed(curve.sample_parameters(samples))
    vmax = float(np.max(speeds))
    if vmax == 0.0 or float(np.min(speeds)) < tol * vmax:
        raise NonRegularCurve(f"speed drops to {np.min(speeds):.3e} (max {vmax:.3e})")
    return float(np.min(speeds)), vmax


def arc_length_reparametrize(curve, tol=1e-10):
    """Return a unit-speed curve with the same image.

    Unit-speed input is returned unchanged; periodic curves get period equal
    to their total length.
    """
    if curve.is_unit_speed:
        speeds = curve.speed(curve.sample_parameters(1000))
        if np.max(np.abs(speeds - 1.0)) > max(tol, 1e-8):
            raise ValueError("curve is flagged unit-speed but is not")
        return curve
    check_regular(curve, tol=tol)
    if curve.constant_speed is not None:
        return LinearReparametrization(curve)
    return ArcLengthCurve(curve, tol=tol)


def geodesic_curvature(curve, t):
    """Spherical geodesic curvature; equals |gamma'' + gamma| at unit speed."""
    jet = curve.jet(t, 2)
    g, d1, d2 = jet[0], jet[1], jet[2]
    speed = np.linalg.norm(d1, axis=-1)
    tangent = d1 / speed[..., None]
    normal_part = (d2 - np.einsum("...i,...i", d2, g)[..., None] * g
                   - np.einsum("...i,...i", d2, tangent)[..., None] * tangent)
    return np.linalg.norm(normal_part, axis=-1) / speed**2


def inflection_points(curve, grid=1000, tol=1e-8):
    """Parameter intervals where the geodesic curvature falls below ``tol``.

    ``grid`` is a sample count or an explicit parameter array. An empty list
    means no inflection was found on the grid.
    """
    t = curve.sample_parameters(grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    flagged = geodesic_curvature(curve, t) < tol
    intervals = []
    start = None
    for i, flag in enumerate(flagged):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            intervals.append([t[start], t[i - 1]])
            start = None
    if start is not None:
        intervals.append([t[start], t[-1]])
    if curve.is_periodic and len(intervals) > 1 and flagged[0] and flagged[-1]:
        last = intervals.pop()
        intervals[0] = [last[0], intervals[0][1] + curve.period]
    if len(intervals) == 1 and flagged.all():
        intervals = [[curve.domain[0], curve.domain[1]]]
    return [tuple(map(float, iv)) for iv in intervals]


def preset_curve(tag, n=2, **params):
    """Build a curve from a preset tag and its parameters."""
    if tag == "great_circle":
        curve = great_circle(n)
    elif tag == "small_circle":
        curve = small_circle(params.pop("polar_angle"), n)
    elif tag == "spherical_helix":
        curve = spherical_helix(params.pop("p", 1), params.pop("q", 2),
                                params.pop("mix_angle", np.pi / 4), n)
    elif tag == "fourier":
        c0 = np.asarray(params.pop("c0"), dtype=float)
        if c0.shape != (n + 1,):
            raise ValueError(f"c0 must have {n + 1} entries")
        curve = FourierCurve(c0, params.pop("cos", ()), params.pop("sin", ()))
    else:
        raise ValueError(f"unknown curve preset {tag!r}")
    rotation = params.pop("rotation", None)
    if params:
        raise ValueError(f"unexpected parameters for {tag}: {sorted(params)}")
    if rotation is not None:
        curve = RotatedCurve(curve, rotation)
    return curve
