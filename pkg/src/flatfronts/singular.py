"""Singular sets of flat fronts: rho_hat, S1/S2 strata, line witnesses, and
the singular curve of Murata-Umehara fronts.

For the normal form f = sigma_hat(t) + sum w_j e_j(t) one has
f_t = rho_hat e with rho_hat = a - sum w_j mu_j, so the singular set is the
zero set of rho_hat. On a slice t = t0 this is an affine subspace of the
w-space: all of it when a = kappa = 0 (S1), a hyperplane when kappa != 0
(S2), empty otherwise.
"""

from dataclasses import dataclass, field
import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import fd
from .errors import DegenerateZero, DimensionTooSmall, WitnessFailed
from .fronts import lift_metric
from .diffgeo import lift_geodesic_residual
from .quadrature import gauss_legendre

EPS_SINGULAR = 1e-8
ROOT_XTOL = 1e-12
MULTIPLICITY_TOL = 1e-6
MEMBERSHIP_TOL = 1e-9
STRAIGHTNESS_TOL = 1e-8
GEODESIC_TOL = 1e-6
SLOPE_TOL = 1e-6
RADII = (1.0, 10.0, 100.0)


class RhoHat:
    """rho_hat(t, w) = a(t) - sum_j w_j mu_j(t) with its gradient."""

    def __init__(self, front):
        self.front = front
        self.density = front.density
        self.frame = front.frame

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        t, w = p[..., 0], p[..., 1:]
        return self.density(t) - np.einsum("...j,...j", w, self.frame.mu(t))

    def gradient(self, p):
        p = np.asarray(p, dtype=float)
        t, w = p[..., 0], p[..., 1:]
        dt = self.density.derivative(t) - np.einsum("...j,...j", w, self.frame.dmu(t))
        return np.concatenate([dt[..., None], -self.frame.mu(t)], axis=-1)

    def scale(self, p):
        """|a| + sum |mu_j| |w_j|, the local size against which zeros are judged."""
        p = np.asarray(p, dtype=float)
        t, w = p[..., 0], p[..., 1:]
        return np.abs(self.density(t)) + np.einsum("...j,...j", np.abs(w),
                                                    np.abs(self.frame.mu(t)))

    def singular(self, p, eps=EPS_SINGULAR):
        return np.abs(self(p)) <= eps * self.scale(p)


def rho_hat(front):
    return RhoHat(front)


def singular_mask(front, points, eps=EPS_SINGULAR):
    """Scale-aware zero test for rho_hat (normal form) or lambda (MU fronts)."""
    if hasattr(front, "singular_indicator"):
        points = np.asarray(points, dtype=float)
        lam = front.singular_indicator(points)
        scale = np.abs(front.density(points[..., 0])) + np.abs(lam)
        return np.abs(lam) <= eps * scale
    return RhoHat(front).singular(points, eps)


# ---------------------------------------------------------------------------
# Stratification


@dataclass
class SingularStratum:
    """One t-slice of the singular set.

    S1: the whole w-space at ``t``. S2: the hyperplane
    w_{j*} = offset - sum_{i != j*} mu_hat_i w_i, with j* = ``dominant``
    (0-based index into w) and mu_hat = mu / mu_{j*}.
    """

    tag: str
    t: float
    a: float
    kappa: float
    interval: tuple = None
    dominant: int = None
    mu_hat: np.ndarray = None
    offset: float = None
    ambiguous: bool = False

    def contains(self, w, tol=EPS_SINGULAR):
        w = np.asarray(w, dtype=float)
        if self.tag == "S1":
            return np.ones(w.shape[:-1], dtype=bool)
        # same scale as RhoHat.singular, divided through by |mu_{j*}|
        resid = w @ self.mu_hat - self.offset
        return np.abs(resid) <= tol * (np.abs(self.offset) + np.abs(w) @ np.abs(self.mu_hat))

    def solve(self, w):
        """Replace the dominant coordinate of w so that w lies on the stratum."""
        w = np.array(w, dtype=float)
        if self.tag == "S1":
            return w
        j = self.dominant
        rest = np.delete(np.arange(w.shape[-1]), j)
        w[..., j] = self.offset - w[..., rest] @ self.mu_hat[rest]
        return w

    def as_dict(self):
        out = {"tag": self.tag, "t": self.t, "a": self.a, "kappa": self.kappa,
               "ambiguous": self.ambiguous}
        if self.interval is not None:
            out["interval"] = list(self.interval)
        if self.tag == "S2":
            out.update(dominant_index=int(self.dominant) + 2,
                       mu_hat=[float(x) for x in self.mu_hat], offset=self.offset)
        return out


def _find_roots(func, t, zero_tol=0.0, xtol=ROOT_XTOL):
    """Roots of a scalar function via sign-change bracketing on the grid t."""
    vals = func(t)
    roots = []
    exact = np.abs(vals) <= zero_tol
    roots.extend(float(x) for x in t[exact])
    s = np.sign(np.where(exact, 0.0, vals))
    for k in range(len(t) - 1):
        if s[k] * s[k + 1] < 0:
            roots.append(float(brentq(lambda x: float(func(np.asarray(x))), t[k], t[k + 1],
                                      xtol=xtol)))
    return sorted(roots)


def stratify_singular_set(front, t_grid, eps=EPS_SINGULAR, ambiguity_factor=100.0):
    """Assign grid slices to S1 / S2 and locate S1 parameters by root finding.

    A slice with kappa > eps is an S2 graph; kappa <= eps and |a| <= eps gives
    S1; kappa <= eps with |a| > eps is regular and dropped. Between adjacent
    grid slices that both have kappa <= eps, zeros of a are refined by
    bisection and reported as S1 strata too. Slices whose kappa sits within a
    factor ``ambiguity_factor`` of eps are flagged ambiguous.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    dens, frame = front.density, front.frame
    mu = frame.mu(t_grid)
    kappa = np.linalg.norm(mu, axis=-1)
    a = dens(t_grid)
    mids = np.concatenate([[t_grid[0]], 0.5 * (t_grid[1:] + t_grid[:-1]), [t_grid[-1]]])
    strata = []
    s1_times = []
    for k, t in enumerate(t_grid):
        amb = bool(kappa[k] > eps and kappa[k] <= ambiguity_factor * eps)
        interval = (float(mids[k]), float(mids[k + 1]))
        if kappa[k] > eps:
            j = int(np.argmax(np.abs(mu[k])))
            mh = mu[k] / mu[k, j]
            strata.append(SingularStratum("S2", float(t), float(a[k]), float(kappa[k]), interval,
                                          j, mh, float(a[k] / mu[k, j]), amb))
        elif abs(a[k]) <= eps:
            s1_times.append(float(t))
            strata.append(SingularStratum("S1", float(t), float(a[k]), float(kappa[k]), interval))
    # zeros of a between flat slices
    flat = kappa <= eps
    for k in range(len(t_grid) - 1):
        if flat[k] and flat[k + 1] and a[k] * a[k + 1] < 0 and abs(a[k]) > eps and abs(a[k + 1]) > eps:
            r = float(brentq(lambda x: float(dens(np.asarray(x))), t_grid[k], t_grid[k + 1],
                             xtol=ROOT_XTOL))
            kr = float(np.linalg.norm(frame.mu(np.asarray(r))))
            if kr <= eps:
                strata.append(SingularStratum("S1", r, float(dens(np.asarray(r))), kr,
                                              (float(t_grid[k]), float(t_grid[k + 1]))))
    strata.sort(key=lambda s: s.t)
    return strata


def s1_parameters(front, t_grid, eps=EPS_SINGULAR):
    return [s.t for s in stratify_singular_set(front, t_grid, eps) if s.tag == "S1"]


# ---------------------------------------------------------------------------
# Line witnesses


@dataclass
class LineWitness:
    """A straight line c(x) = base + x direction in the singular set."""

    tag: str
    base: np.ndarray
    direction: np.ndarray
    membership: float
    straightness: float
    geodesic: float
    radii: tuple
    lengths: tuple
    slope: float
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def as_dict(self):
        return {"tag": self.tag,
                "base": [float(x) for x in self.base],
                "direction": [float(x) for x in self.direction],
                "membership": {"value": self.membership, "tolerance": MEMBERSHIP_TOL},
                "straightness": {"value": self.straightness, "tolerance": STRAIGHTNESS_TOL},
                "geodesic": {"value": self.geodesic, "tolerance": GEODESIC_TOL},
                "lift_lengths": {"radii": list(self.radii), "values": list(self.lengths)},
                "slope": {"value": self.slope, "target": 2.0, "tolerance": SLOPE_TOL},
                "passed": self.passed}


def line_direction(stratum, n):
    """Unit direction in (t, w)-space of the witness line for a stratum."""
    d = np.zeros(n)
    if stratum.tag == "S1":
        d[1] = 1.0
        return d
    if n < 3:
        raise DimensionTooSmall("an S2 slice of a front with n = 2 is a point; no line exists")
    j = stratum.dominant
    p = 0 if j != 0 else 1
    k = np.hypot(1.0, stratum.mu_hat[p])
    d[1 + p] = 1.0 / k
    d[1 + j] = -stratum.mu_hat[p] / k
    return d


def line_witness(front, stratum, base=None, radii=RADII, samples=33, order=16):
    """Build and check the line witness through ``base`` (a w-vector).

    Without ``base`` the line passes through the point with all free
    coordinates zero. Checks: |rho_hat| on the line, collinearity of the
    image, tangential acceleration of the lifted line, and lift-metric
    lengths over [-R, R], whose fitted slope against R must be 2.
    """
    n = front.n
    d = line_direction(stratum, n)
    w = np.zeros(n - 1) if base is None else np.asarray(base, dtype=float)
    p0 = np.concatenate([[stratum.t], stratum.solve(w)])
    rho = RhoHat(front)
    rmax = max(radii)
    x = np.linspace(-rmax, rmax, samples)
    line = p0 + x[:, None] * d
    membership = float(np.max(np.abs(rho(line))))
    img = front.f(line)
    centered = img - img.mean(axis=0)
    # largest distance of the image points from their best-fit line
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    perp = centered - np.outer(centered @ vt[0], vt[0])
    straightness = float(np.max(np.linalg.norm(perp, axis=-1)))
    geo = float(np.max(lift_geodesic_residual(front, line[::8], d)))
    lengths = []
    for R in radii:
        def speed(xs):
            q = p0 + xs[..., None] * d
            G = lift_metric(front, q)
            return np.sqrt(np.einsum("i,...ij,j->...", d, G, d))
        lengths.append(float(gauss_legendre(speed, np.array([-R]), np.array([R]), order)[0]))
    slope = float(np.polyfit(np.asarray(radii), np.asarray(lengths), 1)[0])
    failures = []
    if membership >= MEMBERSHIP_TOL:
        failures.append("membership")
    if straightness >= STRAIGHTNESS_TOL:
        failures.append("straightness")
    if geo >= GEODESIC_TOL:
        failures.append("geodesic")
    if abs(slope - 2.0) > SLOPE_TOL:
        failures.append("slope")
    return LineWitness(stratum.tag, p0, d, membership, straightness, geo, tuple(radii),
                       tuple(lengths), slope, failures)


@dataclass
class Verdict:
    verdict: str
    strata: list
    samples: np.ndarray
    witnesses: list

    def as_dict(self):
        tags = [s.tag for s in self.strata]
        return {"verdict": self.verdict,
                "strata": {"S1": tags.count("S1"), "S2": tags.count("S2"),
                           "ambiguous": sum(bool(s.ambiguous) for s in self.strata)},
                "singular_samples": int(len(self.samples)),
                "witnesses_passed": sum(w.passed for w in self.witnesses),
                "example_witness": self.witnesses[0].as_dict() if self.witnesses else None}


def singular_samples(front, strata, w_axes, eps=EPS_SINGULAR):
    """Singular points of a (t, w) window.

    For an S1 slice every grid w is singular. For an S2 slice the free
    coordinates run over the grid and the dominant one is solved for; the
    sample is kept when it stays inside the window's range for that axis.
    Raw grid points that pass the zero test are included as well.
    """
    axes = [np.asarray(a, dtype=float) for a in w_axes]
    lo = np.array([a.min() for a in axes])
    hi = np.array([a.max() for a in axes])
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
    owners, out = [], []
    for idx, s in enumerate(strata):
        if s.tag == "S1":
            pts = mesh
        else:
            j = s.dominant
            free = np.delete(np.arange(len(axes)), j)
            sub = np.stack([m.ravel() for m in np.meshgrid(*[axes[i] for i in free],
                                                           indexing="ij")], axis=-1)
            w = np.zeros((len(sub), len(axes)))
            w[:, free] = sub
            w = s.solve(w)
            inside = (w[:, j] >= lo[j]) & (w[:, j] <= hi[j])
            raw = mesh[s.contains(mesh)]
            pts = np.concatenate([w[inside], raw])
        for w in pts:
            owners.append(idx)
            out.append(np.concatenate([[s.t], w]))
    return np.array(out).reshape(-1, len(axes) + 1), owners


def noncompactness_verdict(front, t_grid, w_axes, eps=EPS_SINGULAR, radii=RADII):
    """empty_singular_set or noncompact_singular_set, with a witness per sample.

    Needs n >= 3. Every singular sample gets its own line witness; a failing
    one raises WitnessFailed.
    """
    if front.n < 3:
        raise DimensionTooSmall("the non-compactness mechanism needs n >= 3")
    strata = stratify_singular_set(front, t_grid, eps)
    samples, owners = singular_samples(front, strata, w_axes, eps)
    if len(samples) == 0:
        return Verdict("empty_singular_set", strata, samples, [])
    witnesses = []
    for p, k in zip(samples, owners):
        wit = line_witness(front, strata[k], base=p[1:], radii=radii)
        if not wit.passed:
            raise WitnessFailed(f"witness through {p} failed: {', '.join(wit.failures)}")
        witnesses.append(wit)
    return Verdict("noncompact_singular_set", strata, samples, witnesses)


# ---------------------------------------------------------------------------
# Murata-Umehara singular curve


@dataclass
class SingularPointLabel:
    t: float
    v: float
    type: str
    lam: float
    dlam_eta: float

    def as_dict(self):
        return {"t": self.t, "v": self.v, "type": self.type,
                "lambda": self.lam, "dlambda_eta": self.dlam_eta}


@dataclass
class MUSingularCurve:
    labels: list
    zeros: list
    non_cuspidal_count: int
    degenerate: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)


def _null_direction_test(front, t, h=1e-4):
    """(lambda, dlambda(eta)) at points (t, 0), eta the numerical kernel of df."""
    t = np.asarray(t, dtype=float)
    p = np.stack([t, np.zeros_like(t)], axis=-1)
    J = fd.jacobian(front.f, p, h=h)
    _, _, vt = np.linalg.svd(J)
    eta = vt[..., -1, :]
    # orient eta so its t-component is non-negative
    eta = eta * np.where(eta[..., :1] < 0, -1.0, 1.0)
    grad = fd.jacobian(lambda q: front.singular_indicator(q)[..., None], p, h=h)[..., 0, :]
    return front.singular_indicator(p), np.sum(grad * eta, axis=-1), eta


def _merge(values, period, tol=1e-9):
    """Reduce modulo the period, sort, and drop near-duplicates (first kept)."""
    out = []
    for x in sorted((0.0 if period - v % period < tol else v % period) for v in values):
        if not out or x - out[-1] >= tol:
            out.append(float(x))
    return out


def mu_singular_curve(front, grid=2048, zero_tol=1e-13, cusp_tol=1e-8):
    """Label the singular curve {v = 0} over one period.

    Zeros of a are bracketed on a periodic grid and refined with brentq;
    they are the non-cuspidal-edge points. Every grid node and every zero
    gets a label from the null-direction test on lambda = v |xi'|. A zero
    with |a'| < 1e-6, or a near-touching minimum of |a| without a sign
    change, raises DegenerateZero carrying the count of simple zeros.
    """
    period = 2 * np.pi
    t = np.linspace(0.0, period, grid, endpoint=False)
    dens = front.density
    vals = dens(t)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    tt = np.concatenate([t, [period]])
    zeros = _merge(_find_roots(lambda x: dens(x), tt, zero_tol * scale), period)
    degenerate = [z for z in zeros if abs(float(dens.derivative(np.asarray(z)))) < MULTIPLICITY_TOL]
    absval = np.abs(vals)
    for k in range(grid):
        left, right = absval[k - 1], absval[(k + 1) % grid]
        if absval[k] <= left and absval[k] <= right and absval[k] < 1e-6 * scale:
            if vals[k - 1] * vals[(k + 1) % grid] > 0 and vals[k] * vals[k - 1] > 0:
                lo, hi = t[k] - period / grid, t[k] + period / grid
                res = minimize_scalar(lambda x: abs(float(dens(np.asarray(x)))), bounds=(lo, hi),
                                      method="bounded", options={"xatol": ROOT_XTOL})
                if res.fun < 1e-10 * scale:
                    degenerate.append(float(res.x))
    degenerate = _merge(degenerate, period)
    nodes = _merge(list(zeros) + [float(x) for x in t], period)
    nodes = np.array(nodes)
    lam, dle, _ = _null_direction_test(front, nodes)
    speed = front.xi.speed(nodes)
    cusp = np.abs(dle) > cusp_tol * np.maximum(speed * scale, 1e-300)
    labels = [SingularPointLabel(float(tk), 0.0, "cuspidal_edge" if c else "non_cuspidal_edge",
                                 float(l), float(d))
              for tk, c, l, d in zip(nodes, cusp, lam, dle)]
    simple = [z for z in zeros if z not in degenerate]
    result = MUSingularCurve(labels, zeros, len(simple), degenerate)
    if degenerate:
        raise DegenerateZero(f"density has degenerate zeros at {degenerate}",
                             lower_bound=len(simple), result=result)
    return result


def mu_rank_agreement(front, t, v, eps=EPS_SINGULAR, tol=1e-6):
    """Compare numerical rank(df) < 2 with the zero test on lambda on a grid.

    Returns (set difference count, rank-deficient mask, zero-test mask).
    """
    P = np.stack(np.meshgrid(t, v, indexing="ij"), axis=-1)
    J = fd.jacobian(front.f, P)
    s = np.linalg.svd(J, compute_uv=False)
    deficient = s[..., -1] < tol * (1.0 + s[..., 0])
    zero = singular_mask(front, P, eps)
    return int(np.sum(deficient != zero)), deficient, zero


def flat_rank_agreement(front, points, eps=EPS_SINGULAR):
    """Same comparison for normal-form fronts; the rank threshold follows
    the zero test's scale so both sides use matched tolerances."""
    points = np.asarray(points, dtype=float)
    J = fd.jacobian(front.f, points)
    s = np.linalg.svd(J, compute_uv=False)
    rho = RhoHat(front)
    deficient = s[..., -1] <= eps * rho.scale(points)
    zero = rho.singular(points, eps)
    return int(np.sum(deficient != zero)), deficient, zero
