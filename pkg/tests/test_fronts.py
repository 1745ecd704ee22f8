"""Front construction: normal form, general form, reduction, MU fronts, parallels."""

import warnings

import numpy as np
import pytest

from flatfronts import fd
from flatfronts.bishop import TwistedFrame, integrate_bishop_frame
from flatfronts.density import Density
from flatfronts.errors import InflectionPoint, NotBishopFrame
from flatfronts.fronts import (CylinderPatch, GeneralRuledSpec, ParallelFront,
                               build_general_front, build_flat_front, lift_metric,
                               normal_form_reduction, reduction_residual, FlatFrontSpec)
from flatfronts.diffgeo import gauss_rank_profile
from flatfronts.random_specs import random_general_config
from flatfronts.singular import RhoHat
from flatfronts.sphere_curves import arc_length_reparametrize, great_circle, small_circle

from conftest import flat_front, mu_front, scene

rng = np.random.default_rng(20)


def _general(curve, densities):
    frame = integrate_bishop_frame(curve)
    spec = GeneralRuledSpec(curve, frame, [Density.from_expression(d) for d in densities])
    return spec, build_general_front(spec)


def _box(front, count, w_range=1.5, seed=0):
    r = np.random.default_rng(seed)
    t0, t1 = front.t_span
    t = r.uniform(t0 + 0.01, t1 - 0.01, count)
    w = r.uniform(-w_range, w_range, (count, front.n - 1))
    return np.column_stack([t, w])


# --- MU fronts --------------------------------------------------------------

def test_mu_closure_examples():
    good = mu_front("sin(2*t)")
    assert np.max(np.abs(good.closure_residual)) < 1e-10
    assert good.closes and good.complete
    bad = mu_front("1.0")
    assert np.allclose(bad.closure_residual, [0, 0, 2 * np.pi * np.cos(np.pi / 4)], atol=1e-12)
    assert not bad.closes and not bad.complete
    zero = mu_front("0")
    assert np.all(zero.closure_residual == 0)


def test_mu_front_at_base_point():
    front = mu_front("sin(2*t)")
    v = np.linspace(-1, 1, 9)
    p = np.column_stack([np.zeros_like(v), v])
    assert np.allclose(front.f(p), v[:, None] * front.xi(np.array(0.0)), atol=1e-15)


def test_mu_front_is_periodic_when_closed():
    front = mu_front("sin(2*t) + 0.3*cos(3*t)")
    p = np.array([[0.4, 0.2], [1.3, -0.5]])
    q = p + [2 * np.pi, 0]
    assert np.allclose(front.f(p), front.f(q), atol=1e-10)


def test_mu_jacobian_matches_fd():
    front = mu_front("sin(2*t) + 0.3*cos(3*t)")
    p = np.column_stack([rng.uniform(0, 2 * np.pi, 50), rng.uniform(-1, 1, 50)])
    assert np.max(np.abs(front.jacobian(p) - fd.jacobian(front.f, p, h=1e-3))) < 1e-8
    assert np.max(np.abs(front.dnu(p) - fd.jacobian(front.nu, p, h=1e-3))) < 1e-8
    assert np.max(np.abs(np.einsum("kij,ki->kj", front.jacobian(p), front.nu(p)))) < 1e-13


def test_mu_inflection_policy():
    with pytest.raises(InflectionPoint):
        mu_front("sin(2*t)", tag="great_circle")
    lax = mu_front("sin(2*t)", tag="great_circle", strict=False)
    assert lax.inflections and not lax.complete


# --- Normal form ------------------------------------------------------------

def test_cylinder_example(great_circle_s3):
    front = flat_front("great_circle", 3, "1.0")
    p = np.array([[1.0, 0.5, 0.2], [2.5, -1.0, 3.0]])
    t, w2, w3 = p.T
    expected = np.column_stack([np.cos(t) - 1, np.sin(t), w2, w3])
    assert np.allclose(front.f(p), expected, atol=1e-12)
    assert np.allclose(front.f(np.zeros(3)), 0, atol=1e-15)
    assert np.all(np.abs(RhoHat(front)(_box(front, 100))) == 1.0)
    # (1 + 1) dt^2 + dw^2
    G = lift_metric(front, p)
    assert np.allclose(G, np.diag([2.0, 1, 1]), atol=1e-8)


@pytest.mark.parametrize("fixture", ["small_circle_s2", "small_circle_s3", "great_circle_s3"])
def test_representation_formulas(fixture, request):
    front = request.getfixturevalue(fixture)
    p = _box(front, 200)
    J = fd.jacobian(front.f, p, h=1e-3)
    t = p[:, 0]
    assert np.max(np.abs(J[:, :, 0] - RhoHat(front)(p)[:, None] * front.curve.derivative(t, 1))) < 1e-7
    assert np.max(np.abs(J[:, :, 1:] - front.frame.frame(t))) < 1e-7
    assert np.max(np.abs(front.jacobian(p) - J)) < 1e-7
    assert np.max(np.abs(front.dnu(p) - fd.jacobian(front.nu, p, h=1e-3))) < 1e-7


def test_lift_metric_closed_form_and_singular_points(small_circle_s2):
    front = small_circle_s2
    p = _box(front, 100)
    assert np.max(np.abs(lift_metric(front, p) - front.lift_metric_closed_form(p))) < 1e-7
    # on the singular set the lift metric is the identity
    t = np.linspace(0.3, 4.0, 10)
    mu = front.frame.mu(t)[:, 0]
    q = np.column_stack([t, front.density(t) / mu])
    # replace w_2 = a / mu_2 so rho_hat vanishes
    assert np.max(np.abs(RhoHat(front)(q))) < 1e-12
    assert np.allclose(lift_metric(front, q), np.eye(2), atol=1e-7)


def test_totally_umbilic_warning():
    unit = great_circle(2)
    frame = integrate_bishop_frame(unit)
    with pytest.warns(UserWarning, match="umbilic"):
        front = build_flat_front(FlatFrontSpec(unit, frame, Density.constant(0.0)))
    assert front.totally_umbilic


# --- General form and reduction ----------------------------------------------

def test_general_zero_densities():
    spec, g = _general(great_circle(3), ["0", "0", "0"])
    t = np.linspace(0, 6, 7)
    assert np.max(np.abs(g.f(np.column_stack([t, 0 * t, 0 * t])))) == 0


def test_general_tangent_density_traces_the_curve():
    curve = arc_length_reparametrize(small_circle(0.7, 2))
    spec, g = _general(curve, ["1", "0"])
    t = np.linspace(0, curve.period, 30)
    sigma = g.f(np.column_stack([t, 0 * t]))
    assert np.allclose(sigma, curve(t) - curve(np.array(0.0)), atol=1e-10)


def test_general_normal_density_along_great_circle():
    # sigma = t e_2 with e_2 constant: the image collapses to the line R e_2
    spec, g = _general(great_circle(2), ["0", "1"])
    t = np.linspace(0, 6, 13)
    e2 = spec.frame.frame(np.array(0.0))[:, 0]
    assert np.allclose(g.f(np.column_stack([t, 0 * t])), t[:, None] * e2, atol=1e-12)
    p = np.column_stack([t, np.linspace(-1, 1, 13)])
    prof = gauss_rank_profile(g, p)
    assert np.all(prof.rank_dnu == 1)
    assert np.all(prof.rank_df == 1)


def test_reduction_example():
    curve = arc_length_reparametrize(small_circle(np.pi / 4, 2))
    spec, g = _general(curve, ["0", "1"])
    red = normal_form_reduction(spec)
    t = np.linspace(0, curve.period, 40)
    assert np.allclose(red.shift(t)[:, 0], -t, atol=1e-12)
    mu2 = spec.frame.mu(t)[:, 0]
    assert np.allclose(red.density(t), t * mu2, atol=1e-10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        front = build_flat_front(red)
    assert reduction_residual(g, front, _box(front, 200)) < 1e-8


def test_reduction_is_identity_without_normal_densities():
    curve = arc_length_reparametrize(small_circle(1.1, 3))
    spec, g = _general(curve, ["sin(t)", "0", "0"])
    red = normal_form_reduction(spec)
    t = np.linspace(0, curve.period, 40)
    assert np.all(red.shift(t) == 0)
    assert np.allclose(red.density(t), np.sin(t), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_random_reduction_residual(seed):
    r = np.random.default_rng(100 + seed)
    sc = scene(random_general_config(r, 2 + seed % 3))
    p = _box(sc.front, 300, seed=seed)
    assert reduction_residual(sc.general, sc.front, p) < 1e-8
    # the reduced density derivative is consistent
    t = p[:, 0]
    assert np.max(np.abs(sc.front.density.derivative(t)
                         - fd.derivative(sc.front.density, t, h=1e-4))) < 1e-6
    # the general closed-form lift metric agrees with the numerical one
    g = sc.general
    assert np.max(np.abs(lift_metric(g, p) - g.lift_metric_closed_form(p))) < 1e-7


def test_reduction_needs_a_bishop_frame():
    curve = arc_length_reparametrize(small_circle(0.9, 3))
    frame = TwistedFrame(integrate_bishop_frame(curve), 0.5)
    spec = GeneralRuledSpec(curve, frame, [Density.constant(1.0)] * 3)
    with pytest.raises(NotBishopFrame):
        normal_form_reduction(spec)


# --- Parallel fronts ----------------------------------------------------------

def test_parallel_fronts(small_circle_s3):
    front = small_circle_s3
    p = _box(front, 100)
    assert np.array_equal(ParallelFront(front, 0.0).f(p), front.f(p))
    for delta in (-0.4, 0.1, 2.0):
        par = ParallelFront(front, delta)
        dist = np.linalg.norm(par.f(p) - front.f(p), axis=-1)
        assert np.allclose(dist, abs(delta), atol=1e-14)
        assert np.array_equal(par.nu(p), front.nu(p))


def test_mu_parallel_front_is_immersed():
    front = mu_front("sin(2*t)")
    par = ParallelFront(front, 0.1)
    t = rng.uniform(0, 2 * np.pi, 100)
    v = rng.uniform(-1, 1, 100)
    v[:30] = 0.0  # include points where f itself is singular
    p = np.column_stack([t, v])
    s = np.linalg.svd(par.jacobian(p), compute_uv=False)
    assert np.all(s[:, -1] > 1e-6)
    s0 = np.linalg.svd(front.jacobian(p[:30]), compute_uv=False)
    assert np.all(s0[:, -1] < 1e-12)


def test_cylinder_patch_metric():
    c = CylinderPatch(2.0, 3)
    p = np.array([[0.3, 0.1, 0.2], [1.0, -2.0, 0.5]])
    G = lift_metric(c, p)
    # dt^2 + dw^2 from f, (1/r^2) dt^2 from nu
    assert np.allclose(G, np.diag([1.25, 1, 1]), atol=1e-8)
