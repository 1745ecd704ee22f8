"""Flatness, Codazzi / bundle curvature, umbilics, principal curvatures, geodesics."""

import numpy as np
import pytest

from flatfronts.diffgeo import (bundle_curvature_residual, classify_umbilic, codazzi_residual,
                                connection_sample, frontal_residual, gauss_rank_profile,
                                intrinsic_geodesic_residual, lift_christoffel,
                                lift_geodesic_residual,
                                lift_min_singular_value, principal_curvatures_parallel,
                                regularized, shape_operator_eigenvalues)
from flatfronts.errors import NotImmersed, SingularSample
from flatfronts.fronts import CylinderPatch, ParallelFront, PlanePatch, SpherePatch, lift_metric

from conftest import mu_front

rng = np.random.default_rng(5)


def _uv(count, vmax=1.2):
    return np.column_stack([rng.uniform(0, 2 * np.pi, count), rng.uniform(-vmax, vmax, count)])


def _box(front, count, w_range=1.5):
    t0, t1 = front.t_span
    t = rng.uniform(t0 + 0.01, t1 - 0.01, count)
    return np.column_stack([t, rng.uniform(-w_range, w_range, (count, front.n - 1))])


def _singular_points(front, count):
    """Points with rho_hat = 0 (n = 2: w_2 = a / mu_2)."""
    t0, t1 = front.t_span
    t = np.linspace(t0 + 0.1, t1 - 0.1, count)
    return np.column_stack([t, front.density(t) / front.frame.mu(t)[:, 0]])


# --- rank profile -------------------------------------------------------------

@pytest.mark.parametrize("fixture", ["small_circle_s2", "small_circle_s3", "great_circle_s3"])
def test_flat_fronts_are_flat(fixture, request):
    front = request.getfixturevalue(fixture)
    prof = gauss_rank_profile(front, _box(front, 200))
    assert prof.flat
    assert prof.max_secondary < 1e-6
    assert np.all(prof.rank_dnu == 1)
    # the analytic route agrees
    assert gauss_rank_profile(front, _box(front, 50), method="analytic").flat


def test_controls():
    p = _uv(100)
    assert not gauss_rank_profile(SpherePatch(), p).flat
    assert np.all(gauss_rank_profile(SpherePatch(), p).rank_dnu == 2)
    prof = gauss_rank_profile(CylinderPatch(1.5, 3), np.column_stack([p, p[:, 1]]))
    assert prof.flat and np.all(prof.rank_dnu == 1)
    plane = gauss_rank_profile(PlanePatch(2), p)
    assert plane.flat and np.all(plane.rank_dnu == 0)


def test_flatness_survives_parallel_offsets(small_circle_s3):
    p = _box(small_circle_s3, 100)
    for delta in (0.1, 1.0):
        assert gauss_rank_profile(ParallelFront(small_circle_s3, delta), p).flat


def test_frontal_and_lift(small_circle_s3, mu_small_circle):
    for front in (small_circle_s3, mu_small_circle):
        p = _box(front, 200, w_range=1.0)
        assert frontal_residual(front, p) < 1e-8
        assert lift_min_singular_value(front, p) > 1e-6


# --- Codazzi and bundle curvature ----------------------------------------------

def test_codazzi_and_bundle_on_flat_front(small_circle_s3):
    front = small_circle_s3
    p = _box(front, 40)
    rho = np.abs(front.density(p[:, 0]) - np.einsum("kj,kj->k", p[:, 1:], front.frame.mu(p[:, 0])))
    p = p[rho > 0.05]
    assert np.max(codazzi_residual(front, p)) < 5e-5
    assert np.max(bundle_curvature_residual(front, p)) < 5e-5


def test_sphere_bundle_curvature_is_cos_v():
    # R^D is the Gauss curvature 1 times the area element cos v
    p = _uv(30, vmax=1.0)
    R = bundle_curvature_residual(SpherePatch(), p)
    assert np.allclose(R, np.cos(p[:, 1]), atol=1e-5)
    assert np.min(R) > 0.5
    assert np.max(codazzi_residual(SpherePatch(), p)) < 5e-5


def test_plane_bundle_curvature_is_zero():
    p = _uv(20)
    assert np.max(bundle_curvature_residual(PlanePatch(2), p)) < 1e-9
    assert np.max(codazzi_residual(PlanePatch(2), p)) < 1e-9


def test_singular_samples_need_regularization(small_circle_s2):
    q = _singular_points(small_circle_s2, 5)
    with pytest.raises(SingularSample):
        codazzi_residual(small_circle_s2, q)
    with pytest.raises(SingularSample):
        bundle_curvature_residual(small_circle_s2, q)
    assert np.max(regularized(codazzi_residual, small_circle_s2, q)) < 5e-5
    assert np.max(regularized(bundle_curvature_residual, small_circle_s2, q)) < 5e-5


def test_connection_is_metric(small_circle_s3):
    for p in _box(small_circle_s3, 5):
        sample = connection_sample(small_circle_s3, p)
        assert sample.metric_residual < 1e-5
        # connection forms are skew for orthonormal sections
        assert np.max(np.abs(sample.gamma + np.swapaxes(sample.gamma, 1, 2))) < 1e-6
        assert np.max(np.abs(sample.curvature)) < 5e-5


# --- umbilics -------------------------------------------------------------------

def test_umbilic_controls():
    p = np.array([0.3, 0.4])
    plane = classify_umbilic(PlanePatch(2), p)
    assert plane.umbilic and plane.pair == pytest.approx((0.0, 1.0), abs=1e-9)
    sphere = classify_umbilic(SpherePatch(), p)
    assert sphere.umbilic and sphere.pair == pytest.approx((1.0, 1.0), abs=1e-9)
    assert not classify_umbilic(CylinderPatch(1.0, 2), p).umbilic


def test_singular_points_of_flat_fronts_are_not_umbilic(small_circle_s2):
    q = _singular_points(small_circle_s2, 10)
    prof = gauss_rank_profile(small_circle_s2, q)
    assert np.all(prof.rank_df == 1)
    for p in q:
        res = classify_umbilic(small_circle_s2, p)
        assert not res.umbilic and res.label == "non-umbilic"


def test_umbilic_classification_survives_parallel_offsets(small_circle_s3):
    p = _box(small_circle_s3, 10)
    for delta in (0.1, 1.0):
        par = ParallelFront(small_circle_s3, delta)
        for q in p:
            assert classify_umbilic(par, q).umbilic == classify_umbilic(small_circle_s3, q).umbilic


# --- principal curvatures ----------------------------------------------------------

@pytest.mark.parametrize("r", [0.5, 2.0, 3.0])
def test_cylinder_principal_curvatures(r):
    p = np.column_stack([_uv(10), rng.uniform(-1, 1, 10)])
    lam = shape_operator_eigenvalues(CylinderPatch(r, 3), p)
    assert np.allclose(lam[:, 0], 1 / r, atol=1e-6)
    assert np.max(np.abs(lam[:, 1:])) < 1e-6


def test_sphere_and_plane_principal_curvatures():
    p = _uv(10, vmax=1.0)
    assert np.allclose(shape_operator_eigenvalues(SpherePatch(), p), -1.0, atol=1e-6)
    assert np.max(np.abs(shape_operator_eigenvalues(PlanePatch(2), p))) < 1e-12


def test_parallel_front_has_one_principal_curvature(small_circle_s3, mu_small_circle):
    for front in (small_circle_s3, mu_small_circle):
        par = ParallelFront(front, 0.1)
        p = _box(front, 100, w_range=1.0)
        s = np.linalg.svd(par.jacobian(p), compute_uv=False)
        p = p[s[:, -1] > 1e-3]
        lam = principal_curvatures_parallel(par, p)
        assert np.max(np.abs(lam[:, 1:])) < 1e-6


def test_not_immersed_is_reported(small_circle_s2):
    with pytest.raises(NotImmersed):
        shape_operator_eigenvalues(small_circle_s2, _singular_points(small_circle_s2, 3))


# --- lift geodesics, two routes ---------------------------------------------------

def test_w_lines_are_lift_geodesics(small_circle_s3):
    p = _box(small_circle_s3, 40)
    for j in (1, 2):
        d = np.zeros(3)
        d[j] = 1.0
        assert np.max(lift_geodesic_residual(small_circle_s3, p, d)) < 1e-6
        assert np.max(intrinsic_geodesic_residual(small_circle_s3, p, d)) < 1e-6


def test_geodesic_routes_agree_on_the_sphere():
    p = _uv(10, vmax=1.0)
    p = p[np.abs(p[:, 1]) > 0.3]
    meridian, latitude = np.array([0.0, 1.0]), np.array([1.0, 0.0])
    for route in (lift_geodesic_residual, intrinsic_geodesic_residual):
        assert np.max(route(SpherePatch(), p, meridian)) < 1e-6
        assert np.min(route(SpherePatch(), p, latitude)) > 0.1
    # tangential acceleration = Gamma^k(d, d) dL/dx_k, whose length is the lift-metric norm
    ext = lift_geodesic_residual(SpherePatch(), p, latitude)
    gam = np.einsum("...kij,i,j->...k", lift_christoffel(SpherePatch(), p), latitude, latitude)
    G = lift_metric(SpherePatch(), p)
    assert np.allclose(ext, np.sqrt(np.einsum("ki,kij,kj->k", gam, G, gam)), rtol=1e-4)
    # latitude circle: Gamma^v_uu = sin v cos v, g_vv = 2
    assert np.allclose(ext, np.sqrt(2) * np.abs(np.sin(p[:, 1]) * np.cos(p[:, 1])), rtol=1e-4)
