"""Acceptance suite: nine criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed even when output capture is on.
"""

import json
import os
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from flatfronts import fd
from flatfronts.config import build_scene, parse_config
from flatfronts.diffgeo import (bundle_curvature_residual, gauss_rank_profile,
                                intrinsic_geodesic_residual, lift_geodesic_residual, regularized,
                                shape_operator_eigenvalues)
from flatfronts.fronts import ParallelFront, SpherePatch, lift_metric, reduction_residual
from flatfronts.mesh_io import mu_grid
from flatfronts.random_specs import (cylinder_config, random_flat_config,
                                     random_general_config)
from flatfronts.singular import (MEMBERSHIP_TOL, RADII, SLOPE_TOL, STRAIGHTNESS_TOL, RhoHat,
                                 mu_rank_agreement, mu_singular_curve, noncompactness_verdict,
                                 singular_samples, stratify_singular_set)

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
SAMPLES = 1000
RESULTS = {}


def _report(capsys, k, name, ok, detail):
    line = f"criterion {k} [{name}]: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[k] = ok
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def _scene(data):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_scene(parse_config(data))


def _samples(front, count, seed, w_range=1.5, span=None):
    rng = np.random.default_rng(seed)
    t0, t1 = front.t_span if span is None else span
    t = rng.uniform(t0 + 1e-3 * (t1 - t0), t1 - 1e-3 * (t1 - t0), count)
    return np.column_stack([t, rng.uniform(-w_range, w_range, (count, front.n - 1))])


@pytest.fixture(scope="module")
def flat_instances():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    fronts = [_scene(random_flat_config(rng, (2, 3, 4)[k % 3])).front for k in range(20)]
    return fronts, time.perf_counter() - start


def test_criterion_1_flatness(capsys, flat_instances):
    fronts, build_time = flat_instances
    start = time.perf_counter()
    worst, flat = 0.0, True
    for k, front in enumerate(fronts):
        prof = gauss_rank_profile(front, _samples(front, SAMPLES, k))
        worst = max(worst, prof.max_secondary)
        flat &= prof.flat
    ctrl = gauss_rank_profile(SpherePatch(), _samples(SpherePatch(), SAMPLES, 99, w_range=1.2, span=(0, 2 * np.pi)))
    elapsed = build_time + time.perf_counter() - start
    ok = flat and worst < 1e-6 and not ctrl.flat and elapsed < 30.0
    _report(capsys, 1, "flatness", ok,
            f"20 instances flat, max secondary sv {worst:.2e} < 1e-6; sphere control "
            f"{'non-flat' if not ctrl.flat else 'FLAT'}; {elapsed:.1f} s < 30 s")


def test_criterion_2_representation(capsys, flat_instances):
    fronts, _ = flat_instances
    worst = 0.0
    for k, front in enumerate(fronts):
        p = _samples(front, SAMPLES, k)
        J = fd.jacobian(front.f, p)
        t = p[:, 0]
        rt = np.linalg.norm(J[:, :, 0] - RhoHat(front)(p)[:, None] * front.curve.derivative(t, 1),
                            axis=-1)
        rw = np.linalg.norm(J[:, :, 1:] - front.frame.frame(t), axis=1)
        worst = max(worst, float(rt.max()), float(rw.max()))
    _report(capsys, 2, "representation", worst < 1e-7,
            f"max |f_t - rho_hat e|, |f_w - e_j| = {worst:.2e} < 1e-7 on {SAMPLES} samples x 20")


def test_criterion_3_lift_metric(capsys, flat_instances):
    fronts, _ = flat_instances
    metric, geo, geo_int = 0.0, 0.0, 0.0
    for k, front in enumerate(fronts):
        p = _samples(front, SAMPLES, k)
        metric = max(metric, float(np.max(np.abs(lift_metric(front, p)
                                                 - front.lift_metric_closed_form(p)))))
        q = p[:100]
        for j in range(1, front.n):
            d = np.zeros(front.n)
            d[j] = 1.0
            geo = max(geo, float(np.max(lift_geodesic_residual(front, q, d))))
            geo_int = max(geo_int, float(np.max(intrinsic_geodesic_residual(front, q, d))))
    ok = metric < 1e-7 and geo < 1e-6 and geo_int < 1e-6
    _report(capsys, 3, "lift metric", ok,
            f"closed form {metric:.2e} < 1e-7; w-line geodesic {geo:.2e} (extrinsic), "
            f"{geo_int:.2e} (intrinsic) < 1e-6")


def test_criterion_4_noncompact_singular_set(capsys):
    rng = np.random.default_rng(77)
    verdicts, witnesses, tried = [], [], 0
    while len(verdicts) < 10 and tried < 40:
        tried += 1
        data = random_flat_config(rng, 3, grid=(16, 4))
        front = _scene(data).front
        t0, t1 = front.t_span
        t = t0 + (np.arange(16) + 0.5) * (t1 - t0) / 16
        axes = [np.linspace(-1.5, 1.5, 4)] * 2
        samples, _ = singular_samples(front, stratify_singular_set(front, t), axes)
        if len(samples) == 0:
            continue
        v = noncompactness_verdict(front, t, axes)
        verdicts.append(v.verdict)
        witnesses.extend(v.witnesses)
        assert len(v.witnesses) == len(v.samples)
    cyl = []
    for _ in range(5):
        front = _scene(cylinder_config(rng, 3)).front
        t = np.linspace(*front.t_span, 16)
        cyl.append(noncompactness_verdict(front, t, [np.linspace(-2, 2, 4)] * 2).verdict)
    memb = max(w.membership for w in witnesses)
    straight = max(w.straightness for w in witnesses)
    slope = max(abs(w.slope - 2.0) for w in witnesses)
    ok = (len(verdicts) == 10 and all(v == "noncompact_singular_set" for v in verdicts)
          and all(w.passed for w in witnesses) and memb < MEMBERSHIP_TOL
          and straight < STRAIGHTNESS_TOL and slope <= SLOPE_TOL
          and cyl == ["empty_singular_set"] * 5)
    _report(capsys, 4, "noncompact singular set", ok,
            f"{len(verdicts)} instances noncompact, {len(witnesses)} witnesses: membership "
            f"{memb:.1e}, straightness {straight:.1e}, |slope - 2| {slope:.1e} over R={RADII}; "
            f"cylinders {cyl.count('empty_singular_set')}/5 empty")


def test_criterion_5_mu_reproduction(capsys):
    start = time.perf_counter()
    sc = _scene(json.load(open(os.path.join(CONFIGS, "mu_small_circle.json"))))
    front = sc.front
    closure = float(np.max(np.abs(front.closure_residual)))
    t, v = mu_grid(256, 64)
    diff, deficient, zero = mu_rank_agreement(front, t, v)
    rows = np.where(zero.any(axis=0))[0]
    only_v0 = list(rows) == [32] and bool(zero[:, 32].all())
    res = mu_singular_curve(front)
    elapsed = time.perf_counter() - start
    ok = closure < 1e-10 and diff == 0 and only_v0 and res.non_cuspidal_count == 4 and elapsed < 10
    _report(capsys, 5, "MU reproduction", ok,
            f"closure {closure:.1e} < 1e-10; singular set v = 0 only, rank/zero-test difference "
            f"{diff} on 256x64; non-cuspidal points {res.non_cuspidal_count}; {elapsed:.1f} s < 10 s")


def test_criterion_6_bundle_curvature(capsys, flat_instances):
    fronts, _ = flat_instances
    worst, regularized_count = 0.0, 0
    for k, front in enumerate(fronts):
        p = _samples(front, 24, 500 + k)
        if front.n >= 3:
            t = np.linspace(*front.t_span, 6)[1:-1]
            extra, _ = singular_samples(front, stratify_singular_set(front, t),
                                        [np.linspace(-1.5, 1.5, 3)] * (front.n - 1))
            p = np.concatenate([p, extra[:8]])
        else:
            t = np.linspace(*front.t_span, 10)[1:-1]
            mu = front.frame.mu(t)[:, 0]
            keep = np.abs(mu) > 1e-3
            p = np.concatenate([p, np.column_stack([t[keep], front.density(t[keep]) / mu[keep]])])
        regularized_count += int(np.sum(RhoHat(front).singular(p)))
        worst = max(worst, float(np.max(regularized(bundle_curvature_residual, front, p))))
    sphere = bundle_curvature_residual(SpherePatch(), _samples(SpherePatch(), 50, 3, w_range=1.0, span=(0, 2 * np.pi)))
    ok = worst < 5e-5 and float(sphere.min()) > 0.5
    _report(capsys, 6, "bundle curvature", ok,
            f"flat instances max |R^D| {worst:.2e} < 5e-5 ({regularized_count} singular samples "
            f"via f + 0.1 nu); sphere min {sphere.min():.3f} > 0.5")


def test_criterion_7_parallel_principal_curvatures(capsys, flat_instances):
    fronts, _ = flat_instances
    mu = _scene(json.load(open(os.path.join(CONFIGS, "mu_small_circle.json")))).front
    worst, count = 0.0, 0
    for k, front in enumerate(fronts + [mu]):
        par = ParallelFront(front, 0.1)
        p = _samples(front, 100, 700 + k, w_range=1.0 if front is mu else 1.5)
        lam = shape_operator_eigenvalues(par, p)
        worst = max(worst, float(np.max(np.abs(lam[:, 1:]))))
        count += len(p)
    _report(capsys, 7, "parallel principal curvatures", worst < 1e-6,
            f"second |lambda| of f + 0.1 nu {worst:.2e} < 1e-6 at {count} points (21 instances)")


def test_criterion_8_normal_form_reduction(capsys):
    rng = np.random.default_rng(88)
    worst = 0.0
    for k in range(10):
        sc = _scene(random_general_config(rng, (2, 3, 4)[k % 3]))
        worst = max(worst, reduction_residual(sc.general, sc.front, _samples(sc.front, SAMPLES, k)))
    _report(capsys, 8, "normal-form reduction", worst < 1e-8,
            f"max |f_general(t, w + b) - f_normal(t, w)| {worst:.2e} < 1e-8 on 10 instances")


def test_criterion_9_determinism(capsys, tmp_path):
    rng = np.random.default_rng(99)
    rand = tmp_path / "random.json"
    rand.write_text(json.dumps(random_flat_config(rng, 3)))
    configs = [os.path.join(CONFIGS, "small_circle_s3.json"),
               os.path.join(CONFIGS, "mu_small_circle.json"), str(rand)]
    same = []
    for cfg in configs:
        outs = []
        for run in range(2):
            out = tmp_path / f"{os.path.basename(cfg)}.{run}"
            proc = subprocess.run([sys.executable, "-m", "flatfronts", "verify", "--config", cfg,
                                   "--out", str(out)], capture_output=True)
            assert proc.returncode == 0, proc.stderr
            outs.append((proc.stdout, (out / "verify_report.json").read_bytes()))
        same.append(outs[0] == outs[1] and outs[0][0] == outs[0][1])
    _report(capsys, 9, "determinism", all(same),
            f"verify twice in fresh processes: byte-identical reports for {sum(same)}/{len(same)} configs")
