"""Analysis reports: the checks behind ``verify``, ``theorem`` and ``mu``.

A report is a plain dict that serializes to canonical JSON. Every numeric
check carries its value, tolerance and how they were compared, so a
report can be read without the code.
"""

import json

import numpy as np

from . import __version__, fd
from .diffgeo import (bundle_curvature_residual, classify_umbilic, codazzi_residual,
                      connection_sample, frontal_residual, gauss_rank_profile,
                      lift_geodesic_residual, lift_min_singular_value, regularized,
                      shape_operator_eigenvalues)
from .errors import DegenerateZero
from .fronts import ParallelFront, lift_metric, reduction_residual
from .mesh_io import mu_grid
from .singular import (RhoHat, flat_rank_agreement, mu_rank_agreement, mu_singular_curve,
                       noncompactness_verdict, stratify_singular_set)

SCHEMA = "flatfronts.report/1"


def _clean(x):
    """Recursively convert numpy scalars/arrays to JSON-friendly values."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not np.isfinite(x):
            return None
        return x + 0.0
    return x


def dumps(report):
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


class Checks:
    """Ordered collection of named pass/fail records."""

    def __init__(self):
        self.items = {}

    def below(self, name, value, tol, **extra):
        value = float(value)
        self.items[name] = dict(value=value, tolerance=tol, comparison="<",
                                passed=bool(value < tol), **extra)

    def above(self, name, value, tol, **extra):
        value = float(value)
        self.items[name] = dict(value=value, tolerance=tol, comparison=">",
                                passed=bool(value > tol), **extra)

    def equal(self, name, value, target, **extra):
        self.items[name] = dict(value=value, target=target, comparison="==",
                                passed=bool(value == target), **extra)

    def flag(self, name, ok, **extra):
        self.items[name] = dict(passed=bool(ok), **extra)

    @property
    def failed(self):
        return [k for k, v in self.items.items() if not v["passed"]]


def _header(scene, command):
    cfg = scene.config
    return {"schema": SCHEMA, "tool_version": __version__, "command": command,
            "config_sha256": cfg.sha256, "kind": cfg.kind, "n": cfg.n,
            "grid": {"t": cfg.grid_t, "w": cfg.grid_w, "w_range": cfg.w_range},
            "seed": cfg.seed}


def parameter_grid(front, cfg):
    """Interior t samples times a w box; returns (t, w_axes, points)."""
    t0, t1 = front.t_span
    t = t0 + (np.arange(cfg.grid_t) + 0.5) * (t1 - t0) / cfg.grid_t
    axis = np.linspace(-cfg.w_range, cfg.w_range, cfg.grid_w)
    axes = [axis] * (front.n - 1)
    mesh = np.stack([m.ravel() for m in np.meshgrid(t, *axes, indexing="ij")], axis=-1)
    return t, axes, mesh


def _subset(points, count, rng):
    if len(points) <= count:
        return points
    return points[np.sort(rng.choice(len(points), size=count, replace=False))]


def _geometry_checks(checks, front, points, sub, cfg):
    """Checks valid for any flat front (normal form, general or MU)."""
    profile = gauss_rank_profile(front, points, eps_rank=cfg.tol("rank"))
    checks.below("flatness_secondary_sv", profile.max_secondary, cfg.tol("rank"),
                 verdict="flat" if profile.flat else "not_flat",
                 note="second singular value of dnu; flat iff below eps*(1+first)")
    checks.below("frontal_residual", frontal_residual(front, points), cfg.tol("frontal"))
    checks.above("lift_min_singular_value", lift_min_singular_value(front, points),
                 cfg.tol("lift_immersion"))
    checks.below("codazzi_residual", np.max(regularized(codazzi_residual, front, sub,
                                                        delta=cfg.delta)),
                 cfg.tol("codazzi"), regularization_delta=cfg.delta)
    checks.below("bundle_curvature_residual",
                 np.max(regularized(bundle_curvature_residual, front, sub, delta=cfg.delta)),
                 cfg.tol("bundle"), regularization_delta=cfg.delta)
    metric = max(connection_sample(front, p).metric_residual for p in sub[:8])
    checks.below("metric_connection_residual", metric, cfg.tol("metric_connection"))
    par = ParallelFront(front, cfg.delta)
    s = np.linalg.svd(par.jacobian(sub), compute_uv=False)
    immersed = s[:, -1] > cfg.tol("rank") * (1 + s[:, 0])
    second = 0.0
    if np.any(immersed):
        lam = shape_operator_eigenvalues(par, sub[immersed], eps_rank=cfg.tol("rank"))
        second = float(np.max(np.abs(lam[:, 1:]))) if lam.shape[1] > 1 else 0.0
    checks.below("principal_curvature_second", second, cfg.tol("principal"),
                 delta=cfg.delta, points=int(np.sum(immersed)),
                 skipped_not_immersed=int(np.sum(~immersed)))
    umb_sing = 0
    J = fd.jacobian(front.f, sub)
    sj = np.linalg.svd(J, compute_uv=False)
    singular = sj[:, -1] < cfg.tol("rank") * (1 + sj[:, 0])
    for p in sub[singular]:
        umb_sing += classify_umbilic(front, p).umbilic
    checks.equal("singular_and_umbilic_samples", int(umb_sing), 0)
    return profile


def _normal_form_checks(checks, front, points, sub, cfg):
    t = points[:, 0]
    e = front.curve.derivative(t, 1)
    J = fd.jacobian(front.f, points)
    rho = RhoHat(front)(points)
    res_t = np.max(np.linalg.norm(J[:, :, 0] - rho[:, None] * e, axis=-1))
    res_w = np.max(np.abs(J[:, :, 1:] - front.frame.frame(t)))
    checks.below("representation_f_t", res_t, cfg.tol("representation"))
    checks.below("representation_f_w", res_w, cfg.tol("representation"))
    checks.below("lift_metric_closed_form",
                 np.max(np.abs(lift_metric(front, points) - front.lift_metric_closed_form(points))),
                 cfg.tol("lift_metric"))
    geo = 0.0
    for j in range(1, front.n):
        d = np.zeros(front.n)
        d[j] = 1.0
        geo = max(geo, float(np.max(lift_geodesic_residual(front, sub, d))))
    checks.below("w_line_geodesic_residual", geo, cfg.tol("geodesic"))
    diff, _, zero = flat_rank_agreement(front, points, eps=cfg.tol("singular"))
    checks.equal("zero_set_difference", diff, 0, singular_samples=int(np.sum(zero)))


def _strata_summary(front, t, cfg):
    strata = stratify_singular_set(front, t, eps=cfg.tol("singular"))
    tags = [s.tag for s in strata]
    return {"S1": tags.count("S1"), "S2": tags.count("S2"),
            "ambiguous": sum(bool(s.ambiguous) for s in strata),
            "S1_parameters": [s.t for s in strata if s.tag == "S1"]}


def verify_report(scene):
    cfg, front = scene.config, scene.front
    rng = np.random.default_rng(cfg.seed)
    checks = Checks()
    report = _header(scene, "verify")
    if cfg.kind == "mu":
        t = np.linspace(0, 2 * np.pi, 64, endpoint=False) + np.pi / 64
        v = np.linspace(-1, 1, 9)
        points = np.stack(np.meshgrid(t, v, indexing="ij"), axis=-1).reshape(-1, 2)
        sub = _subset(points, cfg.samples, rng)
        _geometry_checks(checks, front, points, sub, cfg)
        _mu_checks(checks, report, front, cfg)
    else:
        t, axes, points = parameter_grid(front, cfg)
        sub = _subset(points, cfg.samples, rng)
        _geometry_checks(checks, front, points, sub, cfg)
        _normal_form_checks(checks, front, points, sub, cfg)
        if scene.general is not None:
            g = scene.general
            checks.below("reduction_residual", reduction_residual(g, front, points),
                         cfg.tol("reduction"))
            checks.below("general_lift_metric_closed_form",
                         np.max(np.abs(lift_metric(g, points) - g.lift_metric_closed_form(points))),
                         cfg.tol("lift_metric"))
            gp = gauss_rank_profile(g, points, eps_rank=cfg.tol("rank"))
            checks.below("general_flatness_secondary_sv", gp.max_secondary, cfg.tol("rank"),
                         verdict="flat" if gp.flat else "not_flat")
        report["singular_strata"] = _strata_summary(front, t, cfg)
        report["totally_umbilic"] = bool(front.totally_umbilic)
        report["frame"] = {"max_correction": front.frame.max_correction,
                           "orthonormality_residual": front.frame.orthonormality_residual,
                           "error_estimate": front.frame.error_estimate,
                           "holonomy_angle": front.frame.holonomy_angle}
    report["checks"] = checks.items
    report["failed"] = checks.failed
    report["passed"] = not checks.failed
    return report


def _mu_checks(checks, report, front, cfg):
    closure = front.closure_residual
    report["closure_residual"] = {"value": [float(x) for x in closure],
                                  "tolerance": cfg.tol("closure"),
                                  "designation_threshold": 1e-9}
    report["complete"] = bool(front.complete)
    report["inflections"] = [list(iv) for iv in front.inflections]
    if not cfg.waive_closure:
        checks.below("closure_residual", np.max(np.abs(closure)), cfg.tol("closure"))
    checks.flag("no_inflection_points", not front.inflections,
                intervals=[list(iv) for iv in front.inflections])
    t, v = mu_grid(cfg.grid_t, cfg.grid_w)
    diff, _, zero = mu_rank_agreement(front, t, v, eps=cfg.tol("singular"))
    rows = sorted({float(x) for x in np.stack(np.meshgrid(t, v, indexing="ij"), -1)[zero][:, 1]})
    checks.equal("singular_set_difference", diff, 0, singular_v_values=rows)
    curve = _singular_curve(front)
    # informational: the four-point bound also needs embedded ends, which is not tested
    curve["at_least_four"] = curve["count"] >= 4
    report["singular_curve"] = curve


def _singular_curve(front):
    try:
        res = mu_singular_curve(front)
        degenerate, count = [], res.non_cuspidal_count
    except DegenerateZero as exc:
        res, degenerate, count = exc.result, exc.result.degenerate, exc.lower_bound
    return {"count": int(count), "count_is_lower_bound": bool(degenerate),
            "zeros": res.zeros, "degenerate_zeros": degenerate,
            "non_cuspidal": [lab.as_dict() for lab in res.labels if lab.type != "cuspidal_edge"],
            "labels": {"cuspidal_edge": sum(lab.type == "cuspidal_edge" for lab in res.labels),
                       "non_cuspidal_edge": sum(lab.type != "cuspidal_edge" for lab in res.labels)}}


def theorem_report(scene):
    cfg, front = scene.config, scene.front
    report = _header(scene, "theorem")
    t, axes, _ = parameter_grid(front, cfg)
    verdict = noncompactness_verdict(front, t, axes, eps=cfg.tol("singular"))
    report["verdict"] = verdict.as_dict()
    checks = Checks()
    checks.flag("all_witnesses_pass", all(w.passed for w in verdict.witnesses),
                witnesses=len(verdict.witnesses))
    report["checks"] = checks.items
    report["failed"] = checks.failed
    report["passed"] = not checks.failed
    return report


def mu_report(scene):
    cfg, front = scene.config, scene.front
    report = _header(scene, "mu")
    checks = Checks()
    _mu_checks(checks, report, front, cfg)
    report["checks"] = checks.items
    report["failed"] = checks.failed
    report["passed"] = not checks.failed
    return report

