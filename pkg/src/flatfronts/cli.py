"""Command-line interface: ``flatfronts {build,verify,theorem,mu} --config scene.json``.

Exit codes: 0 success, 2 configuration error, 3 check failure.
"""

import argparse
import hashlib
import os
import sys
import warnings

import numpy as np

from .analysis import _header, dumps, mu_report, theorem_report, verify_report
from .config import build_scene, load_config
from .errors import CheckFailed, ConfigError, DimensionTooSmall, FlatFrontError, IoFailure
from .mesh_io import (export_mesh, export_polyline, mu_grid, sample_front,
                      singular_surface_mesh)

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3


def _grid(text):
    try:
        t, w = text.lower().split("x")
        t, w = int(t), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NxM, got {text!r}") from None
    if t < 2 or w < 2:
        raise argparse.ArgumentTypeError("grid sizes must be >= 2")
    return t, w


def make_parser():
    parser = argparse.ArgumentParser(prog="flatfronts", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("build", "sample the front and write meshes"),
                       ("verify", "run the differential-geometric checks"),
                       ("theorem", "stratify the singular set and witness straight lines"),
                       ("mu", "closure and singular-curve count for n = 2 data")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="scene file (JSON)")
        p.add_argument("--out", help="output directory for reports and meshes")
        p.add_argument("--grid", type=_grid, help="override the sampling grid, NxM")
        p.add_argument("--tol-rank", type=float, help="relative rank threshold")
        p.add_argument("--strict-inflection", action="store_true",
                       help="refuse curves with inflection points")
        p.add_argument("--seed", type=int, help="seed for randomized sample subsets")
    return parser


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _mesh_name(name, cfg):
    return f"{name}.{cfg.mesh_format}"


def build_outputs(scene, out):
    """Write meshes into ``out`` and return the file records."""
    cfg, front = scene.config, scene.front
    os.makedirs(out, exist_ok=True)
    proj = None if cfg.projection is None else np.asarray(cfg.projection)
    meshes, polylines = [], []
    if cfg.kind == "mu":
        t, v = mu_grid(cfg.grid_t, cfg.grid_w, cfg.w_range)
        meshes.append(("front", sample_front(front, t, v)))
        ts = np.linspace(0.0, 2 * np.pi, cfg.grid_t)
        pts = front.f(np.stack([ts, np.zeros_like(ts)], axis=-1))
        pts[-1] = pts[0]
        polylines.append(("singular_curve", [pts]))
    else:
        t0, t1 = front.t_span
        t = np.linspace(t0, t1, cfg.grid_t)
        w = np.linspace(-cfg.w_range, cfg.w_range, cfg.grid_w)
        if cfg.n == 2:
            meshes.append(("front", sample_front(front, t, w, projection=proj)))
            mu = front.frame.mu(t)[:, 0]
            ok = np.abs(mu) > cfg.tol("singular")
            runs, cur = [], []
            for k in range(len(t)):
                if ok[k]:
                    cur.append([t[k], front.density(t[k]) / mu[k]])
                elif cur:
                    runs.append(cur)
                    cur = []
            if cur:
                runs.append(cur)
            polylines.append(("singular_curve",
                              [front.f(np.array(r)) for r in runs if len(r) >= 2]))
        else:
            for axis in range(cfg.n - 1):
                meshes.append((f"slice_w{axis + 2}",
                               sample_front(front, t, w, axis=axis, projection=proj)))
            if cfg.n == 3:
                meshes.append(("singular_surface",
                               singular_surface_mesh(front, t, w, projection=proj,
                                                     eps=cfg.tol("singular"))))
    records = []
    for name, mesh in meshes:
        path = os.path.join(out, _mesh_name(name, cfg))
        export_mesh(mesh, cfg.mesh_format, path, binary=cfg.binary)
        singular = mesh.channels.get("singular")
        records.append({"file": os.path.basename(path), "sha256": _sha(path),
                        "vertices": int(len(mesh.vertices)), "faces": int(len(mesh.faces)),
                        "singular_vertices": None if singular is None else int(singular.sum())})
    for name, runs in polylines:
        path = os.path.join(out, f"{name}.obj")
        export_polyline(runs, path)
        records.append({"file": os.path.basename(path), "sha256": _sha(path),
                        "polylines": len(runs)})
    return records


def run(args):
    cfg = load_config(args.config).with_overrides(args.grid, args.tol_rank,
                                                  args.strict_inflection, args.seed)
    if args.command == "theorem" and cfg.n < 3:
        raise ConfigError("theorem needs n >= 3")
    if args.command == "mu" and cfg.kind != "mu":
        raise ConfigError("the mu command needs a scene of kind 'mu'")
    if args.command == "build" and not args.out:
        raise ConfigError("build needs --out")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scene = build_scene(cfg)
    if args.command == "verify":
        report = verify_report(scene)
    elif args.command == "theorem":
        report = theorem_report(scene)
    elif args.command == "mu":
        report = mu_report(scene)
    else:
        report = _header(scene, "build")
        report["files"] = build_outputs(scene, args.out)
        report["failed"], report["passed"] = [], True
    text = dumps(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.command}_report.json")
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
    sys.stdout.write(text)
    if report["failed"]:
        raise CheckFailed(report["failed"])
    return EXIT_OK


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CheckFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CHECK
    except DimensionTooSmall as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FlatFrontError as exc:
        # geometry rejected the input (inflection, non-regular curve, drift, ...)
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
