"""Sampling fronts into quad meshes and writing OBJ / PLY / polyline files.

Output is deterministic: coordinates are written with ``%.9g`` and negative
zero is normalized, so identical inputs give identical bytes.
"""

from dataclasses import dataclass, field
import struct

import numpy as np

from .errors import IoFailure
from .singular import EPS_SINGULAR, RhoHat, singular_mask
from .sphere_curves import geodesic_curvature


@dataclass
class SampledMesh:
    """Vertices on a (rows x cols) parameter grid with quad connectivity.

    ``vertices`` and ``normals`` live in R^{n+1}; ``projection`` (3 x (n+1))
    maps them to R^3 on export. Channels are per-vertex scalars.
    """

    vertices: np.ndarray
    normals: np.ndarray
    faces: np.ndarray
    params: np.ndarray
    channels: dict = field(default_factory=dict)
    projection: np.ndarray = None
    shape: tuple = None

    def __post_init__(self):
        if self.projection is None:
            self.projection = np.eye(3, self.vertices.shape[-1])
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face indices out of range")

    @property
    def vertices3(self):
        return self.vertices @ self.projection.T

    @property
    def normals3(self):
        nv = self.normals @ self.projection.T
        norm = np.linalg.norm(nv, axis=-1, keepdims=True)
        return np.divide(nv, norm, out=np.zeros_like(nv), where=norm > 1e-12)


def quad_faces(rows, cols):
    i, j = np.meshgrid(np.arange(rows - 1), np.arange(cols - 1), indexing="ij")
    a = i * cols + j
    return np.stack([a, a + cols, a + cols + 1, a + 1], axis=-1).reshape(-1, 4)


def mu_grid(rows=256, cols=64, v_range=1.0):
    """Periodic t with the seam row duplicated, and v = -R + 2R k / cols.

    The v samples include 0 exactly (k = cols / 2) so the singular row is on
    the grid.
    """
    t = np.linspace(0.0, 2 * np.pi, rows)
    v = -v_range + 2.0 * v_range * np.arange(cols) / cols
    return t, v


def sample_front(front, t, w, fixed=None, axis=0, projection=None, seam=None,
                 eps=EPS_SINGULAR):
    """Sample ``front`` on the grid t x w.

    Channels: ``rho_hat`` (rho_hat for normal forms, lambda = v |xi'| for
    Murata-Umehara fronts, the smallest singular value of df for other
    patches), ``kappa`` (geodesic curvature of the base curve) and
    ``singular`` (1 where the zero test fires).

    For n >= 3 the varying w coordinate is ``axis`` (0-based among w) and the
    rest are held at ``fixed``. If ``seam`` is true (default: the front is
    periodic and t spans a full period) the last row copies the first.
    """
    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    n = front.n
    base = np.zeros(n - 1) if fixed is None else np.asarray(fixed, dtype=float).copy()
    P = np.zeros((len(t), len(w), n))
    P[..., 0] = t[:, None]
    P[..., 1:] = base
    P[..., 1 + axis] = w[None, :]
    V = front.f(P)
    N = front.nu(P)
    period = getattr(front, "t_period", None)
    if seam is None:
        seam = period is not None and abs((t[-1] - t[0]) - period) < 1e-12
    if seam:
        V[-1], N[-1] = V[0], N[0]
    if hasattr(front, "singular_indicator"):
        rho = front.singular_indicator(P)
        kappa = geodesic_curvature(front.xi, t)
        flag = singular_mask(front, P, eps)
    elif hasattr(front, "frame"):
        rho = RhoHat(front)(P)
        kappa = np.linalg.norm(front.frame.mu(t), axis=-1)
        flag = singular_mask(front, P, eps)
    else:
        # generic patch: smallest singular value of df, rank-deficient where it vanishes
        s = np.linalg.svd(front.jacobian(P), compute_uv=False)
        rho = s[..., -1]
        kappa = np.full(t.shape, np.nan)
        flag = rho <= eps * (1.0 + s[..., 0])
    channels = {"rho_hat": rho.ravel(),
                "kappa": np.repeat(kappa, len(w)),
                "singular": flag.ravel().astype(float)}
    rows, cols = len(t), len(w)
    return SampledMesh(V.reshape(-1, V.shape[-1]), N.reshape(-1, N.shape[-1]),
                       quad_faces(rows, cols), P.reshape(-1, n), channels,
                       None if projection is None else np.asarray(projection, dtype=float),
                       (rows, cols))


def singular_surface_mesh(front, t, x, projection=None, eps=EPS_SINGULAR):
    """The S2 part of the singular set of an n = 3 front as a ruled quad mesh.

    On each slice the singular line {w . mu = a} is parametrized by its foot
    point a mu / kappa^2 plus x times the unit normal (-mu_3, mu_2) / kappa
    in the w-plane; slices with kappa <= eps are skipped and split the mesh
    into bands.
    """
    if front.n != 3:
        raise ValueError("singular surface meshes are built for n = 3")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    mu = front.frame.mu(t)
    kappa = np.linalg.norm(mu, axis=-1)
    a = front.density(t)
    keep = kappa > eps
    verts, norms, params, faces = [], [], [], []
    count = 0
    run = []
    for k in range(len(t) + 1):
        if k < len(t) and keep[k]:
            run.append(k)
            continue
        if len(run) >= 2:
            idx = np.array(run)
            m, kap = mu[idx], kappa[idx]
            foot = a[idx, None] * m / kap[:, None] ** 2
            d = np.stack([-m[:, 1], m[:, 0]], axis=-1) / kap[:, None]
            W = foot[:, None, :] + x[None, :, None] * d[:, None, :]
            P = np.concatenate([np.broadcast_to(t[idx, None, None], W.shape[:2] + (1,)), W], axis=-1)
            verts.append(front.f(P).reshape(-1, 4))
            norms.append(front.nu(P).reshape(-1, 4))
            params.append(P.reshape(-1, 3))
            faces.append(quad_faces(len(idx), len(x)) + count)
            count += len(idx) * len(x)
        run = []
    if not verts:
        empty = np.zeros((0, 4))
        return SampledMesh(empty, empty, np.zeros((0, 4), dtype=int), np.zeros((0, 3)),
                           {}, projection)
    P = np.concatenate(params)
    rho = RhoHat(front)(P)
    return SampledMesh(np.concatenate(verts), np.concatenate(norms), np.concatenate(faces), P,
                       {"rho_hat": rho}, None if projection is None else np.asarray(projection))


# ---------------------------------------------------------------------------
# Writers


def _fmt(x):
    x = float(x) + 0.0
    if x == 0.0:
        x = 0.0
    return "%.9g" % x


def _row(prefix, vals):
    return prefix + " " + " ".join(_fmt(v) for v in vals) + "\n"


def obj_text(mesh):
    V, N = mesh.vertices3, mesh.normals3
    out = [f"# {len(V)} vertices, {len(mesh.faces)} faces\n"]
    out.extend(_row("v", v) for v in V)
    out.extend(_row("vn", nv) for nv in N)
    for f in mesh.faces:
        out.append("f " + " ".join(f"{i + 1}//{i + 1}" for i in f) + "\n")
    return "".join(out)


def ply_bytes(mesh, binary=False):
    V, N = mesh.vertices3, mesh.normals3
    names = sorted(mesh.channels)
    cols = [V, N] + [np.asarray(mesh.channels[k], dtype=float)[:, None] for k in names]
    data = np.concatenate(cols, axis=1) if len(V) else np.zeros((0, 6 + len(names)))
    fmt = "binary_little_endian" if binary else "ascii"
    props = ["x", "y", "z", "nx", "ny", "nz"] + names
    header = ["ply", f"format {fmt} 1.0", f"element vertex {len(V)}"]
    header += [f"property float {p}" for p in props]
    header += [f"element face {len(mesh.faces)}", "property list uchar int vertex_indices",
               "end_header"]
    head = ("\n".join(header) + "\n").encode("ascii")
    if not binary:
        lines = [" ".join(_fmt(x) for x in row) for row in data]
        lines += [" ".join([str(len(f))] + [str(int(i)) for i in f]) for f in mesh.faces]
        return head + ("\n".join(lines) + ("\n" if lines else "")).encode("ascii")
    data = data + 0.0
    body = data.astype("<f4").tobytes()
    faces = b"".join(struct.pack("<B", len(f)) + np.asarray(f, dtype="<i4").tobytes()
                     for f in mesh.faces)
    return head + body + faces


def export_mesh(mesh, fmt, path, binary=False):
    fmt = fmt.lower()
    if fmt == "obj":
        payload = obj_text(mesh).encode("ascii")
    elif fmt == "ply":
        payload = ply_bytes(mesh, binary=binary)
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    _write(path, payload)
    return path


def export_polyline(points, path):
    """Polyline(s) as OBJ vertices plus one ``l`` record per run.

    ``points`` is an (m, d) array or a list of such arrays; coordinates past
    the third are dropped.
    """
    runs = [points] if isinstance(points, np.ndarray) else list(points)
    lines, offset, records = [], 0, []
    for run in runs:
        pts = np.asarray(run, dtype=float)[:, :3]
        lines.extend(_row("v", p) for p in pts)
        if len(pts):
            records.append("l " + " ".join(str(offset + i + 1) for i in range(len(pts))) + "\n")
        offset += len(pts)
    _write(path, "".join(lines + records).encode("ascii"))
    return path


def _write(path, payload):
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Readers (used for round-trip tests)


def read_obj(path):
    """Return (vertices, normals, faces, lines) from an OBJ file."""
    V, N, F, L = [], [], [], []
    try:
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                if parts[0] == "v":
                    V.append([float(x) for x in parts[1:]])
                elif parts[0] == "vn":
                    N.append([float(x) for x in parts[1:]])
                elif parts[0] == "f":
                    F.append([int(x.split("/")[0]) - 1 for x in parts[1:]])
                elif parts[0] == "l":
                    L.append([int(x) - 1 for x in parts[1:]])
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return np.array(V), np.array(N), np.array(F, dtype=int), L


def read_ply(path):
    """Return (vertex property dict, faces) from an ASCII or binary PLY file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    end = raw.index(b"end_header\n") + len(b"end_header\n")
    header = raw[:end].decode("ascii").splitlines()
    fmt = header[1].split()[1]
    props, nv, nf = [], 0, 0
    for line in header:
        parts = line.split()
        if parts[:2] == ["element", "vertex"]:
            nv = int(parts[2])
        elif parts[:2] == ["element", "face"]:
            nf = int(parts[2])
        elif parts[0] == "property" and parts[1] == "float":
            props.append(parts[2])
    body = raw[end:]
    if fmt == "ascii":
        rows = body.decode("ascii").splitlines()
        data = np.array([[float(x) for x in r.split()] for r in rows[:nv]]).reshape(nv, len(props))
        faces = [[int(x) for x in r.split()[1:]] for r in rows[nv:nv + nf]]
    else:
        size = nv * len(props) * 4
        data = np.frombuffer(body[:size], dtype="<f4").reshape(nv, len(props)).astype(float)
        faces, pos = [], size
        for _ in range(nf):
            k = body[pos]
            faces.append(np.frombuffer(body[pos + 1:pos + 1 + 4 * k], dtype="<i4").tolist())
            pos += 1 + 4 * k
    return {p: data[:, i] for i, p in enumerate(props)}, np.array(faces, dtype=int)
