"""Scene configuration parsing and seeded random scenes."""

import hashlib
import json

import numpy as np
import pytest

from flatfronts.config import DEFAULT_TOLERANCES, load_config, parse_config
from flatfronts.errors import ConfigError
from flatfronts.random_specs import random_flat_config, random_rotation

BASE = {"kind": "flat", "n": 3, "curve": {"preset": "great_circle"}, "density": "1"}


def with_(**kw):
    d = json.loads(json.dumps(BASE))
    d.update(kw)
    return d


def test_defaults():
    cfg = parse_config(BASE)
    assert (cfg.grid_t, cfg.grid_w) == (32, 5)
    assert cfg.tol("rank") == DEFAULT_TOLERANCES["rank"]
    assert cfg.mesh_format == "ply" and not cfg.binary


def test_overrides():
    cfg = parse_config(with_(tolerances={"rank": 1e-5}, grid={"t": 8, "w": 3, "w_range": 2}))
    assert cfg.tol("rank") == 1e-5 and cfg.grid_t == 8 and cfg.w_range == 2.0
    cfg2 = cfg.with_overrides(grid=(4, 2), tol_rank=1e-3, seed=5)
    assert (cfg2.grid_t, cfg2.grid_w, cfg2.tol("rank"), cfg2.seed) == (4, 2, 1e-3, 5)
    assert cfg.seed == 0  # originals are frozen


@pytest.mark.parametrize("bad", [
    with_(extra=1), with_(grid={"t": 8, "cols": 2}), with_(tolerances={"ranks": 1e-3}),
    with_(output={"mesh_format": "stl"}), with_(output={"projection": [[1, 0, 0]]}),
    with_(kind="hyperbolic"), with_(n=1), with_(n=True), with_(density="t/2"),
    with_(densities=["1", "0", "0"]), with_(grid={"t": 1}), with_(delta=-1.0),
    with_(seed=-2), with_(binary="yes"), {"kind": "general", "n": 2, "curve": {"preset": "great_circle"},
                                          "densities": ["1"]},
    {"kind": "mu", "n": 3, "curve": {"preset": "great_circle"}, "density": "1"},
    with_(frame={"initial": "x"}), with_(curve={"polar_angle": 1.0}),
])
def test_rejected_configs(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_load_records_sha(tmp_path):
    raw = json.dumps(BASE).encode()
    path = tmp_path / "s.json"
    path.write_bytes(raw)
    assert load_config(path).sha256 == hashlib.sha256(raw).hexdigest()
    path.write_bytes(b"\xff\xfe")
    with pytest.raises(ConfigError):
        load_config(path)


def test_random_scenes_are_reproducible():
    a = random_flat_config(np.random.default_rng(1), 3)
    b = random_flat_config(np.random.default_rng(1), 3)
    assert a == b
    parse_config(a)
    Q = random_rotation(np.random.default_rng(2), 5)
    assert np.allclose(Q.T @ Q, np.eye(5)) and np.linalg.det(Q) > 0
