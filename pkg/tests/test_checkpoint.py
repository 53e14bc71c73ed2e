import numpy as np
import pytest

import hardynls as h
from hardynls.checkpoint import read_checkpoint, write_checkpoint
from hardynls.errors import CheckpointError
from hardynls.synth import random_cartesian_field


def test_radial_roundtrip(tmp_path, grid_small):
    rng = np.random.default_rng(0)
    f = h.Field(grid_small, rng.normal(size=grid_small.n)
                + 1j * rng.normal(size=grid_small.n))
    p = tmp_path / "f.ckpt"
    write_checkpoint(p, f, "unit_test")
    g, tag = read_checkpoint(p)
    assert tag == "unit_test"
    assert g.grid == grid_small
    assert np.array_equal(g.values, f.values)


def test_cartesian_roundtrip(tmp_path):
    box = h.CartesianGrid(d=3, m=16, box_half_width=4.0, c=0.07)
    f = random_cartesian_field(box, np.random.default_rng(1))
    p = tmp_path / "c.ckpt"
    write_checkpoint(p, f, "lattice")
    g, tag = read_checkpoint(p)
    assert g.grid == box
    assert np.array_equal(g.values, f.values)


def test_unknown_version_rejected(tmp_path, grid_small):
    f = h.Field(grid_small, np.zeros(grid_small.n))
    p = tmp_path / "v.ckpt"
    write_checkpoint(p, f, "t")
    raw = p.read_bytes().replace(b"format_version=1", b"format_version=9", 1)
    p.write_bytes(raw)
    with pytest.raises(CheckpointError):
        read_checkpoint(p)


def test_truncated_payload_rejected(tmp_path, grid_small):
    f = h.Field(grid_small, np.zeros(grid_small.n))
    p = tmp_path / "t.ckpt"
    write_checkpoint(p, f, "t")
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(CheckpointError):
        read_checkpoint(p)


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "bad.ckpt"
    p.write_bytes(b"NOTACKPT nothing\n")
    with pytest.raises(CheckpointError):
        read_checkpoint(p)


def test_tag_charset_enforced(tmp_path, grid_small):
    f = h.Field(grid_small, np.zeros(grid_small.n))
    with pytest.raises(CheckpointError):
        write_checkpoint(tmp_path / "x.ckpt", f, "has space")
