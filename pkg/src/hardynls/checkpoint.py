"""Shared checkpoint file format.

Layout: one ASCII header line terminated by a newline, then the samples as
IEEE-754 little-endian float64 pairs, interleaved (re, im), C order for
Cartesian data.

Header keys (space-separated key=value tokens, first token is the magic):

    HNLSCKPT format_version=1 tag=<label> d=<int> c=<float> grid=<radial|cartesian>
             samples=<int> plus grid parameters:
      radial:    n=<int> r_min=<float> r_max=<float>
      cartesian: m=<int> box_half_width=<float>

Readers reject any format_version other than the ones they know.  Floats are
written with repr-precision ('%.17g') so a round trip is exact.
"""

from __future__ import annotations

import io
import re
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .grids import CartesianGrid, Field, RadialGrid

MAGIC = "HNLSCKPT"
FORMAT_VERSION = 1

__all__ = ["write_checkpoint", "read_checkpoint", "MAGIC", "FORMAT_VERSION"]

_TAG_RE = re.compile(r"^[A-Za-z0-9_.+=-]+$")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_checkpoint(path, f: Field, tag: str) -> None:
    """Write a field to `path` in the shared format."""
    if not _TAG_RE.match(tag):
        raise CheckpointError(f"tag {tag!r} has characters outside [A-Za-z0-9_.+=-]")
    g = f.grid
    parts = [MAGIC, f"format_version={FORMAT_VERSION}", f"tag={tag}",
             f"d={g.d}", f"grid={g.kind}"]
    if g.kind == "radial":
        parts += [f"c={_fmt(g.c)}", f"n={g.n}", f"r_min={_fmt(g.r_min)}",
                  f"r_max={_fmt(g.r_max)}"]
        count = g.n
    else:
        parts += [f"c={_fmt(g.c)}", f"m={g.m}",
                  f"box_half_width={_fmt(g.box_half_width)}"]
        count = g.m ** g.d
    parts.append(f"samples={count}")
    header = " ".join(parts) + "\n"

    flat = np.ascontiguousarray(f.values).reshape(-1)
    inter = np.empty(2 * count, dtype="<f8")
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(inter.tobytes())


def _parse_header(line: str) -> dict:
    tokens = line.strip().split(" ")
    if not tokens or tokens[0] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    kv = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise CheckpointError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        kv[k] = v
    return kv


def read_checkpoint(path) -> tuple[Field, str]:
    """Read a field from `path`; returns (field, tag)."""
    with open(path, "rb") as fh:
        raw = fh.readline(4096)
        if not raw.endswith(b"\n"):
            raise CheckpointError("header line missing or oversize")
        kv = _parse_header(raw.decode("ascii", errors="replace"))
        version = int(kv.get("format_version", "-1"))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unknown format_version {version}")
        try:
            d = int(kv["d"])
            kind = kv["grid"]
            count = int(kv["samples"])
            tag = kv["tag"]
        except KeyError as e:
            raise CheckpointError(f"header missing key {e}") from e
        if kind == "radial":
            grid = RadialGrid(d=d, c=float(kv["c"]), n=int(kv["n"]),
                              r_min=float(kv["r_min"]), r_max=float(kv["r_max"]))
            if count != grid.n:
                raise CheckpointError("sample count does not match grid")
        elif kind == "cartesian":
            grid = CartesianGrid(d=d, m=int(kv["m"]),
                                 box_half_width=float(kv["box_half_width"]),
                                 c=float(kv["c"]))
            if count != grid.m ** d:
                raise CheckpointError("sample count does not match grid")
        else:
            raise CheckpointError(f"unknown grid kind {kind!r}")
        payload = fh.read(16 * count + 1)
        if len(payload) != 16 * count:
            raise CheckpointError("payload size does not match sample count")
    inter = np.frombuffer(payload, dtype="<f8")
    vals = inter[0::2] + 1j * inter[1::2]
    return Field(grid, vals), tag
