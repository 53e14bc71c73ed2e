"""Experiment runner: reproducible pipelines over the numerical modules.

Every run owns an output directory (exclusive lock file), writes its
artifacts there with deterministic formatting, and finishes by writing
`manifest.json` atomically: the config echo plus a sha256 for every emitted
file, so partial or corrupted runs are detectable.

Subcommands:

    ground-state            solve and store a ground state
    evolve                  integrate an initial datum, store trace + checkpoints
    concentrate             windowed-mass curve for a completed evolve run
    profiles                synthetic bubble sequences: generate/extract/report
    verify-functionals      invariant report rows for stored checkpoints
    pipeline-concentration  ground state -> supercritical run -> rate fit -> curve
    pipeline-compactness    zoomed snapshots of a completed run -> bubble bound
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field as dc_field
from math import sqrt
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .concentration import (
    WindowSpec,
    concentration_curve,
    focusing_scale,
    rescaled_snapshot,
)
from .errors import CheckpointError, InsufficientGrowthError, ParameterError
from .evolution import EvolveConfig, EvolutionTrace, TRACE_COLUMNS, estimate_t_star, evolve
from .functionals import (
    InvariantReport,
    diamagnetic_defect,
    gn_ratio,
    hardy_margin,
    mass,
)
from .grids import CartesianGrid, Field, RadialGrid, critical_coupling
from .ground_state import GroundState, shooting_oracle, solve_ground_state
from .profiles import compactness_harness, defect_report, extract_profiles, generate_synthetic
from .synth import band_limited_noise, gaussian_bubble

EXPERIMENTS = (
    "ground_state", "evolve", "concentrate", "profiles", "verify_functionals",
    "pipeline_concentration", "pipeline_compactness",
)

__all__ = ["RunConfig", "RunManifest", "run", "main",
           "pipeline_concentration", "pipeline_compactness", "radial_to_lattice"]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunConfig:
    experiment: str
    params: dict
    output_dir: Path
    rng_seed: int = 0

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"unknown experiment {self.experiment!r}; "
                                 f"choose from {EXPERIMENTS}")
        d = int(self.params.get("d", 3))
        if "c" in self.params:
            c = float(self.params["c"])
            cstar = critical_coupling(d)
            if not 0.0 < c < cstar:
                raise ParameterError(f"coupling must lie in (0, {cstar}), got {c}")

    def get(self, key, default=None):
        return self.params.get(key, default)


@dataclass
class RunManifest:
    experiment: str
    params: dict
    rng_seed: int
    wall_time_s: float
    artifacts: list = dc_field(default_factory=list)   # [{path, sha256, bytes}]

    def to_json(self) -> str:
        return json.dumps(
            {"experiment": self.experiment, "params": self.params,
             "rng_seed": self.rng_seed, "wall_time_s": self.wall_time_s,
             "artifacts": self.artifacts}, indent=2, sort_keys=True)


class _RunDir:
    """Exclusive ownership of an output directory via a lock file."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.lock = self.path / ".lock"

    def __enter__(self):
        self.path.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ParameterError(f"output dir {self.path} is locked by another run "
                                 f"(stale {self.lock}?)") from None
        os.close(fd)
        return self.path

    def __exit__(self, *exc):
        self.lock.unlink(missing_ok=True)
        return False


def _finalize_manifest(cfg: RunConfig, t0: float) -> RunManifest:
    man = RunManifest(experiment=cfg.experiment, params=dict(cfg.params),
                      rng_seed=cfg.rng_seed, wall_time_s=time.time() - t0)
    for p in sorted(cfg.output_dir.rglob("*")):
        if p.is_file() and p.name not in ("manifest.json", ".lock"):
            rel = str(p.relative_to(cfg.output_dir))
            man.artifacts.append({"path": rel, "sha256": sha256_of(p),
                                  "bytes": p.stat().st_size})
    tmp = cfg.output_dir / "manifest.json.tmp"
    tmp.write_text(man.to_json() + "\n", encoding="ascii")
    os.replace(tmp, cfg.output_dir / "manifest.json")
    return man


def verify_manifest(run_dir: Path) -> dict:
    """Check every artifact hash in a run directory; raises on mismatch."""
    run_dir = Path(run_dir)
    mpath = run_dir / "manifest.json"
    if not mpath.exists():
        raise CheckpointError(f"no manifest in {run_dir}")
    man = json.loads(mpath.read_text())
    for art in man["artifacts"]:
        p = run_dir / art["path"]
        if not p.exists():
            raise CheckpointError(f"artifact {art['path']} missing")
        if sha256_of(p) != art["sha256"]:
            raise CheckpointError(f"artifact {art['path']} fails its hash")
    return man


# ---------------------------------------------------------------------------
# experiment bodies
# ---------------------------------------------------------------------------

def _default_grid(cfg: RunConfig) -> RadialGrid:
    return RadialGrid(d=int(cfg.get("d", 3)), c=float(cfg.get("c", 0.1)),
                      n=int(cfg.get("n", 8192)),
                      r_min=float(cfg.get("r_min", 1e-6)),
                      r_max=float(cfg.get("r_max", 50.0)))


def _gs_csv_row(gs: GroundState) -> list:
    return [gs.d, gs.c, gs.mass_sq, gs.hardy, gs.critical_lp,
            gs.sharp_constant, gs.residual]


def _run_ground_state(cfg: RunConfig) -> None:
    grid = _default_grid(cfg)
    gs = solve_ground_state(grid.d, grid.c, grid, tol=float(cfg.get("tol", 1e-10)))
    ckpt.write_checkpoint(cfg.output_dir / "ground_state.ckpt", gs.profile, "ground_state")
    write_csv(cfg.output_dir / "ground_state.csv",
              ["d", "c", "mass_sq", "hardy", "critical_lp", "sharp_constant", "residual"],
              [_gs_csv_row(gs)])


def _load_ground_state(path) -> GroundState:
    f, tag = ckpt.read_checkpoint(path)
    if f.grid.kind != "radial":
        raise CheckpointError("ground-state checkpoint must be radial")
    return _gs_from_field(f)


def _gs_from_field(f: Field) -> GroundState:
    from .functionals import critical_power, lp_norm
    from .ground_state import equation_residual
    g = f.grid
    m = mass(f)
    H = g.hardy_form(f.values)
    p = critical_power(g.d)
    clp = lp_norm(f, p) ** p
    return GroundState(profile=f, d=g.d, c=g.c, mass_sq=m, hardy=H, critical_lp=clp,
                       sharp_constant=(g.d + 2) / g.d * m ** (-2.0 / g.d),
                       residual=equation_residual(f), values_hi=None)


def _initial_field(cfg: RunConfig, grid: RadialGrid, gs: GroundState | None) -> Field:
    spec = str(cfg.get("initial", "scaled-gs:1.1"))
    if spec.startswith("checkpoint:"):
        f, _ = ckpt.read_checkpoint(spec.split(":", 1)[1])
        return f
    if spec.startswith("scaled-gs:"):
        if gs is None:
            raise ParameterError("scaled-gs initial data needs a ground state")
        return Field(grid, float(spec.split(":", 1)[1]) * gs.profile.values)
    if spec.startswith("gaussian:"):
        amp, width = (float(v) for v in spec.split(":", 1)[1].split(","))
        return Field(grid, amp * np.exp(-grid.radii ** 2 / (2.0 * width ** 2)))
    raise ParameterError(f"unknown initial data spec {spec!r}")


def _trace_rows(trace: EvolutionTrace) -> list:
    cols = [trace.rows[c] for c in TRACE_COLUMNS]
    return [list(row) for row in zip(*cols)]


def _write_trace(out: Path, trace: EvolutionTrace) -> None:
    write_csv(out / "trace.csv", list(TRACE_COLUMNS), _trace_rows(trace))
    ckdir = out / "checkpoints"
    for i, (t, f) in enumerate(trace.checkpoints):
        ckpt.write_checkpoint(ckdir / f"ck_{i:04d}.ckpt", f, f"t={_fmt(t)}")
    (out / "termination.json").write_text(json.dumps(
        {"termination": trace.termination, "note": trace.note,
         "t_final": trace.rows["t"][-1], "growth": trace.growth(),
         "mass_drift": trace.mass_drift()}, indent=2, sort_keys=True) + "\n")


def _read_trace(run_dir: Path) -> EvolutionTrace:
    txt = (Path(run_dir) / "trace.csv").read_text().strip().split("\n")
    header = txt[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in txt[1:]])
    rows = {col: data[:, i].copy() for i, col in enumerate(header)}
    term = json.loads((Path(run_dir) / "termination.json").read_text())
    ckdir = Path(run_dir) / "checkpoints"
    checkpoints = []
    for p in sorted(ckdir.glob("ck_*.ckpt")):
        f, tag = ckpt.read_checkpoint(p)
        checkpoints.append((float(tag.split("=", 1)[1]), f))
    return EvolutionTrace(rows=rows, checkpoints=checkpoints,
                          termination=term["termination"], note=term.get("note", ""))


def _run_evolve(cfg: RunConfig) -> EvolutionTrace:
    grid = _default_grid(cfg)
    gs = None
    gs_path = cfg.get("ground_state")
    if gs_path:
        gs = _load_ground_state(gs_path)
    elif str(cfg.get("initial", "scaled-gs:1.1")).startswith("scaled-gs"):
        gs = solve_ground_state(grid.d, grid.c, grid)
        ckpt.write_checkpoint(cfg.output_dir / "ground_state.ckpt",
                              gs.profile, "ground_state")
        write_csv(cfg.output_dir / "ground_state.csv",
                  ["d", "c", "mass_sq", "hardy", "critical_lp", "sharp_constant",
                   "residual"], [_gs_csv_row(gs)])
    u0 = _initial_field(cfg, grid, gs)
    ecfg = EvolveConfig(
        delta_dt=float(cfg.get("delta_dt", 1e-3)),
        dt_min=float(cfg.get("dt_min", 1e-12)),
        t_end=float(cfg.get("t_end", np.inf)),
        record_every=int(cfg.get("record_every", 20)),
        checkpoint_factor=float(cfg.get("checkpoint_factor", 10 ** 0.125)))
    trace = evolve(u0, ecfg)
    _write_trace(cfg.output_dir, trace)
    return trace


def _estimate_and_write(out: Path, trace: EvolutionTrace, windows=(100.0, 300.0)):
    estimates = [estimate_t_star(trace, window_growth=wg) for wg in windows]
    write_csv(out / "blowup_estimate.csv",
              ["window_growth", "t_star", "fit_t_a", "fit_t_b", "fit_residual",
               "rate_infimum", "n_points"],
              [[e.window_growth, e.t_star, e.fit_window[0], e.fit_window[1],
                e.fit_residual, e.rate_infimum, e.n_points] for e in estimates])
    return estimates


def _curve_rows(rows) -> list:
    out = []
    for r in rows:
        out.append([r.t, r.rho, r.a_t] + list(r.center)
                   + [r.windowed_mass, r.fraction, r.hardy])
    return out


def _curve_header(d: int) -> list:
    return ["t", "rho", "a_t"] + [f"center_{ax}" for ax in "xyz"[:d]] \
        + ["windowed_mass", "fraction", "hardy"]


def _run_concentrate(cfg: RunConfig) -> list:
    run_dir = Path(cfg.get("run_dir", cfg.output_dir))
    verify_manifest(run_dir)
    trace = _read_trace(run_dir)
    gs = _load_ground_state(cfg.get("ground_state", run_dir / "ground_state.ckpt"))
    est = estimate_t_star(trace, window_growth=float(cfg.get("window_growth", 100.0)))
    spec = WindowSpec(kappa=float(cfg.get("kappa", 1.0)),
                      beta=float(cfg.get("beta", 0.25)), t_star=est.t_star)
    rows = concentration_curve(trace, gs, spec)
    write_csv(cfg.output_dir / "concentration.csv",
              _curve_header(gs.d), _curve_rows(rows))
    # optional monotonicity audit over a radius ladder at the final checkpoint
    ladder = cfg.get("radius_ladder")
    if ladder:
        from .concentration import windowed_mass
        radii = [float(v) for v in str(ladder).split(":")]
        t_fin, f_fin = trace.checkpoints[-1]
        write_csv(cfg.output_dir / "radius_ladder.csv", ["radius", "windowed_mass"],
                  [[rr, windowed_mass(f_fin, None, rr)] for rr in radii])
    return rows


def _run_profiles(cfg: RunConfig) -> None:
    rng = np.random.default_rng(cfg.rng_seed)
    grid = CartesianGrid(d=int(cfg.get("d", 3)), m=int(cfg.get("m", 64)),
                         box_half_width=float(cfg.get("box", 16.0)),
                         c=float(cfg.get("c", 0.1)))
    n_seq = int(cfg.get("n_seq", 16))
    stride = int(cfg.get("stride", 1))
    v1 = gaussian_bubble(grid, width=2.0 * grid.h)
    v2 = gaussian_bubble(grid, width=2.5 * grid.h, amplitude=0.7)
    # diagonal center law, monotone in the minimal-image metric
    nn = np.arange(1, n_seq + 1)
    k = 4 + (3 * stride * nn) // 4
    if k[-1] > grid.m // 4:
        raise ParameterError(f"center law leaves the monotone range: "
                             f"{k[-1]} > {grid.m // 4} cells per axis")
    law1 = np.stack([k, k, k], axis=1)
    law2 = -law1
    noise_amp = float(cfg.get("noise", 1e-3))
    noise = band_limited_noise(grid, rng, amplitude=noise_amp) if noise_amp else None
    seq = generate_synthetic([v1, v2], [law1, law2], noise, n_seq)
    for n, f in enumerate(seq.entries):
        ckpt.write_checkpoint(cfg.output_dir / "sequence" / f"v_{n:03d}.ckpt",
                              f, f"n={n + 1}")
    dec = extract_profiles(seq, l_max=int(cfg.get("l_max", 4)),
                           probe_radius=float(cfg.get("probe_radius", 5.0 * grid.h)))
    for j, (V, cen) in enumerate(zip(dec.profiles, dec.centers)):
        ckpt.write_checkpoint(cfg.output_dir / "decomposition" / f"profile_{j}.ckpt",
                              V, f"profile_{j}")
        write_csv(cfg.output_dir / "decomposition" / f"centers_{j}.csv",
                  ["n"] + [f"x_{ax}" for ax in "xyz"[:grid.d]],
                  [[n + 1] + list(map(int, cen[n])) for n in range(n_seq)])
    rep = defect_report(dec, p=float(cfg.get("p", 10.0 / 3.0)))
    write_csv(cfg.output_dir / "defects.csv",
              ["n", "min_separation", "pythagorean_defect", "hardy_defect",
               "residual_lp"],
              [[n + 1, rep.min_separation[n], rep.pythagorean_defect[n],
                rep.hardy_defect[n], rep.residual_lp[n]] for n in range(n_seq)])


def _run_verify_functionals(cfg: RunConfig) -> None:
    paths = cfg.get("inputs", [])
    if isinstance(paths, str):
        paths = paths.split(":")
    gs = None
    if cfg.get("ground_state"):
        gs = _load_ground_state(cfg.get("ground_state"))
    rows = []
    for p in paths:
        f, tag = ckpt.read_checkpoint(p)
        rep = InvariantReport.from_field(f)
        gn = gn_ratio(f, gs) if gs is not None and f.grid.kind == "radial" else float("nan")
        rows.append([tag, f.grid.d, getattr(f.grid, "c", 0.0), rep.mass,
                     rep.gradient_term, rep.potential_term, rep.hardy,
                     rep.lp_critical, rep.energy, gn, hardy_margin(f),
                     diamagnetic_defect(f)])
    write_csv(cfg.output_dir / "functionals.csv",
              ["tag", "d", "c", "mass", "gradient_term", "potential_term", "hardy",
               "lp_critical", "energy", "gn_ratio", "hardy_margin",
               "diamagnetic_defect"], rows)


def pipeline_concentration(cfg: RunConfig) -> list:
    """Ground state -> supercritical evolution -> rate fit -> windowed masses."""
    grid = _default_grid(cfg)
    gs = solve_ground_state(grid.d, grid.c, grid, tol=float(cfg.get("tol", 1e-10)))
    ckpt.write_checkpoint(cfg.output_dir / "ground_state.ckpt", gs.profile,
                          "ground_state")
    write_csv(cfg.output_dir / "ground_state.csv",
              ["d", "c", "mass_sq", "hardy", "critical_lp", "sharp_constant",
               "residual"], [_gs_csv_row(gs)])
    factor = float(cfg.get("mass_factor", 1.1))
    u0 = Field(grid, factor * gs.profile.values)
    growth_target = float(cfg.get("growth_target", 2000.0))
    h0 = grid.hardy_form(u0.values)
    delta = float(cfg.get("delta_dt", 1e-3))
    ecfg = EvolveConfig(delta_dt=delta,
                        dt_min=delta / (growth_target * max(1.0, h0)),
                        record_every=int(cfg.get("record_every", 20)))
    trace = evolve(u0, ecfg)
    _write_trace(cfg.output_dir, trace)
    if trace.termination != "blowup_resolved_limit":
        raise InsufficientGrowthError(
            f"run terminated by {trace.termination}, not by focusing: {trace.note}")
    estimates = _estimate_and_write(cfg.output_dir, trace)
    spec = WindowSpec(kappa=float(cfg.get("kappa", 1.0)),
                      beta=float(cfg.get("beta", 0.25)), t_star=estimates[0].t_star)
    rows = concentration_curve(trace, gs, spec)
    write_csv(cfg.output_dir / "concentration.csv", _curve_header(gs.d),
              _curve_rows(rows))
    return rows


def radial_to_lattice(f: Field, box: CartesianGrid, mass_rtol: float = 1e-3) -> Field:
    """Sample a radial field on a box lattice (log-linear interpolation in r,
    one grid-scale mollification).

    The lattice mass must land inside the bracket [mass(r <= L), mass(r <= L
    sqrt(d))] of the radial field, within mass_rtol; this is the sampling
    fidelity contract of the export step.
    """
    g = f.grid
    rr = np.sqrt(box.radius_sq).reshape(-1)
    logr = np.log(rr)
    re = np.interp(logr, g.rho, f.values.real, left=f.values.real[0], right=0.0)
    im = np.interp(logr, g.rho, f.values.imag, left=f.values.imag[0], right=0.0)
    vals = (re + 1j * im).reshape(box.shape)
    vals = nyquist_mollify_box(box, vals)
    out = Field(box, vals)
    absq = np.abs(f.values) ** 2
    L = box.box_half_width
    m_lo = float(np.sum(g.weights[g.radii <= L] * absq[g.radii <= L]))
    m_hi = float(np.sum(g.weights[g.radii <= L * sqrt(box.d)] * absq[g.radii <= L * sqrt(box.d)]))
    m_box = mass(out)
    if not (m_lo * (1.0 - mass_rtol) <= m_box <= m_hi * (1.0 + mass_rtol)):
        raise ParameterError(
            f"lattice sampling lost mass: box mass {m_box:.6g} outside "
            f"[{m_lo:.6g}, {m_hi:.6g}] (rtol {mass_rtol})")
    return out


def nyquist_mollify_box(box: CartesianGrid, vals: np.ndarray) -> np.ndarray:
    from .synth import nyquist_mollify
    return nyquist_mollify(box, vals)


def pipeline_compactness(cfg: RunConfig) -> dict:
    """Zoomed snapshots of a completed concentration run through the bubble
    mass bound."""
    run_dir = Path(cfg.get("run_dir", ""))
    if not run_dir.is_dir():
        raise ParameterError(f"run_dir {run_dir} is not a directory")
    verify_manifest(run_dir)
    trace = _read_trace(run_dir)
    gs = _load_ground_state(run_dir / "ground_state.ckpt")
    if trace.growth() < 100.0:
        raise InsufficientGrowthError(
            f"run grew only {trace.growth():.1f}x in the Hardy functional; "
            "not a blow-up export")
    h0 = trace.hardy0
    min_growth = float(cfg.get("snapshot_growth", 30.0))
    box = CartesianGrid(d=gs.d, m=int(cfg.get("m", 96)),
                        box_half_width=float(cfg.get("box", 12.0)), c=gs.c)
    snaps = []
    for t, f in trace.checkpoints:
        H = f.grid.hardy_form(f.values)
        if H >= min_growth * h0:
            snaps.append(radial_to_lattice(rescaled_snapshot(gs, f), box))
    if len(snaps) < 4:
        raise InsufficientGrowthError(f"only {len(snaps)} zoomed snapshots available")
    from .profiles import FieldSequence
    seq = FieldSequence(entries=snaps)
    rep = compactness_harness(seq, gs,
                              probe_radius=float(cfg.get("probe_radius", 8.0)),
                              tol=float(cfg.get("tol", 0.05)))
    verdict = {"m": rep.m, "big_m": rep.big_m, "bound": rep.bound,
               "extracted_norm": rep.extracted_norm,
               "gs_l2_norm": sqrt(gs.mass_sq),
               "passed": rep.passed, "truncated": rep.truncated,
               "n_snapshots": len(snaps)}
    (cfg.output_dir / "compactness.json").write_text(
        json.dumps(verdict, indent=2, sort_keys=True) + "\n")
    if rep.profile is not None:
        ckpt.write_checkpoint(cfg.output_dir / "extracted_profile.ckpt",
                              rep.profile, "profile_0")
    if not rep.passed:
        raise InsufficientGrowthError(
            f"bubble mass bound violated: extracted {rep.extracted_norm:.4f} "
            f"< (1-tol) * bound {rep.bound:.4f}")
    return verdict


_BODIES = {
    "ground_state": _run_ground_state,
    "evolve": _run_evolve,
    "concentrate": _run_concentrate,
    "profiles": _run_profiles,
    "verify_functionals": _run_verify_functionals,
    "pipeline_concentration": pipeline_concentration,
    "pipeline_compactness": pipeline_compactness,
}


def run(cfg: RunConfig) -> RunManifest:
    """Execute an experiment in its own locked output dir; manifest last."""
    t0 = time.time()
    with _RunDir(cfg.output_dir):
        _BODIES[cfg.experiment](cfg)
        return _finalize_manifest(cfg, t0)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _load_config_file(path: str) -> dict:
    params = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"config line without '=': {line!r}")
        k, v = line.split("=", 1)
        params[k.strip()] = v.strip()
    return params


_SUBCOMMANDS = {
    "ground-state": "ground_state",
    "evolve": "evolve",
    "concentrate": "concentrate",
    "profiles": "profiles",
    "verify-functionals": "verify_functionals",
    "pipeline-concentration": "pipeline_concentration",
    "pipeline-compactness": "pipeline_compactness",
}

_FLAGS = {
    "ground_state": ["d", "c", "n", "r_min", "r_max", "tol"],
    "evolve": ["d", "c", "n", "r_min", "r_max", "initial", "ground_state",
               "delta_dt", "dt_min", "t_end", "record_every", "checkpoint_factor"],
    "concentrate": ["run_dir", "ground_state", "kappa", "beta", "window_growth",
                    "radius_ladder"],
    "profiles": ["d", "c", "m", "box", "n_seq", "stride", "noise", "l_max",
                 "probe_radius", "p"],
    "verify_functionals": ["inputs", "ground_state"],
    "pipeline_concentration": ["d", "c", "n", "r_min", "r_max", "tol", "mass_factor",
                               "delta_dt", "growth_target", "record_every", "kappa",
                               "beta"],
    "pipeline_compactness": ["run_dir", "m", "box", "snapshot_growth",
                             "probe_radius", "tol"],
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardynls",
                                 description="mass-critical focusing runs with an "
                                             "inverse-square potential")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, exp in _SUBCOMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--output-dir", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="flat key=value config file")
        for flag in _FLAGS[exp]:
            p.add_argument("--" + flag.replace("_", "-"))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    exp = _SUBCOMMANDS[args.command]
    params = {}
    if args.config:
        params.update(_load_config_file(args.config))
    for flag in _FLAGS[exp]:
        v = getattr(args, flag, None)
        if v is not None:
            params[flag] = v
    try:
        cfg = RunConfig(experiment=exp, params=params,
                        output_dir=Path(args.output_dir), rng_seed=args.seed)
        man = run(cfg)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error [{exp}]: {e}", file=sys.stderr)
        return 1
    print(f"ok [{exp}] wall={man.wall_time_s:.1f}s artifacts={len(man.artifacts)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
