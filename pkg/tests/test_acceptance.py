"""Acceptance suite: one test per criterion, one printed PASS line each.

Run with `pytest -s tests/test_acceptance.py` to see the lines as they
complete.  The supercritical reference run (2000x focusing at default
resolution) is shared by the rate, concentration, and compactness criteria.
"""

import math

import numpy as np
import pytest

import hardynls as h
from hardynls.cli import RunConfig, radial_to_lattice, run
from hardynls.concentration import admissibility_proxy
from hardynls.functionals import h1_norm
from hardynls.ground_state import oracle_l2_distance, shooting_oracle
from hardynls.profiles import min_image_delta
from hardynls.synth import (
    band_limited_noise,
    gaussian_bubble,
    origin_bubble,
    positive_envelope,
    random_cartesian_field,
    random_radial_field,
)

DELTA_BIG = 1e-3
GROWTH_TARGET = 2000.0


def _ok(name, detail):
    print(f"ACCEPTANCE {name}: PASS  [{detail}]")


@pytest.fixture(scope="module")
def big_run(gs):
    grid = gs.profile.grid
    u0 = h.Field(grid, 1.1 * gs.profile.values)
    h0 = grid.hardy_form(u0.values)
    cfg = h.EvolveConfig(delta_dt=DELTA_BIG,
                         dt_min=DELTA_BIG / (GROWTH_TARGET * h0),
                         record_every=20)
    trace = h.evolve(u0, cfg)
    assert trace.termination == "blowup_resolved_limit"
    return trace


def test_criterion_1_ground_state_validity():
    details = []
    for c in (0.05, 0.1, 0.2):
        gs_c = h.solve_ground_state(3, c)
        res_rel = gs_c.residual / h1_norm(gs_c.profile)
        p1, p2 = gs_c.pohozaev_defects()
        dist = oracle_l2_distance(gs_c, shooting_oracle(3, c))
        assert res_rel < 1e-8, (c, res_rel)
        assert p1 < 1e-5 and p2 < 1e-5, (c, p1, p2)
        assert dist < 1e-3, (c, dist)
        details.append(f"c={c}: res={res_rel:.1e} pohozaev=({p1:.1e},{p2:.1e}) "
                       f"oracle={dist:.1e}")
    _ok("1 ground-state validity", "; ".join(details))


def test_criterion_2_sharp_gagliardo_nirenberg(gs, grid):
    at_gs = h.gn_ratio(gs.profile, gs)
    assert abs(at_gs - 1.0) < 1e-4
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(200):
        f = random_radial_field(grid, rng)
        worst = max(worst, h.gn_ratio(f, gs))
    assert worst <= 1.0 + 1e-3, worst
    _ok("2 sharp Gagliardo-Nirenberg",
        f"ratio(Q)-1={at_gs - 1:.2e}, max over 200 fields={worst:.6f}")


def test_criterion_3_conservation_soliton(gs):
    grid = gs.profile.grid
    q = gs.profile.values.real

    def soliton_run(delta):
        dt = delta / max(1.0, gs.hardy)
        n_steps = int(round(1.0 / dt))
        state = h.EvolutionState(t=0.0, field=gs.profile, dt=dt, step_count=0)
        m0 = h.mass(state.field)
        e0 = h.energy(state.field)
        worst_dev = 0.0
        mass_drift = 0.0
        energy_drift = 0.0
        for k in range(n_steps):
            state = h.step(state, dt)
            if (k + 1) % 200 == 0 or k + 1 == n_steps:
                dev = math.sqrt(
                    h.mass(h.Field(grid, np.abs(state.field.values) - q)) / gs.mass_sq)
                worst_dev = max(worst_dev, dev)
                mass_drift = max(mass_drift, abs(h.mass(state.field) - m0) / m0)
                energy_drift = max(energy_drift, abs(h.energy(state.field) - e0))
        return worst_dev, mass_drift, energy_drift

    dev1, mdrift, edrift = soliton_run(0.01)
    assert mdrift < 1e-10, mdrift
    assert edrift < 1e-6, edrift
    assert dev1 < 1e-3, dev1
    dev2, _, _ = soliton_run(0.005)
    assert dev1 / dev2 >= 2.7, (dev1, dev2)
    _ok("3 conservation + soliton",
        f"mass drift={mdrift:.1e}, energy drift={edrift:.1e}, "
        f"sup dev={dev1:.1e}, dt-halving ratio={dev1 / dev2:.2f}")


def test_criterion_4_blowup_rate(big_run):
    tr = big_run
    assert tr.growth() >= 1e3, tr.growth()
    assert tr.mass_drift() < 1e-6
    e1 = h.estimate_t_star(tr, window_growth=100.0)
    e2 = h.estimate_t_star(tr, window_growth=300.0)
    assert e1.rate_infimum > 0 and e2.rate_infimum > 0
    rel = abs(e2.rate_infimum - e1.rate_infimum) / e1.rate_infimum
    assert rel <= 0.2, rel
    # energy conservation audit while the focusing stays below 1000x
    edrift = tr.energy_drift_while(1e3)
    assert edrift < 1e-5, edrift
    _ok("4 blow-up rate",
        f"growth={tr.growth():.0f}x, t*={e1.t_star:.5f}, "
        f"fit resid={e1.fit_residual:.1e}, rate_inf={e1.rate_infimum:.2f} "
        f"(window shift {100 * rel:.1f}%), energy drift@1e3x={edrift:.1e}")


def test_criterion_5_mass_concentration(big_run, gs):
    est = h.estimate_t_star(big_run, window_growth=100.0)
    spec = h.WindowSpec(kappa=1.0, beta=0.25, t_star=est.t_star)
    rows = h.concentration_curve(big_run, gs, spec)
    hmax = max(r.hardy for r in rows)
    tail = [r for r in rows if r.hardy >= hmax / 10.0]
    fracs = [r.fraction for r in tail]
    assert len(tail) >= 5
    for a, b in zip(fracs, fracs[1:]):
        assert b >= a - 0.02, (a, b)
    assert fracs[-1] >= 0.9, fracs[-1]
    h0 = rows[0].hardy
    proxy = admissibility_proxy([r for r in rows if r.hardy >= 100.0 * h0])
    assert np.all(np.diff(proxy) > 0)
    _ok("5 mass concentration",
        f"final fraction={fracs[-1]:.3f}, last-decade fractions "
        f"[{fracs[0]:.3f}..{fracs[-1]:.3f}], proxy increasing over "
        f"{proxy.size} checkpoints")


def test_criterion_6_profile_decomposition():
    box = h.CartesianGrid(d=3, m=64, box_half_width=16.0, c=0.1)
    v1 = gaussian_bubble(box, width=1.0)
    v2 = gaussian_bubble(box, width=1.25, amplitude=0.7)
    n_seq = 16
    nn = np.arange(1, n_seq + 1)
    k = 4 + (3 * nn) // 4           # diagonal, torus-monotone center law
    law1 = np.stack([k] * 3, axis=1)
    law2 = -law1
    noise = band_limited_noise(box, np.random.default_rng(11),
                               amplitude=1e-3 * math.sqrt(h.mass(v1)))
    seq = h.generate_synthetic([v1, v2], [law1, law2], noise, n_seq)
    dec = h.extract_profiles(seq, l_max=4, probe_radius=2.5)
    assert dec.ell == 2 and not dec.truncated

    worst_center = 0
    worst_mass = 0.0
    for vj, cenj in zip(dec.profiles, dec.centers):
        errs, merrs = [], []
        for truth, law in ((v1, law1), (v2, law2)):
            errs.append(max(np.max(np.abs(min_image_delta(cenj[n], law[n] % box.m,
                                                          box.m)))
                            for n in range(n_seq)))
            merrs.append(abs(h.mass(vj) - h.mass(truth)) / h.mass(truth))
        j = int(np.argmin(errs))
        worst_center = max(worst_center, errs[j])
        worst_mass = max(worst_mass, merrs[j])
    assert worst_center <= 1
    assert worst_mass < 1e-2

    rep = h.defect_report(dec, p=10.0 / 3.0)
    masses = np.array([h.mass(v) for v in seq.entries])
    hardys = np.array([abs(h.hardy_functional(v)) for v in seq.entries])
    pyth_rel = rep.pythagorean_defect / masses
    hardy_rel = rep.hardy_defect / hardys
    assert pyth_rel[-1] < 1e-3 and hardy_rel[-1] < 1e-3
    half = n_seq // 2
    # net decrease across the final half, down to the noise floor
    assert pyth_rel[-1] <= pyth_rel[half] * 1.05 + 1e-9
    assert hardy_rel[-1] <= hardy_rel[half] * 1.05 + 1e-9
    noise_lp = h.lp_norm(noise, 10.0 / 3.0)
    assert rep.residual_lp[-1] <= 1.25 * noise_lp
    _ok("6 profile decomposition",
        f"centers within {worst_center} cell, mass err={worst_mass:.1e}, "
        f"defects@16=({pyth_rel[-1]:.1e},{hardy_rel[-1]:.1e}), "
        f"residual lp={rep.residual_lp[-1]:.2e} vs noise {noise_lp:.2e}")


def test_criterion_7_cross_term_vanishing():
    box = h.CartesianGrid(d=3, m=64, box_half_width=16.0, c=0.1)
    R = 1.5
    v = origin_bubble(box, width=0.5, support_radius=R)
    env = positive_envelope(box)
    wr = band_limited_noise(box, np.random.default_rng(5))
    vals = []
    for mult in (4, 8, 16):
        a = mult * R / math.sqrt(3.0)
        sh = np.full(3, round(a / box.h), dtype=int)
        shifted = h.translate(v, sh)
        for w in (env, wr):
            ct = h.cross_term(v, w, sh)
            bound = h.quadrature(
                h.Field(box, np.abs(shifted.values) * np.abs(w.values))) / R ** 2
            assert abs(ct) <= bound * (1 + 1e-8), (mult, ct, bound)
        vals.append(h.cross_term(v, env, sh))
    assert vals[0] > vals[1] > vals[2] > 0, vals
    _ok("7 cross-term vanishing",
        f"|ct| at 4R/8R/16R = {vals[0]:.2e}/{vals[1]:.2e}/{vals[2]:.2e}, "
        f"domination bound holds at all three")


def test_criterion_8_compactness_pipeline(big_run, gs):
    box = h.CartesianGrid(d=3, m=96, box_half_width=12.0, c=gs.c)
    q_lat = radial_to_lattice(gs.profile, box)
    seq_const = h.FieldSequence(entries=[q_lat] * 6)
    rep_const = h.compactness_harness(seq_const, gs, probe_radius=8.0)
    assert rep_const.passed
    eq_gap = abs(rep_const.extracted_norm - rep_const.bound) / math.sqrt(gs.mass_sq)
    assert eq_gap <= 0.05, eq_gap

    h0 = big_run.hardy0
    snaps = []
    for t, f in big_run.checkpoints:
        if f.grid.hardy_form(f.values) >= 30.0 * h0:
            snaps.append(radial_to_lattice(h.rescaled_snapshot(gs, f), box))
    assert len(snaps) >= 4
    rep_snap = h.compactness_harness(h.FieldSequence(entries=snaps), gs,
                                     probe_radius=8.0)
    assert rep_snap.passed
    assert rep_snap.extracted_norm >= 0.95 * math.sqrt(gs.mass_sq)
    _ok("8 compactness pipeline",
        f"constant-Q equality gap={eq_gap:.3f}, snapshots: extracted/||Q||="
        f"{rep_snap.extracted_norm / math.sqrt(gs.mass_sq):.3f} "
        f"(bound {rep_snap.bound:.3f}) over {len(snaps)} snapshots")


def test_criterion_9_diamagnetic_inequality():
    box = h.CartesianGrid(d=3, m=48, box_half_width=12.0, c=0.1)
    rng = np.random.default_rng(77)
    worst = np.inf
    for _ in range(500):
        f = random_cartesian_field(box, rng)
        worst = min(worst, h.diamagnetic_defect(f) / h.gradient_norm_sq(f))
    assert worst >= -1e-8, worst
    _ok("9 diamagnetic inequality", f"min defect/grad over 500 fields = {worst:.3e}")


def test_criterion_10_determinism(tmp_path):
    outs = {"profiles": [], "pipeline": []}
    prof_params = {"d": 3, "m": 32, "box": 8.0, "n_seq": 4, "stride": 1,
                   "noise": 1e-3, "l_max": 3, "probe_radius": 2.0}
    pipe_params = {"d": 3, "c": 0.1, "n": 1024, "delta_dt": 0.005,
                   "growth_target": 400.0, "record_every": 10}
    for rep in (1, 2):
        run(RunConfig("profiles", dict(prof_params), tmp_path / f"prof{rep}",
                      rng_seed=5))
        outs["profiles"].append(
            (tmp_path / f"prof{rep}" / "defects.csv").read_bytes())
        run(RunConfig("pipeline_concentration", dict(pipe_params),
                      tmp_path / f"pipe{rep}", rng_seed=5))
        blob = b""
        for name in ("trace.csv", "concentration.csv", "blowup_estimate.csv",
                     "ground_state.csv"):
            blob += (tmp_path / f"pipe{rep}" / name).read_bytes()
        outs["pipeline"].append(blob)
    assert outs["profiles"][0] == outs["profiles"][1]
    assert outs["pipeline"][0] == outs["pipeline"][1]
    _ok("10 determinism",
        f"profiles CSV {len(outs['profiles'][0])} bytes and pipeline CSVs "
        f"{len(outs['pipeline'][0])} bytes byte-identical across reruns")
