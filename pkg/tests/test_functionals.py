import math

import numpy as np
import pytest

import hardynls as h
from hardynls.errors import DegenerateFieldError, ParameterError
from hardynls.functionals import InvariantReport, potential_term
from hardynls.synth import random_cartesian_field, random_radial_field

PI32 = math.pi ** 1.5


def gaussian(grid):
    return h.Field(grid, np.exp(-grid.radii ** 2 / 2))


def test_mass_zero_and_gaussian(grid):
    assert h.mass(h.Field(grid, np.zeros(grid.n))) == 0.0
    assert abs(h.mass(gaussian(grid)) - PI32) < 1e-6 * PI32


def test_hardy_gaussian_closed_form(grid):
    # ||grad f||^2 = (3/2) pi^{3/2}, potential integral = 2 pi^{3/2}
    f = gaussian(grid)
    expected = (1.5 - 2 * grid.c) * PI32
    assert abs(h.hardy_functional(f) - expected) < 1e-4 * expected


def test_hardy_zero(grid):
    assert h.hardy_functional(h.Field(grid, np.zeros(grid.n))) == 0.0


def test_hardy_scaling(grid):
    f = gaussian(grid)
    lam = 1.4
    ratio = h.hardy_functional(h.rescale(f, lam)) / h.hardy_functional(f)
    assert abs(ratio - lam ** 2) < 1e-4 * lam ** 2


def test_hardy_nonnegative_on_rough_data(grid):
    rng = np.random.default_rng(0)
    z = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
    assert h.hardy_functional(h.Field(grid, z)) >= 0.0


def test_energy_zero_field(grid):
    assert h.energy(h.Field(grid, np.zeros(grid.n))) == 0.0


def test_energy_of_ground_state(gs):
    # E(Q) = 0 by the virial identities
    assert abs(h.energy(gs.profile)) < 1e-5 * gs.hardy


def test_energy_scaled_ground_state(gs):
    # E(a Q) = H(Q) (a^2 - a^{4/d+2}) / 2
    a = 1.1
    f = h.Field(gs.profile.grid, a * gs.profile.values)
    expected = gs.hardy * (a ** 2 - a ** (4 / 3 + 2)) / 2
    got = h.energy(f)
    assert got < 0
    assert abs(got - expected) < 1e-5 * abs(expected) + 1e-5 * gs.hardy


def test_lp_norm_gaussian(grid):
    # integral e^{-p|x|^2/2} = (2 pi / p)^{d/2}
    p = 10.0 / 3.0
    expected = ((2 * math.pi / p) ** 1.5) ** (1 / p)
    assert abs(h.lp_norm(gaussian(grid), p) - expected) < 1e-5 * expected


def test_lp_norm_requires_p_geq_2(grid):
    with pytest.raises(ParameterError):
        h.lp_norm(gaussian(grid), 1.5)


def test_lp_translate_invariance(box):
    f = random_cartesian_field(box, np.random.default_rng(7))
    g = h.translate(f, (9, -4, 17))
    assert abs(h.lp_norm(g, 10 / 3) - h.lp_norm(f, 10 / 3)) \
        <= 1e-13 * h.lp_norm(f, 10 / 3)


# ---- sharp Gagliardo-Nirenberg quotient ----

def test_gn_ratio_at_ground_state(gs):
    assert abs(h.gn_ratio(gs.profile, gs) - 1.0) < 1e-4


def test_gn_ratio_gaussian_strictly_below_one(grid, gs):
    assert h.gn_ratio(gaussian(grid), gs) < 1.0


def test_gn_ratio_scale_invariance(grid, gs):
    f = gaussian(grid)
    assert abs(h.gn_ratio(h.rescale(f, 1.6), gs) - h.gn_ratio(f, gs)) < 1e-3


def test_gn_ratio_random_fields_below_one(grid, gs):
    rng = np.random.default_rng(42)
    for _ in range(30):
        f = random_radial_field(grid, rng)
        assert h.gn_ratio(f, gs) <= 1.0 + 1e-3


def test_gn_ratio_zero_field_degenerate(grid, gs):
    with pytest.raises(DegenerateFieldError):
        h.gn_ratio(h.Field(grid, np.zeros(grid.n)), gs)


# ---- diamagnetic defect ----

def test_diamagnetic_real_nonnegative(grid):
    f = gaussian(grid)
    assert abs(h.diamagnetic_defect(f)) < 1e-10


def test_diamagnetic_global_phase(grid):
    f = h.Field(grid, np.exp(1j * 0.77) * np.exp(-grid.radii ** 2 / 2))
    assert abs(h.diamagnetic_defect(f)) < 1e-10 * h.gradient_norm_sq(f)


def test_diamagnetic_random_cartesian(box):
    rng = np.random.default_rng(5)
    for _ in range(25):
        f = random_cartesian_field(box, rng)
        assert h.diamagnetic_defect(f) >= -1e-8 * h.gradient_norm_sq(f)


def test_diamagnetic_radial_exact_sign(grid):
    rng = np.random.default_rng(9)
    for _ in range(25):
        f = random_radial_field(grid, rng)
        assert h.diamagnetic_defect(f) >= -1e-12 * h.gradient_norm_sq(f)


# ---- Hardy margin ----

def test_hardy_margin_gaussian(grid):
    # grad - c* pot = (3/2 - 2/4) pi^{3/2} = pi^{3/2} for d = 3
    got = h.hardy_margin(gaussian(grid))
    assert abs(got - PI32) < 1e-4 * PI32


def test_hardy_margin_random_fields(grid):
    rng = np.random.default_rng(31)
    for _ in range(100):
        f = random_radial_field(grid, rng)
        assert h.hardy_margin(f) >= -1e-6 * h.gradient_norm_sq(f)


def test_hardy_margin_far_support(grid):
    # bump at distance R: potential term bounded by mass / R^2
    R = 20.0
    f = h.Field(grid, np.exp(-((grid.radii - R) ** 2) / 0.5))
    grad = h.gradient_norm_sq(f)
    margin = h.hardy_margin(f)
    bound = 0.25 * h.mass(f) / (R - 5.0) ** 2
    assert grad - margin <= bound
    assert margin > 0


# ---- invariant report ----

def test_invariant_report_identities(grid):
    f = h.Field(grid, np.exp(-grid.radii ** 2 / 2) * (1 + 1j * grid.radii))
    rep = InvariantReport.from_field(f)
    assert rep.hardy == rep.gradient_term - grid.c * rep.potential_term
    d = grid.d
    assert rep.energy == 0.5 * rep.hardy - d / (4 + 2 * d) * rep.lp_critical
    assert rep.potential_term == potential_term(f)
    cstar = h.critical_coupling(d)
    assert cstar * rep.potential_term <= rep.gradient_term * (1 + 1e-8)
