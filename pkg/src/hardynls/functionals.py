"""Scalar functionals of a field: mass, Hardy functional, energy, L^p norms,
the sharp Gagliardo-Nirenberg ratio, and the inequality margins.

Conventions (d = grid dimension, c = coupling):

* mass(f)             = integral |f|^2
* hardy_functional(f) = ||grad f||^2 - c * integral |f|^2/|x|^2   (H)
* energy(f)           = H/2 - d/(4+2d) * integral |f|^(4/d+2)
* critical power p_c  = 4/d + 2, the mass-critical exponent

On radial grids H is evaluated as the weighted Dirichlet form of
psi = r^-sigma f (see grids.py), which keeps it nonnegative and exact on
singular profiles; the reported gradient term is then H + c * potential
so the defining identity H = gradient - c * potential holds bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DegenerateFieldError, ParameterError
from .grids import Field, critical_coupling, gradient_norm_sq, quadrature

if TYPE_CHECKING:
    from .ground_state import GroundState

__all__ = [
    "critical_power",
    "mass",
    "potential_term",
    "hardy_functional",
    "energy",
    "lp_norm",
    "h1_norm",
    "gn_ratio",
    "diamagnetic_defect",
    "hardy_margin",
    "InvariantReport",
]


def critical_power(d: int) -> float:
    """Mass-critical Lebesgue exponent 4/d + 2."""
    return 4.0 / d + 2.0


def mass(f: Field) -> float:
    """Squared L^2 norm, integral of |f|^2."""
    return quadrature(Field(f.grid, np.abs(f.values) ** 2))


def potential_term(f: Field) -> float:
    """Integral of |f|^2 / |x|^2 (finite on both grid kinds: no node at 0)."""
    g = f.grid
    if g.kind == "radial":
        return g.potential_form(f.values)
    return float(np.real(g.quad(np.abs(f.values) ** 2 / g.radius_sq)))


def hardy_functional(f: Field) -> float:
    """H(f) = ||grad f||^2 - c * integral |f|^2/|x|^2, with c from the grid."""
    g = f.grid
    if g.kind == "radial":
        return g.hardy_form(f.values)
    return gradient_norm_sq(f) - g.c * potential_term(f)


def energy(f: Field) -> float:
    """Conserved energy: H(f)/2 - d/(4+2d) * ||f||_{p_c}^{p_c}."""
    d = f.grid.d
    p = critical_power(d)
    return 0.5 * hardy_functional(f) - d / (4.0 + 2.0 * d) * lp_norm(f, p) ** p


def lp_norm(f: Field, p: float) -> float:
    """L^p norm via quadrature, p >= 2."""
    if p < 2:
        raise ParameterError(f"lp_norm requires p >= 2, got {p}")
    return float(quadrature(Field(f.grid, np.abs(f.values) ** p)) ** (1.0 / p))


def h1_norm(f: Field) -> float:
    """H^1 surrogate norm sqrt(||grad f||^2 + ||f||^2)."""
    return float(np.sqrt(gradient_norm_sq(f) + mass(f)))


def gn_ratio(f: Field, gs: "GroundState") -> float:
    """Sharp Gagliardo-Nirenberg quotient.

    ||f||_{p_c}^{p_c} / (C_d * H(f) * ||f||_2^{4/d}) with the sharp constant
    C_d = (d+2)/d * ||Q||_2^{-4/d} taken from the computed ground state.
    Equals 1 at f = Q and is < 1 elsewhere (up to discretization).
    """
    d = f.grid.d
    p = critical_power(d)
    m = mass(f)
    if m == 0.0:
        raise DegenerateFieldError("gn_ratio of the zero field")
    H = hardy_functional(f)
    if H <= 0.0:
        raise DegenerateFieldError(f"gn_ratio needs H(f) > 0, got {H}")
    num = lp_norm(f, p) ** p
    return num / (gs.sharp_constant * H * m ** (2.0 / d))


def diamagnetic_defect(f: Field) -> float:
    """||grad f||^2 - ||grad |f|||^2, nonnegative up to discretization."""
    return gradient_norm_sq(f) - gradient_norm_sq(Field(f.grid, np.abs(f.values)))


def hardy_margin(f: Field) -> float:
    """||grad f||^2 - c* * integral |f|^2/|x|^2 (sharp Hardy inequality margin)."""
    if mass(f) == 0.0:
        raise DegenerateFieldError("hardy_margin of the zero field")
    cstar = critical_coupling(f.grid.d)
    return gradient_norm_sq(f) - cstar * potential_term(f)


@dataclass(frozen=True)
class InvariantReport:
    """One row of conserved/monitored quantities for a field."""

    mass: float
    gradient_term: float
    potential_term: float
    hardy: float
    lp_critical: float
    energy: float

    HARDY_SLACK = 1e-8

    @classmethod
    def from_field(cls, f: Field) -> "InvariantReport":
        g = f.grid
        d = g.d
        p = critical_power(d)
        m = mass(f)
        pot = potential_term(f)
        grad = gradient_norm_sq(f)
        # bit-level identities: hardy and energy are defined from the parts
        hardy = grad - g.c * pot
        lp_crit = lp_norm(f, p) ** p
        en = 0.5 * hardy - d / (4.0 + 2.0 * d) * lp_crit
        cstar = critical_coupling(d)
        if cstar * pot > grad * (1.0 + cls.HARDY_SLACK):
            raise DegenerateFieldError(
                f"discrete Hardy inequality violated: c*|f/x|^2 = {cstar * pot} "
                f"> (1+tol) ||grad f||^2 = {grad}")
        return cls(mass=m, gradient_term=grad, potential_term=pot,
                   hardy=hardy, lp_critical=lp_crit, energy=en)
