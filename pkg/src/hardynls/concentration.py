"""Mass concentration diagnostics for blow-up runs.

The focusing scale is rho(t) = sqrt(H(Q)/H(u(t))); zooming a snapshot by it,
v(t, x) = rho^{d/2} u(t, rho x), pins the Hardy functional of v at H(Q) while
mass is conserved, which is the normalization under which the snapshot family
admits a nontrivial bubble.  On the geometric radial grid the zoom is exact:
it relabels the radii by 1/rho and scales the samples, so H(v) = H(Q) and
mass(v) = mass(u) hold to roundoff.

The concentration curve then measures the mass inside shrinking windows
a(t) = kappa (t* - t)^beta around the origin (radial symmetry pins the
concentration center) and compares it against the ground-state mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import (
    DegenerateFieldError,
    InconsistentEstimateError,
    ParameterError,
    UnsupportedOperationError,
)
from .evolution import BlowupEstimate, EvolutionTrace
from .grids import CartesianGrid, Field, RadialGrid
from .ground_state import GroundState

__all__ = [
    "WindowSpec",
    "ConcentrationRow",
    "focusing_scale",
    "rescaled_snapshot",
    "windowed_mass",
    "best_center",
    "concentration_curve",
    "admissibility_proxy",
]

H_FLOOR = 1e-12


@dataclass(frozen=True)
class WindowSpec:
    """Power-law window a(t) = kappa (t_star - t)^beta, beta < 1/2 so that
    sqrt(t_star - t)/a(t) -> 0 (admissible for the concentration statement)."""

    kappa: float
    beta: float
    t_star: float
    form: str = "power_law"

    def __post_init__(self):
        if self.form != "power_law":
            raise ParameterError(f"unknown window form {self.form!r}")
        if self.kappa <= 0:
            raise ParameterError("kappa must be positive")
        if not 0.0 < self.beta < 0.5:
            raise ParameterError("beta must lie in (0, 1/2)")

    def radius(self, t: float) -> float:
        if t >= self.t_star:
            raise InconsistentEstimateError(f"window evaluated at t={t} >= t*={self.t_star}")
        return self.kappa * (self.t_star - t) ** self.beta


@dataclass(frozen=True)
class ConcentrationRow:
    t: float
    rho: float
    a_t: float
    center: tuple
    windowed_mass: float
    fraction: float        # windowed_mass / ||Q||^2
    hardy: float


def focusing_scale(gs: GroundState, f: Field) -> float:
    """rho = sqrt(H(Q) / H(f)); small once the field has focused."""
    if f.grid.kind != "radial":
        raise UnsupportedOperationError("focusing_scale takes radial fields")
    H = f.grid.hardy_form(f.values)
    if H <= H_FLOOR:
        raise DegenerateFieldError(f"H(f) = {H} too small to define a scale")
    return sqrt(gs.hardy / H)


def rescaled_snapshot(gs: GroundState, f: Field) -> Field:
    """Zoomed snapshot v(x) = rho^{d/2} f(rho x) with rho = focusing_scale.

    Exact on the geometric grid: the returned field lives on the same lattice
    of log-radii shifted by -log rho (bounds divided by rho), with samples
    rho^{d/2} f; consequently H(v) = H(Q) and mass(v) = mass(f) to roundoff.
    """
    g = f.grid
    rho = focusing_scale(gs, f)
    zoom_grid = g.with_bounds(g.r_min / rho, g.r_max / rho)
    return Field(zoom_grid, rho ** (g.d / 2.0) * f.values)


def windowed_mass(f: Field, center, radius: float) -> float:
    """Mass of f inside the ball |x - center| <= radius.

    Radial fields require the origin center.  Monotone nondecreasing in the
    radius by construction.
    """
    if radius <= 0:
        raise ParameterError("radius must be positive")
    g = f.grid
    absq = np.abs(f.values) ** 2
    if g.kind == "radial":
        if center is not None and np.any(np.asarray(center) != 0):
            raise UnsupportedOperationError("radial windows are centered at the origin")
        sel = g.radii <= radius
        return float(np.sum(g.weights[sel] * absq[sel]))
    center = np.asarray(center, dtype=int)
    if center.shape != (g.d,):
        raise ParameterError(f"center must be {g.d} lattice indices")
    dist_sq = np.roll(g.offset_sq, tuple(center), axis=tuple(range(g.d)))
    return float(g.cell_volume * np.sum(absq[dist_sq <= radius ** 2]))


def best_center(f: Field, radius: float) -> np.ndarray:
    """Lattice point maximizing the windowed mass, by convolving |f|^2 with
    the ball indicator; ties resolve to the smallest lexicographic index."""
    g = f.grid
    if g.kind != "cartesian":
        raise UnsupportedOperationError("best_center needs a Cartesian field")
    if radius <= 0:
        raise ParameterError("radius must be positive")
    kern = np.fft.fftn(g.ball_kernel(radius))
    score = np.fft.ifftn(np.fft.fftn(np.abs(f.values) ** 2) * kern).real
    return np.array(np.unravel_index(int(np.argmax(score)), score.shape))


def concentration_curve(trace: EvolutionTrace, gs: GroundState, spec: WindowSpec,
                        check_admissibility: bool = True,
                        admissibility_growth: float = 100.0) -> list[ConcentrationRow]:
    """One row per checkpoint: focusing scale, window radius, windowed mass
    around the origin, and its fraction of the ground-state mass.

    The admissibility check requires a(t) sqrt(H(u(t))) to increase over the
    resolved focusing window (checkpoints past `admissibility_growth` times
    the initial Hardy functional); before focusing sets in the product is
    dominated by the shrinking window and carries no information.
    """
    if not trace.checkpoints:
        raise InconsistentEstimateError("trace has no checkpoints")
    t_last = trace.checkpoints[-1][0]
    if spec.t_star <= t_last:
        raise InconsistentEstimateError(
            f"t* = {spec.t_star} precedes the last checkpoint at {t_last}")
    rows = []
    for t, f in trace.checkpoints:
        H = f.grid.hardy_form(f.values)
        if H <= H_FLOOR:
            continue
        a_t = spec.radius(t)
        wm = windowed_mass(f, None, a_t)
        rows.append(ConcentrationRow(
            t=t, rho=sqrt(gs.hardy / H), a_t=a_t, center=(0.0,) * f.grid.d,
            windowed_mass=wm, fraction=wm / gs.mass_sq, hardy=H))
    if check_admissibility and rows:
        h0 = rows[0].hardy
        proxy = admissibility_proxy([r for r in rows
                                     if r.hardy >= admissibility_growth * h0])
        if proxy.size >= 2 and np.any(np.diff(proxy) <= 0):
            raise InconsistentEstimateError(
                "window admissibility proxy a(t) sqrt(H) is not increasing on "
                "the focusing window; window shrinks faster than the focusing "
                "scale")
    return rows


def admissibility_proxy(rows: list[ConcentrationRow]) -> np.ndarray:
    """a(t) * sqrt(H(u(t))), the discrete surrogate of a(t) ||grad u(t)||;
    it must increase for the window to see the whole bubble."""
    return np.array([r.a_t * sqrt(r.hardy) for r in rows])
