"""Deterministic synthetic fields for experiments and property checks."""

from __future__ import annotations

import numpy as np

from .grids import CartesianGrid, Field, RadialGrid

__all__ = [
    "nyquist_mollify",
    "gaussian_bubble",
    "origin_bubble",
    "band_limited_noise",
    "positive_envelope",
    "random_radial_field",
    "random_cartesian_field",
]


def nyquist_mollify(grid: CartesianGrid, values: np.ndarray) -> np.ndarray:
    """One-grid-scale mollification: remove the unpaired Nyquist modes.

    Idempotent, and the identity on fields already band-limited below the
    Nyquist plane (up to FFT roundoff).
    """
    spec = np.fft.fftn(values)
    mask1 = np.ones(grid.m)
    mask1[grid.m // 2] = 0.0
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.m
        spec = spec * mask1.reshape(shape)
    return np.fft.ifftn(spec)


def gaussian_bubble(grid: CartesianGrid, width: float,
                    support_radius: float | None = None,
                    amplitude: complex = 1.0, mollified: bool = True) -> Field:
    """Bubble centered at lattice index 0.

    Without a support_radius: a Gaussian stamp, mollified by default so that
    widths comfortably above the lattice spacing are invariant (to FFT
    roundoff) under the extraction pipeline's window-and-mollify step; pass
    mollified=False for narrow spike bubbles, which the Nyquist cut would
    ring.  With support_radius: the stamp is hard-cut on the lattice (exact
    compact support, for domination-bound tests).
    """
    vals = amplitude * np.exp(-grid.offset_sq / (2.0 * width ** 2))
    if mollified:
        vals = nyquist_mollify(grid, vals)
    if support_radius is not None:
        vals = vals * (grid.offset_sq <= support_radius ** 2)
    return Field(grid, vals)


def origin_bubble(grid: CartesianGrid, width: float, support_radius: float,
                  amplitude: complex = 1.0) -> Field:
    """Compactly supported bubble around the coordinate origin.

    Support is exactly the coordinate ball |x| <= support_radius, so the
    inverse-square domination bound applies with that radius; lattice
    translations move the support ball rigidly.
    """
    vals = amplitude * np.exp(-grid.radius_sq / (2.0 * width ** 2))
    vals = vals * (grid.radius_sq <= support_radius ** 2)
    return Field(grid, vals)


def band_limited_noise(grid: CartesianGrid, rng: np.random.Generator,
                       k_width: float = 2.0, amplitude: float = 1.0) -> Field:
    """Broadband complex field with a Gaussian spectral envelope, unit L^2
    norm scaled by `amplitude`."""
    spec = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    spec = spec * np.exp(-grid.k_sq / (2.0 * k_width ** 2))
    vals = np.fft.ifftn(spec)
    norm = np.sqrt(float(grid.cell_volume * np.sum(np.abs(vals) ** 2)))
    return Field(grid, amplitude / norm * vals)


def positive_envelope(grid: CartesianGrid, width: float = 8.0) -> Field:
    """Smooth positive deterministic field (for sweep tests that need a
    sign-definite overlap)."""
    return Field(grid, 0.5 + np.exp(-grid.radius_sq / (2.0 * width ** 2)))


def random_radial_field(grid: RadialGrid, rng: np.random.Generator,
                        n_bumps: int = 4, complex_field: bool = True) -> Field:
    """Smooth decaying radial field: a few Gaussian bumps at O(1) radii."""
    r = grid.radii
    vals = np.zeros(grid.n, dtype=np.complex128)
    for _ in range(n_bumps):
        center = rng.uniform(0.0, 6.0)
        width = rng.uniform(0.6, 2.5)
        amp = rng.normal()
        if complex_field:
            amp = amp + 1j * rng.normal()
        vals += amp * np.exp(-((r - center) ** 2) / (2.0 * width ** 2))
    return Field(grid, vals)


def random_cartesian_field(grid: CartesianGrid, rng: np.random.Generator,
                           k_width: float = 2.0) -> Field:
    """Alias of band_limited_noise with unit amplitude."""
    return band_limited_noise(grid, rng, k_width=k_width, amplitude=1.0)
