"""Radial ground-state computation and its independent verification.

The profile Q is the nonnegative radial solution of

    Lap Q + c/|x|^2 Q - Q + |Q|^{4/d} Q = 0,

computed as the fixed point of the spectral-renormalization (Petviashvili)
iteration for L Q = Q^{1+4/d}, L = -Lap - c/|x|^2 + 1, followed by a Newton
polish in extended precision on the factored unknown psi = r^-sigma Q.  The
factored form removes the origin singularity analytically: psi solves

    psi'' + (D-1)/r psi' - psi + r^{(p-1) sigma} psi^p = 0,   D = d + 2 sigma,

whose discrete weighted form is the same tridiagonal operator the rest of
the package uses, so e^{it} Q is an exact solution of the semi-discrete flow.

Validation is by the virial/Pohozaev identities (multiply the equation by Q
and by x.grad Q and integrate):

    H(Q) = (d/2) ||Q||^2,      ||Q||_{p_c}^{p_c} = (d+2)/d H(Q),

which together give E(Q) = 0, and by an independent ODE shooting oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import log, sqrt

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .errors import ConvergenceError, OracleError, ParameterError
from .functionals import critical_power, h1_norm, lp_norm, mass
from .grids import Field, RadialGrid, critical_coupling, origin_exponent, sphere_area

__all__ = [
    "GroundState",
    "solve_ground_state",
    "equation_residual",
    "sharp_constant",
    "ShootingProfile",
    "shooting_oracle",
    "oracle_l2_distance",
]

POHOZAEV_RTOL = 1e-5
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class GroundState:
    """Converged ground state plus cached invariants."""

    profile: Field
    d: int
    c: float
    mass_sq: float          # ||Q||_2^2
    hardy: float            # H(Q)
    critical_lp: float      # ||Q||_{p_c}^{p_c}
    sharp_constant: float   # C_d = (d+2)/d ||Q||^{-4/d}
    residual: float         # certified quadrature-L2 residual of the equation
    values_hi: np.ndarray = dc_field(repr=False, default=None)  # longdouble samples

    def pohozaev_defects(self) -> tuple[float, float]:
        """Relative defects of the two virial identities."""
        p1 = abs(self.hardy - 0.5 * self.d * self.mass_sq) / self.hardy
        p2 = abs(self.critical_lp - (self.d + 2) / self.d * self.hardy) / self.critical_lp
        return p1, p2


def sharp_constant(gs: GroundState) -> float:
    """C_d = (d+2)/d * mass_sq^{-2/d}."""
    return (gs.d + 2) / gs.d * gs.mass_sq ** (-2.0 / gs.d)


# ---------------------------------------------------------------------------
# extended-precision machinery on the factored unknown
# ---------------------------------------------------------------------------

class _FactoredOps:
    """Longdouble arrays for the psi-form operator on a radial grid."""

    def __init__(self, grid: RadialGrid):
        ld = np.longdouble
        n = grid.n
        drho = (ld(log(grid.r_max)) - ld(log(grid.r_min))) / n
        rho_e = ld(log(grid.r_min)) + drho * np.arange(n + 1, dtype=ld)
        rho = rho_e[:-1] + drho / 2
        sig = ld(grid.sigma)
        D = ld(grid.d) + 2 * sig
        self.drho = drho
        self.r = np.exp(rho)
        self.r_sigma = np.exp(sig * rho)
        self.w = ld(grid.sphere) * np.exp(grid.d * rho) * drho
        self.wD = ld(grid.sphere) * np.exp(D * rho) * drho
        self.mu = np.exp((D - 2) * rho_e)
        inv_wD = np.exp(-D * rho) / drho ** 2
        self.lo = inv_wD * self.mu[:-1]
        self.lo[0] = 0
        self.up = inv_wD * self.mu[1:]
        self.di = -(self.mu[:-1] + self.mu[1:]) * inv_wD
        self.di[0] = -self.mu[1] * inv_wD[0]
        self.p = ld(1) + ld(4) / grid.d     # nonlinearity power 1 + 4/d
        self.nl_coef = np.exp((self.p - 1) * sig * rho)   # r^{(p-1) sigma}

    def lap_psi(self, psi: np.ndarray) -> np.ndarray:
        out = self.di * psi
        out[:-1] = out[:-1] + self.up[:-1] * psi[1:]
        out[1:] = out[1:] + self.lo[1:] * psi[:-1]
        return out

    def residual_vec(self, psi: np.ndarray) -> np.ndarray:
        """Pointwise psi-form residual; original residual is r^sigma times it."""
        return -self.lap_psi(psi) + psi - self.nl_coef * np.abs(psi) ** (self.p - 1) * psi

    def residual_norm(self, psi: np.ndarray) -> float:
        # quadrature L2 norm of the original-equation residual:
        # sum w |r^sigma F_psi|^2 = sum wD |F_psi|^2
        F = self.residual_vec(psi)
        return float(np.sqrt(np.sum(self.wD * F ** 2)))


def _thomas_ld(sub, diag, sup, rhs):
    """Tridiagonal solve in longdouble (no pivoting; rows are near-symmetric
    M-matrix plus identity, safely dominant)."""
    n = len(diag)
    ld = np.longdouble
    cp = np.empty(n - 1, dtype=ld)
    dp = np.empty(n, dtype=ld)
    cp[0] = sup[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n - 1):
        m = diag[i] - sub[i - 1] * cp[i - 1]
        cp[i] = sup[i] / m
        dp[i] = (rhs[i] - sub[i - 1] * dp[i - 1]) / m
    m = diag[n - 1] - sub[n - 2] * cp[n - 2]
    dp[n - 1] = (rhs[n - 1] - sub[n - 2] * dp[n - 2]) / m
    x = np.empty(n, dtype=ld)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def equation_residual(f: Field) -> float:
    """Quadrature-L2 residual of the stationary equation for a radial field.

    Evaluated in extended precision on the factored unknown; note that a
    float64-stored profile carries an irreducible storage-noise floor of
    order 1e-6 here, so certified residuals of a solve are cached on the
    GroundState rather than recomputed from the rounded samples.
    """
    if f.grid.kind != "radial":
        raise ParameterError("equation_residual is defined for radial fields")
    ops = _FactoredOps(f.grid)
    psi = np.array(f.values.real, dtype=np.longdouble) / ops.r_sigma
    return ops.residual_norm(psi)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def solve_ground_state(d: int = 3, c: float = 0.1, grid: RadialGrid | None = None,
                       tol: float = 1e-10, max_iters: int = 10000) -> GroundState:
    """Compute the radial ground state on `grid` (default grid if omitted).

    Stage 1 is the Petviashvili iteration Q <- s^gamma L^{-1}(Q^{1+4/d}) with
    s the Rayleigh-type quotient <Q, LQ>/<Q, Q^{1+4/d}> and gamma = (d+4)/4,
    run until the successive-iterate H^1-surrogate distance drops below
    `tol`.  Stage 2 is a Newton polish in extended precision that certifies
    the equation residual below RESIDUAL_RTOL times the H^1 norm.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    cstar = critical_coupling(d)
    if not 0.0 < c < cstar:
        raise ParameterError(f"coupling must lie in (0, {cstar}), got {c}")
    if grid is None:
        grid = RadialGrid(d=d, c=c)
    if grid.d != d or grid.c != c:
        raise ParameterError("grid parameters disagree with requested (d, c)")

    p = 1.0 + 4.0 / d           # nonlinearity power
    gamma_exp = (d + 4) / 4.0   # fixed-point exponent p/(p-1) for that power
    n = grid.n

    band = np.zeros((3, n))
    band[0, 1:] = grid.op_upper[:-1]
    band[1, :] = grid.op_diag + 1.0
    band[2, :-1] = grid.op_lower[1:]

    def L_apply(u):
        return grid.apply_operator(u) + u

    q = np.exp(-grid.radii ** 2 / 2.0)
    w = grid.weights
    delta = np.inf
    for it in range(max_iters):
        nl = q ** p
        num = float(np.sum(w * q * L_apply(q)))
        den = float(np.sum(w * q * nl))
        if den <= 0 or not np.isfinite(num / den):
            raise ConvergenceError(f"renormalization factor degenerated at iteration {it}: "
                                   f"<Q,LQ>={num}, <Q,N(Q)>={den}")
        s = (num / den) ** gamma_exp
        if not np.isfinite(s) or s > 1e6:
            raise ConvergenceError(f"renormalization factor diverged: s={s} at iteration {it}")
        q_next = s * solve_banded((1, 1), band, nl)
        diff = Field(grid, q_next - q)
        delta = h1_norm(diff)
        q = q_next
        if delta < tol:
            break
    else:
        raise ConvergenceError(
            f"Petviashvili stage did not reach tol={tol} in {max_iters} iterations "
            f"(last step distance {delta:.3e})")

    # Newton polish on psi = r^-sigma Q in longdouble
    ops = _FactoredOps(grid)
    psi = np.array(q, dtype=np.longdouble) / ops.r_sigma
    res = ops.residual_norm(psi)
    target = 0.1 * RESIDUAL_RTOL * h1_norm(Field(grid, q))
    for _ in range(40):
        if res < target:
            break
        Fv = ops.residual_vec(psi)
        jac_diag = -ops.di + 1 - ops.p * ops.nl_coef * np.abs(psi) ** (ops.p - 1)
        dpsi = _thomas_ld(-ops.lo[1:], jac_diag, -ops.up[:-1], -Fv)
        psi = psi + dpsi
        res_new = ops.residual_norm(psi)
        if res_new >= 0.9 * res:      # stalled at the evaluation floor
            res = min(res, res_new)
            break
        res = res_new

    q_hi = psi * ops.r_sigma
    q64 = np.array(q_hi, dtype=np.float64)
    if np.min(q64) < -1e-10 * np.max(q64):
        raise ConvergenceError(f"converged profile is not nonnegative "
                               f"(min {np.min(q64):.3e})")
    q64 = np.maximum(q64, 0.0)
    profile = Field(grid, q64)

    # cached invariants, same code paths as the functionals module
    mass_sq = mass(profile)
    crit_lp = lp_norm(profile, float(ops.p) + 1.0) ** (float(ops.p) + 1.0)
    hardy = grid.hardy_form(profile.values)
    cd = (d + 2) / d * mass_sq ** (-2.0 / d)

    gs = GroundState(profile=profile, d=d, c=c, mass_sq=mass_sq, hardy=hardy,
                     critical_lp=crit_lp, sharp_constant=cd, residual=res,
                     values_hi=q_hi)
    h1 = h1_norm(profile)
    if res > RESIDUAL_RTOL * h1:
        raise ConvergenceError(f"residual {res:.3e} above {RESIDUAL_RTOL:g} * ||Q||_H1 = "
                               f"{RESIDUAL_RTOL * h1:.3e}")
    p1, p2 = gs.pohozaev_defects()
    if p1 > POHOZAEV_RTOL or p2 > POHOZAEV_RTOL:
        raise ConvergenceError(f"virial identities violated: defects {p1:.3e}, {p2:.3e}")
    return gs


# ---------------------------------------------------------------------------
# shooting oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShootingProfile:
    """Radial profile from the independent ODE shooting construction."""

    d: int
    c: float
    r: np.ndarray
    values: np.ndarray
    amplitude: float       # coefficient of the admissible branch A r^sigma
    sigma: float

    @property
    def mass_sq(self) -> float:
        wgt = sphere_area(self.d) * self.r ** (self.d - 1)
        return float(np.trapezoid(wgt * self.values ** 2, self.r))


def _series_start(d: int, c: float, A: float, r0: float):
    """Frobenius start Q = A r^sigma + B r^{sigma+2} + C r^{p sigma + 2}."""
    sig = origin_exponent(d, c) if c > 0 else 0.0
    p = critical_power(d) - 1.0   # nonlinearity power 1 + 4/d
    pw = p
    D2 = (sig + 2) ** 2 + (d - 2) * (sig + 2) + c
    Dp = (pw * sig + 2) ** 2 + (d - 2) * (pw * sig + 2) + c
    B = A / D2
    C = -A ** pw / Dp
    q0 = A * r0 ** sig + B * r0 ** (sig + 2) + C * r0 ** (pw * sig + 2)
    dq0 = (A * sig * r0 ** (sig - 1) + B * (sig + 2) * r0 ** (sig + 1)
           + C * (pw * sig + 2) * r0 ** (pw * sig + 1))
    return sig, q0, dq0


def _classify(d: int, c: float, A: float, r0: float, r_end: float, rtol: float):
    """Integrate outward; returns ('crossed'|'turned'|'decayed', solution)."""
    pw = critical_power(d) - 1.0
    _, q0, dq0 = _series_start(d, c, A, r0)

    def rhs(rr, y):
        q, dq = y
        return (dq, -(d - 1) / rr * dq - c / rr ** 2 * q + q - np.sign(q) * abs(q) ** pw)

    def ev_cross(rr, y):
        return y[0]
    ev_cross.terminal = True
    ev_cross.direction = -1.0

    def ev_turn(rr, y):
        return y[1]
    ev_turn.terminal = True
    ev_turn.direction = 1.0

    sol = solve_ivp(rhs, (r0, r_end), [q0, dq0], method="DOP853",
                    rtol=rtol, atol=1e-14, events=[ev_cross, ev_turn],
                    dense_output=True)
    if len(sol.t_events[0]):
        return "crossed", sol
    if len(sol.t_events[1]):
        return "turned", sol
    return "decayed", sol


def shooting_oracle(d: int = 3, c: float = 0.1, r_max: float = 25.0,
                    r0: float = 1e-4, samples: int = 4000) -> ShootingProfile:
    """Ground-state profile by bisection on the origin amplitude.

    Integrates Q'' + (d-1)/r Q' + c/r^2 Q - Q + Q^{1+4/d} = 0 outward from the
    admissible local behaviour A r^sigma.  Amplitudes that are too small make
    the solution turn upward, too large make it cross zero; the ground state
    sits on the separatrix.  Accepts c = 0 (classical profile, used as the
    c -> 0 reference).
    """
    if not 0.0 <= c < critical_coupling(d):
        raise ParameterError(f"need 0 <= c < c*, got {c}")
    # bracket: scan amplitudes for the turned -> crossed transition
    scan = np.geomspace(0.2, 40.0, 36)
    a_lo = a_hi = None
    prev = None
    for A in scan:
        kind, _ = _classify(d, c, A, r0, r_max, rtol=1e-9)
        if kind == "decayed":
            a_lo = a_hi = A
            break
        if prev and prev[0] == "turned" and kind == "crossed":
            a_lo, a_hi = prev[1], A
            break
        prev = (kind, A)
    if a_lo is None:
        raise OracleError("no turned->crossed bracket found while scanning amplitudes")

    for _ in range(200):
        if a_hi == a_lo or (a_hi - a_lo) < 1e-15 * a_hi:
            break
        mid = 0.5 * (a_lo + a_hi)
        kind, _ = _classify(d, c, mid, r0, r_max, rtol=1e-11)
        if kind == "crossed":
            a_hi = mid
        elif kind == "turned":
            a_lo = mid
        else:
            a_lo = a_hi = mid
            break
    A = 0.5 * (a_lo + a_hi)

    kind, sol = _classify(d, c, A, r0, r_max, rtol=1e-12)
    r_stop = sol.t[-1]
    rr = np.geomspace(r0, r_stop * 0.999999, samples)
    qq = sol.sol(rr)[0]
    # clip the post-separatrix garbage: keep the monotone decaying part
    peak = int(np.argmax(qq))
    tail = qq[peak:]
    bad = np.nonzero((np.diff(tail) > 0) | (tail[:-1] <= 0))[0]
    if bad.size:
        cut = peak + int(bad[0]) + 1
        rr, qq = rr[:cut], qq[:cut]
    sigma = origin_exponent(d, c) if c > 0 else 0.0
    return ShootingProfile(d=d, c=c, r=rr, values=np.abs(qq), amplitude=A, sigma=sigma)


def oracle_l2_distance(gs: GroundState, oracle: ShootingProfile) -> float:
    """Relative L^2 distance between solver and oracle profiles, measured on
    the oracle's support with its own trapezoidal weights."""
    grid = gs.profile.grid
    qs = np.interp(np.log(oracle.r), grid.rho, gs.profile.values.real)
    wgt = sphere_area(gs.d) * oracle.r ** (gs.d - 1)
    num = np.trapezoid(wgt * (qs - oracle.values) ** 2, oracle.r)
    den = np.trapezoid(wgt * oracle.values ** 2, oracle.r)
    return float(sqrt(num / den))
