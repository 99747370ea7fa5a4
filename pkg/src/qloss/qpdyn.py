"""Homogeneous quasiparticle / pair-breaking-phonon rate equations.

    dn/dt = I_ext + beta N - R n^2 - s (n - n_b)
    dN/dt = R n^2 / 2 - beta N / 2 - gamma (N - N_b)

with the bath anchors ``n_b = n_qp(T_b)`` and ``N_b = R n_b^2 / beta`` (detailed
balance).  The closed-form steady state is used for fitting; the time
integration is kept as an independent check of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp

from .bcs import GapModel, qp_density
from .errors import DomainError, NumericalError
from .materials import FilmRates


@dataclass(frozen=True)
class DriveParams:
    i_ext: float  # um^-3 s^-1
    s_rate: float  # 1/s
    t_bath: float  # K

    def __post_init__(self):
        if self.i_ext < 0 or self.s_rate < 0 or self.t_bath < 0:
            raise DomainError("i_ext, s_rate and t_bath must be non-negative")


@dataclass(frozen=True)
class DensityState:
    nqp: float
    n2d: float


def steady_state_from_bath(n_bath, i_ext, s_rate, r):
    """Closed-form steady state for a given bath density; broadcasts over arrays."""
    n_bath, i_ext, s_rate = np.broadcast_arrays(
        np.asarray(n_bath, float), np.asarray(i_ext, float), np.asarray(s_rate, float)
    )
    a = s_rate / (2.0 * r)
    b = n_bath + a
    q = i_ext / r
    # sqrt(q + b^2) - a, rewritten to avoid cancellation when a >> n
    root = np.sqrt(q + b * b)
    out = n_bath + q / (root + b)
    return out[()] if out.ndim == 0 else out


def steady_state_nqp(d: DriveParams, rates: FilmRates, gm: GapModel) -> float:
    """Steady-state density sqrt(I/r + (n_b + s/2r)^2) - s/2r."""
    n_b = qp_density(d.t_bath, gm)
    return float(steady_state_from_bath(n_b, d.i_ext, d.s_rate, rates.eff_recomb_r))


def bath_state(t_bath: float, rates: FilmRates, gm: GapModel) -> DensityState:
    n_b = qp_density(t_bath, gm)
    return DensityState(n_b, rates.recomb_r * n_b * n_b / rates.pair_break_beta)


def evolve_densities(
    init: DensityState,
    d: DriveParams,
    rates: FilmRates,
    gm: GapModel,
    t_end: float,
    rtol: float = 1e-9,
) -> DensityState:
    """Integrate the coupled rate equations from ``init`` up to ``t_end`` seconds."""
    if not (math.isfinite(init.nqp) and math.isfinite(init.n2d) and init.nqp >= 0 and init.n2d >= 0):
        raise DomainError("initial densities must be finite and non-negative")
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    bath = bath_state(d.t_bath, rates, gm)
    R, beta, gamma = rates.recomb_r, rates.pair_break_beta, rates.escape_gamma
    n_ss = steady_state_from_bath(bath.nqp, d.i_ext, d.s_rate, rates.eff_recomb_r)
    scale = max(float(n_ss), init.nqp, init.n2d * beta / gamma, 1e-30)

    def rhs(t, y):
        n, N = y
        rec = R * n * n
        return [
            d.i_ext + beta * N - rec - d.s_rate * (n - bath.nqp),
            0.5 * rec - 0.5 * beta * N - gamma * (N - bath.n2d),
        ]

    def jac(t, y):
        n, _ = y
        return [[-2.0 * R * n - d.s_rate, beta], [R * n, -0.5 * beta - gamma]]

    # phonons relax on ns scales, quasiparticles on ms: the system is stiff
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        [init.nqp, init.n2d],
        method="Radau",
        jac=jac,
        rtol=rtol,
        atol=[1e-12 * scale, 1e-12 * scale * R * scale / beta],
    )
    if not sol.success:
        raise NumericalError(f"rate-equation integration failed at t={sol.t[-1]:.3e} s: {sol.message}")
    y = sol.y[:, -1]
    if not np.all(np.isfinite(y)):
        bad = int(np.argmax(~np.all(np.isfinite(sol.y), axis=0)))
        raise NumericalError(f"non-finite state at t={sol.t[bad]:.3e} s")
    return DensityState(float(y[0]), float(y[1]))


def effective_temperature(nqp: float, gm: GapModel, rtol: float = 1e-7) -> float:
    """Temperature whose thermal quasiparticle density equals ``nqp``."""
    if nqp < 0:
        raise DomainError("quasiparticle density must be non-negative")
    if nqp == 0:
        return 0.0
    t_hi = gm.tc * (1.0 - 1e-9)
    if nqp >= qp_density(t_hi, gm):
        raise DomainError("density exceeds thermal range")
    log_n = math.log(nqp)

    def resid(T):
        n = qp_density(T, gm)
        return (math.log(n) if n > 0 else -1e300) - log_n

    # below 1e-3 Tc the density underflows for any realistic material
    t_lo = 1e-3 * gm.tc
    if resid(t_lo) > 0:
        t_lo = 1e-6 * gm.tc
        if resid(t_lo) > 0:
            return optimize.bisect(lambda T: qp_density(T, gm) - nqp, 0.0, t_lo, xtol=1e-15)
    return optimize.brentq(resid, t_lo, t_hi, xtol=1e-12, rtol=rtol * 1e-3)
