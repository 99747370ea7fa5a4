"""BCS gap, thermal densities and Mattis-Bardeen conductivity.

All integrals with inverse-square-root edge singularities are mapped onto
smooth integrands by a change of variables before adaptive quadrature:

* ``E = Delta cosh(u)`` removes the single edge at ``E = Delta`` (densities, sigma1);
* ``E = mid + half sin(phi)`` removes both edges of the sigma2 window at once.

Energies in eV, temperatures in K, densities in um^-3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import expit

from .constants import HBAR, K_B
from .errors import ConfigurationError, DomainError
from .materials import Material

#: Above this Delta/k_B T the quasiparticle density uses its Boltzmann asymptote.
ASYMPTOTIC_RATIO = 30.0

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class GapModel:
    material: Material
    delta0: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "delta0", self.material.delta0)

    @property
    def tc(self) -> float:
        return self.material.tc


def gap(T: float, gm: GapModel) -> float:
    """Gap in eV from the interpolation Delta0 tanh(1.74 sqrt(Tc/T - 1))."""
    if T < 0:
        raise DomainError(f"temperature must be non-negative, got {T}")
    if T > gm.tc:
        raise DomainError(f"normal state: T={T} K exceeds Tc={gm.tc} K")
    if T == 0:
        return gm.delta0
    if T == gm.tc:
        return 0.0
    return gm.delta0 * math.tanh(1.74 * math.sqrt(gm.tc / T - 1.0))


def fermi(E, T):
    """Fermi-Dirac occupation with the chemical potential at E = 0."""
    E = np.asarray(E, dtype=float)
    if T < 0:
        raise DomainError(f"temperature must be non-negative, got {T}")
    if T == 0:
        out = np.where(E > 0, 0.0, np.where(E < 0, 1.0, 0.5))
    else:
        out = expit(-E / (K_B * T))
    return out[()] if out.ndim == 0 else out


def _thermal_integral(delta, kT):
    """Integral of f(E) E / sqrt(E^2 - delta^2) over (delta, inf), in eV."""
    if delta == 0.0:
        return kT * _LOG2
    x = delta / kT
    # f(E) drops below 1e-30 of its edge value once E - delta > 70 kT
    u_max = math.acosh(1.0 + 70.0 / x)

    def integrand(u):
        c = math.cosh(u)
        return expit(-x * c) * c

    val, _ = integrate.quad(integrand, 0.0, u_max, epsabs=0.0, epsrel=1e-11, limit=200)
    return delta * val


def qp_density(T: float, gm: GapModel) -> float:
    """Thermal quasiparticle density 4 N(0) int f(E) E / sqrt(E^2 - Delta^2) dE."""
    if T < 0:
        raise DomainError(f"temperature must be non-negative, got {T}")
    if T >= gm.tc:
        raise DomainError(f"T={T} K is not below Tc={gm.tc} K")
    if T == 0:
        return 0.0
    kT = K_B * T
    delta = gap(T, gm)
    n0 = gm.material.n0
    if delta / kT > ASYMPTOTIC_RATIO:
        return qp_density_asymptotic(T, gm, delta)
    return 4.0 * n0 * _thermal_integral(delta, kT)


def qp_density_asymptotic(T: float, gm: GapModel, delta: float | None = None) -> float:
    """Boltzmann limit 2 N(0) sqrt(2 pi k_B T Delta) exp(-Delta / k_B T)."""
    if T == 0:
        return 0.0
    kT = K_B * T
    delta = gap(T, gm) if delta is None else delta
    return 2.0 * gm.material.n0 * math.sqrt(2.0 * math.pi * kT * delta) * math.exp(-delta / kT)


def pair_density(gm: GapModel) -> float:
    """Cooper pair density 2 N(0) Delta(0)."""
    return 2.0 * gm.material.n0 * gm.delta0


def phonon_density_2delta(T: float, gm: GapModel, delta: float | None = None) -> float:
    """Density of phonons above 2 Delta for a Debye spectrum at temperature T.

    ``N_ion int_{2 Delta}^{Omega_D} n_BE(Omega, T) 3 Omega^2 / Omega_D^3 dOmega``.
    ``delta`` defaults to the gap at ``T``.
    """
    m = gm.material
    if m.nion is None or m.debye_energy is None:
        raise ConfigurationError(
            f"{m.name}: nion_per_um3 and debye_energy_eV are required for phonon densities"
        )
    if T < 0 or T >= gm.tc:
        raise DomainError(f"T={T} K outside [0, Tc)")
    if T == 0:
        return 0.0
    delta = gap(T, gm) if delta is None else delta
    lo, hi = 2.0 * delta, m.debye_energy
    if lo >= hi:
        return 0.0
    kT = K_B * T
    # factor out the Bose weight at the lower edge to keep the quadrature well scaled
    shift = lo / kT

    def integrand(w):
        y = w / kT
        return 3.0 * w * w / hi**3 * math.exp(shift - y) / -math.expm1(-y)

    upper = min(hi, lo + 80.0 * kT)
    val, _ = integrate.quad(integrand, lo, upper, epsabs=0.0, epsrel=1e-11, limit=200)
    return m.nion * val * math.exp(-shift)


def _check_conductivity_domain(omega, T, gm):
    if omega <= 0:
        raise DomainError("angular frequency must be positive")
    if T < 0 or T >= gm.tc:
        raise DomainError(f"T={T} K outside [0, Tc)")
    delta = gap(T, gm)
    hw = HBAR * omega
    if hw >= 2.0 * delta:
        raise DomainError("pair-breaking regime not modeled: hbar*omega >= 2*Delta(T)")
    return delta, hw


def _logcosh(y):
    y = abs(y)
    return y + math.log1p(math.exp(-2.0 * y)) - _LOG2


def _logsinh(y):
    return y + math.log(-math.expm1(-2.0 * y)) - _LOG2


def sigma1(omega: float, T: float, gm: GapModel, rtol: float = 1e-8) -> float:
    """Real part of the Mattis-Bardeen conductivity, sigma1/sigma_n (thermal term only)."""
    delta, hw = _check_conductivity_domain(omega, T, gm)
    if T == 0:
        return 0.0
    kT = K_B * T
    h = hw / kT
    log_sinh = _logsinh(0.5 * h) - _LOG2

    def log_occ_diff(E):
        # f(E) - f(E + hw) = sinh(h/2) / (2 cosh(E/2kT) cosh((E+hw)/2kT))
        return log_sinh - _logcosh(0.5 * E / kT) - _logcosh(0.5 * (E + hw) / kT)

    scale = log_occ_diff(delta)
    if scale < -700.0:
        return 0.0
    u_max = math.acosh(1.0 + 40.0 * kT / delta)

    def integrand(u):
        E = delta * math.cosh(u)
        g = (E * E + delta * delta + hw * E) / math.sqrt((E + hw) ** 2 - delta * delta)
        return math.exp(log_occ_diff(E) - scale) * g

    val, _ = integrate.quad(integrand, 0.0, u_max, epsabs=0.0, epsrel=rtol, limit=200)
    return 2.0 / hw * val * math.exp(scale)


def sigma2(omega: float, T: float, gm: GapModel, rtol: float = 1e-8) -> float:
    """Imaginary part of the Mattis-Bardeen conductivity, sigma2/sigma_n."""
    delta, hw = _check_conductivity_domain(omega, T, gm)
    kT = K_B * T
    lo = max(delta - hw, -delta)
    mid, half = 0.5 * (delta + lo), 0.5 * (delta - lo)

    def integrand(phi):
        E = mid + half * math.sin(phi)
        occ = 1.0 if kT == 0 else math.tanh(0.5 * (E + hw) / kT)
        return occ * (E * E + delta * delta + hw * E) / math.sqrt((delta + E) * (E + hw + delta))

    val, _ = integrate.quad(
        integrand, -0.5 * math.pi, 0.5 * math.pi, epsabs=0.0, epsrel=rtol, limit=200
    )
    return val / hw
