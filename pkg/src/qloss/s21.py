"""Resonator transmission model and parameter extraction in the inverse plane.

The normalised inverse transmission of a notch-coupled resonator is

    S21^-1(f) = (1/A) exp(-i(theta + tau f)) [1 + (Q_i/Q_c) e^{i phi} / (1 + 2i Q_i (f - f0)/f0)]

which traces a circle of diameter Q_i/Q_c through the off-resonance point.
Extraction follows the classic route: remove the cable delay and amplitude
from the wings, fit a circle to the inverse data, read f0 and Q_i from the
phase around the circle centre, then polish all seven parameters with a
nonlinear least-squares fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .constants import HBAR_J
from .errors import ExtractionError, PoolingError

PARAM_NAMES = ("f0", "q_i", "q_c", "phi", "amp", "global_phase", "path_phase_rate")


def wrap_phase(x):
    """Map angles onto (-pi, pi]."""
    y = -((-np.asarray(x, dtype=float) + math.pi) % (2.0 * math.pi) - math.pi)
    return y[()] if y.ndim == 0 else y


@dataclass(frozen=True)
class S21Params:
    f0: float
    q_i: float
    q_c: float
    phi: float = 0.0
    amp: float = 1.0
    global_phase: float = 0.0
    path_phase_rate: float = 0.0  # rad/Hz

    def __post_init__(self):
        if not (self.f0 > 0 and self.q_i > 0 and self.q_c > 0 and self.amp > 0):
            raise ValueError("f0, q_i, q_c and amp must be positive")
        if not -math.pi < self.phi <= math.pi:
            raise ValueError(f"phi must lie in (-pi, pi], got {self.phi}")

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in PARAM_NAMES}


@dataclass
class Spectrum:
    freqs: np.ndarray
    s21: np.ndarray
    t_bath: float = float("nan")
    p_in_dbm: float = float("nan")

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.s21 = np.asarray(self.s21, dtype=complex)
        if self.freqs.shape != self.s21.shape or self.freqs.ndim != 1:
            raise ValueError("freqs and s21 must be 1-D arrays of equal length")
        if self.freqs.size < 32:
            raise ValueError("a spectrum needs at least 32 points")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing")


@dataclass
class ExtractionResult:
    params: S21Params
    uncertainties: dict
    residual_rms: float
    n_photon: float = float("nan")
    t_bath: float = float("nan")
    p_in_dbm: float = float("nan")
    fixed_qc: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)


def model_s21_inv(f, p: S21Params):
    """Inverse transmission at frequencies ``f``."""
    f = np.asarray(f, dtype=float)
    x = (f - p.f0) / p.f0
    resonator = 1.0 + (p.q_i / p.q_c) * np.exp(1j * p.phi) / (1.0 + 2j * p.q_i * x)
    return np.exp(-1j * (p.global_phase + p.path_phase_rate * f)) * resonator / p.amp


def model_s21(f, p: S21Params):
    return 1.0 / model_s21_inv(f, p)


def resonance_grid(f0: float, q_i: float, q_c: float, n: int = 401, span: float = 12.0) -> np.ndarray:
    """Uniform grid covering ``span`` loaded linewidths around ``f0``."""
    q_l = 1.0 / (1.0 / q_i + 1.0 / q_c)
    half = 0.5 * span * f0 / q_l
    return np.linspace(f0 - half, f0 + half, n)


def synth_spectrum(
    p: S21Params,
    f_grid: Sequence[float],
    noise_sigma: float = 0.0,
    seed: int = 0,
    t_bath: float = float("nan"),
    p_in_dbm: float = float("nan"),
) -> Spectrum:
    """Forward-model spectrum with complex Gaussian noise of ``noise_sigma`` per quadrature."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    f = np.asarray(f_grid, dtype=float)
    s21 = model_s21(f, p)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        s21 = s21 + noise_sigma * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    return Spectrum(f, s21, t_bath=t_bath, p_in_dbm=p_in_dbm)


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def photon_number(p_in: float, f_r: float, q_i: float, q_c: float) -> float:
    """Mean intracavity photon number (2 / hbar w^2) (Q_i^2 / Q_c) P_in, with P_in in W."""
    omega = 2.0 * math.pi * f_r
    return 2.0 / (HBAR_J * omega**2) * q_i**2 / q_c * p_in


# -- extraction ---------------------------------------------------------------


def _find_dip(sp: Spectrum):
    mag = np.abs(sp.s21)
    n = mag.size
    # point-to-point noise estimate; median |diff| = 1.665 sigma for complex noise
    sigma = float(np.median(np.abs(np.diff(sp.s21)))) / 1.665
    smooth = np.convolve(mag, np.ones(5) / 5.0, mode="same")[2:-2]
    i_min = int(np.argmin(smooth)) + 2
    depth = float(np.median(mag) - smooth.min())
    edge = max(2, n // 30)
    if depth <= max(10.0 * sigma, 1e-6 * float(np.median(mag))):
        raise ExtractionError("no resonance found")
    if i_min < edge or i_min >= n - edge:
        raise ExtractionError("no resonance found: dip at the edge of the sweep")
    return i_min, sigma


def _fit_circle(z, weights=None):
    """Algebraic (Kasa) circle fit in centred, scaled coordinates."""
    w_row = np.ones(z.size) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    zc = z.mean()
    scale = float(np.abs(z - zc).mean())
    if not scale > 0:
        raise ExtractionError("circle fit degenerate: all points coincide")
    w = (z - zc) / scale
    x, y = w.real, w.imag
    design = np.column_stack([x, y, np.ones_like(x)]) * w_row[:, None]
    rhs = -(x * x + y * y) * w_row
    sol, _, rank, sv = np.linalg.lstsq(design, rhs, rcond=None)
    if rank < 3 or sv[-1] < 1e-10 * sv[0]:
        raise ExtractionError("circle fit degenerate: points are collinear")
    a, b, c = sol
    centre = complex(-a / 2.0, -b / 2.0)
    r2 = centre.real**2 + centre.imag**2 - c
    if not r2 > 0:
        raise ExtractionError("circle fit degenerate")
    radius = math.sqrt(r2)
    if radius > 1e4:
        raise ExtractionError("circle fit degenerate: points are collinear")
    return zc + scale * centre, scale * radius


def _initial_guess(sp: Spectrum, fixed_qc: Optional[float]):
    f, s21 = sp.freqs, sp.s21
    i_min, sigma = _find_dip(sp)
    f_ref = float(f.mean())
    n = f.size
    k = max(4, n // 10)
    wings = np.r_[0:k, n - k : n]

    phase = np.unwrap(np.angle(s21))
    tau, theta_ref = np.polyfit(f[wings] - f_ref, phase[wings], 1)
    amp = float(np.abs(s21[wings]).mean())

    z = amp * np.exp(1j * (theta_ref + tau * (f - f_ref))) / s21
    # inverse-plane noise scales as 1/|S21|^2, so weight points by |S21|^2 (variance ~ |S21|^-4)
    weight = (np.abs(s21) / amp) ** 4
    centre, radius = _fit_circle(z, weight)

    # off-resonance point: where the line from the centre through 1+0i meets the circle
    u = (1.0 - centre) / abs(1.0 - centre) if centre != 1.0 else 1.0 + 0j
    p_off = centre + radius * u
    z = z / p_off
    centre, radius = centre / p_off, radius / abs(p_off)
    amp = amp / abs(p_off)
    theta_ref = theta_ref - float(np.angle(p_off))

    diameter = 2.0 * radius
    phi = float(np.angle(centre - 1.0))

    # angle around the centre: psi = phi - 2 arctan(2 Q_i (f - f0) / f0)
    psi = np.unwrap(np.angle(z - centre))
    i_res = int(np.argmin(np.abs(z - (2.0 * centre - 1.0))))
    psi = psi - 2.0 * math.pi * round((psi[i_res] - phi) / (2.0 * math.pi))
    f0_guess = float(f[i_res])
    near = np.abs(wrap_phase(psi - phi)) < 0.5 * math.pi
    if near.sum() >= 3:
        slope = np.polyfit(f[near], psi[near], 1)[0]
        qi_guess = abs(slope) * f0_guess / 4.0
    else:
        qi_guess = f0_guess / (f[-1] - f[0])
    qi_guess = max(qi_guess, 1.0)

    # angular noise is (inverse-plane noise) / radius, weighted like the circle fit
    w_phase = weight**0.5

    def phase_resid(v):
        f0, log_qi, ph = v
        return (psi - ph + 2.0 * np.arctan(2.0 * math.exp(log_qi) * (f - f0) / f0)) * w_phase

    res = optimize.least_squares(
        phase_resid,
        [f0_guess, math.log(qi_guess), phi],
        x_scale=[f0_guess / qi_guess, 1.0, 1.0],
        method="lm",
    )
    f0, q_i = float(res.x[0]), math.exp(res.x[1])
    if not (f[0] < f0 < f[-1] and 1.0 < q_i < 1e12 and math.isfinite(diameter) and diameter > 0):
        raise ExtractionError("initial estimate failed: resonance not resolved above the noise")
    q_c = fixed_qc if fixed_qc is not None else q_i / diameter
    return (
        dict(
            f0=f0,
            q_i=q_i,
            q_c=q_c,
            phi=phi,
            amp=amp,
            theta_ref=theta_ref,
            tau=tau,
        ),
        f_ref,
        sigma,
    )


def extract_resonator_params(
    sp: Spectrum, fixed_qc: Optional[float] = None, weighted: bool = True
) -> ExtractionResult:
    """Fit all seven parameters (six when ``fixed_qc`` is given) of the inverse model.

    With ``weighted`` the inverse-plane residuals are scaled by |S21|^2, which
    makes them homoscedastic for additive noise on S21; otherwise they are
    plain complex residuals of S21^-1.
    """
    g, f_ref, _ = _initial_guess(sp, fixed_qc)
    f = sp.freqs
    data_inv = 1.0 / sp.s21
    w = (np.abs(sp.s21) / g["amp"]) ** 2 if weighted else np.ones(f.size)
    f0_scale = g["f0"] / g["q_i"]
    # delay parameter expressed as the phase it accumulates at the band edge
    half_span = 0.5 * (f[-1] - f[0])
    fdev = f - f_ref

    def unpack(v):
        theta_ref, tau_s, phi, log_amp, log_qi, log_qc_or_none, df0 = v
        return (
            theta_ref,
            tau_s / half_span,
            phi,
            math.exp(log_amp),
            math.exp(log_qi),
            fixed_qc if fixed_qc is not None else math.exp(log_qc_or_none),
            g["f0"] + df0 * f0_scale,
        )

    def resid(v):
        theta_ref, tau, phi, amp, q_i, q_c, f0 = unpack(_full(v))
        x = (f - f0) / f0
        res = 1.0 + (q_i / q_c) * np.exp(1j * phi) / (1.0 + 2j * q_i * x)
        model = np.exp(-1j * (theta_ref + tau * fdev)) * res / amp
        d = (model - data_inv) * (g["amp"] * w)
        return np.concatenate([d.real, d.imag])

    free = [True] * 7
    if fixed_qc is not None:
        free[5] = False
    free = np.array(free)
    v0_full = np.array(
        [
            g["theta_ref"],
            g["tau"] * half_span,
            g["phi"],
            math.log(g["amp"]),
            math.log(g["q_i"]),
            math.log(g["q_c"]),
            0.0,
        ]
    )

    def _full(v):
        out = v0_full.copy()
        out[free] = v
        return out

    res = optimize.least_squares(
        resid,
        v0_full[free],
        method="trf",
        x_scale="jac",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=20000,
    )
    if not np.all(np.isfinite(res.x)):
        raise ExtractionError("nonlinear refinement diverged")
    v = _full(res.x)
    theta_ref, tau, phi, amp, q_i, q_c, f0 = unpack(v)
    theta = theta_ref - tau * f_ref
    params = S21Params(
        f0=f0,
        q_i=q_i,
        q_c=q_c,
        phi=float(wrap_phase(phi)),
        amp=amp,
        global_phase=float(wrap_phase(theta)),
        path_phase_rate=tau,
    )

    # covariance of the free parameters, mapped to physical units
    n_obs, n_free = res.fun.size, int(free.sum())
    dof = max(n_obs - n_free, 1)
    s2 = float(res.fun @ res.fun) / dof
    uncertainties = {name: float("nan") for name in PARAM_NAMES}
    try:
        cov = np.linalg.pinv(res.jac.T @ res.jac) * s2
    except np.linalg.LinAlgError:
        cov = None
    if cov is not None:
        std = np.full(7, np.nan)
        std[free] = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        # d(theta) = d(theta_ref) - f_ref d(tau): take the covariance into account
        idx = {k: int(np.sum(free[:k])) for k in range(7) if free[k]}
        var_theta = cov[idx[0], idx[0]]
        var_theta += (f_ref / half_span) ** 2 * cov[idx[1], idx[1]]
        var_theta -= 2.0 * (f_ref / half_span) * cov[idx[0], idx[1]]
        uncertainties = {
            "f0": std[6] * f0_scale,
            "q_i": std[4] * q_i,
            "q_c": 0.0 if fixed_qc is not None else std[5] * q_c,
            "phi": std[2],
            "amp": std[3] * amp,
            "global_phase": math.sqrt(max(var_theta, 0.0)),
            "path_phase_rate": std[1] / half_span,
        }
        uncertainties = {k: float(val) for k, val in uncertainties.items()}

    resid_rms = float(np.sqrt(np.mean(res.fun**2) * 2.0))
    n_photon = float("nan")
    if math.isfinite(sp.p_in_dbm):
        n_photon = photon_number(float(dbm_to_watts(sp.p_in_dbm)), f0, q_i, q_c)
    return ExtractionResult(
        params=params,
        uncertainties=uncertainties,
        residual_rms=resid_rms,
        n_photon=n_photon,
        t_bath=sp.t_bath,
        p_in_dbm=sp.p_in_dbm,
        fixed_qc=fixed_qc,
        diagnostics={
            "nfev": int(res.nfev),
            "status": int(res.status),
            # common alternative calibration with the loaded Q in place of Q_i
            "n_photon_qtotal_variant": n_photon * (q_c / (q_i + q_c)) ** 2,
        },
    )


@dataclass(frozen=True)
class QcPool:
    """Pooled coupling Q and the spectra that should be refit with it fixed."""

    q_c0: float
    members: tuple  # indices of results inside the pooling window
    refit: tuple  # indices of every result to refit with q_c fixed at q_c0


def pool_qc(
    results: Sequence[ExtractionResult],
    t_c: float,
    min_photons: float = 1e3,
    max_t_frac: float = 0.1,
) -> QcPool:
    """Median Q_c over high-power, low-temperature extractions."""
    members = tuple(
        i
        for i, r in enumerate(results)
        if r.n_photon > min_photons and r.t_bath < max_t_frac * t_c
    )
    if not members:
        raise PoolingError(
            f"no extraction with n_photon > {min_photons:g} and T < {max_t_frac:g} Tc"
        )
    q_c0 = float(np.median([results[i].params.q_c for i in members]))
    return QcPool(q_c0=q_c0, members=members, refit=tuple(range(len(results))))


def refit_with_pool(spectra: Sequence[Spectrum], pool: QcPool) -> list[ExtractionResult]:
    return [extract_resonator_params(spectra[i], fixed_qc=pool.q_c0) for i in pool.refit]
