"""Synthetic resonator scenarios generated from the combined loss model.

A scenario fixes the material, resonator, TLS parameters and smooth per-power
curves for ``s`` and ``kappa``; from it we generate either Q_i power series
(for the model fits) or full S21 spectra at a list of chip powers (for the
extraction pipeline).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .loss import TlsParams
from .materials import MaterialEntry, get_material
from .pipeline import LossModel, PowerSeries
from .s21 import S21Params, dbm_to_watts, photon_number, resonance_grid, synth_spectrum


@dataclass(frozen=True)
class Scenario:
    name: str
    material: str
    f_r: float
    q_c: float
    tls: TlsParams
    i_ext: float
    s_curve: Callable[[np.ndarray], np.ndarray]
    kappa_curve: Callable[[np.ndarray], np.ndarray]
    t_baths: tuple
    p_in_dbm: tuple
    q_a: float = 2e7
    phi: float = 0.05
    amp: float = 1e-3
    global_phase: float = 0.4
    path_phase_rate: float = 2.0 * math.pi * 40e-9
    entry_override: Optional[MaterialEntry] = field(default=None, compare=False)

    def entry(self) -> MaterialEntry:
        return self.entry_override or get_material(self.material)

    def loss_model(self, i_ext: Optional[float] = None) -> LossModel:
        return LossModel(self.entry(), self.f_r, self.i_ext if i_ext is None else i_ext, q_a=self.q_a)

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def _tin_s(n):
    return 2e3 * np.asarray(n, float) ** 0.23


def _tin_kappa(n):
    return 1.0 - 0.1 * np.clip(np.log10(np.asarray(n, float)), 0.0, 6.0) / 6.0


def _al_s(n):
    return 1.5e4 * np.asarray(n, float) ** 0.15


def _al_kappa(n):
    return 2.0 - 0.5 * np.clip(np.log10(np.asarray(n, float)), 0.0, 6.0) / 6.0


def tin_like() -> Scenario:
    return Scenario(
        name="tin-like",
        material="TiN",
        f_r=4.74e9,
        q_c=1.49e5,
        tls=TlsParams(1.7e5, 1.46, 0.57),
        i_ext=2.4e6,
        s_curve=_tin_s,
        kappa_curve=_tin_kappa,
        t_baths=tuple(np.round(np.arange(0.04, 1.1801, 0.04), 4)),
        p_in_dbm=tuple(float(p) for p in np.arange(-160.0, -119.9, 5.0)),
    )


def al_like() -> Scenario:
    return Scenario(
        name="al-like",
        material="Al",
        f_r=5.25e9,
        q_c=1.51e5,
        tls=TlsParams(2e6, 1.0, 0.6),
        i_ext=1.24e7,
        s_curve=_al_s,
        kappa_curve=_al_kappa,
        t_baths=tuple(np.round(np.arange(0.04, 0.3201, 0.02), 4)),
        p_in_dbm=tuple(float(p) for p in np.arange(-160.0, -119.9, 5.0)),
    )


SCENARIOS = {"tin-like": tin_like, "al-like": al_like}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]()
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None


def true_qi(scn: Scenario, t_bath, n_photon, model: Optional[LossModel] = None):
    model = model or scn.loss_model()
    n = np.asarray(n_photon, float)
    return 1.0 / model.inverse_q(t_bath, n, scn.tls, scn.s_curve(n), scn.kappa_curve(n))


def true_tqp(scn: Scenario, t_bath, n_photon, model: Optional[LossModel] = None):
    model = model or scn.loss_model()
    n = np.asarray(n_photon, float)
    tb, n = np.broadcast_arrays(np.asarray(t_bath, float), n)
    return model.tqp(tb, scn.s_curve(n))


def power_series_dataset(
    scn: Scenario,
    n_photon=None,
    rel_noise: float = 0.01,
    seed: int = 0,
    model: Optional[LossModel] = None,
) -> dict:
    """Q_i power series at every bath temperature with multiplicative Gaussian noise."""
    model = model or scn.loss_model()
    n_photon = np.logspace(-0.5, 6.5, 15) if n_photon is None else np.asarray(n_photon, float)
    rng = np.random.default_rng(seed)
    out = {}
    for t in scn.t_baths:
        q = true_qi(scn, t, n_photon, model)
        q_noisy = q * (1.0 + rel_noise * rng.standard_normal(q.size))
        out[float(t)] = PowerSeries(float(t), n_photon.copy(), q_noisy, np.maximum(rel_noise, 1e-6) * q_noisy)
    return out


def self_consistent_photons(scn: Scenario, t_bath: float, p_in_dbm: float, model: Optional[LossModel] = None):
    """Photon number and Q_i solving n = n_photon(P, Q_i(n)) at one operating point."""
    model = model or scn.loss_model()
    p_w = float(dbm_to_watts(p_in_dbm))

    def g(log_n):
        n = math.exp(log_n)
        q = float(true_qi(scn, t_bath, n, model))
        return math.log(photon_number(p_w, scn.f_r, q, scn.q_c)) - log_n

    # Q_i is bounded by Q_A, which brackets the root
    lo = math.log(photon_number(p_w, scn.f_r, 1e3, scn.q_c))
    hi = math.log(photon_number(p_w, scn.f_r, scn.q_a * 1.01, scn.q_c))
    log_n = optimize.brentq(g, lo, hi, xtol=1e-12)
    n = math.exp(log_n)
    return n, float(true_qi(scn, t_bath, n, model))


def spectra_dataset(
    scn: Scenario,
    noise_sigma: float = 0.0,
    seed: int = 0,
    n_points: int = 401,
    model: Optional[LossModel] = None,
):
    """Synthetic spectra for every (T_b, P_in) pair with their generating parameters."""
    model = model or scn.loss_model()
    rng = np.random.default_rng(seed)
    out = []
    for t in scn.t_baths:
        for p in scn.p_in_dbm:
            n, q_i = self_consistent_photons(scn, float(t), float(p), model)
            params = S21Params(
                f0=scn.f_r,
                q_i=q_i,
                q_c=scn.q_c,
                phi=scn.phi,
                amp=scn.amp,
                global_phase=scn.global_phase,
                path_phase_rate=scn.path_phase_rate,
            )
            grid = resonance_grid(scn.f_r, q_i, scn.q_c, n=n_points)
            sub_seed = int(rng.integers(0, 2**31 - 1))
            sp = synth_spectrum(params, grid, noise_sigma * scn.amp, sub_seed, t_bath=float(t), p_in_dbm=float(p))
            out.append((sp, params, n))
    return out
