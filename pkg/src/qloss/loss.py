"""Loss channels of the internal quality factor.

1/Q_i = 1/Q_A + TLS(n_p, T_b) + QP(T_qp)

``QpTable`` tabulates the quasiparticle density and sigma1/sigma2 on a
temperature grid so that fits can evaluate thousands of model points per
second; the pointwise functions here remain the reference path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import bcs
from .bcs import GapModel
from .constants import HBAR, K_B
from .errors import DomainError
from .qpdyn import effective_temperature


@dataclass(frozen=True)
class TlsParams:
    q_tls0: float
    n_c: float
    alpha: float

    def __post_init__(self):
        if not (self.q_tls0 > 0 and self.n_c > 0):
            raise DomainError("q_tls0 and n_c must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class QpLossParams:
    kappa: float
    ls_over_lm: float
    omega_r: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.ls_over_lm > 0 and self.omega_r > 0):
            raise DomainError("kappa, ls_over_lm and omega_r must be positive")


@dataclass(frozen=True)
class LossBudget:
    inv_q_a: float
    inv_q_tls: float
    inv_q_qp: float

    @property
    def inv_q_total(self) -> float:
        return self.inv_q_a + self.inv_q_tls + self.inv_q_qp

    @property
    def q_i(self) -> float:
        return 1.0 / self.inv_q_total


def tls_thermal_factor(tb, omega_r):
    """tanh(hbar w / 2 k_B T_b); 1 at T_b = 0."""
    tb = np.asarray(tb, dtype=float)
    with np.errstate(divide="ignore"):
        arg = np.where(tb > 0, HBAR * omega_r / (2.0 * K_B * tb), np.inf)
    return np.tanh(arg)


def tls_loss(np_, tb, p: TlsParams, omega_r: float):
    """TLS loss tanh(hbar w / 2 k_B T_b) / (Q0 sqrt(1 + (n_p/n_c)^alpha)); broadcasts."""
    np_ = np.asarray(np_, dtype=float)
    if np.any(np_ < 0):
        raise DomainError("photon number must be non-negative")
    with np.errstate(over="ignore"):
        sat = np.sqrt(1.0 + (np_ / p.n_c) ** p.alpha)
    out = tls_thermal_factor(tb, omega_r) / (p.q_tls0 * sat)
    return out[()] if out.ndim == 0 else out


def qp_loss(tqp: float, q: QpLossParams, gm: GapModel) -> float:
    """Quasiparticle loss kappa (L_s/L_m) sigma1/sigma2 at the effective temperature."""
    if tqp == 0:
        return 0.0
    s1 = bcs.sigma1(q.omega_r, tqp, gm)
    if s1 == 0.0:
        return 0.0
    return q.kappa * q.ls_over_lm * s1 / bcs.sigma2(q.omega_r, tqp, gm)


def total_inverse_qi(np_, tb, tqp, p: TlsParams, q: QpLossParams, inv_q_a: float, gm: GapModel) -> LossBudget:
    return LossBudget(
        inv_q_a=float(inv_q_a),
        inv_q_tls=float(tls_loss(np_, tb, p, q.omega_r)),
        inv_q_qp=qp_loss(tqp, q, gm),
    )


class QpTable:
    """Spline tables of log n_qp(T) and log(sigma1/sigma2)(T) for one material and frequency.

    Both are interpolated against ``1/T``, in which they are nearly linear at
    low temperature.  Outside the tabulated range the exact routines are used.
    """

    def __init__(self, gm: GapModel, omega_r: float, t_min_frac=0.06, t_max_frac=0.6, n_nodes=600):
        self.gm = gm
        self.omega_r = omega_r
        tc = gm.tc
        inv_t = np.linspace(1.0 / (t_max_frac * tc), 1.0 / (t_min_frac * tc), n_nodes)
        temps = 1.0 / inv_t
        self.t_min, self.t_max = float(temps.min()), float(temps.max())
        log_n = np.array([math.log(bcs.qp_density(t, gm)) for t in temps])
        log_ratio = np.array(
            [math.log(bcs.sigma1(omega_r, t, gm) / bcs.sigma2(omega_r, t, gm)) for t in temps]
        )
        self._log_n = CubicSpline(inv_t, log_n)
        self._log_ratio = CubicSpline(inv_t, log_ratio)
        # inverse map: log n increases as 1/T decreases
        order = np.argsort(log_n)
        self._inv_t_of_log_n = CubicSpline(log_n[order], inv_t[order])
        self.log_n_min, self.log_n_max = float(log_n.min()), float(log_n.max())

    def qp_density(self, T):
        T0 = np.asarray(T, dtype=float)
        T = np.atleast_1d(T0)
        out = np.empty_like(T)
        inside = (T >= self.t_min) & (T <= self.t_max)
        out[inside] = np.exp(self._log_n(1.0 / T[inside]))
        for idx in zip(*np.nonzero(~inside)):
            out[idx] = bcs.qp_density(float(T[idx]), self.gm)
        return out.reshape(T0.shape)

    def effective_temperature(self, nqp):
        n0 = np.asarray(nqp, dtype=float)
        nqp = np.atleast_1d(n0)
        out = np.empty_like(nqp)
        with np.errstate(divide="ignore"):
            log_n = np.log(nqp)
        inside = (log_n >= self.log_n_min) & (log_n <= self.log_n_max)
        out[inside] = 1.0 / self._inv_t_of_log_n(log_n[inside])
        for idx in zip(*np.nonzero(~inside)):
            out[idx] = effective_temperature(float(nqp[idx]), self.gm)
        return out.reshape(n0.shape)

    def sigma_ratio(self, T):
        """sigma1/sigma2 at temperature T."""
        T0 = np.asarray(T, dtype=float)
        T = np.atleast_1d(T0)
        out = np.empty_like(T)
        inside = (T >= self.t_min) & (T <= self.t_max)
        out[inside] = np.exp(self._log_ratio(1.0 / T[inside]))
        for idx in zip(*np.nonzero(~inside)):
            t = float(T[idx])
            out[idx] = 0.0 if t == 0 else bcs.sigma1(self.omega_r, t, self.gm) / bcs.sigma2(self.omega_r, t, self.gm)
        return out.reshape(T0.shape)
