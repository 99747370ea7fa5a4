"""Temperature/power analysis of internal quality factors.

Workflow:

1. ``fit_power_series`` fits the TLS-only power law at each bath temperature;
2. ``interpolate_qi`` resamples that fit onto a fixed photon-number grid;
3. ``fit_model_grid`` fits the combined TLS + quasiparticle model jointly over
   all temperatures, with shared TLS parameters and per-power ``s`` and ``kappa``;
4. ``decompose_losses`` splits the fitted model into its loss channels.

``fit_full_model`` chains 1-3.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.sparse import lil_matrix

from .bcs import GapModel
from .errors import ConfigurationError, DomainError, FitError
from .loss import QpTable, TlsParams, tls_thermal_factor
from .materials import MaterialEntry
from .qpdyn import steady_state_from_bath

log = logging.getLogger(__name__)

DEFAULT_NP_GRID = tuple(10.0**k for k in range(7))


# -- forward model -------------------------------------------------------------


class LossModel:
    """Vectorised evaluation of the combined loss model for one resonator."""

    def __init__(self, entry: MaterialEntry, f_r: float, i_ext: float, q_a: float = 2e7, ls_over_lm=None):
        self.entry = entry
        self.gm = GapModel(entry.material)
        self.rates = entry.rates()
        self.f_r = float(f_r)
        self.omega_r = 2.0 * math.pi * self.f_r
        self.i_ext = float(i_ext)
        self.q_a = float(q_a)
        self.ls_over_lm = float(ls_over_lm if ls_over_lm is not None else entry.geometry.ls_over_lm)
        self.table = QpTable(self.gm, self.omega_r)
        self._n_bath: dict[float, float] = {}

    def n_bath(self, tb):
        tb = np.atleast_1d(np.asarray(tb, dtype=float))
        out = np.empty_like(tb)
        for k, t in enumerate(tb.flat):
            key = float(t)
            if key not in self._n_bath:
                self._n_bath[key] = float(self.table.qp_density(np.array([key]))[0]) if key > 0 else 0.0
            out.flat[k] = self._n_bath[key]
        return out

    def nqp(self, tb, s_rate):
        return steady_state_from_bath(self.n_bath(tb), self.i_ext, s_rate, self.rates.eff_recomb_r)

    def tqp(self, tb, s_rate):
        tb, s_rate = np.broadcast_arrays(np.asarray(tb, float), np.asarray(s_rate, float))
        n_b = self.n_bath(tb).reshape(tb.shape)
        n = steady_state_from_bath(n_b, self.i_ext, s_rate, self.rates.eff_recomb_r)
        out = np.array(tb, dtype=float, copy=True)
        hot = n > n_b * (1.0 + 1e-12)
        if np.any(hot):
            out[hot] = np.maximum(self.table.effective_temperature(n[hot]), tb[hot])
        return out

    def channels(self, tb, n_p, tls: TlsParams, s_rate, kappa):
        """Inverse-Q channels (tls, qp) and T_qp, broadcast over the inputs."""
        tb, n_p, s_rate, kappa = np.broadcast_arrays(
            np.asarray(tb, float), np.asarray(n_p, float), np.asarray(s_rate, float), np.asarray(kappa, float)
        )
        with np.errstate(over="ignore"):
            sat = np.sqrt(1.0 + (n_p / tls.n_c) ** tls.alpha)
        inv_tls = tls_thermal_factor(tb, self.omega_r) / (tls.q_tls0 * sat)
        t_qp = self.tqp(tb, s_rate)
        inv_qp = kappa * self.ls_over_lm * self.table.sigma_ratio(t_qp)
        return inv_tls, inv_qp, t_qp

    def inverse_q(self, tb, n_p, tls, s_rate, kappa):
        inv_tls, inv_qp, _ = self.channels(tb, n_p, tls, s_rate, kappa)
        return 1.0 / self.q_a + inv_tls + inv_qp


# -- TLS-only power fits ------------------------------------------------------------


@dataclass
class PowerSeries:
    t_bath: float
    n_photon: np.ndarray
    q_i: np.ndarray
    q_i_err: Optional[np.ndarray] = None

    def __post_init__(self):
        self.n_photon = np.asarray(self.n_photon, dtype=float)
        self.q_i = np.asarray(self.q_i, dtype=float)
        if self.q_i_err is None:
            self.q_i_err = 0.01 * self.q_i
        self.q_i_err = np.asarray(self.q_i_err, dtype=float)
        if not (self.n_photon.shape == self.q_i.shape == self.q_i_err.shape):
            raise ValueError("power series arrays must have equal length")
        if np.any(self.n_photon <= 0) or np.any(self.q_i <= 0):
            raise ValueError("photon numbers and quality factors must be positive")
        if self.n_photon.size < 4:
            raise ValueError("a power series needs at least 4 points")
        if math.log10(self.n_photon.max() / self.n_photon.min()) < 2.0:
            raise ValueError("a power series must span at least two decades of photon number")
        order = np.argsort(self.n_photon)
        self.n_photon, self.q_i, self.q_i_err = self.n_photon[order], self.q_i[order], self.q_i_err[order]


@dataclass
class TlsOnlyFit:
    q_a: float
    q_tls: float
    n_c: float
    alpha: float
    residual_rms: float
    t_bath: float = float("nan")
    uncertainties: dict = field(default_factory=dict)
    no_tls_signature: bool = False
    n_range: tuple = (float("nan"), float("nan"))

    def inverse_q(self, n_p):
        n_p = np.asarray(n_p, dtype=float)
        return 1.0 / self.q_a + 1.0 / (self.q_tls * np.sqrt(1.0 + (n_p / self.n_c) ** self.alpha))


TLS_ONLY_BOUNDS = {
    "q_a": (1e5, 1e9),
    "q_tls": (1e2, 1e12),
    "n_c": (1e-3, 1e6),
    "alpha": (0.0, 1.0),
}


def _tls_only_inverse(v, n_p):
    log_qa, log_qtls, log_nc, alpha = v
    return math.exp(-log_qa) + math.exp(-log_qtls) / np.sqrt(1.0 + (n_p / math.exp(log_nc)) ** alpha)


def fit_power_series(ps: PowerSeries, n_starts: int = 5) -> TlsOnlyFit:
    """Weighted TLS-only fit 1/Q = 1/Q_A + 1/(Q_TLS sqrt(1 + (n/n_c)^alpha)) with multi-start."""
    n, q = ps.n_photon, ps.q_i
    inv = 1.0 / q
    sigma = ps.q_i_err / q**2
    b = TLS_ONLY_BOUNDS
    lower = [math.log(b["q_a"][0]), math.log(b["q_tls"][0]), math.log(b["n_c"][0]), b["alpha"][0]]
    upper = [math.log(b["q_a"][1]), math.log(b["q_tls"][1]), math.log(b["n_c"][1]), b["alpha"][1]]

    def resid(v):
        return (_tls_only_inverse(v, n) - inv) / sigma

    # starts are built from data scale so the fit is equivariant under q -> c q
    q_hi = float(q.max())
    excess = max(float(inv.max() - inv.min()), 1e-3 * float(inv.mean()))
    n_lo, n_hi = float(n.min()), float(n.max())
    alphas = (0.6, 0.9, 0.3, 1.0, 0.1)
    nc_fracs = (0.1, 0.5, 0.0, 0.9, 0.3)
    best = None
    for k in range(n_starts):
        nc0 = math.exp(math.log(n_lo) + nc_fracs[k % 5] * math.log(n_hi / n_lo))
        x0 = np.clip(
            [math.log(1.1 * q_hi), math.log(1.0 / (1.5 * excess)), math.log(nc0), alphas[k % 5]],
            np.add(lower, 1e-9),
            np.subtract(upper, 1e-9),
        )
        try:
            res = optimize.least_squares(
                resid, x0, bounds=(lower, upper), method="trf", x_scale="jac",
                xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=5000,
            )
        except (ValueError, FloatingPointError) as exc:
            log.debug("TLS-only start %d failed: %s", k, exc)
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None or not np.all(np.isfinite(best.x)):
        raise FitError("TLS-only fit did not converge from any start", {"t_bath": ps.t_bath})

    v = best.x
    q_a, q_tls, n_c, alpha = math.exp(v[0]), math.exp(v[1]), math.exp(v[2]), float(v[3])
    model_inv = _tls_only_inverse(v, n)
    rel_rms = float(np.sqrt(np.mean((model_inv / inv - 1.0) ** 2)))
    tls_span = (1.0 / q_tls) * (
        1.0 / math.sqrt(1.0 + (n_lo / n_c) ** alpha) - 1.0 / math.sqrt(1.0 + (n_hi / n_c) ** alpha)
    )
    no_signature = q_tls >= 0.99 * b["q_tls"][1] or tls_span < max(1e-3, 2.0 * rel_rms) * float(inv.mean())
    if no_signature:
        # TLS channel switched off: Q_TLS pinned at its bound, Q_A is the weighted mean
        w = 1.0 / sigma**2
        q_a = float(np.clip(1.0 / (np.sum(w * inv) / np.sum(w)), *b["q_a"]))
        q_tls = b["q_tls"][1]
        model_inv = np.full_like(inv, 1.0 / q_a) + 1.0 / q_tls
        rel_rms = float(np.sqrt(np.mean((model_inv / inv - 1.0) ** 2)))

    unc = {}
    dof = max(n.size - 4, 1)
    try:
        cov = np.linalg.pinv(best.jac.T @ best.jac) * (2.0 * best.cost / dof)
        sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        unc = {"q_a": sd[0] * q_a, "q_tls": sd[1] * q_tls, "n_c": sd[2] * n_c, "alpha": float(sd[3])}
    except np.linalg.LinAlgError:
        pass
    return TlsOnlyFit(
        q_a=q_a,
        q_tls=q_tls,
        n_c=n_c,
        alpha=alpha,
        residual_rms=rel_rms,
        t_bath=ps.t_bath,
        uncertainties={k: float(x) for k, x in unc.items()},
        no_tls_signature=bool(no_signature),
        n_range=(n_lo, n_hi),
    )


def interpolate_qi(fit: TlsOnlyFit, np_grid: Sequence[float] = DEFAULT_NP_GRID, check_range: bool = True):
    """Q_i of a TLS-only fit at the requested photon numbers, as (n_photon, q_i) pairs."""
    grid = np.asarray(np_grid, dtype=float)
    if check_range and math.isfinite(fit.n_range[0]):
        lo, hi = fit.n_range[0] / 10.0, fit.n_range[1] * 10.0
        if np.any(grid < lo * (1 - 1e-12)) or np.any(grid > hi * (1 + 1e-12)):
            raise DomainError(
                f"photon grid extends beyond one decade of the measured range [{fit.n_range[0]:.3g}, {fit.n_range[1]:.3g}]"
            )
    q = 1.0 / fit.inverse_q(grid)
    return [(float(a), float(b)) for a, b in zip(grid, q)]


# -- joint model fit -----------------------------------------------------------------


@dataclass
class FitConfig:
    q_a: float = 2e7
    i_ext: float = 2.4e6
    np_grid: tuple = DEFAULT_NP_GRID
    n_starts: int = 5
    seed: int = 0
    residual_ceiling: float = 0.05
    q_tls_bounds: tuple = (1e3, 1e10)
    n_c_bounds: tuple = (1e-3, 1e6)
    alpha_bounds: tuple = (0.0, 1.0)
    s_bounds: tuple = (1e-2, 1e7)
    kappa_bounds: tuple = (1e-2, 1e2)
    mask_t_below: Optional[float] = None
    mask_np_below: Optional[float] = None
    min_temperatures: int = 5

    @classmethod
    def from_mapping(cls, data: Optional[Mapping] = None) -> "FitConfig":
        data = dict(data or {})
        known = {k: data.pop(k) for k in list(data) if k in cls.__dataclass_fields__}
        if "i_ext_per_um3_s" in data:
            known["i_ext"] = data.pop("i_ext_per_um3_s")
        bounds = data.pop("bounds", {}) or {}
        for name in ("q_tls", "n_c", "alpha", "s", "kappa"):
            if name in bounds:
                known[f"{name}_bounds"] = tuple(float(x) for x in bounds[name])
        extra = sorted(data) + [f"bounds.{k}" for k in bounds if k not in ("q_tls", "n_c", "alpha", "s", "kappa")]
        if extra:
            raise ConfigurationError(f"unknown fit config keys: {extra}")
        for key in ("np_grid",) + tuple(k for k in known if k.endswith("_bounds")):
            if key in known:
                known[key] = tuple(float(x) for x in known[key])
        # YAML 1.1 reads e.g. "2.4e4" as a string
        try:
            for key in ("q_a", "i_ext", "residual_ceiling"):
                if key in known:
                    known[key] = float(known[key])
            for key in ("mask_t_below", "mask_np_below"):
                if known.get(key) is not None:
                    known[key] = float(known[key])
            for key in ("n_starts", "seed", "min_temperatures"):
                if key in known:
                    known[key] = int(known[key])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"fit config: {exc}") from None
        return cls(**known)


@dataclass
class ModelFit:
    tls: TlsParams
    i_ext: float
    q_a: float
    per_power: dict  # n_photon -> (s_rate, kappa)
    tqp_surface: dict  # (t_bath, n_photon) -> T_qp
    goodness: float
    residual_rms: float
    uncertainties: dict
    t_baths: tuple
    np_grid: tuple
    data: dict  # (t_bath, n_photon) -> interpolated q_i used in the fit
    masked: tuple = ()
    flags: dict = field(default_factory=dict)
    tls_only: dict = field(default_factory=dict)  # t_bath -> TlsOnlyFit
    model: Optional[LossModel] = field(default=None, repr=False, compare=False)

    def s_and_kappa(self, n_p):
        """Per-power parameters, log-interpolated between fitted grid points."""
        grid = np.array(sorted(self.per_power))
        s = np.array([self.per_power[g][0] for g in grid])
        k = np.array([self.per_power[g][1] for g in grid])
        x = np.log(np.asarray(n_p, dtype=float))
        return np.exp(np.interp(x, np.log(grid), np.log(s))), np.exp(np.interp(x, np.log(grid), np.log(k)))


def _grid_arrays(t_baths, np_grid, q_grid):
    tb, npx = np.meshgrid(np.asarray(t_baths, float), np.asarray(np_grid, float), indexing="ij")
    return tb, npx, np.asarray(q_grid, dtype=float)


def fit_model_grid(
    t_baths: Sequence[float],
    np_grid: Sequence[float],
    q_grid,
    model: LossModel,
    cfg: FitConfig,
    tls_init: Optional[TlsParams] = None,
) -> ModelFit:
    """Joint fit of the combined model to a (temperature x photon number) grid of Q_i.

    ``q_grid`` has shape (len(t_baths), len(np_grid)); NaN entries are skipped.
    Residuals are relative residuals of 1/Q_i.
    """
    tb, npx, q = _grid_arrays(t_baths, np_grid, q_grid)
    n_t, n_p = tb.shape
    valid = np.isfinite(q)
    masked = []
    if cfg.mask_t_below is not None and cfg.mask_np_below is not None:
        m = (tb < cfg.mask_t_below) & (npx < cfg.mask_np_below) & valid
        masked = [(float(a), float(b)) for a, b in zip(tb[m], npx[m])]
        valid &= ~m
    counts = valid.sum(axis=0)
    if np.any(counts < cfg.min_temperatures):
        raise FitError(
            f"need at least {cfg.min_temperatures} bath temperatures per photon number",
            {"counts": counts.tolist()},
        )
    rows, cols = np.nonzero(valid)
    tb_v, np_v, q_v = tb[rows, cols], npx[rows, cols], q[rows, cols]
    inv_data = 1.0 / q_v

    n_par = 3 + 2 * n_p
    lo = np.array(
        [math.log(cfg.q_tls_bounds[0]), math.log(cfg.n_c_bounds[0]), cfg.alpha_bounds[0]]
        + [math.log(cfg.s_bounds[0])] * n_p
        + [math.log(cfg.kappa_bounds[0])] * n_p
    )
    hi = np.array(
        [math.log(cfg.q_tls_bounds[1]), math.log(cfg.n_c_bounds[1]), cfg.alpha_bounds[1]]
        + [math.log(cfg.s_bounds[1])] * n_p
        + [math.log(cfg.kappa_bounds[1])] * n_p
    )

    def unpack(v):
        tls = TlsParams(math.exp(v[0]), math.exp(v[1]), float(np.clip(v[2], 0.0, 1.0)))
        return tls, np.exp(v[3 : 3 + n_p]), np.exp(v[3 + n_p :])

    def resid(v):
        tls, s, kap = unpack(v)
        return model.inverse_q(tb_v, np_v, tls, s[cols], kap[cols]) / inv_data - 1.0

    sparsity = lil_matrix((rows.size, n_par), dtype=int)
    sparsity[:, :3] = 1
    for k, c in enumerate(cols):
        sparsity[k, 3 + c] = 1
        sparsity[k, 3 + n_p + c] = 1

    starts = _model_starts(lo, hi, n_p, cfg, tls_init)
    best = None
    for k, x0 in enumerate(starts):
        try:
            res = optimize.least_squares(
                resid, x0, bounds=(lo, hi), method="trf", jac_sparsity=sparsity,
                x_scale="jac", xtol=1e-12, ftol=1e-10, gtol=1e-12, max_nfev=3000,
            )
        except (ValueError, FloatingPointError, DomainError) as exc:
            log.debug("model-fit start %d failed: %s", k, exc)
            continue
        log.debug("model-fit start %d: cost %.6g nfev %d", k, res.cost, res.nfev)
        if best is None or res.cost < best.cost - 1e-15:
            best = res
    if best is None:
        raise FitError("model fit did not converge from any start")

    tls, s, kap = unpack(best.x)
    rel_rms = float(np.sqrt(np.mean(best.fun**2)))
    if rel_rms > cfg.residual_ceiling:
        raise FitError(
            f"relative residual {rel_rms:.3g} exceeds ceiling {cfg.residual_ceiling:.3g}; "
            "I_ext may be below the feasibility threshold, try a larger I_ext",
            {"residual_rms": rel_rms, "i_ext": model.i_ext},
        )
    inv_model = inv_data * (1.0 + best.fun)
    ss_res = float(np.sum((inv_model - inv_data) ** 2))
    ss_tot = float(np.sum((inv_data - inv_data.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")

    jac = best.jac.toarray() if hasattr(best.jac, "toarray") else np.asarray(best.jac)
    dof = max(rows.size - n_par, 1)
    cov = np.linalg.pinv(jac.T @ jac) * (2.0 * best.cost / dof)
    sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    unc = {
        "q_tls0": float(sd[0] * tls.q_tls0),
        "n_c": float(sd[1] * tls.n_c),
        "alpha": float(sd[2]),
        "s_rate": {float(g): float(sd[3 + j] * s[j]) for j, g in enumerate(np_grid)},
        "kappa": {float(g): float(sd[3 + n_p + j] * kap[j]) for j, g in enumerate(np_grid)},
    }

    # per-power sensitivity of the residuals to log s; tiny means s is not identified
    col_norm = np.sqrt(np.sum(jac[:, 3 : 3 + n_p] ** 2, axis=0))
    s_flags = {}
    for j, g in enumerate(np_grid):
        at_bound = best.x[3 + j] <= lo[3 + j] + 1e-6 or best.x[3 + j] >= hi[3 + j] - 1e-6
        s_flags[float(g)] = bool(col_norm[j] < 1e-4 or at_bound)

    per_power = {float(g): (float(s[j]), float(kap[j])) for j, g in enumerate(np_grid)}
    tqp_all = model.tqp(tb, s[None, :] * np.ones_like(tb))
    surface = {
        (float(tb[i, j]), float(npx[i, j])): float(tqp_all[i, j]) for i in range(n_t) for j in range(n_p)
    }
    data = {(float(tb[i, j]), float(npx[i, j])): float(q[i, j]) for i in range(n_t) for j in range(n_p)}
    return ModelFit(
        tls=tls,
        i_ext=model.i_ext,
        q_a=model.q_a,
        per_power=per_power,
        tqp_surface=surface,
        goodness=r2,
        residual_rms=rel_rms,
        uncertainties=unc,
        t_baths=tuple(float(t) for t in t_baths),
        np_grid=tuple(float(g) for g in np_grid),
        data=data,
        masked=tuple(masked),
        flags={"s_degenerate": s_flags, "cost": float(best.cost), "nfev": int(best.nfev)},
        model=model,
    )


def _model_starts(lo, hi, n_p, cfg: FitConfig, tls_init: Optional[TlsParams]):
    """Deterministic multi-start points: one informed start, the rest log-uniform quasi-random."""
    from scipy.stats import qmc

    starts = []
    first = np.empty(lo.size)
    if tls_init is not None:
        first[:3] = [math.log(tls_init.q_tls0), math.log(tls_init.n_c), tls_init.alpha]
    else:
        first[:3] = [math.log(2e5), 0.0, 0.6]
    first[3 : 3 + n_p] = math.log(1e3)
    first[3 + n_p :] = 0.0
    starts.append(first)
    # the remaining starts share s and kappa across powers: 5 dimensions to spread
    sampler = qmc.Halton(d=5, scramble=True, seed=cfg.seed)
    u = sampler.random(max(cfg.n_starts - 1, 0))
    # keep quasi-random starts away from the extreme edges of the box
    inner = lambda a, b, t: a + (b - a) * (0.1 + 0.8 * t)  # noqa: E731
    for row in u:
        x = np.empty(lo.size)
        x[0] = inner(lo[0], hi[0], row[0])
        x[1] = inner(lo[1], hi[1], row[1])
        x[2] = inner(lo[2], hi[2], row[2])
        x[3 : 3 + n_p] = inner(lo[3], hi[3], row[3])
        x[3 + n_p :] = inner(lo[3 + n_p], hi[3 + n_p], row[4])
        starts.append(x)
    return [np.clip(s, lo + 1e-9, hi - 1e-9) for s in starts[: cfg.n_starts]]


def interpolate_dataset(dataset: Mapping[float, PowerSeries], np_grid=DEFAULT_NP_GRID):
    """TLS-only fit per temperature and Q_i on the photon grid; out-of-range cells are NaN."""
    t_baths = sorted(float(t) for t in dataset)
    fits = {}
    q = np.full((len(t_baths), len(np_grid)), np.nan)
    for i, t in enumerate(t_baths):
        fit = fit_power_series(dataset[t])
        fits[t] = fit
        lo, hi = fit.n_range[0] / 10.0, fit.n_range[1] * 10.0
        for j, g in enumerate(np_grid):
            if lo <= g <= hi:
                q[i, j] = 1.0 / float(fit.inverse_q(g))
    return t_baths, q, fits


def fit_full_model(dataset: Mapping[float, PowerSeries], model: LossModel, cfg: Optional[FitConfig] = None) -> ModelFit:
    """TLS-only fits, interpolation onto ``cfg.np_grid`` and the joint model fit."""
    cfg = cfg or FitConfig()
    if model.i_ext != cfg.i_ext or model.q_a != cfg.q_a:
        raise ValueError("model i_ext/q_a differ from the fit config")
    t_baths, q, fits = interpolate_dataset(dataset, cfg.np_grid)
    # informed start: TLS parameters averaged over the coldest third of the TLS-only fits
    cold = [fits[t] for t in t_baths[: max(1, len(t_baths) // 3)] if not fits[t].no_tls_signature]
    tls_init = None
    if cold:
        tls_init = TlsParams(
            float(np.exp(np.mean([math.log(f.q_tls) for f in cold]))),
            float(np.clip(np.exp(np.mean([math.log(f.n_c) for f in cold])), *cfg.n_c_bounds)),
            float(np.clip(np.mean([f.alpha for f in cold]), *cfg.alpha_bounds)),
        )
    fit = fit_model_grid(t_baths, cfg.np_grid, q, model, cfg, tls_init=tls_init)
    fit.tls_only = fits
    return fit


def decompose_losses(fit: ModelFit, grid: Optional[tuple] = None) -> list[dict]:
    """Per-grid-point channel decomposition of the fitted model.

    Each row holds t_bath_K, n_photon, q_i_model, q_tls, q_qp, q_a, t_qp_K and
    the inverse channels; ``1/q_i_model`` equals the sum of the inverse channels.
    """
    model = fit.model
    if model is None:
        raise ValueError("fit carries no model context")
    t_baths, nps = grid if grid is not None else (fit.t_baths, fit.np_grid)
    rows = []
    inv_a = 1.0 / fit.q_a
    for n in nps:
        s, k = fit.s_and_kappa(n)
        tb = np.asarray(t_baths, dtype=float)
        inv_tls, inv_qp, t_qp = model.channels(tb, n, fit.tls, s, k)
        for i, t in enumerate(tb):
            inv_total = inv_a + float(inv_tls[i]) + float(inv_qp[i])
            rows.append(
                {
                    "t_bath_K": float(t),
                    "n_photon": float(n),
                    "q_i_model": 1.0 / inv_total,
                    "inv_q_total": inv_total,
                    "inv_q_a": inv_a,
                    "inv_q_tls": float(inv_tls[i]),
                    "inv_q_qp": float(inv_qp[i]),
                    "q_a": fit.q_a,
                    "q_tls": 1.0 / float(inv_tls[i]) if inv_tls[i] > 0 else math.inf,
                    "q_qp": 1.0 / float(inv_qp[i]) if inv_qp[i] > 0 else math.inf,
                    "t_qp_K": float(t_qp[i]),
                }
            )
    return rows
