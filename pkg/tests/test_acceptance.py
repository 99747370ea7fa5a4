"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``python tests/test_acceptance.py``);
the collected lines are repeated in the terminal summary.
"""
import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qloss.bcs import gap, pair_density, qp_density, sigma1, sigma2
from qloss.cli import main as cli_main
from qloss.constants import HBAR
from qloss.loss import LossBudget, QpLossParams, TlsParams, tls_loss, total_inverse_qi
from qloss.materials import recombination_rate
from qloss.pipeline import FitConfig, fit_full_model
from qloss.qpdyn import DriveParams, bath_state, effective_temperature, evolve_densities, steady_state_nqp
from qloss.s21 import PARAM_NAMES, S21Params, extract_resonator_params, resonance_grid, synth_spectrum
from qloss.scenarios import power_series_dataset, tin_like, true_tqp


def report(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_recombination_rate(tin_entry):
    r = recombination_rate(tin_entry.material)
    err = abs(r / 83.3 - 1)
    report(1, err < 0.01, f"R(TiN) = {r:.4g} um^3/s vs 83.3 (rel err {err:.2e}, tol 1e-2)")


def test_criterion_2_gap_anchor(tin_gm):
    d0 = gap(0.0, tin_gm)
    err = abs(d0 / 804e-6 - 1)
    at_tc = gap(tin_gm.tc, tin_gm)
    report(2, err < 1e-3 and at_tc == 0.0, f"Delta(0) = {d0 * 1e6:.3f} ueV (rel err {err:.2e}, tol 1e-3); Delta(Tc) = {at_tc}")


def test_criterion_3_density_anchors(tin_gm, al_gm):
    t0 = time.perf_counter()
    n_tin, n_al = qp_density(0.849, tin_gm), qp_density(0.217, al_gm)
    x_tin, x_al = n_tin / pair_density(tin_gm), n_al / pair_density(al_gm)
    dt = time.perf_counter() - t0
    ok = (
        abs(n_tin - 678) <= 259
        and abs(n_al - 359) <= 238
        and abs(x_tin - 1.45e-5) <= 0.55e-5
        and abs(x_al - 5.73e-5) <= 3.80e-5
        and dt < 1.0
    )
    report(
        3, ok,
        f"n_qp TiN {n_tin:.1f} (678+-259), Al {n_al:.1f} (359+-238) um^-3; "
        f"ratios {x_tin:.3g} (1.45e-5+-0.55e-5), {x_al:.3g} (5.73e-5+-3.80e-5); {dt:.2f} s",
    )


def test_criterion_4_steady_state_oracle(tin_entry, tin_gm):
    r = tin_entry.rates()
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for i_ext in np.logspace(3, 9, 5):
        for s in (0.0, 1e2, 1e4):
            for frac in (0.01, 0.1, 0.2):
                d = DriveParams(float(i_ext), s, frac * tin_gm.tc)
                n_ss = steady_state_nqp(d, r, tin_gm)
                t_end = 100.0 / (r.eff_recomb_r * n_ss + s)
                out = evolve_densities(bath_state(d.t_bath, r, tin_gm), d, r, tin_gm, t_end)
                worst = max(worst, abs(out.nqp / n_ss - 1))
                count += 1
    dt = time.perf_counter() - t0
    report(4, count == 45 and worst < 1e-3 and dt < 30, f"{count} grid points, worst rel diff {worst:.2e} (tol 1e-3); {dt:.1f} s")


def test_criterion_5_conductivity_asymptote(tin_gm, al_gm):
    t0 = time.perf_counter()
    pairs = ((tin_gm, 2 * math.pi * 4.74e9), (al_gm, 2 * math.pi * 5.25e9))
    s2_err = max(abs(sigma2(w, 0.01 * gm.tc, gm) / (math.pi * gm.delta0 / (HBAR * w)) - 1) for gm, w in pairs)
    s1_cold = max(sigma1(w, 0.01 * gm.tc, gm) for gm, w in pairs)
    halving = 0.0
    for gm, w in pairs:
        for frac in (0.05, 0.16, 0.4, 0.8):
            t = frac * gm.tc
            for fn in (sigma1, sigma2):
                a, b = fn(w, t, gm, rtol=1e-8), fn(w, t, gm, rtol=5e-9)
                if a != 0.0 or b != 0.0:
                    halving = max(halving, abs(a / b - 1))
    dt = time.perf_counter() - t0
    ok = s2_err < 0.05 and s1_cold < 1e-12 and halving < 1e-6 and dt < 10
    report(
        5, ok,
        f"sigma2 asymptote rel err {s2_err:.2e} (tol 5e-2); sigma1(0.01 Tc) = {s1_cold:.1e} (< 1e-12); "
        f"tolerance-halving drift {halving:.1e} (tol 1e-6); {dt:.1f} s",
    )


def test_criterion_6_extraction_round_trip():
    t0 = time.perf_counter()
    p = S21Params(4.74e9, 4e5, 1.49e5, phi=0.05, amp=1e-3, global_phase=0.4, path_phase_rate=2 * math.pi * 40e-9)
    f = resonance_grid(p.f0, p.q_i, p.q_c)
    clean = extract_resonator_params(synth_spectrum(p, f))
    worst = max(abs(getattr(clean.params, k) / getattr(p, k) - 1) for k in PARAM_NAMES)
    err_i, err_c = [], []
    for seed in range(100):
        r = extract_resonator_params(synth_spectrum(p, f, 0.01 * p.amp, seed=seed))
        err_i.append(abs(r.params.q_i / p.q_i - 1))
        err_c.append(abs(r.params.q_c / p.q_c - 1))
    med_i, med_c = float(np.median(err_i)), float(np.median(err_c))
    dt = time.perf_counter() - t0
    ok = worst < 1e-3 and med_i < 0.02 and med_c < 0.02 and dt < 60
    report(
        6, ok,
        f"noiseless worst param rel err {worst:.1e} (tol 1e-3); 40 dB x 100 seeds median |dQi| {med_i:.2%}, "
        f"|dQc| {med_c:.2%} (tol 2%); {dt:.1f} s",
    )


def test_criterion_7_pipeline_round_trip():
    t0 = time.perf_counter()
    scn = tin_like()
    model = scn.loss_model()
    ds = power_series_dataset(scn, seed=1, model=model)
    fit = fit_full_model(ds, model, FitConfig())
    e_q = abs(fit.tls.q_tls0 / scn.tls.q_tls0 - 1)
    e_a = abs(fit.tls.alpha - scn.tls.alpha)
    e_n = abs(fit.tls.n_c / scn.tls.n_c - 1)
    e_k = max(abs(k / float(scn.kappa_curve(g)) - 1) for g, (_, k) in fit.per_power.items())
    keys = list(fit.tqp_surface)
    tb = np.array([k[0] for k in keys])
    nn = np.array([k[1] for k in keys])
    got = np.array([fit.tqp_surface[k] for k in keys])
    rms = float(np.sqrt(np.mean((got - true_tqp(scn, tb, nn, model)) ** 2)))
    dt = time.perf_counter() - t0
    ok = e_q < 0.10 and e_a < 0.05 and e_n < 0.25 and e_k < 0.10 and rms < 0.030 and fit.goodness > 0.95 and dt < 300
    report(
        7, ok,
        f"Q_TLS0 err {e_q:.1%} (<10%), alpha err {e_a:.3f} (<0.05), n_c err {e_n:.1%} (<25%), "
        f"max kappa err {e_k:.1%} (<10%), T_qp RMS {rms * 1e3:.2f} mK (<30), R^2 {fit.goodness:.5f} (>0.95); {dt:.1f} s",
    )


def test_criterion_8_tls_only_signature(tmp_path):
    t0 = time.perf_counter()
    assert cli_main(["simulate", "--out", str(tmp_path), "--seed", "7"]) == 0
    assert cli_main(["extract", "--out", str(tmp_path), "--jobs", "4"]) == 0
    assert cli_main(["fit", "--out", str(tmp_path), "--tls-only", "--jobs", "4"]) == 0
    bundle = json.loads((tmp_path / "bundle.json").read_text())
    gen = json.loads((tmp_path / "manifest.json").read_text())["extra"]["generator"]["tls"]
    cold = min(bundle["tls_only"], key=lambda f: f["t_bath_K"])
    dt = time.perf_counter() - t0
    ok = cold["alpha"] < gen["alpha"] and cold["n_c"] < gen["n_c"] and dt < 60
    report(
        8, ok,
        f"TLS-only at {cold['t_bath_K'] * 1e3:.0f} mK: alpha {cold['alpha']:.3f} < {gen['alpha']}, "
        f"n_c {cold['n_c']:.3f} < {gen['n_c']}; {dt:.1f} s",
    )


def test_criterion_9_trivial_limits(tin_entry, tin_gm):
    r = tin_entry.rates()
    thermal = all(
        steady_state_nqp(DriveParams(0.0, s, t), r, tin_gm) == qp_density(t, tin_gm)
        for s in (0.0, 1e2, 1e4)
        for t in (0.1, 0.5, 0.849, 1.2)
    )
    tls = TlsParams(1.7e5, 1.46, 0.57)
    w = 2 * math.pi * 4.74e9
    sat = [tls_loss(n, 0.04, tls, w) for n in (1e3, 1e9, 1e30, 1e300)]
    saturates = all(a > b for a, b in zip(sat, sat[1:])) and sat[-1] < 1e-85 and tls_loss(math.inf, 0.04, tls, w) == 0.0
    rng = np.random.default_rng(0)
    additive = True
    for _ in range(200):
        b = total_inverse_qi(
            10 ** rng.uniform(-1, 7), rng.uniform(0.01, 1.2), rng.uniform(0.3, 1.5), tls,
            QpLossParams(10 ** rng.uniform(-2, 1), 0.3, w), 5e-8, tin_gm,
        )
        additive &= b.inv_q_total == b.inv_q_a + b.inv_q_tls + b.inv_q_qp
    additive &= LossBudget(5e-8, 0.0, 0.0).inv_q_total == 5e-8
    worst_t = max(
        abs(effective_temperature(qp_density(t, tin_gm), tin_gm) - t) for t in np.linspace(0.05, 0.95, 46) * tin_gm.tc
    )
    ok = thermal and saturates and additive and worst_t < 1e-4
    report(
        9, ok,
        f"I_ext=0 thermal exact: {thermal}; TLS saturation to 0: {saturates}; budget additivity exact: {bool(additive)}; "
        f"T_eff(n_qp(T)) worst error {worst_t:.1e} K (tol 1e-4)",
    )


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
