import math

import numpy as np
import pytest

from qloss.errors import ExtractionError, PoolingError
from qloss.s21 import (
    PARAM_NAMES,
    ExtractionResult,
    S21Params,
    Spectrum,
    _fit_circle,
    dbm_to_watts,
    extract_resonator_params,
    model_s21,
    model_s21_inv,
    photon_number,
    pool_qc,
    refit_with_pool,
    resonance_grid,
    synth_spectrum,
    wrap_phase,
)

TRUE = S21Params(4.74e9, 4e5, 1.49e5, phi=0.05, amp=1e-3, global_phase=0.4, path_phase_rate=2 * math.pi * 40e-9)
GRID = resonance_grid(TRUE.f0, TRUE.q_i, TRUE.q_c)


def _rel(a, b):
    return abs(a / b - 1)


# -- forward model --------------------------------------------------------------------------


def test_on_resonance_value():
    p = S21Params(4.74e9, 4e5, 1.49e5)
    v = model_s21_inv(4.74e9, p)
    assert v.imag == 0.0
    assert v.real == pytest.approx(1 + 4e5 / 1.49e5, rel=1e-15)
    assert v.real == pytest.approx(3.685, abs=5e-4)


def test_far_detuned_limit():
    p = S21Params(4.74e9, 4e5, 1.49e5)
    assert abs(model_s21_inv(4.74e9 * 1e6, p) - 1) < 1e-5


def _circumcircle(a, b, c):
    d = 2 * (a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag) + c.real * (a.imag - b.imag))
    ux = ((abs(a) ** 2) * (b.imag - c.imag) + (abs(b) ** 2) * (c.imag - a.imag) + (abs(c) ** 2) * (a.imag - b.imag)) / d
    uy = ((abs(a) ** 2) * (c.real - b.real) + (abs(b) ** 2) * (a.real - c.real) + (abs(c) ** 2) * (b.real - a.real)) / d
    centre = complex(ux, uy)
    return centre, abs(a - centre)


def test_locus_is_circle_with_real_diameter():
    p = S21Params(4.74e9, 4e5, 1.49e5)
    f = resonance_grid(p.f0, p.q_i, p.q_c, n=9)
    z = model_s21_inv(f, p)
    centre, r = _circumcircle(z[0], z[3], z[7])
    assert np.allclose(np.abs(z - centre), r, rtol=1e-9)
    assert centre.imag == pytest.approx(0.0, abs=1e-9)
    assert 2 * r == pytest.approx(p.q_i / p.q_c, rel=1e-9)


def test_double_inversion_identity():
    z = model_s21_inv(GRID, TRUE)
    assert np.allclose(1 / (1 / z), z, rtol=1e-15, atol=0)
    assert np.allclose(model_s21(GRID, TRUE) * z, 1.0, rtol=1e-15, atol=0)


def test_params_validation():
    with pytest.raises(ValueError):
        S21Params(4.74e9, -1.0, 1e5)
    with pytest.raises(ValueError):
        S21Params(4.74e9, 1e5, 1e5, phi=4.0)


def test_spectrum_validation():
    f = np.linspace(1, 2, 64)
    with pytest.raises(ValueError, match="32"):
        Spectrum(f[:10], np.ones(10))
    with pytest.raises(ValueError, match="increasing"):
        Spectrum(f[::-1], np.ones(64))
    with pytest.raises(ValueError, match="equal length"):
        Spectrum(f, np.ones(63))


def test_wrap_phase():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


# -- synthesis ----------------------------------------------------------------------------


def test_noiseless_synthesis_is_forward_model():
    sp = synth_spectrum(TRUE, GRID, 0.0, seed=1)
    assert np.array_equal(sp.s21, model_s21(GRID, TRUE))


def test_synthesis_deterministic():
    a = synth_spectrum(TRUE, GRID, 1e-5, seed=11)
    b = synth_spectrum(TRUE, GRID, 1e-5, seed=11)
    c = synth_spectrum(TRUE, GRID, 1e-5, seed=12)
    assert np.array_equal(a.s21, b.s21)
    assert not np.array_equal(a.s21, c.s21)


def test_noise_level():
    f = np.linspace(4.7e9, 4.8e9, 4000)
    p = S21Params(4.75e9, 4e5, 1.49e5)
    sp = synth_spectrum(p, f, 1e-3, seed=5)
    d = sp.s21 - model_s21(f, p)
    assert np.std(d.real) == pytest.approx(1e-3, rel=0.1)
    assert np.std(d.imag) == pytest.approx(1e-3, rel=0.1)


def test_negative_noise_rejected():
    with pytest.raises(ValueError):
        synth_spectrum(TRUE, GRID, -1.0)


# -- extraction ----------------------------------------------------------------------------------


def test_noiseless_round_trip():
    r = extract_resonator_params(synth_spectrum(TRUE, GRID))
    for name in PARAM_NAMES:
        got, want = getattr(r.params, name), getattr(TRUE, name)
        assert _rel(got, want) < 1e-3, name
    assert abs(r.params.f0 - TRUE.f0) / TRUE.f0 < 1e-7
    assert r.residual_rms < 1e-10


@pytest.mark.parametrize(
    "p",
    [
        S21Params(5.25e9, 2e4, 1.51e5, phi=-0.3, amp=0.02, global_phase=-2.5, path_phase_rate=-2e-7),
        S21Params(4.47e9, 3e6, 1.49e5, phi=0.0, amp=1.0, global_phase=3.0, path_phase_rate=0.0),
        S21Params(6e9, 1e5, 1e5, phi=0.6, amp=3e-4, global_phase=0.0, path_phase_rate=5e-7),
    ],
)
def test_noiseless_round_trip_varied(p):
    r = extract_resonator_params(synth_spectrum(p, resonance_grid(p.f0, p.q_i, p.q_c)))
    for name in ("q_i", "q_c", "amp"):
        assert _rel(getattr(r.params, name), getattr(p, name)) < 1e-3, name
    for name in ("phi", "global_phase"):
        assert abs(wrap_phase(getattr(r.params, name) - getattr(p, name))) < 1e-3, name
    assert abs(r.params.path_phase_rate - p.path_phase_rate) < 1e-3 * max(abs(p.path_phase_rate), 1e-9)
    assert abs(r.params.f0 / p.f0 - 1) < 1e-7


def test_refit_is_idempotent():
    r1 = extract_resonator_params(synth_spectrum(TRUE, GRID))
    r2 = extract_resonator_params(synth_spectrum(r1.params, GRID))
    for name in PARAM_NAMES:
        a, b = getattr(r1.params, name), getattr(r2.params, name)
        assert abs(a - b) <= 1e-9 * max(abs(a), 1e-300), name


def test_extraction_equivariant_under_complex_scaling():
    sp = synth_spectrum(TRUE, GRID, 1e-3 * TRUE.amp, seed=3)
    base = extract_resonator_params(sp)
    c = 2.7 * np.exp(1j * 1.1)
    scaled = extract_resonator_params(Spectrum(sp.freqs, c * sp.s21))
    for name in ("f0", "q_i", "q_c"):
        assert _rel(getattr(scaled.params, name), getattr(base.params, name)) < 1e-4, name
    assert abs(scaled.params.phi - base.params.phi) < 1e-4
    assert scaled.params.amp == pytest.approx(2.7 * base.params.amp, rel=1e-4)
    assert abs(wrap_phase(scaled.params.global_phase - base.params.global_phase - 1.1)) < 1e-4


def test_monte_carlo_40db_small():
    errs_i, errs_c = [], []
    for seed in range(20):
        r = extract_resonator_params(synth_spectrum(TRUE, GRID, 0.01 * TRUE.amp, seed=seed))
        errs_i.append(_rel(r.params.q_i, TRUE.q_i))
        errs_c.append(_rel(r.params.q_c, TRUE.q_c))
    assert np.median(errs_i) < 0.02 and np.median(errs_c) < 0.02


def test_uncertainties_reflect_scatter():
    sp = synth_spectrum(TRUE, GRID, 0.01 * TRUE.amp, seed=0)
    r = extract_resonator_params(sp)
    assert set(r.uncertainties) == set(PARAM_NAMES)
    assert 0 < r.uncertainties["q_i"] < 0.1 * r.params.q_i


def test_flat_spectrum_has_no_resonance():
    f = np.linspace(4.7e9, 4.8e9, 401)
    sp = Spectrum(f, np.full(f.size, 1e-3 + 0j))
    with pytest.raises(ExtractionError, match="no resonance found"):
        extract_resonator_params(sp)


def test_noise_only_spectrum_has_no_resonance():
    f = np.linspace(4.7e9, 4.8e9, 401)
    rng = np.random.default_rng(0)
    sp = Spectrum(f, 1e-3 + 1e-6 * (rng.standard_normal(401) + 1j * rng.standard_normal(401)))
    with pytest.raises(ExtractionError, match="no resonance found"):
        extract_resonator_params(sp)


def test_collinear_points_rejected():
    with pytest.raises(ExtractionError, match="collinear"):
        _fit_circle(np.linspace(0, 1, 50) * (1 + 1j))


def test_fixed_coupling_q():
    r = extract_resonator_params(synth_spectrum(TRUE, GRID, 1e-3 * TRUE.amp, seed=4), fixed_qc=1.5e5)
    assert r.params.q_c == 1.5e5
    assert r.fixed_qc == 1.5e5
    assert r.uncertainties["q_c"] == 0.0


# -- photon number ---------------------------------------------------------------------------


def test_photon_number_zero_power():
    assert photon_number(0.0, 4.74e9, 4e5, 1.49e5) == 0.0


def test_photon_number_linear():
    a = photon_number(1e-18, 4.74e9, 4e5, 1.49e5)
    assert photon_number(2e-18, 4.74e9, 4e5, 1.49e5) == pytest.approx(2 * a, rel=1e-15)


def test_photon_number_at_minus_145_dbm():
    p = float(dbm_to_watts(-145.0))
    assert p == pytest.approx(3.16e-18, rel=1e-3)
    assert photon_number(p, 4.74e9, 4e5, 1.49e5) == pytest.approx(73, rel=0.01)


def test_extraction_attaches_photon_number_and_variant():
    sp = synth_spectrum(TRUE, GRID, 0.0, p_in_dbm=-145.0, t_bath=0.04)
    r = extract_resonator_params(sp)
    assert r.n_photon == pytest.approx(photon_number(float(dbm_to_watts(-145.0)), TRUE.f0, TRUE.q_i, TRUE.q_c), rel=1e-6)
    q_tot = 1 / (1 / TRUE.q_i + 1 / TRUE.q_c)
    variant = 2 / (1.054571817e-34 * (2 * math.pi * TRUE.f0) ** 2) * q_tot**2 / TRUE.q_c * float(dbm_to_watts(-145.0))
    assert r.diagnostics["n_photon_qtotal_variant"] == pytest.approx(variant, rel=1e-6)


# -- pooling -----------------------------------------------------------------------------------


def _result(q_c, n=1e4, t=0.04):
    return ExtractionResult(S21Params(4.74e9, 4e5, q_c), {}, 0.0, n_photon=n, t_bath=t)


def test_pool_constant():
    assert pool_qc([_result(1.5e5)] * 5, t_c=5.3).q_c0 == 1.5e5


def test_pool_median_robust():
    pool = pool_qc([_result(1.4e5), _result(1.5e5), _result(9e5)], t_c=5.3)
    assert pool.q_c0 == 1.5e5


def test_pool_window():
    rs = [_result(1e5, n=10.0), _result(2e5, t=1.0), _result(1.5e5)]
    pool = pool_qc(rs, t_c=5.3)
    assert pool.members == (2,)
    assert pool.refit == (0, 1, 2)


def test_pool_empty_window():
    with pytest.raises(PoolingError):
        pool_qc([_result(1.5e5, n=10.0)], t_c=5.3)


def test_pool_monte_carlo():
    rng = np.random.default_rng(9)
    rs = [_result(q) for q in 1.49e5 * (1 + 0.05 * rng.standard_normal(401))]
    assert _rel(pool_qc(rs, t_c=5.3).q_c0, 1.49e5) < 0.01


def test_pooled_refit_removes_qc_scatter():
    spectra = [synth_spectrum(TRUE, GRID, 0.01 * TRUE.amp, seed=s, t_bath=0.04, p_in_dbm=-120.0) for s in range(6)]
    free = [extract_resonator_params(sp) for sp in spectra]
    assert np.std([r.params.q_c for r in free]) > 0
    pool = pool_qc(free, t_c=5.3)
    refit = refit_with_pool(spectra, pool)
    assert len({r.params.q_c for r in refit}) == 1
    assert all(r.params.q_c == pool.q_c0 for r in refit)
