import math

import numpy as np
import pytest

import oracles
from qloss.bcs import (
    ASYMPTOTIC_RATIO,
    GapModel,
    _thermal_integral,
    fermi,
    gap,
    pair_density,
    phonon_density_2delta,
    qp_density,
    qp_density_asymptotic,
    sigma1,
    sigma2,
)
from qloss.constants import HBAR, K_B
from qloss.errors import ConfigurationError, DomainError
from qloss.materials import Material

W_TIN = 2 * math.pi * 4.74e9
W_AL = 2 * math.pi * 5.25e9


# -- gap -----------------------------------------------------------------------------


def test_gap_zero_temperature(tin_gm):
    assert gap(0.0, tin_gm) == pytest.approx(804e-6, rel=1e-3)


def test_gap_closes_at_tc(tin_gm):
    assert gap(tin_gm.tc, tin_gm) == 0.0


def test_gap_half_tc(tin_gm):
    assert gap(2.65, tin_gm) == pytest.approx(0.94028 * 804e-6, rel=1e-3)
    assert gap(2.65, tin_gm) == pytest.approx(tin_gm.delta0 * math.tanh(1.74), rel=1e-15)


def test_gap_normal_state(tin_gm):
    with pytest.raises(DomainError, match="normal state"):
        gap(6.0, tin_gm)


def test_gap_strictly_decreasing(tin_gm):
    T = np.linspace(0.01, 0.999, 200) * tin_gm.tc
    d = [gap(t, tin_gm) for t in T]
    assert all(a > b for a, b in zip(d, d[1:]))
    assert all(x <= tin_gm.delta0 for x in d)


def test_gap_flat_in_measured_range(tin_gm, al_gm):
    for gm in (tin_gm, al_gm):
        for t in np.linspace(1e-3, 0.22, 50) * gm.tc:
            assert abs(gap(t, gm) - gm.delta0) / gm.delta0 < 4e-3


# -- fermi ---------------------------------------------------------------------------


def test_fermi_zero_temperature_step():
    assert fermi(1e-4, 0.0) == 0.0
    assert fermi(-1e-4, 0.0) == 1.0
    assert fermi(0.0, 0.0) == 0.5


def test_fermi_symmetry_point():
    for T in (0.01, 0.3, 5.0):
        assert fermi(0.0, T) == 0.5


def test_fermi_value():
    assert fermi(182e-6, 0.217) == pytest.approx(5.95e-5, rel=5e-3)
    assert fermi(182e-6, 0.217) == pytest.approx(1 / (math.exp(182e-6 / (K_B * 0.217)) + 1), rel=1e-12)


def test_fermi_vectorised():
    out = fermi(np.array([-1e-3, 0.0, 1e-3]), 1.0)
    assert out.shape == (3,)
    assert out[0] + out[2] == pytest.approx(1.0, rel=1e-15)


# -- quasiparticle density -----------------------------------------------------------------


def test_density_anchor_tin(tin_gm):
    n = qp_density(0.849, tin_gm)
    assert 678 - 259 <= n <= 678 + 259


def test_density_anchor_al(al_gm):
    n = qp_density(0.217, al_gm)
    assert 359 - 238 <= n <= 359 + 238


def test_density_vanishes_at_zero(tin_gm):
    assert qp_density(0.0, tin_gm) == 0.0
    assert qp_density(0.01 * tin_gm.tc, tin_gm) < 1e-30


def test_density_domain(tin_gm):
    with pytest.raises(DomainError):
        qp_density(tin_gm.tc, tin_gm)


def test_density_strictly_increasing(tin_gm, al_gm):
    for gm in (tin_gm, al_gm):
        T = np.linspace(0.03, 0.98, 120) * gm.tc
        n = [qp_density(t, gm) for t in T]
        assert all(a < b for a, b in zip(n, n[1:]))


@pytest.mark.parametrize("frac", [0.1, 0.16, 0.3, 0.6])
def test_density_matches_trapezoid_oracle(tin_gm, frac):
    T = frac * tin_gm.tc
    if gap(T, tin_gm) / (K_B * T) > ASYMPTOTIC_RATIO:
        pytest.skip("asymptotic branch")
    assert qp_density(T, tin_gm) == pytest.approx(oracles.qp_density(T, 5.3, 2.96e10), rel=1e-6)


def test_density_crossover_continuity(tin_gm):
    # full integral just below the switch vs asymptote at the switch
    delta = tin_gm.delta0
    kT = delta / ASYMPTOTIC_RATIO
    full = 4 * tin_gm.material.n0 * _thermal_integral(delta, kT)
    asym = 2 * tin_gm.material.n0 * math.sqrt(2 * math.pi * kT * delta) * math.exp(-ASYMPTOTIC_RATIO)
    assert abs(full / asym - 1) < 0.02


def test_density_vs_asymptote_band(tin_gm):
    for x in np.linspace(10.5, 29.5, 20):
        T = float(tin_gm.delta0 / (x * K_B))
        ratio = qp_density(T, tin_gm) / qp_density_asymptotic(T, tin_gm)
        assert 0.9 <= ratio <= 1.2


# -- pair density --------------------------------------------------------------------------


def test_pair_density_al(al_gm):
    n_cp = pair_density(al_gm)
    assert n_cp == pytest.approx(6.26e6, rel=5e-3)
    assert 359 / n_cp == pytest.approx(5.73e-5, rel=5e-3)


def test_pair_density_tin(tin_gm):
    assert pair_density(tin_gm) == pytest.approx(4.76e7, rel=5e-3)


def test_pair_density_linear_in_n0(tin_gm):
    m = tin_gm.material
    gm3 = GapModel(Material("x", m.tc, 3 * m.n0, m.tau0, m.vs))
    assert pair_density(gm3) == pytest.approx(3 * pair_density(tin_gm), rel=1e-15)


# -- phonon density ------------------------------------------------------------------------


def test_phonon_density_empty_range(tin_gm):
    m = tin_gm.material
    gm = GapModel(Material("x", m.tc, m.n0, m.tau0, m.vs, nion=m.nion, debye_energy=1.5 * m.delta0))
    assert phonon_density_2delta(1.0, gm) == 0.0


def test_phonon_density_zero_temperature(tin_gm):
    assert phonon_density_2delta(0.0, tin_gm) == 0.0
    vals = [phonon_density_2delta(f * tin_gm.tc, tin_gm) for f in (0.08, 0.04, 0.02)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-60


@pytest.mark.parametrize("T", [0.8, 1.5, 2.5])
def test_phonon_density_matches_trapezoid_oracle(tin_gm, T):
    d = gap(T, tin_gm)
    ref = oracles.phonon_density(T, d, 1.04e11, 0.0499)
    assert phonon_density_2delta(T, tin_gm) == pytest.approx(ref, rel=1e-6)


def test_phonon_density_needs_configuration(tin_gm):
    m = tin_gm.material
    gm = GapModel(Material("x", m.tc, m.n0, m.tau0, m.vs))
    with pytest.raises(ConfigurationError, match="nion"):
        phonon_density_2delta(1.0, gm)


# -- conductivity -----------------------------------------------------------------------------


def test_sigma1_vanishes_at_zero_temperature(tin_gm, al_gm):
    assert sigma1(W_TIN, 0.0, tin_gm) == 0.0
    assert sigma1(W_TIN, 0.01 * tin_gm.tc, tin_gm) < 1e-12
    assert sigma1(W_AL, 0.01 * al_gm.tc, al_gm) < 1e-12


def test_sigma1_increasing(tin_gm):
    T = np.linspace(0.05, 0.5, 40) * tin_gm.tc
    s = [sigma1(W_TIN, t, tin_gm) for t in T]
    assert all(a < b for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("T", [0.849, 0.5, 1.5])
def test_sigma1_matches_trapezoid_oracle(tin_gm, T):
    assert sigma1(W_TIN, T, tin_gm) == pytest.approx(oracles.sigma1(4.74e9, T, 5.3), rel=1e-6)


def test_sigma1_al_oracle(al_gm):
    assert sigma1(W_AL, 0.217, al_gm) == pytest.approx(oracles.sigma1(5.25e9, 0.217, 1.2), rel=1e-6)


def test_sigma2_low_temperature_asymptote(tin_gm, al_gm):
    for w, gm in ((W_TIN, tin_gm), (W_AL, al_gm)):
        target = math.pi * gm.delta0 / (HBAR * w)
        assert sigma2(w, 0.01 * gm.tc, gm) == pytest.approx(target, rel=0.05)
    assert math.pi * al_gm.delta0 / (HBAR * W_AL) == pytest.approx(math.pi * 182 / 21.7, rel=5e-3)


def test_sigma2_decreasing(tin_gm):
    T = np.linspace(0.05, 0.7, 40) * tin_gm.tc
    s = [sigma2(W_TIN, t, tin_gm) for t in T]
    assert all(a > b for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("T", [0.849, 2.0, 3.5])
def test_sigma2_matches_trapezoid_oracle(tin_gm, T):
    assert sigma2(W_TIN, T, tin_gm) == pytest.approx(oracles.sigma2(4.74e9, T, 5.3), rel=1e-6)


@pytest.mark.parametrize("frac", [0.05, 0.16, 0.4, 0.8])
def test_conductivity_stable_under_tolerance_halving(tin_gm, frac):
    T = frac * tin_gm.tc
    for fn in (sigma1, sigma2):
        a = fn(W_TIN, T, tin_gm, rtol=1e-8)
        b = fn(W_TIN, T, tin_gm, rtol=5e-9)
        if a == 0.0:
            assert b == 0.0
        else:
            assert abs(a / b - 1) < 1e-6


def test_pair_breaking_regime_rejected(tin_gm):
    w = 2.1 * tin_gm.delta0 / HBAR
    for fn in (sigma1, sigma2):
        with pytest.raises(DomainError, match="pair-breaking regime not modeled"):
            fn(w, 0.5, tin_gm)
    # near Tc the gap closes below hbar*omega even at microwave frequencies
    with pytest.raises(DomainError, match="pair-breaking"):
        sigma1(W_TIN, tin_gm.tc * (1 - 1e-7), tin_gm)


def test_loss_ratio_vanishes_when_cold(tin_gm):
    r = [sigma1(W_TIN, f * tin_gm.tc, tin_gm) / sigma2(W_TIN, f * tin_gm.tc, tin_gm) for f in (0.2, 0.1, 0.05, 0.02)]
    assert all(a > b for a, b in zip(r, r[1:]))
    assert r[-1] < 1e-20
