# %% [markdown]
# # Superconductor kernels
#
# Gap, thermal quasiparticle density, Mattis-Bardeen conductivity and the
# rate-equation steady state for the two bundled films.

# %%
import math

import numpy as np

from qloss.bcs import GapModel, gap, pair_density, qp_density, sigma1, sigma2
from qloss.constants import HBAR
from qloss.materials import get_material
from qloss.qpdyn import DriveParams, bath_state, effective_temperature, evolve_densities, steady_state_nqp

tin, al = get_material("TiN"), get_material("Al")
gm_tin, gm_al = GapModel(tin.material), GapModel(al.material)

# %% [markdown]
# ## Gap and densities

# %%
print(f"Delta_TiN(0) = {gap(0.0, gm_tin) * 1e6:.1f} ueV, Delta_Al(0) = {gap(0.0, gm_al) * 1e6:.1f} ueV")
for t in (0.2, 0.5, 0.8, 0.95):
    print(f"T/Tc = {t:4.2f}: Delta/Delta0 = {gap(t * gm_tin.tc, gm_tin) / gm_tin.delta0:.4f}")

for name, gm, t in (("TiN", gm_tin, 0.849), ("Al", gm_al, 0.217)):
    n = qp_density(t, gm)
    print(f"{name}: n_qp({t * 1e3:.0f} mK) = {n:.0f} um^-3, n_qp/n_cp = {n / pair_density(gm):.3g}")

# %% [markdown]
# Inverting the density gives back the temperature.

# %%
for t in np.linspace(0.1, 0.9, 5) * gm_tin.tc:
    print(f"{t:.3f} K -> {effective_temperature(qp_density(t, gm_tin), gm_tin):.6f} K")

# %% [markdown]
# ## Conductivity
#
# At low temperature sigma2/sigma_n tends to pi Delta / hbar omega and sigma1 vanishes.

# %%
w = 2 * math.pi * 4.74e9
print("asymptote:", math.pi * gm_tin.delta0 / (HBAR * w))
for frac in (0.01, 0.1, 0.16, 0.2):
    t = frac * gm_tin.tc
    print(f"T = {t:.3f} K  sigma1 = {sigma1(w, t, gm_tin):.3e}  sigma2 = {sigma2(w, t, gm_tin):.3f}")

# %% [markdown]
# ## Steady state against the rate equations

# %%
rates = tin.rates()
print(f"R = {rates.recomb_r:.1f}, r_eff = {rates.eff_recomb_r:.1f} um^3/s")
d = DriveParams(2.4e6, 1e3, 0.3)
n_ss = steady_state_nqp(d, rates, gm_tin)
out = evolve_densities(bath_state(d.t_bath, rates, gm_tin), d, rates, gm_tin, 100 / (rates.eff_recomb_r * n_ss + d.s_rate))
print(f"closed form {n_ss:.4f}, integrated {out.nqp:.4f} um^-3 -> T_qp = {effective_temperature(n_ss, gm_tin) * 1e3:.1f} mK")
