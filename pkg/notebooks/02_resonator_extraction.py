# %% [markdown]
# # Extracting resonator parameters from S21
#
# Synthesise a notch-type spectrum with cable delay and an impedance-mismatch
# angle, recover the seven parameters, then pool the coupling Q across
# spectra and refit.

# %%
import math

import numpy as np

from qloss.s21 import (
    S21Params,
    dbm_to_watts,
    extract_resonator_params,
    photon_number,
    pool_qc,
    refit_with_pool,
    resonance_grid,
    synth_spectrum,
)

true = S21Params(4.74e9, 4e5, 1.49e5, phi=0.05, amp=1e-3, global_phase=0.4, path_phase_rate=2 * math.pi * 40e-9)
f = resonance_grid(true.f0, true.q_i, true.q_c)

# %% [markdown]
# ## Noiseless and noisy recovery

# %%
r = extract_resonator_params(synth_spectrum(true, f))
for k, v in r.params.as_dict().items():
    print(f"{k:16s} {v:.9g}  (true {getattr(true, k):.9g})")

# %%
errs = []
for seed in range(50):
    r = extract_resonator_params(synth_spectrum(true, f, 0.01 * true.amp, seed=seed))
    errs.append((r.params.q_i / true.q_i - 1, r.params.q_c / true.q_c - 1))
errs = np.abs(errs)
print("median |dQi| = {:.2%}, median |dQc| = {:.2%}".format(*np.median(errs, axis=0)))

# %% [markdown]
# ## Photon number
#
# The drive power sets the intracavity photon number through Q_i^2 / Q_c.

# %%
p = float(dbm_to_watts(-145.0))
print(f"-145 dBm = {p:.3g} W -> n = {photon_number(p, true.f0, true.q_i, true.q_c):.1f}")

# %% [markdown]
# ## Pooling Q_c
#
# High-power, cold spectra define the pooled Q_c; every spectrum is refit with it fixed.

# %%
spectra = [synth_spectrum(true, f, 0.01 * true.amp, seed=s, t_bath=0.04, p_in_dbm=-120.0) for s in range(8)]
free = [extract_resonator_params(sp) for sp in spectra]
pool = pool_qc(free, t_c=5.3)
fixed = refit_with_pool(spectra, pool)
print(f"free Q_c scatter {np.std([x.params.q_c for x in free]):.0f}, pooled Q_c0 = {pool.q_c0:.0f}")
print("refit Q_i:", [round(x.params.q_i) for x in fixed])
