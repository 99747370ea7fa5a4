"""Physical constants in the unit system used throughout the package.

Energies are in eV, lengths in micrometres for densities, times in seconds.
"""

K_B = 8.617333262e-5  # eV / K
HBAR = 6.582119569e-16  # eV s
HBAR_J = 1.054571817e-34  # J s

# Delta(0) = BCS_RATIO * k_B * Tc
BCS_RATIO = 1.76
