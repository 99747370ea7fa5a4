"""Loss modelling for superconducting resonators: TLS saturation plus non-equilibrium quasiparticles."""

__version__ = "0.1.0"

from .bcs import GapModel, fermi, gap, pair_density, phonon_density_2delta, qp_density, sigma1, sigma2
from .errors import (
    ConfigurationError,
    DomainError,
    ExtractionError,
    FitError,
    NumericalError,
    PoolingError,
    QlossError,
)
from .loss import LossBudget, QpLossParams, QpTable, TlsParams, qp_loss, tls_loss, total_inverse_qi
from .materials import (
    FilmGeometry,
    FilmRates,
    Material,
    MaterialEntry,
    effective_recombination,
    get_material,
    load_materials,
    phonon_escape_rate,
    recombination_rate,
)
from .pipeline import (
    FitConfig,
    LossModel,
    ModelFit,
    PowerSeries,
    TlsOnlyFit,
    decompose_losses,
    fit_full_model,
    fit_model_grid,
    fit_power_series,
    interpolate_qi,
)
from .qpdyn import DensityState, DriveParams, effective_temperature, evolve_densities, steady_state_nqp
from .s21 import (
    ExtractionResult,
    S21Params,
    Spectrum,
    extract_resonator_params,
    model_s21,
    model_s21_inv,
    photon_number,
    pool_qc,
    synth_spectrum,
)
