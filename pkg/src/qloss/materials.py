"""Superconductor material constants and the rate constants derived from them.

Densities are per cubic micrometre, energies in eV, rates per second.  A
material registry is loaded from a nested key/value config (YAML or JSON);
the built-in defaults cover the TiN and Al films the model was developed for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import yaml

from .constants import BCS_RATIO, K_B
from .errors import ConfigurationError


@dataclass(frozen=True)
class Material:
    name: str
    tc: float  # K
    n0: float  # single-spin DOS at the Fermi level, eV^-1 um^-3
    tau0: float  # electron-phonon time, s
    vs: float  # speed of sound, m/s
    nion: Optional[float] = None  # um^-3
    debye_energy: Optional[float] = None  # eV

    def __post_init__(self):
        for attr in ("tc", "n0", "tau0", "vs"):
            _require_positive(attr, getattr(self, attr))
        for attr in ("nion", "debye_energy"):
            value = getattr(self, attr)
            if value is not None:
                _require_positive(attr, value)

    @property
    def delta0(self) -> float:
        """Zero-temperature gap in eV."""
        return BCS_RATIO * K_B * self.tc


@dataclass(frozen=True)
class FilmGeometry:
    thickness: float  # m
    eta: float  # phonon transmission probability into the substrate
    ls_over_lm: float

    def __post_init__(self):
        _require_positive("thickness", self.thickness)
        _require_positive("ls_over_lm", self.ls_over_lm)
        if not 0.0 < self.eta <= 1.0:
            raise ConfigurationError(f"eta must be in (0, 1], got {self.eta!r}")


@dataclass(frozen=True)
class FilmRates:
    recomb_r: float  # R, um^3/s
    pair_break_beta: float  # beta, 1/s
    escape_gamma: float  # gamma, 1/s
    eff_recomb_r: float = field(init=False)  # r, um^3/s

    def __post_init__(self):
        for attr in ("recomb_r", "pair_break_beta", "escape_gamma"):
            _require_positive(attr, getattr(self, attr))
        object.__setattr__(
            self,
            "eff_recomb_r",
            effective_recombination(self.recomb_r, self.pair_break_beta, self.escape_gamma),
        )


@dataclass(frozen=True)
class MaterialEntry:
    """One registry entry: the material, its film, and optional tabulated rates."""

    material: Material
    geometry: FilmGeometry
    beta: Optional[float] = None
    gamma: Optional[float] = None
    recomb_r: Optional[float] = None

    def rates(self) -> FilmRates:
        """Rates used for fitting: tabulated overrides first, formulas otherwise.

        beta has no closed form here, so it must be configured.
        """
        if self.beta is None:
            raise ConfigurationError(
                f"{self.material.name}: beta_per_s must be configured"
            )
        R = self.recomb_r if self.recomb_r is not None else recombination_rate(self.material)
        gamma = (
            self.gamma
            if self.gamma is not None
            else phonon_escape_rate(self.material, self.geometry)
        )
        return FilmRates(R, self.beta, gamma)

    def diagnostics(self) -> dict:
        """Compare tabulated rates with their closed-form approximations."""
        R_formula = recombination_rate(self.material)
        gamma_formula = phonon_escape_rate(self.material, self.geometry)
        out = {
            "R_formula_um3_per_s": R_formula,
            "gamma_formula_per_s": gamma_formula,
        }
        if self.recomb_r is not None:
            out["R_table_um3_per_s"] = self.recomb_r
            out["R_table_over_formula"] = self.recomb_r / R_formula
        if self.gamma is not None:
            out["gamma_table_per_s"] = self.gamma
            out["gamma_table_over_formula"] = self.gamma / gamma_formula
        return out


def _require_positive(name, value):
    try:
        ok = float(value) > 0.0 and math.isfinite(float(value))
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ConfigurationError(f"{name} must be positive, got {value!r}")


def recombination_rate(m: Material) -> float:
    """Low-temperature recombination constant R in um^3/s.

    R = 2 (Delta0 / k_B Tc)^3 / (N(0) Delta0 tau0)
    """
    ratio = m.delta0 / (K_B * m.tc)
    return 2.0 * ratio**3 / (m.n0 * m.delta0 * m.tau0)


def phonon_escape_rate(m: Material, g: FilmGeometry) -> float:
    """Pair-breaking phonon escape rate eta * v_s / (4 d) in 1/s."""
    return g.eta * m.vs / (4.0 * g.thickness)


def effective_recombination(R: float, beta: float, gamma: float) -> float:
    """Effective recombination r = R / (1 + beta / 2 gamma) including phonon reabsorption."""
    return R / (1.0 + beta / (2.0 * gamma))


# Keys of one material entry in the config file.
_MATERIAL_KEYS = {
    "tc_K": "tc",
    "n0_per_eV_um3": "n0",
    "tau0_s": "tau0",
    "vs_m_per_s": "vs",
    "nion_per_um3": "nion",
    "debye_energy_eV": "debye_energy",
}
_GEOMETRY_KEYS = {"thickness_m": "thickness", "eta": "eta", "ls_over_lm": "ls_over_lm"}
_OVERRIDE_KEYS = {"beta_per_s": "beta", "gamma_per_s": "gamma", "R_um3_per_s": "recomb_r"}
_REQUIRED = ("tc_K", "n0_per_eV_um3", "tau0_s", "vs_m_per_s", "thickness_m", "eta", "ls_over_lm")

DEFAULT_MATERIALS: dict[str, dict[str, Any]] = {
    "TiN": {
        "tc_K": 5.3,
        "n0_per_eV_um3": 2.96e10,
        "tau0_s": 5.5e-9,
        "vs_m_per_s": 3.31e3,
        "nion_per_um3": 1.04e11,
        "debye_energy_eV": 0.0499,
        "thickness_m": 100e-9,
        "eta": 0.301,
        "ls_over_lm": 0.3,
        "beta_per_s": 2.47e9,
        "gamma_per_s": 2.49e9,
        "R_um3_per_s": 83.3,
    },
    "Al": {
        "tc_K": 1.2,
        "n0_per_eV_um3": 1.72e10,
        "tau0_s": 438e-9,
        "vs_m_per_s": 4.43e3,
        "nion_per_um3": 6.02e10,
        "debye_energy_eV": 0.0369,
        "thickness_m": 100e-9,
        "eta": 0.497,
        "ls_over_lm": 0.02,
        "beta_per_s": 4.34e9,
        "gamma_per_s": 5.50e9,
        "R_um3_per_s": 31.6,
    },
}


def parse_material(name: str, entry: Mapping[str, Any]) -> MaterialEntry:
    if not isinstance(entry, Mapping):
        raise ConfigurationError(f"material {name!r}: expected a mapping")
    missing = [k for k in _REQUIRED if entry.get(k) is None]
    if missing:
        raise ConfigurationError(f"material {name!r}: missing {', '.join(missing)}")
    unknown = set(entry) - set(_MATERIAL_KEYS) - set(_GEOMETRY_KEYS) - set(_OVERRIDE_KEYS)
    if unknown:
        raise ConfigurationError(f"material {name!r}: unknown keys {sorted(unknown)}")

    def pick(keys):
        return {attr: float(entry[k]) for k, attr in keys.items() if entry.get(k) is not None}

    try:
        material = Material(name=name, **pick(_MATERIAL_KEYS))
        geometry = FilmGeometry(**pick(_GEOMETRY_KEYS))
    except ConfigurationError as exc:
        raise ConfigurationError(f"material {name!r}: {exc}") from None
    overrides = pick(_OVERRIDE_KEYS)
    for key, value in overrides.items():
        _require_positive(key, value)
    return MaterialEntry(material, geometry, **overrides)


def entry_to_mapping(entry: MaterialEntry) -> dict[str, float]:
    """Config-file form of a registry entry (inverse of ``parse_material``)."""
    out = {}
    for keys, obj in ((_MATERIAL_KEYS, entry.material), (_GEOMETRY_KEYS, entry.geometry), (_OVERRIDE_KEYS, entry)):
        for key, attr in keys.items():
            value = getattr(obj, attr)
            if value is not None:
                out[key] = float(value)
    return out


def load_materials(config_text: str | Mapping[str, Any] | None = None) -> dict[str, MaterialEntry]:
    """Parse a material registry.

    ``config_text`` is YAML/JSON text or an already-parsed mapping, either of
    the form ``{"materials": {name: {...}}}`` or ``{name: {...}}``.  With no
    argument the built-in TiN and Al entries are returned.
    """
    if config_text is None:
        data: Any = DEFAULT_MATERIALS
    elif isinstance(config_text, str):
        try:
            data = yaml.safe_load(config_text)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"cannot parse material config: {exc}") from None
    else:
        data = config_text
    if isinstance(data, Mapping) and "materials" in data:
        data = data["materials"]
    if not isinstance(data, Mapping) or not data:
        raise ConfigurationError("material config must map names to entries")
    return {str(name): parse_material(str(name), entry) for name, entry in data.items()}


def get_material(name: str, registry: Optional[Mapping[str, MaterialEntry]] = None) -> MaterialEntry:
    registry = registry if registry is not None else load_materials()
    try:
        return registry[name]
    except KeyError:
        raise ConfigurationError(f"unknown material {name!r}") from None
