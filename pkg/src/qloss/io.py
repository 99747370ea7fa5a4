"""File formats: spectrum CSVs, dataset manifests and JSON result bundles.

Units in files are fixed: Hz, K, dBm at the chip, um^-3.  Bundles are written
with sorted keys and no timestamps so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .errors import ConfigurationError
from .s21 import ExtractionResult, PARAM_NAMES, S21Params, Spectrum

SCHEMA_VERSION = 1
SPECTRUM_HEADER = ("frequency_hz", "s21_real", "s21_imag")


# -- spectra --------------------------------------------------------------------


def write_spectrum_csv(path, sp: Spectrum) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_HEADER)
    for f, z in zip(sp.freqs, sp.s21):
        w.writerow((repr(float(f)), repr(float(z.real)), repr(float(z.imag))))
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def read_spectrum_csv(path, t_bath: float = math.nan, p_in_dbm: float = math.nan) -> Spectrum:
    """Parse a spectrum file; raises ValueError on a malformed file."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SPECTRUM_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SPECTRUM_HEADER)}")
        rows = [r for r in reader if r]
    try:
        arr = np.array(rows, dtype=float)
    except ValueError:
        raise ValueError(f"{path}: non-numeric values") from None
    if arr.ndim != 2 or arr.shape[1] != 3 or not np.all(np.isfinite(arr)):
        raise ValueError(f"{path}: expected three finite numeric columns")
    return Spectrum(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], t_bath=t_bath, p_in_dbm=p_in_dbm)


# -- manifest -------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    file: str  # relative to the manifest directory
    temperature_K: float
    power_dBm_at_chip: float


@dataclass
class DatasetManifest:
    resonator_id: str
    material: str
    geometry: dict  # thickness_m, eta, ls_over_lm
    entries: list
    f_r_hz: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries = [e if isinstance(e, ManifestEntry) else ManifestEntry(**e) for e in self.entries]
        seen = set()
        for e in self.entries:
            key = (float(e.temperature_K), float(e.power_dBm_at_chip))
            if key in seen:
                raise ValueError(f"duplicate (temperature, power) entry {key}")
            seen.add(key)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "resonator_id": self.resonator_id,
            "material": self.material,
            "geometry": dict(self.geometry),
            "f_r_hz": self.f_r_hz,
            "entries": [
                {"file": e.file, "temperature_K": e.temperature_K, "power_dBm_at_chip": e.power_dBm_at_chip}
                for e in self.entries
            ],
            "extra": dict(self.extra),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DatasetManifest":
        try:
            return cls(
                resonator_id=str(d["resonator_id"]),
                material=str(d["material"]),
                geometry=dict(d.get("geometry") or {}),
                entries=list(d["entries"]),
                f_r_hz=d.get("f_r_hz"),
                extra=dict(d.get("extra") or {}),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed manifest: {exc}") from None


def write_manifest(path, m: DatasetManifest) -> None:
    write_json(path, m.to_dict())


def read_manifest(path) -> DatasetManifest:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: {exc}") from None
    return DatasetManifest.from_dict(data)


# -- JSON -----------------------------------------------------------------------


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, Mapping):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(data) -> str:
    return json.dumps(_clean(data), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data), encoding="utf-8", newline="\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# -- extraction results ---------------------------------------------------------------


def extraction_to_dict(r: ExtractionResult) -> dict:
    return {
        "params": r.params.as_dict(),
        "uncertainties": dict(r.uncertainties),
        "residual_rms": r.residual_rms,
        "n_photon": r.n_photon,
        "temperature_K": r.t_bath,
        "power_dBm_at_chip": r.p_in_dbm,
        "fixed_qc": r.fixed_qc,
        "diagnostics": dict(r.diagnostics),
    }


def extraction_from_dict(d: Mapping[str, Any]) -> ExtractionResult:
    p = d["params"]
    return ExtractionResult(
        params=S21Params(**{k: float(p[k]) for k in PARAM_NAMES}),
        uncertainties={k: float(v) for k, v in d.get("uncertainties", {}).items()},
        residual_rms=float(d["residual_rms"]),
        n_photon=float(d["n_photon"]),
        t_bath=float(d["temperature_K"]),
        p_in_dbm=float(d["power_dBm_at_chip"]),
        fixed_qc=None if d.get("fixed_qc") is None else float(d["fixed_qc"]),
        diagnostics=dict(d.get("diagnostics", {})),
    )


# -- config -----------------------------------------------------------------------


def load_config(path: Optional[str]) -> tuple[dict, str]:
    """Load a YAML/JSON run config; returns (mapping, sha256 of the canonical form).

    With no path, ``QLOSS_CONFIG`` is consulted; with neither, an empty config.
    """
    import yaml

    path = path or os.environ.get("QLOSS_CONFIG") or None
    if path is None:
        data: Any = {}
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, Mapping):
        raise ConfigurationError("config must be a mapping")
    data = dict(data)
    return data, sha256_text(dumps(data))
