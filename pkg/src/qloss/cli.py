"""``qloss`` command line: simulate, extract, fit, plotdata.

Exit codes: 0 success, 1 usage, 2 data error, 3 fit non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConfigurationError, FitError, QlossError
from .io import (
    SCHEMA_VERSION,
    DatasetManifest,
    ManifestEntry,
    dumps,
    extraction_from_dict,
    extraction_to_dict,
    load_config,
    read_json,
    read_manifest,
    read_spectrum_csv,
    sha256_file,
    write_json,
    write_manifest,
    write_spectrum_csv,
)
from .loss import TlsParams
from .materials import entry_to_mapping, get_material, load_materials, parse_material
from .pipeline import (
    FitConfig,
    LossModel,
    ModelFit,
    PowerSeries,
    decompose_losses,
    fit_full_model,
    fit_power_series,
)
from .s21 import extract_resonator_params, pool_qc
from .scenarios import get_scenario, spectra_dataset

log = logging.getLogger("qloss")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT = 0, 1, 2, 3
EXTRACTION_FILE = "extraction.json"
BUNDLE_FILE = "bundle.json"
# floor on the relative Q_i uncertainty used as a fit weight
MIN_REL_QI_ERR = 1e-3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON run config (fallback: $QLOSS_CONFIG)")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=None, help="seed for synthesis and multi-start")
    common.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
    common.add_argument("--tls-only", action="store_true", help="fit: stop after the per-temperature TLS-only fits")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="qloss", description="Resonator loss analysis: TLS and quasiparticle model fits.")
    p.add_argument("--version", action="version", version=f"qloss {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", parents=[common], help="write a synthetic dataset")
    sim.add_argument("--scenario", default=None, help="tin-like (default) or al-like")
    sim.add_argument("--noise", type=float, default=None, help="noise per quadrature relative to |S21| off resonance")
    sim.add_argument("--points", type=int, default=None, help="frequency points per spectrum")

    ext = sub.add_parser("extract", parents=[common], help="fit every spectrum of a manifest")
    ext.add_argument("--manifest", default=None, help="dataset manifest (default: OUT/manifest.json)")

    fit = sub.add_parser("fit", parents=[common], help="TLS-only and joint model fits")
    fit.add_argument("--input", default=None, help=f"extraction results (default: OUT/{EXTRACTION_FILE})")

    plot = sub.add_parser("plotdata", parents=[common], help="write plot-ready CSV tables")
    plot.add_argument("--input", default=None, help=f"result bundle (default: OUT/{BUNDLE_FILE})")
    return p


# -- helpers ------------------------------------------------------------------------


def _registry(cfg: dict):
    return load_materials(cfg["materials"]) if cfg.get("materials") else load_materials()


def _entry_for(cfg: dict, name: str, geometry: Optional[dict] = None):
    entry = get_material(name, _registry(cfg))
    if geometry:
        mapping = entry_to_mapping(entry)
        mapping.update({k: float(v) for k, v in geometry.items()})
        entry = parse_material(name, mapping)
    return entry


def _provenance(command: str, config_sha: str, seeds: dict, inputs: Optional[dict] = None) -> dict:
    return {
        "command": command,
        "tool": "qloss",
        "tool_version": __version__,
        "config_sha256": config_sha,
        "seeds": seeds,
        "inputs_sha256": inputs or {},
    }


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


# -- simulate ---------------------------------------------------------------------------


def cmd_simulate(args, cfg: dict, cfg_sha: str) -> int:
    sim_cfg = dict(cfg.get("simulate") or {})
    name = args.scenario or sim_cfg.get("scenario", "tin-like")
    try:
        scn = get_scenario(name)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    changes = {}
    if cfg.get("materials"):
        changes["entry_override"] = get_material(scn.material, _registry(cfg))
    if "t_baths" in sim_cfg:
        changes["t_baths"] = tuple(float(t) for t in sim_cfg["t_baths"])
    if "p_in_dbm" in sim_cfg:
        changes["p_in_dbm"] = tuple(float(p) for p in sim_cfg["p_in_dbm"])
    for key in ("f_r", "q_c", "i_ext", "q_a"):
        if key in sim_cfg:
            changes[key] = float(sim_cfg[key])
    if changes:
        scn = scn.with_(**changes)
    noise = args.noise if args.noise is not None else float(sim_cfg.get("noise", 0.01))
    if noise < 0:
        raise ConfigurationError("--noise must be non-negative")
    seed = args.seed if args.seed is not None else int(sim_cfg.get("seed", 0))
    n_points = args.points or int(sim_cfg.get("points", 401))

    out = _out_dir(args)
    spec_dir = out / "spectra"
    spec_dir.mkdir(exist_ok=True)
    data = spectra_dataset(scn, noise_sigma=noise, seed=seed, n_points=n_points)
    entries, truth = [], []
    for sp, params, n in data:
        fname = f"spectra/T{sp.t_bath * 1e3:07.2f}mK_P{sp.p_in_dbm:+07.2f}dBm.csv"
        write_spectrum_csv(out / fname, sp)
        entries.append(ManifestEntry(fname, float(sp.t_bath), float(sp.p_in_dbm)))
        truth.append({"file": fname, "q_i": params.q_i, "n_photon": n})
    entry = scn.entry()
    manifest = DatasetManifest(
        resonator_id=f"{scn.name}-synthetic",
        material=scn.material,
        geometry={
            "thickness_m": entry.geometry.thickness,
            "eta": entry.geometry.eta,
            "ls_over_lm": entry.geometry.ls_over_lm,
        },
        entries=entries,
        f_r_hz=scn.f_r,
        extra={
            "generator": {
                "scenario": scn.name,
                "seed": seed,
                "noise_sigma_rel": noise,
                "q_c": scn.q_c,
                "q_a": scn.q_a,
                "i_ext_per_um3_s": scn.i_ext,
                "tls": {"q_tls0": scn.tls.q_tls0, "n_c": scn.tls.n_c, "alpha": scn.tls.alpha},
                "tool_version": __version__,
            },
            "truth": truth,
        },
    )
    write_manifest(out / "manifest.json", manifest)
    log.info("wrote %d spectra and %s", len(entries), out / "manifest.json")
    return EXIT_OK


# -- extract ----------------------------------------------------------------------------


def _extract_one(path: Path, entry: ManifestEntry, fixed_qc=None):
    sp = read_spectrum_csv(path, t_bath=entry.temperature_K, p_in_dbm=entry.power_dBm_at_chip)
    return sp, extract_resonator_params(sp, fixed_qc=fixed_qc)


def _safe(fn, *a, **kw):
    try:
        return fn(*a, **kw), None
    except (QlossError, ValueError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def cmd_extract(args, cfg: dict, cfg_sha: str) -> int:
    ext_cfg = dict(cfg.get("extract") or {})
    out = _out_dir(args)
    manifest_path = Path(args.manifest or cfg.get("manifest") or out / "manifest.json")
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    entry = _entry_for(cfg, manifest.material, manifest.geometry)
    jobs = max(1, int(args.jobs))

    def first_pass(e):
        return _safe(_extract_one, base / e.file, e)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        first = list(pool.map(first_pass, manifest.entries))
    n_fail = sum(1 for res, err in first if err is not None)
    for e, (res, err) in zip(manifest.entries, first):
        if err:
            log.warning("extraction failed for %s: %s", e.file, err)
    if n_fail > 0.5 * len(first):
        raise _DataFailure(f"{n_fail} of {len(first)} extractions failed")

    ok = [i for i, (res, err) in enumerate(first) if err is None]
    results = [first[i][0][1] for i in ok]
    qc_pool = pool_qc(
        results,
        entry.material.tc,
        min_photons=float(ext_cfg.get("min_photons", 1e3)),
        max_t_frac=float(ext_cfg.get("max_t_frac", 0.1)),
    )

    def second_pass(i):
        sp = first[i][0][0]
        return _safe(extract_resonator_params, sp, fixed_qc=qc_pool.q_c0)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        second = dict(zip(ok, pool.map(second_pass, ok)))

    records = []
    for i, e in enumerate(manifest.entries):
        rec = {"file": e.file, "temperature_K": e.temperature_K, "power_dBm_at_chip": e.power_dBm_at_chip}
        res, err = first[i]
        if err is not None:
            rec.update(status="failed", error=err)
        else:
            rec["free"] = extraction_to_dict(res[1])
            pooled, err2 = second[i]
            if err2 is not None:
                rec.update(status="failed", error=f"pooled refit: {err2}")
            else:
                rec.update(status="ok", pooled=extraction_to_dict(pooled))
        records.append(rec)

    free_qc = np.array([results[k].params.q_c for k in range(len(results))])
    members_qc = free_qc[list(qc_pool.members)]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "resonator_id": manifest.resonator_id,
        "material": manifest.material,
        "material_entry": entry_to_mapping(entry),
        "f_r_hz": manifest.f_r_hz,
        "pool": {
            "q_c0": qc_pool.q_c0,
            "n_members": len(qc_pool.members),
            "members": [manifest.entries[ok[k]].file for k in qc_pool.members],
            "window_rel_std": float(np.std(members_qc) / np.mean(members_qc)),
            "min_photons": float(ext_cfg.get("min_photons", 1e3)),
            "max_t_frac": float(ext_cfg.get("max_t_frac", 0.1)),
        },
        "n_failed": sum(1 for r in records if r["status"] != "ok"),
        "results": records,
        "provenance": _provenance(
            "extract", cfg_sha, {}, {"manifest": sha256_file(manifest_path)}
        ),
    }
    write_json(out / EXTRACTION_FILE, doc)
    log.info("extracted %d/%d spectra, pooled Q_c = %.6g", len(ok), len(first), qc_pool.q_c0)
    return EXIT_OK


class _DataFailure(QlossError):
    pass


# -- fit --------------------------------------------------------------------------------


def power_series_from_extraction(doc: dict) -> tuple[dict, list]:
    """Group pooled extraction results into per-temperature power series."""
    by_t: dict[float, list] = {}
    for rec in doc["results"]:
        if rec.get("status") != "ok":
            continue
        r = extraction_from_dict(rec["pooled"])
        if not (r.n_photon > 0 and math.isfinite(r.n_photon)):
            continue
        err = max(r.uncertainties.get("q_i", 0.0), MIN_REL_QI_ERR * r.params.q_i)
        by_t.setdefault(float(rec["temperature_K"]), []).append((r.n_photon, r.params.q_i, err))
    series, skipped = {}, []
    for t in sorted(by_t):
        pts = np.array(by_t[t])
        try:
            series[t] = PowerSeries(t, pts[:, 0], pts[:, 1], pts[:, 2])
        except ValueError as exc:
            skipped.append({"temperature_K": t, "reason": str(exc)})
    return series, skipped


def tls_fit_to_dict(f) -> dict:
    return {
        "t_bath_K": f.t_bath,
        "q_a": f.q_a,
        "q_tls": f.q_tls,
        "n_c": f.n_c,
        "alpha": f.alpha,
        "residual_rms": f.residual_rms,
        "uncertainties": f.uncertainties,
        "no_tls_signature": f.no_tls_signature,
        "n_photon_range": list(f.n_range),
    }


def model_fit_to_dict(fit: ModelFit) -> dict:
    return {
        "tls": {"q_tls0": fit.tls.q_tls0, "n_c": fit.tls.n_c, "alpha": fit.tls.alpha},
        "i_ext_per_um3_s": fit.i_ext,
        "q_a": fit.q_a,
        "per_power": [
            {"n_photon": n, "s_rate_per_s": s, "kappa": k, "s_degenerate": fit.flags["s_degenerate"][n]}
            for n, (s, k) in sorted(fit.per_power.items())
        ],
        "tqp_surface": [
            {"t_bath_K": t, "n_photon": n, "t_qp_K": v} for (t, n), v in sorted(fit.tqp_surface.items())
        ],
        "data": [{"t_bath_K": t, "n_photon": n, "q_i": v} for (t, n), v in sorted(fit.data.items())],
        "masked": [list(m) for m in fit.masked],
        "goodness_r2": fit.goodness,
        "residual_rms": fit.residual_rms,
        "uncertainties": fit.uncertainties,
        "t_baths_K": list(fit.t_baths),
        "np_grid": list(fit.np_grid),
        "cost": fit.flags["cost"],
        "nfev": fit.flags["nfev"],
    }


def model_fit_from_bundle(bundle: dict) -> ModelFit:
    """Rebuild a ModelFit (with its forward model) from a bundle."""
    mf = bundle.get("model_fit")
    if not mf:
        raise _DataFailure("bundle has no model fit (was it produced with --tls-only?)")
    res = bundle["resonator"]
    entry = parse_material(res["material"], res["material_entry"])
    model = LossModel(entry, res["f_r_hz"], mf["i_ext_per_um3_s"], q_a=mf["q_a"], ls_over_lm=res["ls_over_lm"])
    per_power = {float(p["n_photon"]): (float(p["s_rate_per_s"]), float(p["kappa"])) for p in mf["per_power"]}
    return ModelFit(
        tls=TlsParams(**mf["tls"]),
        i_ext=float(mf["i_ext_per_um3_s"]),
        q_a=float(mf["q_a"]),
        per_power=per_power,
        tqp_surface={(float(r["t_bath_K"]), float(r["n_photon"])): float(r["t_qp_K"]) for r in mf["tqp_surface"]},
        goodness=float(mf["goodness_r2"]),
        residual_rms=float(mf["residual_rms"]),
        uncertainties=mf["uncertainties"],
        t_baths=tuple(float(t) for t in mf["t_baths_K"]),
        np_grid=tuple(float(n) for n in mf["np_grid"]),
        data={(float(r["t_bath_K"]), float(r["n_photon"])): float(r["q_i"]) for r in mf["data"]},
        masked=tuple(tuple(m) for m in mf["masked"]),
        flags={"s_degenerate": {float(p["n_photon"]): bool(p["s_degenerate"]) for p in mf["per_power"]}},
        model=model,
    )


def cmd_fit(args, cfg: dict, cfg_sha: str) -> int:
    out = _out_dir(args)
    in_path = Path(args.input or out / EXTRACTION_FILE)
    doc = read_json(in_path)
    fit_cfg_map = dict(cfg.get("fit") or {})
    if args.seed is not None:
        fit_cfg_map["seed"] = args.seed
    try:
        fcfg = FitConfig.from_mapping(fit_cfg_map)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"fit config: {exc}") from None

    series, skipped = power_series_from_extraction(doc)
    if not series:
        raise _DataFailure("no temperature has a usable power series")
    temps = sorted(series)
    with ThreadPoolExecutor(max_workers=max(1, int(args.jobs))) as pool:
        tls_fits = dict(zip(temps, pool.map(lambda t: fit_power_series(series[t], fcfg.n_starts), temps)))

    entry = parse_material(doc["material"], doc["material_entry"])
    ok = [r["pooled"]["params"]["f0"] for r in doc["results"] if r.get("status") == "ok"]
    f_r = float(cfg.get("resonator", {}).get("f_r_hz") or np.median(ok))
    ls_over_lm = float(cfg.get("resonator", {}).get("ls_over_lm") or entry.geometry.ls_over_lm)

    bundle = {
        "schema_version": SCHEMA_VERSION,
        "resonator": {
            "id": doc["resonator_id"],
            "material": doc["material"],
            "material_entry": entry_to_mapping(entry),
            "f_r_hz": f_r,
            "ls_over_lm": ls_over_lm,
            "q_c0": doc["pool"]["q_c0"],
        },
        "extraction": {"pool": doc["pool"], "results": doc["results"], "n_failed": doc["n_failed"]},
        "power_series_skipped": skipped,
        "tls_only": [tls_fit_to_dict(tls_fits[t]) for t in temps],
        "fit_config": {
            "q_a": fcfg.q_a,
            "i_ext_per_um3_s": fcfg.i_ext,
            "np_grid": list(fcfg.np_grid),
            "n_starts": fcfg.n_starts,
            "seed": fcfg.seed,
            "residual_ceiling": fcfg.residual_ceiling,
            "mask_t_below": fcfg.mask_t_below,
            "mask_np_below": fcfg.mask_np_below,
        },
        "tls_only_run": bool(args.tls_only),
        "model_fit": None,
        "decomposition": [],
        "provenance": _provenance(
            "fit --tls-only" if args.tls_only else "fit", cfg_sha, {"fit_seed": fcfg.seed},
            {"extraction": sha256_file(in_path)},
        ),
    }
    if not args.tls_only:
        model = LossModel(entry, f_r, fcfg.i_ext, q_a=fcfg.q_a, ls_over_lm=ls_over_lm)
        try:
            fit = fit_full_model(series, model, fcfg)
        except FitError as exc:
            bundle["fit_error"] = {"message": str(exc), "diagnostics": exc.diagnostics}
            write_json(out / BUNDLE_FILE, bundle)
            raise
        bundle["model_fit"] = model_fit_to_dict(fit)
        bundle["decomposition"] = decompose_losses(fit)
        log.info("model fit R^2 = %.6f, residual %.3g", fit.goodness, fit.residual_rms)
    write_json(out / BUNDLE_FILE, bundle)
    return EXIT_OK


# -- plotdata ---------------------------------------------------------------------------

DECOMP_COLUMNS = (
    "t_bath_K", "n_photon", "q_i_model", "inv_q_total", "inv_q_a", "inv_q_tls", "inv_q_qp",
    "q_a", "q_tls", "q_qp", "t_qp_K",
)


def cmd_plotdata(args, cfg: dict, cfg_sha: str) -> int:
    out = _out_dir(args)
    bundle = read_json(Path(args.input or out / BUNDLE_FILE))
    fit = model_fit_from_bundle(bundle)
    n_dense = int((cfg.get("plotdata") or {}).get("t_points", 60))
    t_lo, t_hi = min(fit.t_baths), max(fit.t_baths)
    t_dense = np.linspace(t_lo, t_hi, n_dense)

    rows = decompose_losses(fit, (t_dense, fit.np_grid))
    _write_csv(out / "panel_abc_decomposition.csv", DECOMP_COLUMNS, [[r[c] for c in DECOMP_COLUMNS] for r in rows])

    n_dense_np = np.logspace(math.log10(min(fit.np_grid)), math.log10(max(fit.np_grid)), 61)
    d_rows = []
    for t in fit.t_baths:
        for n in fit.np_grid:
            d_rows.append([t, n, fit.data[(t, n)], "interpolated"])
        for r in decompose_losses(fit, ((t,), n_dense_np)):
            d_rows.append([t, r["n_photon"], r["q_i_model"], "model"])
    for rec in bundle["extraction"]["results"]:
        if rec.get("status") == "ok":
            p = rec["pooled"]
            d_rows.append([float(p["temperature_K"]), float(p["n_photon"]), float(p["params"]["q_i"]), "measured"])
    _write_csv(out / "panel_d_qi_vs_photons.csv", ("t_bath_K", "n_photon", "q_i", "kind"), d_rows)

    mf = bundle["model_fit"]
    _write_csv(
        out / "panel_e_s_kappa.csv",
        ("n_photon", "s_rate_per_s", "kappa", "s_degenerate"),
        [[float(p["n_photon"]), float(p["s_rate_per_s"]), float(p["kappa"]), int(p["s_degenerate"])] for p in mf["per_power"]],
    )
    f_rows = [
        [r["t_bath_K"], r["n_photon"], r["t_qp_K"]] for r in sorted(rows, key=lambda r: (r["n_photon"], r["t_bath_K"]))
    ]
    _write_csv(out / "panel_f_tqp.csv", ("t_bath_K", "n_photon", "t_qp_K"), f_rows)
    log.info("wrote plot tables to %s", out)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "extract": cmd_extract, "fit": cmd_fit, "plotdata": cmd_plotdata}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"qloss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.jobs < 1:
        print("qloss: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg, cfg_sha = load_config(args.config)
        return COMMANDS[args.command](args, cfg, cfg_sha)
    except FitError as exc:
        print(f"qloss: fit did not converge: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(f"qloss: diagnostics: {dumps(exc.diagnostics).strip()}", file=sys.stderr)
        return EXIT_FIT
    except (QlossError, ValueError, KeyError, OSError) as exc:
        print(f"qloss: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
