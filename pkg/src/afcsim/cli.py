"""Command-line orchestration: single runs, sweeps, persistence, manifests.

Commands: comb, metrics, store, sweep, stirap-map, ofc.  Every run
writes `manifest.json` with the fully resolved config; feeding a
manifest back via --config reproduces the run byte for byte.  Exit
codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import warnings
from copy import deepcopy

import numpy as np

from . import __version__, config as cfgmod
from . import bloch, comb as combmod, memory, model, pulses, stirapoz
from ._kernels import set_threads
from .constants import C_LIGHT, TWO_PI
from .errors import AfcsimError, ConfigError, NumericalError

CONVERGENCE_RHO33_TOL = 1e-6     # per-class shift allowed under step halving
CONVERGENCE_ETA_TOL = 0.01       # efficiency shift allowed under grid refinement


def _info(msg: str) -> None:
    print(f"afcsim: info: {msg}", file=sys.stderr)


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header: list[str], columns: list[np.ndarray]) -> str:
    rows = ["," .join(header)]
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    for row in data:
        rows.append(",".join("%.17g" % x for x in row))
    return "\n".join(rows) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: str, obj) -> None:
    _write_atomic(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _manifest(command: str, cfg: dict) -> dict:
    return {
        "tool": "afcsim",
        "version": __version__,
        "command": command,
        "config": cfgmod.resolve(cfg),
    }


def _metrics_to_dict(m: model.AfcMetrics) -> dict:
    out = {
        "gamma_rad_s": m.gamma,
        "delta_sep_rad_s": m.delta_sep,
        "n_peaks": m.n_peaks,
        "peak_fwhm_rad_s": m.peak_fwhm,
        "finesse": m.finesse,
        "retrieval_time_s": m.retrieval_time,
        "method": m.method,
    }
    if m.width_valid is not None:
        out["width_valid"] = m.width_valid
        out["width_valid_alt"] = m.width_valid_alt
    return out


def _conditions_block(system, train, delta0) -> dict:
    cond = model.design_conditions(max(train.omega_p0, train.omega_d0),
                                   train.sigma, delta0, system)
    omega0 = max(train.omega_p0, train.omega_d0)
    cond["threshold_delta0_rad_s"] = omega0 * math.sqrt(system.omega32 / system.omega13)
    cond["finesse_delta0_rad_s"] = omega0**2 * train.sigma * 5.0 / (4.0 * math.sqrt(math.pi))
    cond.update(pulses.check_adiabaticity(train))
    return cond


def _velocity_block(vc) -> dict:
    prof = combmod.AfcProfile(delta=vc.grid.values, rho33=vc.rho33, omega_map=C_LIGHT)
    try:
        peaks = combmod.detect_peaks(prof)
    except AfcsimError as exc:
        return {"error": str(exc)}
    return {
        "spacing_m_s": float(np.mean(np.diff(peaks.centers))) if peaks.centers.size > 1 else None,
        "fwhm_m_s": float(np.mean(peaks.fwhms)),
        "n_peaks": peaks.n_counted,
        "n_peaks_raw": int(peaks.centers.size),
    }


def _prepare_comb(cfg):
    system = cfgmod.build_system(cfg)
    gas = cfgmod.build_gas(cfg)
    train = cfgmod.build_train(cfg)
    delta0 = cfgmod.delta0_of(cfg)
    grid = cfgmod.build_grid(cfg, system, train, gas)
    vc = bloch.velocity_comb(system, train, delta0, gas, grid=grid)
    return system, gas, train, delta0, vc


def _comb_metrics(cfg, system, train, delta0, vc):
    blocks = {"conditions": _conditions_block(system, train, delta0),
              "velocity": _velocity_block(vc)}
    omega_map = cfgmod.omega_map_of(cfg, system)
    if system.omega42:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ana = model.afc_metrics_analytic(
                max(train.omega_p0, train.omega_d0), train.sigma, train.t_int, delta0, system)
        blocks["analytic"] = _metrics_to_dict(ana)
    if omega_map is not None:
        prof = combmod.vc_to_afc(vc, omega_map)
        prominence = (cfg.get("comb") or {}).get("min_prominence") or 0.1
        try:
            blocks["measured"] = _metrics_to_dict(
                combmod.measure_metrics(prof, min_prominence=prominence))
        except AfcsimError as exc:
            blocks["measured"] = {"error": str(exc)}
        try:
            fit = combmod.fit_comb_model(prof)
            blocks["fit"] = {
                "gamma_rad_s": fit["gamma"],
                "delta_sep_rad_s": fit["delta_sep"],
                "peak_fwhm_rad_s": fit["peak_fwhm"],
                "finesse": fit["delta_sep"] / fit["peak_fwhm"],
                "amplitude": fit["amplitude"],
                "residual": fit["residual"],
                "method": "fit",
            }
        except AfcsimError as exc:
            blocks["fit"] = {"error": str(exc)}
        blocks["omega_map_rad_s"] = omega_map
    return blocks


def run_comb(cfg: dict, outdir: str, check_convergence: bool = False) -> dict:
    cfgmod.require_sections(cfg, ("atom", "gas", "pap"))
    os.makedirs(outdir, exist_ok=True)
    system, gas, train, delta0, vc = _prepare_comb(cfg)
    v = vc.grid.values
    _write_atomic(os.path.join(outdir, "comb.csv"),
                  _csv_text(["v_m_s", "rho33", "weighted"], [v, vc.rho33, vc.weighted]))
    _info("wrote comb.csv")
    blocks = _comb_metrics(cfg, system, train, delta0, vc)
    omega_map = cfgmod.omega_map_of(cfg, system)
    if omega_map is not None:
        prof = combmod.vc_to_afc(vc, omega_map)
        _write_atomic(os.path.join(outdir, "afc.csv"),
                      _csv_text(["delta_rad_s", "rho33"], [prof.delta, prof.rho33]))
        _info("wrote afc.csv")
    if check_convergence:
        vc2 = bloch.velocity_comb(system, train, delta0, gas, grid=vc.grid, step_scale=0.5)
        shift = float(np.max(np.abs(vc2.rho33 - vc.rho33)))
        blocks["convergence"] = {"max_rho33_shift": shift, "tol": CONVERGENCE_RHO33_TOL,
                                 "ok": shift < CONVERGENCE_RHO33_TOL}
        if not blocks["convergence"]["ok"]:
            raise NumericalError(f"step-halving shifted rho33 by {shift:.3e}")
    _write_json(os.path.join(outdir, "metrics.json"), blocks)
    _info("wrote metrics.json")
    _write_json(os.path.join(outdir, "manifest.json"), _manifest("comb", cfg))
    return blocks


def run_metrics(cfg: dict, outdir: str) -> dict:
    cfgmod.require_sections(cfg, ("atom", "pap"))
    os.makedirs(outdir, exist_ok=True)
    system = cfgmod.build_system(cfg)
    train = cfgmod.build_train(cfg)
    delta0 = cfgmod.delta0_of(cfg)
    blocks = {"conditions": _conditions_block(system, train, delta0)}
    if system.omega42:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ana = model.afc_metrics_analytic(
                max(train.omega_p0, train.omega_d0), train.sigma, train.t_int, delta0, system)
        blocks["analytic"] = _metrics_to_dict(ana)
    _write_json(os.path.join(outdir, "metrics.json"), blocks)
    _info("wrote metrics.json")
    _write_json(os.path.join(outdir, "manifest.json"), _manifest("metrics", cfg))
    return blocks


def _store_once(cfg: dict):
    cfgmod.require_sections(cfg, ("atom", "gas", "pap", "storage"))
    system = cfgmod.build_system(cfg)
    gas = cfgmod.build_gas(cfg)
    train = cfgmod.build_train(cfg)
    delta0 = cfgmod.delta0_of(cfg)
    grid = cfgmod.section_grid(cfg, system, train)
    vc = bloch.velocity_comb(system, train, delta0, gas, grid=grid)
    sc = cfgmod.build_storage(cfg)
    res = memory.propagate(vc, sc, system, gas, retrieval_time=train.t_int / system.xi)
    return system, gas, train, delta0, vc, sc, res


def _memory_json(res: memory.MemoryResult, cfg: dict) -> dict:
    return {
        "eta_s": res.eta_s,
        "eta_r": res.eta_r,
        "eta_r_variants": res.eta_r_variants,
        "echo_time_s": res.echo_time,
        "od_effective": res.od_effective,
        "retrieval_mode": res.params["retrieval_mode"],
        "retrieval_variant": res.params["retrieval_variant"],
        "solver": res.params,
        "config": cfgmod.resolve(cfg),
    }


def run_store(cfg: dict, outdir: str, check_convergence: bool = False) -> dict:
    os.makedirs(outdir, exist_ok=True)
    system, gas, train, delta0, vc, sc, res = _store_once(cfg)
    _write_atomic(os.path.join(outdir, "field.csv"),
                  _csv_text(["t_s", "i0", "iL"], [res.t, res.e0_sq, res.eL_sq]))
    _info("wrote field.csv")
    nz = res.map_z.size
    zz = np.tile(res.map_z, res.map_t.size)
    tt = np.repeat(res.map_t, nz)
    _write_atomic(os.path.join(outdir, "spacetime.csv"),
                  _csv_text(["z_m", "t_s", "i_scaled"], [zz, tt, res.map_intensity.ravel()]))
    _info("wrote spacetime.csv")
    _write_atomic(os.path.join(outdir, "comb.csv"),
                  _csv_text(["v_m_s", "rho33", "weighted"],
                            [vc.grid.values, vc.rho33, vc.weighted]))
    doc = _memory_json(res, cfg)
    doc["metrics"] = _comb_metrics(cfg, system, train, delta0, vc)
    if check_convergence:
        fine = deepcopy(cfg)
        fine["storage"]["z_points"] = 2 * sc.z_points
        fine["storage"]["dt"] = res.params["dt_s"] / 2.0
        res2 = _store_once(fine)[-1]
        shift_s = abs(res2.eta_s - res.eta_s)
        shift_r = abs(res2.eta_r - res.eta_r)
        doc["convergence"] = {
            "eta_s_shift": shift_s, "eta_r_shift": shift_r,
            "tol": CONVERGENCE_ETA_TOL,
            "ok": shift_s < CONVERGENCE_ETA_TOL and shift_r < CONVERGENCE_ETA_TOL,
        }
        if not doc["convergence"]["ok"]:
            raise NumericalError("grid refinement moved the efficiencies by more than 1 point")
    _write_json(os.path.join(outdir, "memory.json"), doc)
    _info("wrote memory.json")
    _write_json(os.path.join(outdir, "manifest.json"), _manifest("store", cfg))
    return doc


_SWEEP_OUTPUTS = ("eta_s", "eta_r", "echo_time_s", "od_effective",
                  "finesse", "n_peaks", "delta_sep_rad_s", "peak_fwhm_rad_s")


def _sweep_axes(cfg: dict):
    axes = [(key[len("axis."):], values)
            for key, values in cfg.get("sweep", {}).items() if key.startswith("axis.")]
    if not axes:
        raise ConfigError("sweep requires at least one sweep.axis.* entry")
    return axes


def run_sweep(cfg: dict, outdir: str, keep_cells: bool = False) -> list[dict]:
    cfgmod.require_sections(cfg, ("atom", "gas", "pap", "storage", "sweep"))
    os.makedirs(outdir, exist_ok=True)
    sweep = cfg["sweep"]
    outputs = tuple(sweep.get("outputs") or ("eta_s", "eta_r"))
    for name in outputs:
        if name not in _SWEEP_OUTPUTS:
            raise ConfigError(f"sweep.outputs: unknown metric {name!r}")
    axes = _sweep_axes(cfg)
    cells = list(itertools.product(*(values for _, values in axes)))
    cap = sweep.get("cap") or 512
    if len(cells) > cap:
        raise ConfigError(f"sweep has {len(cells)} cells, exceeding the cap of {cap}")
    keep_cells = keep_cells or bool(sweep.get("keep_cells"))

    rows = []
    for index, cell in enumerate(cells):
        sub = deepcopy(cfg)
        sub.pop("sweep", None)
        for (path, _), value in zip(axes, cell):
            sec, key = path.split(".")
            sub[sec][key] = value
        system, gas, train, delta0, vc, sc, res = _store_once(sub)
        row = {"cell": index}
        for (path, _), value in zip(axes, cell):
            row[path] = value
        need_metrics = any(n in outputs for n in
                           ("finesse", "n_peaks", "delta_sep_rad_s", "peak_fwhm_rad_s"))
        met = {}
        if need_metrics:
            omega_map = cfgmod.omega_map_of(sub, system)
            try:
                met = _metrics_to_dict(
                    combmod.measure_metrics(combmod.vc_to_afc(vc, omega_map)))
            except AfcsimError:
                met = {}
        source = {
            "eta_s": res.eta_s, "eta_r": res.eta_r, "echo_time_s": res.echo_time,
            "od_effective": res.od_effective, "finesse": met.get("finesse", math.nan),
            "n_peaks": met.get("n_peaks", math.nan),
            "delta_sep_rad_s": met.get("delta_sep_rad_s", math.nan),
            "peak_fwhm_rad_s": met.get("peak_fwhm_rad_s", math.nan),
        }
        for name in outputs:
            row[name] = source[name]
        rows.append(row)
        if keep_cells:
            cell_dir = os.path.join(outdir, f"cell_{index:03d}")
            os.makedirs(cell_dir, exist_ok=True)
            _write_json(os.path.join(cell_dir, "manifest.json"), _manifest("store", sub))
        _info(f"cell {index + 1}/{len(cells)} done")

    header = ["cell"] + [path for path, _ in axes] + list(outputs)
    columns = [np.array([row[h] for row in rows], dtype=float) for h in header]
    _write_atomic(os.path.join(outdir, "sweep.csv"), _csv_text(header, columns))
    _info("wrote sweep.csv")
    # design guide values for the base configuration (plots read these)
    system = cfgmod.build_system(cfg)
    train = cfgmod.build_train(cfg)
    blocks = {"conditions": _conditions_block(system, train, cfgmod.delta0_of(cfg))}
    if system.omega42:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ana = model.afc_metrics_analytic(
                max(train.omega_p0, train.omega_d0), train.sigma, train.t_int,
                cfgmod.delta0_of(cfg), system)
        blocks["analytic"] = _metrics_to_dict(ana)
    _write_json(os.path.join(outdir, "metrics.json"), blocks)
    meta = _manifest("sweep", cfg)
    meta["cells"] = len(rows)
    _write_json(os.path.join(outdir, "manifest.json"), meta)
    return rows


def run_stirap_map(cfg: dict, outdir: str) -> dict:
    cfgmod.require_sections(cfg, ("atom", "gas", "pap"))
    os.makedirs(outdir, exist_ok=True)
    oz = cfg.get("ozmap") or {k: spec.default for k, spec in cfgmod.SCHEMA["ozmap"].items()}
    system = cfgmod.build_system(cfg)
    gas = cfgmod.build_gas(cfg)
    train = cfgmod.build_train(cfg)
    ratios = np.linspace(oz["ratio_min"], oz["ratio_max"], oz["n_ratio"])
    v_grid = None
    if oz.get("v_halfspan") is not None:
        v_grid = model.VelocityGrid(-oz["v_halfspan"], oz["v_halfspan"], oz["n_v"])
    result = stirapoz.oz_map(system, train, gas, ratio_grid=ratios, v_grid=v_grid,
                             gamma_zero=(oz["gamma_mode"] == "zero"), n_v=oz["n_v"])
    rr = np.repeat(result["ratio"], result["v"].size)
    vv = np.tile(result["v"], result["ratio"].size)
    _write_atomic(os.path.join(outdir, "ozmap.csv"),
                  _csv_text(["delta_over_omega", "v_m_s", "rho33"],
                            [rr, vv, result["rho33"].ravel()]))
    _info("wrote ozmap.csv")
    omega0 = result["omega0"]
    curves = [stirapoz.oz_curves(r * omega0, omega0, system) for r in result["ratio"]]
    _write_atomic(os.path.join(outdir, "ozcurves.csv"), _csv_text(
        ["delta_over_omega", "vs_plus", "vs_minus", "vp_plus", "vp_minus"],
        [result["ratio"],
         np.array([c.vs_plus for c in curves]),
         np.array([c.vs_minus for c in curves]),
         np.array([math.nan if c.vp_plus is None else c.vp_plus for c in curves]),
         np.array([math.nan if c.vp_minus is None else c.vp_minus for c in curves])]))
    _info("wrote ozcurves.csv")
    meta = _manifest("stirap-map", cfg)
    meta["fraction_outside"] = result["fraction_outside"]
    _write_json(os.path.join(outdir, "manifest.json"), meta)
    return meta


def run_ofc(cfg: dict, outdir: str) -> None:
    cfgmod.require_sections(cfg, ("pap",))
    os.makedirs(outdir, exist_ok=True)
    ofc = cfg.get("ofc") or {k: spec.default for k, spec in cfgmod.SCHEMA["ofc"].items()}
    train = cfgmod.build_train(cfg)
    grid = None
    if ofc.get("halfspan") is not None:
        half = TWO_PI * ofc["halfspan"]
        spacing = TWO_PI / train.t_int
        n = int(np.ceil(2 * half / (spacing / ofc["bins_per_tooth"]))) + 1
        grid = np.linspace(-half, half, n)
    spec = pulses.ofc_spectrum(train, which=ofc["which"], omega_grid=grid)
    _write_atomic(os.path.join(outdir, "ofc.csv"), _csv_text(
        ["omega_rad_s", "re", "im", "abs"],
        [spec.frequencies, spec.amplitudes.real, spec.amplitudes.imag,
         np.abs(spec.amplitudes)]))
    _info("wrote ofc.csv")
    _write_json(os.path.join(outdir, "manifest.json"), _manifest("ofc", cfg))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="afcsim",
        description="Velocity-comb AFC preparation and photon storage simulations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "comb": "prepare a velocity comb and measure the AFC",
        "metrics": "closed-form comb metrics only (no integration)",
        "store": "prepare a comb section and run photon storage/retrieval",
        "sweep": "grid of storage runs over swept parameters",
        "stirap-map": "smooth-pulse transfer map over (detuning ratio, velocity)",
        "ofc": "analytic pulse-train spectrum",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file or manifest JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="solver threads")
        p.add_argument("--check-convergence", action="store_true",
                       help="re-run with refined steps and gate the drift")
        if name == "sweep":
            p.add_argument("--keep-cells", action="store_true",
                           help="write per-cell manifests")
    args = parser.parse_args(argv)

    try:
        set_threads(args.threads)
        cfg = cfgmod.load(args.config)
        if args.command == "comb":
            run_comb(cfg, args.out, check_convergence=args.check_convergence)
        elif args.command == "metrics":
            run_metrics(cfg, args.out)
        elif args.command == "store":
            run_store(cfg, args.out, check_convergence=args.check_convergence)
        elif args.command == "sweep":
            run_sweep(cfg, args.out, keep_cells=args.keep_cells)
        elif args.command == "stirap-map":
            run_stirap_map(cfg, args.out)
        elif args.command == "ofc":
            run_ofc(cfg, args.out)
    except ConfigError as exc:
        print(f"afcsim: error: config: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, OSError) as exc:
        print(f"afcsim: error: io: {exc}", file=sys.stderr)
        return 2
    except AfcsimError as exc:
        print(f"afcsim: error: numerical: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
