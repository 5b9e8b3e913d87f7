"""Command-line entry point.

    frontspeed <command> [--config PATH] [--out PREFIX] [--override KEY=VALUE ...]

Commands: front, spectrum, sensitivity, simulate, sweep, validate.  Each run
writes CSV and report files under the output prefix and prints one JSON
summary line on stdout.  Exit codes: 0 success, 1 configuration error,
2 nonconvergence, 3 hypothesis violation, 4 simulation blow-up or lost front.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import output, pde_sim, sensitivity, spectral
from .config import COMMANDS, auto_grid, build_model, load_config, parse_config, serialize
from .errors import FrontSpeedError, HypothesisViolation
from .front_solver import NewtonOptions, _model_with, rotating_fronts
from .grid import build_grid

log = logging.getLogger("frontspeed")


def _options(cfg):
    return NewtonOptions(tol=cfg.newton_tol, accept=cfg.newton_accept, max_iter=cfg.newton_max_iter)


def _backend(cfg):
    return None if cfg.backend == "auto" else cfg.backend


def _grid_for(cfg, params):
    if cfg.grid_mode == "auto":
        L, N = auto_grid(cfg, params)
        return build_grid(L, N)
    return build_grid(cfg.L, cfg.N)


def _path(cfg, suffix):
    path = f"{cfg.out}_{suffix}"
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _write_profile(cfg, text, suffix, grid, values, meta):
    cols, rows = output.profile_table(grid, values)
    return output.write_csv(_path(cfg, suffix), cols, rows, text, meta)


def _front_meta(model, front):
    meta = {"model": model.name}
    meta.update({f"param.{k}": v for k, v in model.params.items()})
    meta.update({"c": front.speed, "residual": front.residual_norm, "boundary_defect": front.boundary_defect})
    return meta


def cmd_front(cfg, text):
    model = build_model(cfg)
    grid = _grid_for(cfg, cfg.params)
    summary = {"files": []}
    if model.name == "ginzburg_landau_polar":
        fronts = dict(zip(("increasing", "decreasing"), rotating_fronts(model, cfg.D, grid, cfg.order, _options(cfg))))
    else:
        fronts = {"": pde_sim.base_front(model, cfg.D, grid, cfg.order, _options(cfg))}
    for tag, front in fronts.items():
        suffix = f"front_{tag}.csv" if tag else "front.csv"
        summary["files"].append(_write_profile(cfg, text, suffix, grid, front.values, _front_meta(model, front)))
        key = f"speed_{tag}" if tag else "speed"
        summary[key] = front.speed
        summary[f"residual_{tag}" if tag else "residual"] = front.residual_norm
    return summary


def cmd_spectrum(cfg, text):
    model = build_model(cfg)
    ok, bound = spectral.essential_spectrum_check(model, cfg.D)
    if not ok:
        raise HypothesisViolation(f"H1 fails: essential spectrum bound {bound:.6g} >= 0")
    grid = _grid_for(cfg, cfg.params)
    front = pde_sim.base_front(model, cfg.D, grid, cfg.order, _options(cfg))
    op = spectral.assemble_linearized(front, model, cfg.D)
    report = spectral.zero_multiplicity_and_gap(op, front, essential=bound, seed=cfg.seed)
    report.gap_tol = cfg.gap_tol
    path = output.write_report(_path(cfg, "spectrum.txt"), report.to_text(), text)
    spectral.require_hypotheses(report)
    if not report.stable:
        raise HypothesisViolation(f"rightmost nonzero eigenvalue has real part {report.rightmost_nonzero_real_part:.3e}")
    return {
        "files": [path],
        "essential_bound": bound,
        "zero_eig_estimate": report.zero_eig_estimate,
        "spectral_gap": report.spectral_gap,
        "rightmost_nonzero_real_part": report.rightmost_nonzero_real_part,
    }


SENS_COLUMNS = [
    "mu_or_eps",
    "cbar_solvency",
    "cbar_alt",
    "cbar_half_s",
    "cbar_half_rot",
    "orth_defect",
    "sym_defect_psi",
    "sym_defect_phibar",
    "sign_cbar",
]


def _sens(cfg, params):
    model = build_model(cfg, params)
    grid = _grid_for(cfg, params)
    rep = sensitivity.full_report(model, cfg.D, cfg.Dbar, grid, order=cfg.order, options=_options(cfg), gap_tol=cfg.gap_tol)
    return model, grid, rep


def _param_value(cfg, params):
    name = cfg.sweep_parameter or next(iter(sorted(params)))
    return params.get(name, math.nan)


def cmd_sensitivity(cfg, text):
    model, grid, rep = _sens(cfg, cfg.params)
    value = next(iter(cfg.params.values())) if len(cfg.params) == 1 else _param_value(cfg, cfg.params)
    row = rep.row(value)
    files = [
        output.write_csv(_path(cfg, "sensitivity.csv"), SENS_COLUMNS, [[row[c] for c in SENS_COLUMNS]], text),
        _write_profile(cfg, text, "front.csv", grid, rep.front.values, _front_meta(model, rep.front)),
        _write_profile(cfg, text, "psi.csv", grid, rep.psi, {"normalization_simpson": rep.normalization_simpson}),
        _write_profile(cfg, text, "phibar.csv", grid, rep.phibar, {"orthogonality_defect": rep.orthogonality_defect}),
    ]
    items = {k: row[k] for k in SENS_COLUMNS}
    items.update({f"symmetry.{k}": v for k, v in rep.symmetry_defects.items()})
    files.append(output.write_report(_path(cfg, "sensitivity.txt"), items, text))
    return {"files": files, "cbar": rep.cbar_solvency, "cbar_alt": rep.cbar_alternative, "sign_cbar": row["sign_cbar"]}


def cmd_sweep(cfg, text):
    rows = []
    for value in cfg.sweep_values:
        params = dict(cfg.params)
        if cfg.model == "lotka_volterra":
            params.pop("mu", None)
            params.pop("eps", None)
        params[cfg.sweep_parameter] = value
        log.info("sweep %s = %r", cfg.sweep_parameter, value)
        _, _, rep = _sens(cfg, params)
        row = rep.row(value)
        rows.append([row[c] for c in SENS_COLUMNS])
    path = output.write_csv(_path(cfg, "sweep.csv"), SENS_COLUMNS, rows, text)
    return {"files": [path], "values": list(cfg.sweep_values), "sign_cbar": [r[-1] for r in rows]}


def cmd_simulate(cfg, text):
    model = build_model(cfg)
    grid = _grid_for(cfg, cfg.params)
    front = pde_sim.base_front(model, cfg.D, grid, cfg.order, _options(cfg))
    files, speeds = [], {}
    for eps in cfg.eps_list:
        track = pde_sim.measure_speed(
            model, cfg.D, cfg.Dbar, eps, grid, cfg.T, front=front, samples=cfg.samples, backend=_backend(cfg)
        )
        meta = {"eps": eps, "speed": track.speed, "fit_residual": track.fit_residual, "resolution": track.resolution}
        files.append(output.write_csv(_path(cfg, f"track_eps{eps!r}.csv"), ["t", "x_star"], track.to_csv_rows(), text, meta))
        speeds[repr(float(eps))] = track.speed
    return {"files": files, "speeds": speeds}


def cmd_validate(cfg, text):
    model = build_model(cfg)
    grid = _grid_for(cfg, cfg.params)
    front = pde_sim.base_front(model, cfg.D, grid, cfg.order, _options(cfg))
    rep = sensitivity.full_report(model, cfg.D, cfg.Dbar, grid, order=cfg.order, front=front, check_spectrum=False)
    table = pde_sim.validate_sensitivity(
        model, cfg.D, cfg.Dbar, grid, cfg.eps_list, cfg.T, cbar=rep.cbar_solvency, front=front,
        backend=_backend(cfg), samples=cfg.samples,
    )
    rows = [list(r) + [table.advancing[r[0]]] for r in table.rows]
    path = output.write_csv(
        _path(cfg, "validate.csv"), ["eps", "measured", "predicted", "rel_err", "advancing"], rows, text,
        {"cbar": table.cbar},
    )
    return {"files": [path], "cbar": table.cbar, "max_rel_err": _num(table.max_relative_error()),
            "advancing": {repr(k): v for k, v in table.advancing.items()}}


HANDLERS = {
    "front": cmd_front,
    "spectrum": cmd_spectrum,
    "sensitivity": cmd_sensitivity,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def run(cfg):
    """Execute a resolved configuration; returns ``(exit_code, summary)``."""
    text = serialize(cfg)
    summary = {"command": cfg.command, "model": cfg.model}
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            summary.update(HANDLERS[cfg.command](cfg, text))
    except FrontSpeedError as exc:
        summary.update(status="error", exit_code=exc.exit_code, error=type(exc).__name__, message=str(exc))
        return exc.exit_code, summary
    summary.update(status="ok", exit_code=0)
    return 0, summary


def build_parser():
    p = argparse.ArgumentParser(prog="frontspeed", description="Bistable fronts and the sensitivity of their speed to diffusion.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="configuration file (key = value with [sections])")
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="override a config entry, e.g. model.mu=2")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return str(v)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    overrides = [f"command={args.command}"] + list(args.override)
    if args.out:
        overrides.append(f"out={args.out}")
    try:
        cfg = load_config(args.config, overrides) if args.config else parse_config("", overrides)
    except FrontSpeedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        summary = {"command": args.command, "status": "error", "exit_code": exc.exit_code,
                   "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(summary, sort_keys=True, default=_json_default))
        return exc.exit_code
    code, summary = run(cfg)
    if code:
        print(f"error: {summary.get('message')}", file=sys.stderr)
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return code


if __name__ == "__main__":
    sys.exit(main())
