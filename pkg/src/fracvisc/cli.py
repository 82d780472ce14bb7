"""Command-line front end: ``fracvisc {fit,lsa,gsa,eval,synth} --config FILE``.

Each subcommand reads one JSON config, writes its artifacts into the output
directory (all files are staged first and renamed into place only once every
result is computed), prints a short summary, and exits with

====  =============================================
0     success
2     configuration error (bad/missing keys, missing input file)
3     input/output error (unreadable or malformed data, write failure)
4     numerical-domain error
5     internal error
====  =============================================

On failure a single line ``fracvisc: error[<kind>]: <message>`` goes to stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import ParamBounds, PsoConfig, fit
from .dataio import (MasterCurve, dumps, format_curve_csv, load_master_curve, model_from_dict,
                     model_to_dict, synthesize_curve)
from .exceptions import ConfigError, DataError, DomainError
from .gsa import model_sobol_indices
from .lsa import Norm, Output, ParamRanges, mc_average_indices
from .reference import FMM_FMG_FITS, reference_model
from .viscomodel import PARAM_NAMES, ModelKind, model_moduli
from ._validation import as_frequency_grid, log_grid

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DOMAIN, EXIT_INTERNAL = 0, 2, 3, 4, 5

_COMMON_KEYS = {"seed", "out"}
_ALLOWED = {
    "fit": {"data", "kind", "constrain_tau2", "bounds", "pso", "weights"},
    "lsa": {"model", "rel_std", "ranges", "n_samples", "grid", "outputs", "log_base"},
    "gsa": {"model", "rel_std", "ranges", "N", "grid", "outputs", "scramble"},
    "eval": {"model", "grid"},
    "synth": {"model", "grid", "noise_sigma_log10", "label"},
}


# --- config helpers ---------------------------------------------------------------

class _Config:
    def __init__(self, data: dict, base: Path, command: str):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _ALLOWED[command] - _COMMON_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        self.data = data
        self.base = base

    def get(self, key, default=None):
        return self.data.get(key, default)

    def path(self, key) -> Path:
        if key not in self.data:
            raise ConfigError(f"missing required key {key!r}")
        p = Path(self.data[key])
        p = p if p.is_absolute() else self.base / p
        if not p.is_file():
            raise ConfigError(f"{key}: file not found: {p}")
        return p


def _grid(cfg: _Config) -> np.ndarray:
    spec = cfg.get("grid", {})
    if isinstance(spec, list):
        return as_frequency_grid(spec, min_points=2)
    if not isinstance(spec, dict) or set(spec) - {"lo", "hi", "n"}:
        raise ConfigError("grid must be a list of frequencies or {lo, hi, n}")
    return log_grid(float(spec.get("lo", 1e-8)), float(spec.get("hi", 1e2)), int(spec.get("n", 201)))


def _model(cfg: _Config):
    spec = cfg.get("model")
    if spec is None:
        raise ConfigError("missing required key 'model'")
    if isinstance(spec, str):
        try:
            spec = json.loads(cfg.path("model").read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise ConfigError("model must be a path or an object")
    if "reference" in spec:
        row = spec["reference"]
        if row not in FMM_FMG_FITS:
            raise ConfigError(f"unknown reference row {row!r}")
        return reference_model(row, constrained=bool(spec.get("tau2_constrained", False)),
                               kind=_kind(spec.get("kind", "FMM-FMG")))
    return model_from_dict(spec)


def _kind(value):
    try:
        return ModelKind.parse(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _ranges(cfg: _Config, model) -> ParamRanges:
    rel = float(cfg.get("rel_std", 0.05))
    ranges = ParamRanges.from_baseline(model, rel)
    explicit = cfg.get("ranges")
    if explicit:
        lo, hi = ranges.lower.copy(), ranges.upper.copy()
        for name, pair in explicit.items():
            if name not in PARAM_NAMES:
                raise ConfigError(f"unknown parameter in ranges: {name!r}")
            i = PARAM_NAMES.index(name)
            lo[i], hi[i] = (float(v) for v in pair)
        ranges = ParamRanges(PARAM_NAMES, lo, hi)
    return ranges


def _outputs(cfg: _Config):
    names = cfg.get("outputs", ["storage", "loss", "magnitude"])
    return [Output.parse(n) for n in names]


def _curves_csv(grid, names, table) -> str:
    out = io.StringIO()
    out.write(",".join(["omega_shifted", *names]) + "\n")
    for j, x in enumerate(grid):
        out.write(",".join(f"{v:.17g}" for v in [x, *(table[i][j] for i in range(len(names)))]) + "\n")
    return out.getvalue()


def _seed(args, cfg: _Config) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    return seed


# --- commands -------------------------------------------------------------------------

def _cmd_fit(args, cfg: _Config):
    curve = load_master_curve(cfg.path("data"))
    kind = _kind(cfg.get("kind", "FMM-FMG"))
    constrain = bool(cfg.get("constrain_tau2", True))
    bounds = ParamBounds(cfg.get("bounds")) if cfg.get("bounds") else ParamBounds.default(kind, constrain)
    pso = dict(cfg.get("pso", {}))
    unknown = set(pso) - {"n_pop", "n_iter", "n_runs", "inertia", "cognitive", "social",
                          "velocity_clamp", "topology", "log_scale_times"}
    if unknown:
        raise ConfigError(f"unknown pso keys: {sorted(unknown)}")
    pcfg = PsoConfig(seed=_seed(args, cfg), **pso)
    w1, w2 = cfg.get("weights", [0.5, 0.5])
    res = fit(curve, kind, bounds, pcfg, constrain, w1=float(w1), w2=float(w2), n_jobs=args.threads)
    mean_model = res.mean_model
    files = {
        "fit.json": dumps({"command": "fit", "seed": pcfg.seed, "pso": asdict(pcfg),
                           "data": curve.label, **res.summary()}),
        "params.json": dumps(model_to_dict(mean_model)),
        "best_params.json": dumps(model_to_dict(res.best_model)),
        "fit_curve.csv": format_curve_csv(MasterCurve(curve.x, *model_moduli(mean_model, curve.x),
                                                      label="fit")),
    }
    lines = [f"fit {kind.value}: best cost {res.best_cost:.6g}, relative error {res.relative_error:.3e}"]
    lines += [f"  {n:7s} {res.mean[n]:.6g} +/- {res.std[n]:.3g}" for n in PARAM_NAMES if n in res.mean]
    return files, lines


def _cmd_lsa(args, cfg: _Config):
    model = _model(cfg)
    grid = _grid(cfg)
    ranges = _ranges(cfg, model)
    n = int(cfg.get("n_samples", 2000))
    base = float(cfg.get("log_base", math.e))
    seed = _seed(args, cfg)
    files, lines, payload = {}, [], {"command": "lsa", "seed": seed, "model": model_to_dict(model),
                                     "ranges": {"lower": ranges.lower, "upper": ranges.upper},
                                     "log_base": base, "results": {}}
    norm_rows = ["output,parameter,norm,value"]
    for out in _outputs(cfg):
        r = mc_average_indices(model, ranges, n, grid, out, seed=seed, n_jobs=args.threads)
        d = r.to_dict()
        d["norms"] = {k.value: r.norms(k, base) for k in Norm}
        payload["results"][out.value] = d
        for k in Norm:
            for p, v in d["norms"][k.value].items():
                norm_rows.append(f"{out.value},{p},{k.value},{v:.17g}")
        files[f"lsa_curves_{out.value}.csv"] = _curves_csv(grid, r.names, r.mean)
        l1 = d["norms"]["L1"]
        lines.append(f"lsa {out.value} L1: " + ", ".join(f"{p}={l1[p]:.3g}" for p in r.names))
    files["lsa.json"] = dumps(payload)
    files["lsa_norms.csv"] = "\n".join(norm_rows) + "\n"
    return files, lines


def _cmd_gsa(args, cfg: _Config):
    model = _model(cfg)
    grid = _grid(cfg)
    ranges = _ranges(cfg, model)
    N = int(cfg.get("N", 2 ** 14))
    scramble = bool(cfg.get("scramble", False))
    seed = _seed(args, cfg)
    files, lines = {}, []
    payload = {"command": "gsa", "seed": seed, "model": model_to_dict(model), "scramble": scramble,
               "ranges": {"lower": ranges.lower, "upper": ranges.upper}, "results": {}}
    rows = ["output,parameter,index,linf"]
    for out in _outputs(cfg):
        r = model_sobol_indices(model, ranges, N, grid, out, scramble=scramble, seed=seed,
                                n_jobs=args.threads)
        payload["results"][out.value] = r.to_dict()
        for total, label in ((False, "S"), (True, "ST")):
            for p, v in r.linf(total).items():
                rows.append(f"{out.value},{p},{label},{v:.17g}")
        files[f"gsa_curves_{out.value}.csv"] = _curves_csv(grid, r.names, r.S)
        if np.any(r.degenerate):
            lines.append(f"gsa {out.value}: zero output variance at {int(r.degenerate.sum())} "
                         "grid points (indices set to 0)")
        lines.append(f"gsa {out.value} Linf S: " + ", ".join(f"{p}={v:.3f}" for p, v in r.linf().items()))
    files["gsa.json"] = dumps(payload)
    files["gsa_linf.csv"] = "\n".join(rows) + "\n"
    return files, lines


def _cmd_eval(args, cfg: _Config):
    model = _model(cfg)
    grid = _grid(cfg)
    curve = MasterCurve(grid, *model_moduli(model, grid), label="model")
    return {"moduli.csv": format_curve_csv(curve)}, [f"eval: {grid.size} points written"]


def _cmd_synth(args, cfg: _Config):
    model = _model(cfg)
    grid = _grid(cfg)
    sigma = float(cfg.get("noise_sigma_log10", 0.0))
    curve = synthesize_curve(model, grid, sigma, seed=_seed(args, cfg),
                             label=str(cfg.get("label", "synthetic")))
    return ({"curve.csv": format_curve_csv(curve), "model.json": dumps(model_to_dict(model))},
            [f"synth: {grid.size} points, noise sigma {sigma} (log10)"])


_COMMANDS = {"fit": _cmd_fit, "lsa": _cmd_lsa, "gsa": _cmd_gsa, "eval": _cmd_eval, "synth": _cmd_synth}


# --- output staging --------------------------------------------------------------------

def _commit(out_dir: Path, files: dict) -> None:
    """Stage every file as a temporary sibling, then rename all into place."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
            staged.append((tmp, out_dir / name))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for tmp, dest in staged:
            os.replace(tmp, dest)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


# --- entry point -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracvisc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory (overrides config 'out')")
        p.add_argument("--threads", type=int, default=1, help="concurrency cap (default 1)")
    return parser


def _fail(kind: str, code: int, msg) -> int:
    text = " ".join(str(msg).split())
    print(f"fracvisc: error[{kind}]: {text}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise ConfigError(f"config file not found: {cfg_path}")
        try:
            raw = json.loads(cfg_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        cfg = _Config(raw, cfg_path.parent, args.command)
        out = Path(args.out) if args.out is not None else cfg_path.parent / cfg.get("out", ".")
        files, lines = _COMMANDS[args.command](args, cfg)
        _commit(out, files)
    except ConfigError as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except (DataError, OSError, UnicodeDecodeError) as exc:
        return _fail("io", EXIT_IO, exc)
    except DomainError as exc:
        return _fail("domain", EXIT_DOMAIN, exc)
    except (TypeError, ValueError, KeyError) as exc:
        # malformed config values that slipped past explicit checks
        return _fail("config", EXIT_CONFIG, f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # pragma: no cover - defensive
        return _fail("internal", EXIT_INTERNAL, f"{type(exc).__name__}: {exc}")
    for line in lines:
        print(line)
    print(f"wrote {', '.join(sorted(files))} to {out}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
