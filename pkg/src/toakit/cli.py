"""Command-line front end: scenario configuration, execution, and reports.

Each scenario subcommand accepts --config/--preset plus the common output
flags, writes delimited results and rendered figures into --out, and prints
a one-line summary (or a JSON summary with --json-summary).  Exit codes:
0 success, 2 usage or configuration error, 3 I/O or file-format error,
4 numeric failure.  The only environment variable read is TOAKIT_LOG
(logging verbosity).
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import plots, presets, toa_core
from .backflow import BrackenMelloyScenario, DimensionlessFrame, natural_frame, rb87_frame
from .errors import ConfigError, SchemaError, ToakitError
from .gaussian_toa import (PhysicalParams, freefall_momentum_density,
                           freefall_momentum_moments,
                           freefall_position_moments, gaussian_density_field,
                           gaussian_toa_density)
from .sampler import protocol_histogram
from .superposition import free_gaussian_packet, superpose, superposition_current, superposition_toa
from .toa_core import ToaDistribution, normalize_distribution

log = logging.getLogger("toakit")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _write_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if v is not None else ""
                             for v in row])


def _grid_from_spec(spec):
    if spec["spacing"] == "log":
        return np.geomspace(spec["min"], spec["max"], spec["count"])
    return np.linspace(spec["min"], spec["max"], spec["count"])


def _resolve_config(args, kind):
    if args.preset and args.config:
        raise ConfigError(["--preset and --config are mutually exclusive"])
    if args.preset:
        cfg = presets.load_preset(args.preset)
    elif args.config:
        cfg = presets.load_config(args.config)
    else:
        cfg = None
    if cfg is not None and cfg["kind"] != kind:
        raise ConfigError([f"config kind {cfg['kind']!r} does not match the "
                           f"{kind!r} subcommand"])
    return cfg


def _apply_common_overrides(cfg, args):
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "normalize", False):
        cfg["normalize"] = True
    return cfg


def _summary_zeros(dist):
    return [{"location": z.location, "classification": z.classification}
            for z in dist.zeros]


def _emit_summary(args, payload):
    if args.json_summary:
        print(json.dumps(payload, sort_keys=True))
    else:
        parts = [f"{payload['scenario']}"]
        for key, value in payload["summary"].items():
            if isinstance(value, float):
                parts.append(f"{key}={value:.6g}")
            elif isinstance(value, list):
                parts.append(f"{key}={value}")
            else:
                parts.append(f"{key}={value}")
        parts.append(f"outputs={','.join(payload['outputs'])}")
        print(" ".join(parts))


def _run_backflow(args):
    cfg = _resolve_config(args, "backflow")
    if cfg is None:
        name = "rb87-table" if args.rb87 else "fig1"
        cfg = presets.load_preset(name)
    cfg = _apply_common_overrides(cfg, args)
    params = cfg["params"]
    if args.rb87:
        params["rb87"] = True
        params["table"] = True

    if params.get("rb87"):
        frame = rb87_frame()
    elif {"alpha", "mass", "hbar"} <= set(params):
        frame = DimensionlessFrame(alpha=params["alpha"], mass=params["mass"],
                                   hbar=params["hbar"])
    else:
        frame = natural_frame()

    scenario = BrackenMelloyScenario(frame)
    bracket = tuple(params.get("bracket", (1e-3, 0.5)))
    result = scenario.locate_t0(bracket)

    grid = _grid_from_spec(cfg["grid"])
    dist = scenario.toa_distribution(grid, normalize=True)
    from .backflow import bm_current
    current = bm_current(0.0, grid)

    os.makedirs(args.out, exist_ok=True)
    fig_csv = os.path.join(args.out, f"{cfg['label']}.csv")
    _write_csv(fig_csv, ["t_prime", "current", "normalized_density"],
               [grid, current, dist.density])
    fig_png = os.path.join(args.out, f"{cfg['label']}.png")
    plots.render_backflow(fig_csv, fig_png)
    outputs = [fig_csv, fig_png]

    summary = {
        "t0_prime": result.t0_prime,
        "t0_physical_s": result.t0_physical,
        "normalization": result.normalization,
        "timescale_s": frame.timescale,
        "zeros": _summary_zeros(dist),
    }
    if params.get("table"):
        rows = scenario.table()
        table_csv = os.path.join(args.out, "table.csv")
        _write_csv(table_csv, ["target_P", "epsilon_s", "delta_t_s"],
                   [[r[0] for r in rows], [r[1] for r in rows],
                    [r[2] for r in rows]])
        table_png = os.path.join(args.out, "table.png")
        plots.render_table(table_csv, table_png)
        outputs += [table_csv, table_png]
        summary["table_rows"] = len(rows)

    _emit_summary(args, {"scenario": "backflow", "summary": summary,
                         "outputs": outputs})
    return EXIT_OK


def _run_superposition(args):
    cfg = _resolve_config(args, "superposition")
    if cfg is None:
        raise ConfigError(["superposition needs --preset or --config "
                           f"(presets: {sorted(presets.PRESETS)})"])
    cfg = _apply_common_overrides(cfg, args)
    p = cfg["params"]
    base = PhysicalParams(hbar=p["hbar"], mass=p["mass"],
                          sigma=p["packets"][0]["width"])
    pk1, pk2 = (free_gaussian_packet(base, pk["center"], pk["wave_number"],
                                     pk["width"]) for pk in p["packets"])
    state = superpose(pk1, pk2)
    grid = _grid_from_spec(cfg["grid"])
    x_det = p["detector_x"]
    dist = superposition_toa(state, x_det, grid, normalize=cfg["normalize"])
    current = superposition_current(state, x_det, grid)

    os.makedirs(args.out, exist_ok=True)
    fig_csv = os.path.join(args.out, f"{cfg['label']}.csv")
    norm_density = dist.density if dist.normalized else (
        dist.density / dist.normalization if dist.normalization else dist.density)
    _write_csv(fig_csv, ["t", "current", "normalized_density"],
               [grid, current, norm_density])
    fig_png = os.path.join(args.out, f"{cfg['label']}.png")
    plots.render_superposition(fig_csv, fig_png)

    summary = {
        "norm_factor": state.norm_factor,
        "normalization": dist.normalization,
        "zeros": _summary_zeros(dist),
    }
    _emit_summary(args, {"scenario": "superposition", "summary": summary,
                         "outputs": [fig_csv, fig_png]})
    return EXIT_OK


def _gaussian_run(args, kind):
    cfg = _resolve_config(args, kind)
    if cfg is None:
        raise ConfigError([f"{kind} needs --preset or --config"])
    cfg = _apply_common_overrides(cfg, args)
    p = cfg["params"]
    params = PhysicalParams(hbar=p["hbar"], mass=p["mass"], sigma=p["sigma"],
                            g=p.get("g", 0.0), x0=p.get("x0", 0.0),
                            v0=p.get("v0", 0.0))
    grid = _grid_from_spec(cfg["grid"])
    if kind == "gaussian-freefall-momentum":
        detector = p["detector_p"]
        fn = lambda t: freefall_momentum_density(params, detector, t)
    else:
        detector = p["detector_x"]
        moments_ = freefall_position_moments(params)
        fn = lambda t: gaussian_toa_density(moments_, detector, t)

    density = fn(grid)
    dist = ToaDistribution(grid, density, density_fn=fn)
    summary = {"detector": detector}
    if cfg["normalize"]:
        dist = normalize_distribution(dist)
        summary["normalization"] = dist.normalization
        try:
            mean, std = toa_core.moments(dist)
            summary["mean_s"] = mean
            summary["std_s"] = std
        except ToakitError as exc:
            summary["moments"] = f"divergent ({exc.__class__.__name__})"

    os.makedirs(args.out, exist_ok=True)
    out_csv = os.path.join(args.out, f"{cfg['label']}.csv")
    dist.to_csv(out_csv)
    out_png = os.path.join(args.out, f"{cfg['label']}.png")
    plots.render_density(out_csv, out_png)
    _emit_summary(args, {"scenario": kind, "summary": summary,
                         "outputs": [out_csv, out_png]})
    return EXIT_OK


def _run_sample(args):
    cfg = _resolve_config(args, "sample")
    if cfg is None:
        raise ConfigError(["sample needs --preset or --config"])
    cfg = _apply_common_overrides(cfg, args)
    p = cfg["params"]
    params = PhysicalParams(hbar=p["hbar"], mass=p["mass"], sigma=p["sigma"],
                            g=p.get("g", 0.0), v0=p.get("v0", 0.0))
    moments_ = freefall_momentum_moments(params)
    field = gaussian_density_field(moments_)
    grid = _grid_from_spec(cfg["grid"])
    emp = protocol_histogram(field, p["detector_p"], grid,
                             trials_per_time=p["trials_per_time"],
                             seed=cfg["seed"], delta_a=p.get("delta_a"))

    os.makedirs(args.out, exist_ok=True)
    emp_csv = os.path.join(args.out, f"{cfg['label']}.csv")
    emp.to_csv(emp_csv)
    ana_csv = os.path.join(args.out, f"{cfg['label']}_analytic.csv")
    analytic = gaussian_toa_density(moments_, p["detector_p"], grid)
    _write_csv(ana_csv, ["t", "density", "normalized_density"],
               [grid, analytic, analytic])
    out_png = os.path.join(args.out, f"{cfg['label']}.png")
    plots.render_density(emp_csv, out_png, analytic_csv=ana_csv)

    sup = float(np.max(np.abs(emp.distribution.density[1:-1] - analytic[1:-1])))
    summary = {
        "trials_per_time": emp.trials_per_time,
        "delta_a": emp.delta_a,
        "seed": cfg["seed"],
        "sup_deviation": sup,
    }
    _emit_summary(args, {"scenario": "sample", "summary": summary,
                         "outputs": [emp_csv, ana_csv, out_png]})
    return EXIT_OK


def _run_plot_script(args):
    text = plots.plot_script_text(args.files)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"plot script written to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _add_common_flags(sub):
    sub.add_argument("--config", help="path to a scenario config (JSON)")
    sub.add_argument("--preset", help="name of an in-repo preset")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--seed", type=int, help="random seed override")
    sub.add_argument("--normalize", action="store_true",
                     help="Bayes-normalize the arrival density")
    sub.add_argument("--json-summary", action="store_true",
                     help="print the run summary as JSON")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="toa",
        description="Arrival-time distributions for continuous quantum "
                    "systems: Gaussian closed forms, two-packet "
                    "superpositions, and the quantum-backflow scenario.")
    subs = parser.add_subparsers(dest="command", required=True)

    b = subs.add_parser("backflow", help="positive-momentum backflow scenario")
    _add_common_flags(b)
    b.add_argument("--rb87", action="store_true",
                   help="87Rb frame; also computes the detection table")
    b.set_defaults(func=_run_backflow)

    s = subs.add_parser("superposition", help="two-packet arrival distribution")
    _add_common_flags(s)
    s.set_defaults(func=_run_superposition)

    gp = subs.add_parser("gaussian-position",
                         help="free-fall arrival at a position")
    _add_common_flags(gp)
    gp.set_defaults(func=lambda a: _gaussian_run(a, "gaussian-freefall-position"))

    gm = subs.add_parser("gaussian-momentum",
                         help="free-fall arrival at a momentum")
    _add_common_flags(gm)
    gm.set_defaults(func=lambda a: _gaussian_run(a, "gaussian-freefall-momentum"))

    sa = subs.add_parser("sample", help="Monte-Carlo detector-protocol sweep")
    _add_common_flags(sa)
    sa.set_defaults(func=_run_sample)

    ps = subs.add_parser("plot-script",
                         help="emit a standalone matplotlib script for CSVs")
    ps.add_argument("files", nargs="+", help="result CSV files")
    ps.add_argument("--out", help="write the script here instead of stdout")
    ps.set_defaults(func=_run_plot_script)

    return parser


def _error_json(exc, code):
    payload = {"error": exc.__class__.__name__, "message": str(exc),
               "exit_code": code}
    if isinstance(exc, ConfigError):
        payload["violations"] = exc.violations
    return json.dumps(payload, sort_keys=True)


def main(argv=None):
    logging.basicConfig(level=os.environ.get("TOAKIT_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(_error_json(exc, EXIT_USAGE), file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError,
            SchemaError) as exc:
        print(_error_json(exc, EXIT_IO), file=sys.stderr)
        return EXIT_IO
    except (ToakitError, FloatingPointError, ZeroDivisionError) as exc:
        print(_error_json(exc, EXIT_NUMERIC), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
