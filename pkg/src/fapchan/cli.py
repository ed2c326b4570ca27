"""``fapchan`` command line.

Exit codes: 0 success, 1 parameter/usage/I-O error, 2 validation failure.

Data files embed a manifest without a timestamp so that reruns are
byte-identical; when writing to a file the full manifest, timestamp included,
goes to ``<out>.manifest.json`` next to it.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .capacity import CapacityQuery, capacity_bounds, capacity_sweep, sweep_points, sweep_row
from .channel import PlanarChannelParams, VdfapParams, fap_pdf_plane
from .entropy import entropy_quadrature, vdfap_entropy_2d
from .errors import FapError, ParameterError
from .mcsim import (WORKERS_ENV, DensityGrid, GridAxis, SimConfig, build_histogram, default_workers,
                    simulate_fap)
from .spectral import vdfap_cf, vdfap_cf_gradient, vdfap_cf_hessian, vdfap_moments
from .validate import compare_density, ks_radial_report, moment_test, weak_stability_test

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2

PRESETS = {
    "paper-fig1": {"ambient_dim": 3, "D_coef": 840.0, "lam": 1.0, "u": "0,0,0", "dt": 1e-5, "M": 100000,
                   "grid": "-3:3:60,-3:3:60", "truncate": True},
    "paper-fig2": {"ambient_dim": 3, "D_coef": 840.0, "lam": 1.0, "u": "2,-3,-1", "dt": 1e-5, "M": 100000,
                   "grid": "-3:3:60,-3:3:60", "truncate": True},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def fmt(x) -> str:
    """17 significant digits: enough to round-trip any double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _json(obj) -> str:
    """JSON text with every float printed via :func:`fmt` (non-finite floats become null)."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: Optional[int] = None
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def embedded(self) -> dict:
        """Manifest minus the timestamp; safe to put inside reproducible outputs."""
        return {"command": self.command, "parameters": self.parameters, "seed": self.seed,
                "tool_version": self.tool_version}

    def full(self) -> dict:
        out = self.embedded()
        out["timestamp"] = self.timestamp
        return out


def _write(text: str, path: Optional[str], manifest: Optional[RunManifest]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if manifest is not None:
        with open(path + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_json(manifest.full()) + "\n")


def grid_text(grid: DensityGrid, format: str = "csv", manifest: Optional[dict] = None) -> str:
    if format == "csv":
        names = [f"n{i + 1}" for i in range(grid.d)]
        lines = [f"# manifest: {_json(manifest or {})}", ",".join(names + ["value"])]
        pts = grid.centers().reshape(-1, grid.d)
        for p, v in zip(pts, np.asarray(grid.values).ravel()):
            lines.append(",".join(fmt(c) for c in p) + "," + fmt(v))
        return "\n".join(lines) + "\n"
    if format == "json":
        doc = {
            "axes": [{"lo": a.lo, "hi": a.hi, "bins": a.bins} for a in grid.axes],
            "values": np.asarray(grid.values, dtype=float).ravel().tolist(),
            "normalization": grid.normalization,
            "M": grid.M,
            "out_of_grid": grid.out_of_grid,
            "truncated": grid.truncated,
            "manifest": manifest or {},
        }
        return _json(doc) + "\n"
    raise ParameterError(f"format must be csv or json, got {format!r}")


def emit_grid(grid: DensityGrid, path: Optional[str], format: str = "csv",
              manifest: Optional[RunManifest] = None) -> None:
    """Write ``grid`` as CSV (``n1,...,nd,value`` rows) or JSON (row-major values)."""
    text = grid_text(grid, format, manifest.embedded() if manifest else None)
    _write(text, path, manifest)


def load_grid(path: str) -> DensityGrid:
    """Read a grid written by :func:`emit_grid` in JSON format."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    axes = tuple(GridAxis(a["lo"], a["hi"], a["bins"]) for a in doc["axes"])
    values = np.asarray(doc["values"], dtype=float).reshape(tuple(a.bins for a in axes))
    return DensityGrid(axes, values, doc["normalization"], M=doc.get("M"),
                       out_of_grid=doc.get("out_of_grid", 0), truncated=doc.get("truncated", False))


def _floats(text: str, name: str) -> list:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ParameterError(f"--{name} must be a comma separated list of numbers, got {text!r}") from None


def parse_grid(text: str) -> tuple:
    """``lo:hi:bins[,lo:hi:bins...]`` -> tuple of GridAxis."""
    axes = []
    for part in str(text).split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise ParameterError(f"grid axis must be lo:hi:bins, got {part!r}")
        try:
            axes.append(GridAxis(float(bits[0]), float(bits[1]), int(bits[2])))
        except ValueError:
            raise ParameterError(f"grid axis must be lo:hi:bins, got {part!r}") from None
    return tuple(axes)


def parse_range(text: str) -> tuple:
    bits = str(text).split(":")
    if len(bits) != 2:
        raise ParameterError(f"range must be lo:hi, got {text!r}")
    try:
        return float(bits[0]), float(bits[1])
    except ValueError:
        raise ParameterError(f"range must be lo:hi, got {text!r}") from None


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; keys use the long option names."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ParameterError(f"cannot read config file {path}: {exc}") from None
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{no}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


# ---------------------------------------------------------------- parser


def _add_drift(p, vector: bool):
    g = p.add_argument_group("drift (give --u, or --v with --D-coef)")
    help_u = "normalized drift u (1/um), comma separated, last = vertical" if vector else "vertical normalized drift u < 0 (1/um)"
    g.add_argument("--u", help=help_u)
    g.add_argument("--v", help="physical drift velocity (um/s), same layout as --u")
    g.add_argument("--D-coef", dest="D_coef", type=float, help="diffusion coefficient (um^2/s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fapchan", description="First-arrival-position channel toolkit")
    parser.add_argument("--version", action="version", version=f"fapchan {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, out_format=True):
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--out", help="output file (default stdout)")
        if out_format:
            p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("density", help="evaluate the FAP density on a grid")
    common(p)
    p.add_argument("--d", type=int)
    _add_drift(p, True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--grid", help="lo:hi:bins per axis, comma separated")

    p = sub.add_parser("cf", help="VDFAP characteristic function, gradient and Hessian")
    common(p, out_format=False)
    p.add_argument("--d", type=int)
    _add_drift(p, False)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--omega", help="frequency vector, comma separated")

    p = sub.add_parser("entropy", help="VDFAP differential entropy (nats)")
    common(p, out_format=False)
    p.add_argument("--d", type=int)
    _add_drift(p, False)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--method", choices=("auto", "closed", "quadrature", "both"), default=None)

    p = sub.add_parser("capacity", help="capacity lower and upper bounds")
    common(p, out_format=False)
    p.add_argument("--d", type=int)
    _add_drift(p, False)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--P", type=float, help="input second-moment budget (um^2)")
    p.add_argument("--units", choices=("nats", "bits"), default=None)

    p = sub.add_parser("sweep", help="capacity bounds along one parameter")
    common(p)
    p.add_argument("--vary", choices=("P", "lambda", "u"))
    p.add_argument("--range", dest="range_", help="lo:hi (for u: magnitudes |u|)")
    p.add_argument("--steps", type=int)
    p.add_argument("--d", type=int)
    _add_drift(p, False)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--P", type=float)
    p.add_argument("--units", choices=("nats", "bits"), default=None)
    p.add_argument("--workers", type=int)

    for name, helptext in (("simulate", "first-passage Monte Carlo"),
                           ("validate", "compare theory and simulation")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--d", type=int, help="receiver dimension (ambient dimension is d + 1)")
        _add_drift(p, True)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--M", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--max-steps", dest="max_steps", type=int)
        p.add_argument("--crossing-mode", dest="crossing_mode", choices=("step", "bridge"))
        p.add_argument("--engine", choices=("levy", "stepwise"))
        p.add_argument("--workers", type=int)
        p.add_argument("--grid", help="histogram grid lo:hi:bins per axis")
        p.add_argument("--truncate", action="store_true", default=None,
                       help="zero histogram cells below 1e-3 (display only)")
        if name == "simulate":
            p.add_argument("--normalization", choices=("density", "relative-frequency"), default=None)
        else:
            p.add_argument("--kind", choices=("density", "moments", "ks", "weak-stability"), default=None)
            p.add_argument("--k", type=float, help="density tolerance k in k/sqrt(M)")
            p.add_argument("--alpha", type=float)
            p.add_argument("--lambda2", type=float, help="second summand distance (weak-stability)")

    p = sub.add_parser("selftest", help="run the acceptance criteria")
    p.add_argument("--only", help="comma separated criterion numbers")
    p.add_argument("--workers", type=int)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    ns = parser.parse_args(argv)
    path = getattr(ns, "config", None)
    if not path:
        return ns
    values = read_config(path)
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    actions = {a.dest: a for a in sub._actions}
    explicit = {k for k, v in vars(ns).items() if v is not None and actions.get(k) is not None
                and v != actions[k].default}
    for key, raw in values.items():
        dest = {"lambda": "lam", "range": "range_"}.get(key, key)
        if dest not in actions or dest in ("config", "help"):
            raise ParameterError(f"unknown key {key!r} in config file {path}")
        if dest in explicit:
            continue
        action = actions[dest]
        if isinstance(action, argparse._StoreTrueAction):
            val = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                val = action.type(raw) if action.type else raw
            except ValueError:
                raise ParameterError(f"bad value for {key!r} in {path}: {raw!r}") from None
            if action.choices and val not in action.choices:
                raise ParameterError(f"{key!r} must be one of {list(action.choices)}, got {raw!r}")
        setattr(ns, dest, val)
    # a drift given on the command line replaces one of the other kind from the file
    if "u" in explicit and "v" not in explicit and "v" in values:
        ns.v = None
        ns.D_coef = None if "D_coef" not in explicit else ns.D_coef
    if "v" in explicit and "u" not in explicit and "u" in values:
        ns.u = None
    return ns


def _need(ns, *names):
    for n in names:
        if getattr(ns, n, None) is None:
            flag = {"lam": "lambda", "range_": "range", "D_coef": "D-coef"}.get(n, n)
            raise ParameterError(f"missing required parameter --{flag}")


def _drift(ns, vector: bool, d: Optional[int] = None):
    """Normalized drift from ``--u`` or ``--v/--D-coef``; converted exactly once here."""
    if ns.u is not None and ns.v is not None:
        raise ParameterError("--u and --v are mutually exclusive")
    if ns.u is None and ns.v is None:
        raise ParameterError("give --u, or --v together with --D-coef")
    if ns.v is not None:
        _need(ns, "D_coef")
        if not ns.D_coef > 0:
            raise ParameterError("--D-coef must be > 0")
        vals = np.asarray(_floats(ns.v, "v")) / (2.0 * ns.D_coef)
    else:
        vals = np.asarray(_floats(ns.u, "u"))
    if vector:
        if d is not None and vals.size != d + 1:
            raise ParameterError(f"drift needs {d + 1} components for d={d}, got {vals.size}")
        return tuple(float(x) for x in vals)
    if vals.size != 1:
        raise ParameterError("this command takes a scalar vertical drift")
    return float(vals[0])


def _vdfap(ns) -> VdfapParams:
    _need(ns, "lam")
    d = 2 if ns.d is None else ns.d
    return VdfapParams(_drift(ns, False), ns.lam, d)


def _dump(doc: dict, ns, manifest: RunManifest) -> None:
    doc = dict(doc)
    doc["manifest"] = manifest.embedded()
    _write(_json(doc) + "\n", ns.out, manifest)


def cmd_density(ns) -> int:
    _need(ns, "d", "lam", "grid")
    params = PlanarChannelParams(ns.d, _drift(ns, True, ns.d), ns.lam)
    axes = parse_grid(ns.grid)
    if len(axes) != ns.d:
        raise ParameterError(f"--grid needs {ns.d} axes, got {len(axes)}")
    proto = DensityGrid(axes, np.zeros(tuple(a.bins for a in axes)), "density")
    grid = DensityGrid(axes, fap_pdf_plane(proto.centers(), params), "density")
    manifest = RunManifest("density", {"d": ns.d, "u": list(params.u), "lambda": ns.lam, "grid": ns.grid})
    emit_grid(grid, ns.out, ns.format or "csv", manifest)
    return EXIT_OK


def cmd_cf(ns) -> int:
    params = _vdfap(ns)
    _need(ns, "omega")
    omega = np.asarray(_floats(ns.omega, "omega"))
    doc = {
        "omega": omega,
        "cf": vdfap_cf(omega, params),
        "gradient": vdfap_cf_gradient(omega, params),
        "hessian": vdfap_cf_hessian(omega, params),
        "second_moment": vdfap_moments(params).second_moment,
    }
    _dump(doc, ns, RunManifest("cf", {"d": params.d, "u": params.u, "lambda": params.lam, "omega": omega.tolist()}))
    return EXIT_OK


def cmd_entropy(ns) -> int:
    params = _vdfap(ns)
    method = ns.method or "auto"
    if method == "auto":
        method = "closed" if params.d == 2 else "quadrature"
    doc = {"units": "nats"}
    if method in ("closed", "both"):
        if params.d != 2:
            raise ParameterError("the closed-form entropy exists only for d = 2")
        doc["closed_form"] = vdfap_entropy_2d(params.u, params.lam)
    if method in ("quadrature", "both"):
        h, err = entropy_quadrature(params, full_output=True)
        doc["quadrature"] = h
        doc["quadrature_abserr"] = err
    _dump(doc, ns, RunManifest("entropy", {"d": params.d, "u": params.u, "lambda": params.lam, "method": method}))
    return EXIT_OK


def cmd_capacity(ns) -> int:
    _need(ns, "lam", "P")
    d = 2 if ns.d is None else ns.d
    q = CapacityQuery(d, _drift(ns, False), ns.lam, ns.P)
    res = capacity_bounds(q, ns.units or "nats")
    doc = {"lower": res.lower, "upper": res.upper, "units": res.units}
    _dump(doc, ns, RunManifest("capacity", {"d": d, "u": q.u, "lambda": q.lam, "P": q.P, "units": res.units}))
    return EXIT_OK


def _sweep_part(args):
    vary, xs, fixed, units = args
    return [sweep_row(vary, x, fixed, units) for x in xs]


def cmd_sweep(ns) -> int:
    _need(ns, "vary", "range_", "steps", "lam", "P")
    d = 2 if ns.d is None else ns.d
    lo, hi = parse_range(ns.range_)
    fixed = CapacityQuery(d, _drift(ns, False), ns.lam, ns.P)
    units = ns.units or "bits"
    workers = ns.workers if ns.workers is not None else default_workers()
    if workers < 1:
        raise ParameterError("--workers must be >= 1")
    rows = capacity_sweep(ns.vary, lo, hi, ns.steps, fixed, units) if workers == 1 else None
    if rows is None:
        # same sample points as the serial path, evaluated in contiguous blocks
        xs = sweep_points(lo, hi, ns.steps, open_lo=lo == 0.0)
        blocks = [b for b in np.array_split(xs, min(workers, len(xs))) if b.size]
        with ProcessPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(pool.map(_sweep_part, [(ns.vary, b.tolist(), fixed, units) for b in blocks]))
        rows = [r for part in parts for r in part]
    manifest = RunManifest("sweep", {"vary": ns.vary, "range": [lo, hi], "steps": ns.steps, "d": d,
                                     "u": fixed.u, "lambda": fixed.lam, "P": fixed.P, "units": units})
    fmt_ = ns.format or "csv"
    if fmt_ == "csv":
        lines = [f"# manifest: {_json(manifest.embedded())}", "x,lower,upper,error"]
        for r in rows:
            lines.append(f"{fmt(r.x)},{fmt(r.lower)},{fmt(r.upper)},{(r.error or '').replace(',', ';')}")
        text = "\n".join(lines) + "\n"
    else:
        text = _json({"units": units, "rows": [{"x": r.x, "lower": r.lower, "upper": r.upper, "error": r.error}
                                               for r in rows], "manifest": manifest.embedded()}) + "\n"
    _write(text, ns.out, manifest)
    return EXIT_OK


def _sim_config(ns) -> tuple:
    preset = dict(PRESETS[ns.preset]) if ns.preset else {}
    if preset:
        if ns.u is None and ns.v is None:
            ns.u = preset["u"]
        for key in ("lam", "dt", "M", "grid", "truncate", "D_coef"):
            if getattr(ns, key, None) is None:
                setattr(ns, key, preset[key])
        if ns.d is None:
            ns.d = preset["ambient_dim"] - 1
    _need(ns, "d", "lam", "dt", "M")
    if ns.u is not None and ns.v is not None:
        raise ParameterError("--u and --v are mutually exclusive")
    D_coef = ns.D_coef
    if D_coef is None:
        raise ParameterError("missing required parameter --D-coef (the diffusion coefficient)")
    kwargs = {}
    if ns.v is not None:
        kwargs["v"] = tuple(_floats(ns.v, "v"))
    elif ns.u is not None:
        kwargs["u"] = tuple(_floats(ns.u, "u"))
    else:
        raise ParameterError("give --u, or --v together with --D-coef")
    cfg = SimConfig(
        ambient_dim=ns.d + 1, D_coef=D_coef, dt=ns.dt, lam=ns.lam, M=ns.M,
        seed=0 if ns.seed is None else ns.seed,
        max_steps=ns.max_steps if ns.max_steps is not None else 10**7,
        crossing_mode=ns.crossing_mode or "step", engine=ns.engine or "levy",
        workers=ns.workers, **kwargs,
    )
    params = {"preset": ns.preset, "d": cfg.d, "D_coef": cfg.D_coef, "dt": cfg.dt, "lambda": cfg.lam, "M": cfg.M,
              "max_steps": cfg.max_steps, "crossing_mode": cfg.crossing_mode, "engine": cfg.engine,
              "u": cfg.normalized_drift.tolist()}
    return cfg, params


def cmd_simulate(ns) -> int:
    cfg, params = _sim_config(ns)
    res = simulate_fap(cfg)
    params.update(absorbed=res.absorbed, escaped=res.escaped)
    if ns.grid:
        params.update(grid=ns.grid, truncate=bool(ns.truncate), normalization=ns.normalization or "density")
    manifest = RunManifest("simulate", params, seed=cfg.seed)
    if ns.grid:
        axes = parse_grid(ns.grid)
        grid = build_histogram(res, axes, ns.normalization or "density", truncate=bool(ns.truncate))
        emit_grid(grid, ns.out, ns.format or "csv", manifest)
        return EXIT_OK
    if (ns.format or "csv") == "json":
        text = _json({"samples": res.samples, "absorbed": res.absorbed, "escaped": res.escaped,
                      "manifest": manifest.embedded()}) + "\n"
    else:
        names = [f"n{i + 1}" for i in range(cfg.d)]
        lines = [f"# manifest: {_json(manifest.embedded())}", ",".join(names)]
        lines.extend(",".join(fmt(c) for c in row) for row in res.samples)
        text = "\n".join(lines) + "\n"
    _write(text, ns.out, manifest)
    return EXIT_OK


def cmd_validate(ns) -> int:
    kind = ns.kind or "density"
    alpha = ns.alpha if ns.alpha is not None else 0.01
    if kind == "weak-stability":
        _need(ns, "lam", "lambda2", "M")
        d = 2 if ns.d is None else ns.d
        u = _drift(ns, False)
        seed = 0 if ns.seed is None else ns.seed
        report = weak_stability_test(u, ns.lam, ns.lambda2, d, ns.M, seed, alpha=alpha)
        params = {"kind": kind, "u": u, "lambda": ns.lam, "lambda2": ns.lambda2, "d": d, "M": ns.M, "alpha": alpha}
    else:
        cfg, params = _sim_config(ns)
        params["kind"] = kind
        res = simulate_fap(cfg)
        u = cfg.normalized_drift
        if kind == "density":
            if not ns.grid:
                raise ParameterError("density validation needs --grid")
            grid = build_histogram(res, parse_grid(ns.grid), "density")
            pp = PlanarChannelParams(cfg.d, tuple(u), cfg.lam)
            report = compare_density(grid, pp, k=ns.k if ns.k is not None else 5.0)
            params["grid"] = ns.grid
        else:
            if np.any(u[:-1] != 0):
                raise ParameterError(f"--kind {kind} needs purely vertical drift")
            vp = VdfapParams(float(u[-1]), cfg.lam, cfg.d)
            report = moment_test(res, vp) if kind == "moments" else ks_radial_report(res, vp, alpha)
    manifest = RunManifest("validate", params, seed=ns.seed)
    _dump(report.to_dict(), ns, manifest)
    return EXIT_OK if report.passed is not False else EXIT_VALIDATION


def cmd_selftest(ns) -> int:
    from .acceptance import run_all

    only = None
    if ns.only:
        try:
            only = [int(t) for t in ns.only.split(",")]
        except ValueError:
            raise ParameterError(f"--only must list criterion numbers, got {ns.only!r}") from None
    if ns.workers is not None:
        os.environ[WORKERS_ENV] = str(ns.workers)
    results = run_all(only=only, stream=sys.stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


COMMANDS = {
    "density": cmd_density, "cf": cmd_cf, "entropy": cmd_entropy, "capacity": cmd_capacity,
    "sweep": cmd_sweep, "simulate": cmd_simulate, "validate": cmd_validate, "selftest": cmd_selftest,
}


def _join_negative_values(argv: list) -> list:
    """``--grid -3:3:60`` -> ``--grid=-3:3:60`` so argparse does not mistake the value for a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if (tok.startswith("--") and "=" not in tok and len(nxt) > 1 and nxt[0] == "-"
                and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and dispatch; returns the exit code instead of exiting."""
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        ns = _apply_config(parser, argv)
        if not ns.command:
            parser.print_usage(sys.stderr)
            return EXIT_ERROR
        return COMMANDS[ns.command](ns)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_ERROR
    except FapError as exc:
        sys.stderr.write(f"fapchan: error: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stderr.write(f"fapchan: I/O error: {exc}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())
