"""Batch command-line front-end.

Subcommands
-----------
g-table          tabulate g and g' over an eta grid (CSV)
solve            run the allocation solver, report kappa0 / mass / dual (CSV)
convergence      codebook schedule: size-distortion products + histogram L1
                 (CSV + SVG)
growth-check     evaluate the tail growth condition, print partial sums
codebook-export  build one codebook and write its points (CSV)

All experiments are described by a single JSON config validated against a
schema; ``--seed`` overrides the config seed, ``--out`` the output
directory, and ``--threads`` (or the ORLICZQ_THREADS environment variable)
the Monte Carlo shard pool size.  Identical config + seed produce
byte-identical output files; files are written atomically (temp + rename).

Exit codes: 0 success, 1 usage/config error, 2 numeric/solver failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np
import jsonschema

from .orlicz import PhiFunction, NormSpace
from .gfun import ComplexityFunction
from .sources import (Gaussian1D, GaussianMixture1D, UniformBox, GridDensity,
                      TailWeight, TailSpec, check_growth_condition)
from .allocation import solve
from .codebook import build_codebook, run_convergence_study, save_codebook_csv


class ConfigError(Exception):
    """Invalid configuration; reported on stderr with exit code 1."""


_PHI_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["power", "exp_minus_one", "scaled", "tabulated"]},
        "p": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "base": {"$ref": "#/$defs/phi"},
        "knots": {"type": "array", "minItems": 2, "items": {
            "type": "array", "minItems": 2, "maxItems": 2,
            "items": {"type": "number"}}},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["seed"],
    "additionalProperties": False,
    "$defs": {"phi": _PHI_SCHEMA},
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "phi": {"$ref": "#/$defs/phi"},
        "geometry": {
            "type": "object",
            "required": ["dimension", "norm"],
            "properties": {
                "dimension": {"type": "integer", "minimum": 1, "maximum": 2},
                "norm": {"enum": ["abs", "sup", "euclidean"]},
            },
            "additionalProperties": False,
        },
        "g_variant": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["one_dim_abs", "sup_cube", "hexagon",
                                  "power_law"]},
                "c": {"type": "number", "exclusiveMinimum": 0},
                "p": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "source": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["gaussian", "gaussian_mixture",
                                  "uniform_box", "grid_density"]},
                "mu": {"type": "number"},
                "sigma": {"type": "number", "exclusiveMinimum": 0},
                "weights": {"type": "array", "items": {"type": "number"}},
                "means": {"type": "array", "items": {"type": "number"}},
                "sigmas": {"type": "array", "items": {"type": "number"}},
                "lo": {"type": ["number", "array"]},
                "hi": {"type": ["number", "array"]},
                "values": {"type": "array", "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "budget": {"type": "number", "exclusiveMinimum": 0},
                "dual_tolerance": {"type": "number", "exclusiveMinimum": 0},
                "xi_samples": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "eta_grid": {
            "type": "object",
            "properties": {
                "start": {"type": "number", "exclusiveMinimum": 0},
                "stop": {"type": "number", "exclusiveMinimum": 0},
                "count": {"type": "integer", "minimum": 2},
                "values": {"type": "array", "minItems": 1,
                           "items": {"type": "number", "exclusiveMinimum": 0}},
            },
            "additionalProperties": False,
        },
        "schedule": {"type": "array", "minItems": 1,
                     "items": {"type": "integer", "minimum": 2}},
        "mc": {
            "type": "object",
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "shards": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "codebook": {
            "type": "object",
            "properties": {
                "size": {"type": "integer", "minimum": 2},
                "core_fraction": {"type": "number", "exclusiveMinimum": 0,
                                  "maximum": 1},
                "safety_fraction": {"type": "number", "minimum": 0,
                                    "maximum": 1},
                "shell_start": {"type": "integer", "minimum": 0},
                "subdivision": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "tail": {
            "type": "object",
            "properties": {
                "radius_kind": {"enum": ["geometric", "power"]},
                "radius_scale": {"type": "number", "exclusiveMinimum": 0},
                "radius_rate": {"type": "number", "exclusiveMinimum": 1},
                "budget_gamma": {"type": "number", "exclusiveMinimum": 1},
            },
            "additionalProperties": False,
        },
        "growth": {
            "type": "object",
            "required": ["psi"],
            "properties": {
                "psi": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["power_log", "exp_power"]},
                        "p": {"type": "number", "exclusiveMinimum": 0},
                        "beta": {"type": "number", "minimum": 0},
                        "q": {"type": "number", "exclusiveMinimum": 0},
                    },
                    "additionalProperties": False,
                },
                "n_max": {"type": "integer", "minimum": 2},
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "histogram": {
            "type": "object",
            "properties": {
                "lo": {"type": "number"},
                "hi": {"type": "number"},
                "bins": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"directory": {"type": "string"}},
            "additionalProperties": False,
        },
    },
}


def load_config(path):
    """Read and validate a JSON config; raise ConfigError with paths."""
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path!r} is not valid JSON: {e}")
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: e.json_path)
    if errors:
        lines = [f"  {e.json_path}: {e.message}" for e in errors]
        raise ConfigError("invalid config:\n" + "\n".join(lines))
    sched = cfg.get("schedule")
    if sched is not None and any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("$.schedule: must be strictly increasing")
    return cfg


def build_phi(spec):
    if spec is None:
        raise ConfigError("$.phi: required for this command")
    kind = spec["kind"]
    if kind == "power":
        if "p" not in spec:
            raise ConfigError("$.phi.p: required for power kind")
        return PhiFunction.power(spec["p"])
    if kind == "exp_minus_one":
        return PhiFunction.exp_minus_one()
    if kind == "scaled":
        if "base" not in spec or "delta" not in spec:
            raise ConfigError("$.phi: scaled kind needs base and delta")
        return PhiFunction.scaled(build_phi(spec["base"]), spec["delta"])
    if "knots" not in spec:
        raise ConfigError("$.phi.knots: required for tabulated kind")
    try:
        return PhiFunction.tabulated([tuple(k) for k in spec["knots"]])
    except ValueError as e:
        raise ConfigError(f"$.phi.knots: {e}")


def build_space(spec):
    if spec is None:
        return NormSpace(1, "abs")
    return NormSpace(spec["dimension"], spec["norm"])


def build_g(cfg):
    variant = cfg.get("g_variant", {"kind": "one_dim_abs"})
    kind = variant["kind"]
    space = build_space(cfg.get("geometry"))
    if kind == "power_law":
        if "c" not in variant or "p" not in variant:
            raise ConfigError("$.g_variant: power_law kind needs c and p")
        return ComplexityFunction.power_law(variant["c"], variant["p"],
                                            space.dimension)
    phi = build_phi(cfg.get("phi"))
    try:
        if kind == "one_dim_abs":
            return ComplexityFunction.one_dim_abs(phi)
        if kind == "sup_cube":
            return ComplexityFunction.sup_cube(phi, space.dimension)
        return ComplexityFunction.hexagon(phi)
    except ValueError as e:
        raise ConfigError(f"$.g_variant: {e}")


def build_source(spec):
    if spec is None:
        raise ConfigError("$.source: required for this command")
    kind = spec["kind"]
    try:
        if kind == "gaussian":
            return Gaussian1D(spec.get("mu", 0.0), spec.get("sigma", 1.0))
        if kind == "gaussian_mixture":
            return GaussianMixture1D(spec["weights"], spec["means"],
                                     spec["sigmas"])
        if kind == "uniform_box":
            return UniformBox(spec["lo"], spec["hi"])
        return GridDensity(spec["values"], spec["lo"], spec["hi"])
    except KeyError as e:
        raise ConfigError(f"$.source: missing field {e} for kind {kind!r}")
    except ValueError as e:
        raise ConfigError(f"$.source: {e}")


def build_tail(spec):
    if spec is None:
        return TailSpec()
    try:
        return TailSpec(**spec)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"$.tail: {e}")


def build_psi(spec):
    try:
        if spec["kind"] == "power_log":
            return TailWeight.power_log(spec["p"], spec.get("beta", 0.0))
        return TailWeight.exp_power(spec["q"])
    except KeyError as e:
        raise ConfigError(f"$.growth.psi: missing field {e}")
    except ValueError as e:
        raise ConfigError(f"$.growth.psi: {e}")


def atomic_write(path, text):
    """Write text to path via a temp file in the same directory + rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_orliczq_")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(meta, header, rows, footer=()):
    """RFC-4180-style CSV: '#' metadata lines, header row, data, footer."""
    out = []
    for key in meta:
        out.append(f"# {key}={meta[key]}")
    out.append(",".join(header))
    for row in rows:
        out.append(",".join(repr(float(v)) if isinstance(v, float)
                            else str(v) for v in row))
    out.extend(footer)
    return "\r\n".join(out) + "\r\n"


def svg_line_plot(xs, ys, reference=None, title="", xlabel="", ylabel="",
                  x_tick_labels=None):
    """Minimal hand-rolled SVG polyline plot with an optional reference line."""
    width, height = 640, 400
    ml, mr, mt, mb = 70, 20, 36, 50
    x0, x1 = min(xs), max(xs)
    y_all = list(ys) + ([reference] if reference is not None else [])
    y0, y1 = min(y_all), max(y_all)
    pad = 0.08 * (y1 - y0) if y1 > y0 else max(0.1 * abs(y1), 1e-12)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x1 = x0 + 1.0

    def px(x):
        return ml + (x - x0) / (x1 - x0) * (width - ml - mr)

    def py(y):
        return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" '
        f'y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" '
        f'stroke="black"/>',
    ]
    for k in range(5):
        yv = y0 + k * (y1 - y0) / 4
        parts.append(f'<line x1="{ml - 4}" y1="{py(yv):.2f}" x2="{ml}" '
                     f'y2="{py(yv):.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{py(yv) + 4:.2f}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{yv:.4g}</text>')
    labels = x_tick_labels or [f"{x:g}" for x in xs]
    for x, lab in zip(xs, labels):
        parts.append(f'<line x1="{px(x):.2f}" y1="{height - mb}" '
                     f'x2="{px(x):.2f}" y2="{height - mb + 4}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{px(x):.2f}" y="{height - mb + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{lab}</text>')
    if reference is not None:
        parts.append(f'<line x1="{ml}" y1="{py(reference):.2f}" '
                     f'x2="{width - mr}" y2="{py(reference):.2f}" '
                     f'stroke="#d62728" stroke-dasharray="6,4"/>')
        parts.append(f'<text x="{width - mr - 4}" '
                     f'y="{py(reference) - 6:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11" '
                     f'fill="#d62728">{ylabel} limit {reference:.6g}</text>')
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" '
                 f'stroke-width="2"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" '
                     f'fill="#1f77b4"/>')
    parts.append(f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 10}" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(mt + height - mb) / 2:.1f}" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12" transform="rotate(-90 18 '
                 f'{(mt + height - mb) / 2:.1f})">{ylabel}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _eta_grid(cfg):
    spec = cfg.get("eta_grid")
    if spec is None:
        return [2.0 ** k for k in range(-6, 7)]
    if "values" in spec:
        return [float(v) for v in spec["values"]]
    start = spec.get("start", 2.0 ** -6)
    stop = spec.get("stop", 2.0 ** 6)
    count = spec.get("count", 13)
    if stop <= start:
        raise ConfigError("$.eta_grid: stop must exceed start")
    return list(np.exp(np.linspace(math.log(start), math.log(stop), count)))


def cmd_g_table(cfg, out_dir, seed, threads):
    g = build_g(cfg)
    etas = _eta_grid(cfg)
    rows = [(float(eta), g.value(eta), g.derivative(eta)) for eta in etas]
    values = [r[1] for r in rows]
    nonincreasing = all(b <= a * (1.0 + 1e-12) + 1e-15
                        for a, b in zip(values, values[1:]))
    convex = True
    for (e1, v1, _), (e2, v2, _) in zip(rows, rows[1:]):
        mid = g.value(0.5 * (e1 + e2))
        if mid > 0.5 * (v1 + v2) + 1e-9 * max(1.0, abs(v1), abs(v2)):
            convex = False
    meta = {"variant": g.variant, "seed": seed}
    footer = [f"# nonincreasing={str(nonincreasing).lower()}",
              f"# midpoint_convex={str(convex).lower()}"]
    path = os.path.join(out_dir, "g_table.csv")
    atomic_write(path, csv_text(meta, ["eta", "g", "gprime"], rows, footer))
    print(f"wrote {path} ({len(rows)} rows, nonincreasing={nonincreasing}, "
          f"midpoint_convex={convex})")
    return 0


def cmd_solve(cfg, out_dir, seed, threads):
    g = build_g(cfg)
    source = build_source(cfg.get("source"))
    solver_cfg = cfg.get("solver", {})
    budget = solver_cfg.get("budget", 1.0)
    dual_tol = solver_cfg.get("dual_tolerance", 1e-4)
    sol = solve(g, source, budget=budget)
    lo, hi = source.core_interval
    xs = np.linspace(lo, hi, solver_cfg.get("xi_samples", 201))
    rows = [(float(x), float(sol.xi(float(x)))) for x in xs]
    meta = {
        "kappa0": repr(sol.kappa0),
        "point_mass": repr(sol.point_mass),
        "dual_value": repr(sol.dual_value),
        "constraint_value": repr(sol.constraint_value),
        "degenerate": str(sol.degenerate).lower(),
        "jump": str(sol.jump).lower(),
        "budget": repr(float(budget)),
        "seed": seed,
    }
    if sol.alpha_mix is not None:
        meta["alpha_mix"] = repr(sol.alpha_mix)
    path = os.path.join(out_dir, "allocation.csv")
    atomic_write(path, csv_text(meta, ["x", "xi"], rows))
    gap = abs(sol.point_mass - sol.dual_value)
    ok = gap <= dual_tol * max(1.0, sol.point_mass)
    print(f"kappa0={sol.kappa0!r}")
    print(f"point_mass={sol.point_mass!r}")
    print(f"dual_value={sol.dual_value!r}")
    print(f"constraint_value={sol.constraint_value!r}")
    print(f"degenerate={sol.degenerate} jump={sol.jump}")
    print(f"primal_dual_gap={gap!r} (tolerance "
          f"{dual_tol * max(1.0, sol.point_mass)!r})")
    print(f"wrote {path}")
    if not ok:
        print("primal and dual values disagree beyond tolerance",
              file=sys.stderr)
        return 2
    return 0


def cmd_convergence(cfg, out_dir, seed, threads):
    g = build_g(cfg)
    source = build_source(cfg.get("source"))
    space = build_space(cfg.get("geometry"))
    phi = build_phi(cfg.get("phi"))
    solver_cfg = cfg.get("solver", {})
    sol = solve(g, source, budget=solver_cfg.get("budget", 1.0))
    if sol.degenerate:
        raise ConfigError("degenerate allocation (zero mass): no codebook "
                          "schedule to run")
    schedule = cfg.get("schedule", [256, 512, 1024, 2048, 4096, 8192])
    mc = cfg.get("mc", {})
    hist = cfg.get("histogram", {})
    d = space.dimension
    edges = (np.linspace(hist.get("lo", -6.0), hist.get("hi", 6.0),
                         hist.get("bins", 24) + 1) if d == 1 else None)
    cb_cfg = dict(cfg.get("codebook", {}))
    cb_cfg.pop("size", None)
    rows = run_convergence_study(
        sol.xi, sol.point_mass, source, space, phi, schedule,
        tail=build_tail(cfg.get("tail")), n_samples=mc.get("samples", 25000),
        shards=mc.get("shards", 8), seed=seed, threads=threads,
        histogram_edges=edges, **cb_cfg)
    meta = {"kappa0": repr(sol.kappa0), "point_mass": repr(sol.point_mass),
            "seed": seed, "samples": mc.get("samples", 25000),
            "shards": mc.get("shards", 8)}
    table = [(r["size_target"], r["size"], r["distortion"],
              r["distortion_se"], r["product"],
              r.get("histogram_l1", float("nan"))) for r in rows]
    path = os.path.join(out_dir, "convergence.csv")
    atomic_write(path, csv_text(
        meta, ["n", "size", "distortion", "distortion_se", "product",
               "histogram_l1"], table))
    limit = sol.point_mass ** (1.0 / d)
    svg = svg_line_plot(
        [math.log2(r["size_target"]) for r in rows],
        [r["product"] for r in rows],
        reference=limit, title="size-distortion product along the schedule",
        xlabel="log2 n", ylabel="n^(1/d) * distortion",
        x_tick_labels=[str(r["size_target"]) for r in rows])
    svg_path = os.path.join(out_dir, "convergence.svg")
    atomic_write(svg_path, svg)
    for r in rows:
        print(f"n={r['size_target']} size={r['size']} "
              f"product={r['product']!r} "
              f"histogram_l1={r.get('histogram_l1', float('nan'))!r}")
    print(f"wrote {path}")
    print(f"wrote {svg_path}")
    return 0


def cmd_growth_check(cfg, out_dir, seed, threads):
    growth = cfg.get("growth")
    if growth is None:
        raise ConfigError("$.growth: required for growth-check")
    phi = build_phi(cfg.get("phi"))
    space = build_space(cfg.get("geometry"))
    psi = build_psi(growth["psi"])
    tail = build_tail(cfg.get("tail"))
    report = check_growth_condition(
        phi, psi, space, tail, n_max=growth.get("n_max", 200),
        rel_tol=growth.get("rel_tol", 1e-9))
    finite = [t for t in report.log_terms if math.isfinite(t)]
    print(f"terms={report.n_terms} skipped_head={report.skipped_head} "
          f"peak_index={report.peak_index}")
    if finite:
        partial = np.logaddexp.accumulate(finite)
        show = {0, len(finite) - 1, min(report.peak_index, len(finite) - 1)}
        for i in sorted(show):
            print(f"log_partial_sum[{i}]={float(partial[i])!r}")
    print(f"log_sum={report.log_sum!r}")
    print(f"log_remainder={report.log_remainder!r}")
    print(f"tail_ratio={report.tail_ratio!r}")
    print(f"verdict={report.verdict}")
    print(report.message)
    return 0 if report.converged else 2


def cmd_codebook_export(cfg, out_dir, seed, threads):
    g = build_g(cfg)
    source = build_source(cfg.get("source"))
    space = build_space(cfg.get("geometry"))
    solver_cfg = cfg.get("solver", {})
    sol = solve(g, source, budget=solver_cfg.get("budget", 1.0))
    if sol.degenerate:
        raise ConfigError("degenerate allocation (zero mass): nothing to "
                          "export")
    cb_cfg = dict(cfg.get("codebook", {}))
    size = cb_cfg.pop("size", None)
    if size is None:
        sched = cfg.get("schedule")
        if not sched:
            raise ConfigError("$.codebook.size or $.schedule required for "
                              "codebook-export")
        size = sched[-1]
    cb = build_codebook(sol.xi, sol.point_mass, source, space, size,
                        tail=build_tail(cfg.get("tail")), **cb_cfg)
    path = os.path.join(out_dir, "codebook.csv")
    save_codebook_csv(path, cb, extra_meta={
        "kappa0": repr(sol.kappa0), "point_mass": repr(sol.point_mass),
        "seed": seed})
    print(f"wrote {path} ({cb.size} points)")
    return 0


_COMMANDS = {
    "g-table": cmd_g_table,
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "growth-check": cmd_growth_check,
    "codebook-export": cmd_codebook_export,
}


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def main(argv=None):
    parser = _Parser(prog="orliczq",
                     description="quantization limit computations under "
                                 "Orlicz-norm distortion")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="Monte Carlo thread pool size "
                            "(default: ORLICZQ_THREADS or 1)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg["seed"]
        threads = args.threads
        if threads is None:
            try:
                threads = int(os.environ.get("ORLICZQ_THREADS", "1"))
            except ValueError:
                raise ConfigError("ORLICZQ_THREADS must be an integer")
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        out_dir = args.out or cfg.get("output", {}).get("directory", ".")
        os.makedirs(out_dir, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir, int(seed), threads)
    except ConfigError as e:
        print(f"orliczq: config error: {e}", file=sys.stderr)
        return 1
    except (RuntimeError, FloatingPointError, ValueError) as e:
        print(f"orliczq: numeric failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
