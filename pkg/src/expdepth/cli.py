"""Command-line experiment runner.

    expdepth walk    --group Z --n 0,10,100 --trials 10000 --seed 1
    expdepth depth   --group H --element H:0,0,2
    expdepth lambda  --group Z --K 5
    expdepth spectra --group SL3/2 --n-max 300
    expdepth density --group F2 --predicate even --n 10
    expdepth expect  --group Z --n 1,1000,10000 --K 12 --exact

Parameters may also come from a ``key = value`` file given by ``--config``;
flags override the file. ``EXPDEPTH_OUT_DIR`` and ``EXPDEPTH_THREADS`` set the
output directory and worker count. Every run writes its data file(s) and a
``manifest.json`` to the output directory and echoes the main data to stdout.

Exit codes: 0 ok, 2 usage, 3 capacity, 4 numerical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import groups as grp
from .depth import depth
from .density import ball_enumerate, parse_predicate
from .errors import ExpDepthError, UsageError
from .expectations import convergence_report
from .quotients import lambda_table, parse_quotient
from .spectra import verify_mixing_bound
from .walks import WalkConfig, exact_expected_depth_integer, monte_carlo_expected_depth

SCHEMAS = {"walk": "walk/1", "density": "density/1", "expect": "expect/1"}

DEFAULTS = {
    "group": None,
    "n": None,
    "trials": 10_000,
    "seed": 0,
    "cap": 64,
    "K": 8,
    "element": None,
    "predicate": "even",
    "n_max": 300,
    "method": None,
    "exact": False,
    "out_dir": None,
    "threads": None,
}
INT_KEYS = {"trials", "seed", "cap", "K", "n_max", "threads"}
BOOL_KEYS = {"exact"}
REQUIRED = {
    "walk": ("group", "n"),
    "depth": ("group", "element"),
    "lambda": ("group",),
    "spectra": ("group",),
    "density": ("group", "n"),
    "expect": ("group", "n"),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expdepth", description="Depth, intersection growth and lazy random walks.")
    p.add_argument("--version", action="version", version=f"expdepth {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--group", help="group spec, e.g. Z, Z^2, H, F2, Z/4xZ/6, SL3/2")
    common.add_argument("--out-dir", dest="out_dir", help="output directory (env EXPDEPTH_OUT_DIR)")
    common.add_argument("--threads", type=int, help="worker threads (env EXPDEPTH_THREADS)")

    s = sub.add_parser("walk", parents=[common], argument_default=argparse.SUPPRESS, help="Monte Carlo expected depth per n")
    s.add_argument("--n", help="step count or comma-separated grid")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--cap", type=int, help="depth cap; deeper values count as cap + 1")

    s = sub.add_parser("depth", parents=[common], argument_default=argparse.SUPPRESS, help="depth of one element")
    s.add_argument("--element", help="element literal, e.g. Z:6 or H:0,0,2")
    s.add_argument("--cap", type=int)

    s = sub.add_parser("lambda", parents=[common], argument_default=argparse.SUPPRESS, help="intersection growth table [G:Lambda_k]")
    s.add_argument("--K", type=int)

    s = sub.add_parser("spectra", parents=[common], argument_default=argparse.SUPPRESS, help="mu_2 and mixing-bound check on a finite quotient")
    s.add_argument("--n-max", dest="n_max", type=int)
    s.add_argument("--method", choices=["eigh", "jacobi", "iterative"])

    s = sub.add_parser("density", parents=[common], argument_default=argparse.SUPPRESS, help="ball census for a predicate")
    s.add_argument("--n", help="radius")
    s.add_argument("--predicate", help="even | mult:m | kernel:Q")

    s = sub.add_parser("expect", parents=[common], argument_default=argparse.SUPPRESS, help="convergence report against the presumed limit")
    s.add_argument("--n", help="comma-separated n grid")
    s.add_argument("--K", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--exact", action="store_true", default=argparse.SUPPRESS)
    return p


def read_config(path: str) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (t.strip() for t in line.partition("="))
        key = key.replace("-", "_")
        if not sep or key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: expected 'key = value' with a known key, got {raw.strip()!r}")
        out[key] = _coerce(key, value, f"{path}:{lineno}")
    return out


def _coerce(key: str, value, where: str):
    if key in INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise UsageError(f"{where}: {key} must be an integer, got {value!r}") from None
    if key in BOOL_KEYS and isinstance(value, str):
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"{where}: {key} must be a boolean, got {value!r}")
        return value.lower() in ("true", "1", "yes")
    return value


def resolve(args: argparse.Namespace) -> dict:
    """defaults < environment < config file < flags."""
    cfg = dict(DEFAULTS)
    env_out, env_threads = os.environ.get("EXPDEPTH_OUT_DIR"), os.environ.get("EXPDEPTH_THREADS")
    if env_out:
        cfg["out_dir"] = env_out
    if env_threads:
        cfg["threads"] = _coerce("threads", env_threads, "EXPDEPTH_THREADS")
    flags = vars(args).copy()
    command = flags.pop("command")
    if "config" in flags:
        cfg.update(read_config(flags.pop("config")))
    cfg.update(flags)
    cfg["command"] = command
    missing = [k for k in REQUIRED[command] if cfg.get(k) is None]
    if missing:
        raise UsageError(f"{command}: missing required field(s) {', '.join(missing)}")
    cfg["out_dir"] = cfg["out_dir"] or "."
    return cfg


def _grid(text) -> list[int]:
    try:
        grid = [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"n must be an integer or comma-separated list, got {text!r}") from None
    if not grid or min(grid) < 0:
        raise UsageError(f"n grid must be non-empty and non-negative, got {text!r}")
    return grid


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _csv(header: str, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_walk(cfg) -> dict:
    G = grp.parse_group(cfg["group"])
    rows = []
    for n in _grid(cfg["n"]):
        mc = monte_carlo_expected_depth(WalkConfig(G, n, cfg["seed"], cfg["trials"]), cfg["cap"], cfg["threads"])
        exact = exact_expected_depth_integer(n) if isinstance(G, grp.IntegerGroup) else None
        rows.append([n, _num(mc.mean), _num(mc.stderr), mc.cap_hits, _num(exact)])
    head = f"{SCHEMAS['walk']} group={G.spec} trials={cfg['trials']} seed={cfg['seed']} cap={cfg['cap']}"
    return {"walk.csv": _csv(head, ["n", "estimate", "stderr", "cap_hits", "exact"], rows)}


def cmd_depth(cfg) -> dict:
    G = grp.parse_group(cfg["group"])
    g = grp.parse_element(cfg["element"], G)
    result = depth(g, G, cfg["cap"]).to_json()
    result["element"] = grp.format_element(g, G)
    result["group"] = G.spec
    return {"depth.json": _json(result)}


def cmd_lambda(cfg) -> dict:
    G = grp.parse_group(cfg["group"])
    return {"lambda.csv": lambda_table(G, cfg["K"]).to_csv()}


def cmd_spectra(cfg) -> dict:
    q = parse_quotient(cfg["group"])
    from .spectra import build_lazy_transition, symmetric_spectrum

    report = verify_mixing_bound(q, cfg["n_max"]).to_json()
    if cfg["method"]:
        report["mu2"] = symmetric_spectrum(build_lazy_transition(q), cfg["method"]).mu2
        report["method"] = cfg["method"]
    report["generators"] = list(q.target.generators)
    report["n_max"] = cfg["n_max"]
    return {"spectra.json": _json(report)}


def cmd_density(cfg) -> dict:
    G = grp.parse_group(cfg["group"])
    pred = parse_predicate(cfg["predicate"])
    (radius,) = _grid(cfg["n"])[-1:]
    rows = [[c.radius, c.ball, c.hits, c.ratio.numerator, c.ratio.denominator] for c in ball_enumerate(G, radius, pred)]
    head = f"{SCHEMAS['density']} group={G.spec} predicate={cfg['predicate']}"
    return {"density.csv": _csv(head, ["n", "ball", "hits", "ratio_num", "ratio_den"], rows)}


def cmd_expect(cfg) -> dict:
    G = grp.parse_group(cfg["group"])
    grid = _grid(cfg["n"])
    exact = bool(cfg["exact"])
    rep = convergence_report(G, grid, cfg["K"], cfg["trials"], cfg["seed"], exact=exact, threads=cfg["threads"])
    rows = [
        [r.n, _num(r.estimate), _num(r.stderr), "exact" if r.exact else "mc", r.cap_hits,
         _num(r.partial), _num(r.tail_bound), _num(r.gap), _num(r.defect_bound), "ok" if r.fatou_ok else "violation"]
        for r in rep.rows
    ]
    head = f"{SCHEMAS['expect']} group={G.spec} K={cfg['K']} " + (
        "mode=exact" if exact else f"mode=mc trials={cfg['trials']} seed={cfg['seed']}"
    )
    cols = ["n", "estimate", "stderr", "kind", "cap_hits", "partial_limit", "tail_bound", "gap", "defect_bound", "fatou"]
    summary = {
        "group": G.spec,
        "K": cfg["K"],
        "presumed_limit_partial": rep.limit.value,
        "presumed_limit_exact": str(rep.limit.exact),
        "tail_bound": rep.limit.tail_bound,
        "tail_method": rep.limit.tail_method,
        "divergence_flag": rep.limit.divergent,
        "fatou_n0": rep.n0,
        "fatou_violations": rep.fatou_violations,
    }
    curve = "".join(f"{r.n} {r.estimate!r}\n" for r in rep.rows)
    return {"expect.csv": _csv(head, cols, rows), "expect.json": _json(summary), "expect_curve.dat": curve}


COMMANDS = {
    "walk": cmd_walk,
    "depth": cmd_depth,
    "lambda": cmd_lambda,
    "spectra": cmd_spectra,
    "density": cmd_density,
    "expect": cmd_expect,
}


def run_experiment(cfg: dict) -> dict[str, str]:
    """Run one configured experiment and return {file name: content}."""
    return COMMANDS[cfg["command"]](cfg)


def _write(cfg: dict, outputs: dict[str, str], wall: float) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (out / name).write_text(text)
    manifest = {
        "config": {k: v for k, v in sorted(cfg.items())},
        "files": sorted(outputs),
        "versions": {
            "expdepth": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": round(wall, 3),
    }
    (out / "manifest.json").write_text(_json(manifest))
    return out


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        start = time.perf_counter()
        outputs = run_experiment(cfg)
        _write(cfg, outputs, time.perf_counter() - start)
    except ExpDepthError as exc:
        print(f"expdepth: error: {exc}", file=sys.stderr)
        return exc.exit_code
    first = next(iter(outputs.values()))
    sys.stdout.write(first)
    return 0


if __name__ == "__main__":
    sys.exit(main())
