"""Batch front end: ``python -m phasespace_ur <verb> [--config FILE] [--out DIR] ...``.

Verbs are ``curve``, ``constant``, ``mur-check``, ``clone`` and ``meanfield``.
A config is a JSON object with a ``schema`` field; ``--set key=value`` (dotted
keys allowed) overrides any scalar. Exit codes: 2 config error, 3 solver
failure, 4 unsupported branch, 5 failed check.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

import numpy as np

from . import analytic
from .cloning import ClonerParams, cloner_sweep
from .covariant import mur_equals_pur_check
from .groundstate import Scenario, SolverError, default_t_grid, sweep_radius, sweep_tradeoff
from .lca import bits, parse_group
from .metrics import MetricSpec, parse_metric
from .operators import pure
from .svgplot import line_plot

log = logging.getLogger("phasespace_ur")

SCHEMA = "phasespace-ur/1"

EXIT_CONFIG, EXIT_SOLVER, EXIT_UNSUPPORTED, EXIT_CHECK = 2, 3, 4, 5

DEFAULTS = {
    "curve": {
        "group": "cyclic:3",
        "metric_q": {"name": "discrete", "exponent": 1},
        "metric_p": {"name": "discrete", "exponent": 1},
        "t_grid": {"lo": 1e-3, "hi": 1e3, "num": 64},
        "radii": {"lo": 0.5, "hi": 4.0, "num": 16},
    },
    "constant": {"alpha": 2, "beta": 2, "n": 1, "numeric": False},
    "mur-check": {
        "group": "cyclic:3",
        "metric_q": {"name": "discrete", "exponent": 1},
        "metric_p": {"name": "discrete", "exponent": 1},
        "samples": 100,
        "generator": "random",
        "tolerance": 1e-8,
    },
    "clone": {"n": 3, "step": 0.01},
    "meanfield": {
        "alpha": 1,
        "beta": 1,
        "n_list": [2, 3, 4, 5, 6, 7, 8],
        "t_grid": {"lo": 1e-2, "hi": 1e2, "num": 41},
        "points": 201,
    },
}


class ConfigError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


# -- config handling ---------------------------------------------------------

def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: dict, items) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        node = cfg
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override inside scalar {key!r}")
        node[parts[-1]] = _coerce(val)
    return cfg


def load_config(verb: str, path: str | None, overrides=None) -> dict:
    cfg = copy.deepcopy(DEFAULTS[verb])
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        schema = user.pop("schema", SCHEMA)
        if schema != SCHEMA:
            raise ConfigError(f"unsupported schema {schema!r}; expected {SCHEMA!r}")
        unknown = set(user) - set(cfg) - {"seed", "solver", "outputs"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    return apply_overrides(cfg, overrides)


def _metric(obj) -> MetricSpec:
    try:
        if isinstance(obj, str):
            name, _, exp = obj.partition(":")
            return parse_metric(name, exp or "1")
        return parse_metric(obj["name"], str(obj.get("exponent", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad metric {obj!r}: {exc}") from exc


def _grid(obj, log_scale=True) -> np.ndarray:
    if isinstance(obj, list):
        arr = np.asarray(obj, dtype=float)
    else:
        try:
            lo, hi, num = float(obj["lo"]), float(obj["hi"]), int(obj["num"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid {obj!r}") from exc
        if num < 0:
            raise ConfigError("grid size must be non-negative")
        if log_scale:
            if lo <= 0 or hi <= 0:
                raise ConfigError("log grid bounds must be positive")
            arr = default_t_grid(num, lo, hi)
        else:
            arr = np.linspace(lo, hi, num)
    if arr.size == 0:
        raise ConfigError("empty grid")
    return arr


def _scenario(cfg) -> Scenario:
    try:
        g = parse_group(str(cfg["group"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad group: {exc}") from exc
    try:
        return Scenario(g, _metric(cfg["metric_q"]), _metric(cfg["metric_p"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _exp_value(x) -> float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad exponent {x!r}") from exc
    if not v >= 1:
        raise ConfigError("exponents must be >= 1 or inf")
    return v


# -- output ------------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "inf" if math.isinf(v) else repr(v)
    return v


def write_outputs(out_dir: str, files: dict) -> list:
    """Write every file via a temporary sibling, then rename into place."""
    os.makedirs(out_dir, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, os.path.join(out_dir, name)))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]


# -- verbs -------------------------------------------------------------------

def cmd_curve(cfg, svg=False, seed=None):
    s = _scenario(cfg)
    if math.isinf(s.alpha) or math.isinf(s.beta):
        if math.isinf(s.alpha) and math.isinf(s.beta):
            raise NotImplementedError("both exponents infinite")
        region = sweep_radius(s, _grid(cfg["radii"], log_scale=False))
    else:
        region = sweep_tradeoff(s, _grid(cfg["t_grid"]))
    if not region.points:
        raise SolverError("no sweep point converged")
    rows = []
    for p in region.points:
        if math.isinf(s.alpha) or math.isinf(s.beta):
            bound = math.nan
        else:
            bound = region.bound(p.dq**s.alpha) ** (1 / s.beta) if region.bound(p.dq**s.alpha) > 0 else 0.0
        rows.append((p.t, p.energy, p.dq, p.dp, bound))
    files = {"curve.csv": _csv_text(["t", "energy", "dq", "dp", "envelope_bound"], rows)}
    if svg:
        series = [("sweep", region.dq, region.dp)]
        if not (math.isinf(s.alpha) or math.isinf(s.beta)):
            d, b = region.envelope(200)
            series.append(("envelope", d ** (1 / s.alpha), np.clip(b, 0, None) ** (1 / s.beta)))
        files["curve.svg"] = line_plot(series, title=f"tradeoff on {s.group.name}",
                                       xlabel="d(Q)", ylabel="d(P)", markers=True)
    summary = {"points": len(rows), "first": rows[0][2:4], "last": rows[-1][2:4]}
    return files, summary


def cmd_constant(cfg, svg=False, seed=None):
    alpha, beta = _exp_value(cfg["alpha"]), _exp_value(cfg["beta"])
    try:
        n = int(cfg["n"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("n must be an integer") from exc
    if n < 1:
        raise ConfigError("n must be >= 1")
    value, method, err = analytic.best_constant(alpha, beta, n, numeric=bool(cfg.get("numeric")))
    table = analytic.ConstantTable()
    table.add(alpha, beta, n, value, method, err)
    summary = {"alpha": alpha, "beta": beta, "n": n, "c": value, "method": method, "error": err}
    return {"constants.csv": table.to_csv()}, summary


def cmd_murcheck(cfg, svg=False, seed=None):
    s = _scenario(cfg)
    kind = cfg.get("generator", "random")
    samples = int(cfg["samples"])
    g = s.group
    gens = None
    if kind == "point":
        gens = [pure(np.eye(g.dim)[0])]
    elif kind == "uniform":
        gens = [np.eye(g.dim) / g.dim]
    elif kind not in ("random", "mixed"):
        raise ConfigError(f"unknown generator kind {kind!r}")
    rep = mur_equals_pur_check(s, samples, seed, mixed=(kind == "mixed"), generators=gens,
                               tol=float(cfg.get("tolerance", 1e-8)))
    data = rep.as_dict()
    data["pairs"] = [{"mu_P": r[0], "mu_Q": r[1], "spread_P": r[2], "spread_Q": r[3]}
                     for r in rep.pairs.tolist()]
    files = {"mur_report.json": json.dumps(data, indent=2) + "\n"}
    if not rep.passed:
        raise CheckFailed(f"measurement and preparation uncertainty disagree by {rep.max_abs_deviation:.3g}",
                          files)
    return files, rep.as_dict()


def cmd_clone(cfg, svg=False, seed=None):
    try:
        n = int(cfg["n"])
        step = float(cfg["step"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 2 <= n <= 8:
        raise ConfigError("clone dimension must be in 2..8")
    if not 0 < step <= 0.5:
        raise ConfigError("step must be in (0, 0.5]")
    rows = cloner_sweep(n, step)
    D = analytic.qudit_radius(n)
    dq = np.linspace(0, D, int(round(D / step)) + 1)
    opt = np.column_stack([dq, analytic.qudit_boundary(n, dq)])
    files = {
        "clone_ellipse.csv": _csv_text(["theta", "a", "b", "dq", "dp"], rows),
        "optimal_boundary.csv": _csv_text(["dq", "dp"], opt),
    }
    if svg:
        files["clone.svg"] = line_plot(
            [("optimal", opt[:, 0], opt[:, 1]), ("cloner", rows[:, 3], rows[:, 4])],
            title=f"qudit n={n}", xlabel="d(Q)", ylabel="d(P)")
    ClonerParams.from_angle(n, 0.0)  # validates the endpoint
    return files, {"n": n, "rows": len(rows)}


def cmd_meanfield(cfg, svg=False, seed=None):
    alpha, beta = _exp_value(cfg["alpha"]), _exp_value(cfg["beta"])
    if math.isinf(alpha) or math.isinf(beta):
        raise NotImplementedError("mean-field comparison needs finite exponents")
    ns = [int(n) for n in cfg["n_list"]]
    if not ns or any(n < 1 or n > 12 for n in ns):
        raise ConfigError("n_list entries must be in 1..12")
    ts = _grid(cfg["t_grid"])
    x, y = analytic.meanfield_boundary(alpha, beta, int(cfg.get("points", 201)))
    files = {"meanfield_asymptotic.csv": _csv_text(["x", "y"], np.column_stack([x, y]))}
    gaps = []
    series = [("n=inf", x, y)]
    for n in ns:
        s = Scenario(bits(n), MetricSpec("hamming", alpha), MetricSpec("hamming", beta))
        region = sweep_tradeoff(s, ts)
        if len(region.points) != len(ts):
            raise SolverError(f"sweep failed for n={n}")
        gap = analytic.meanfield_gap(region.ts, region.energies, alpha, beta)
        gaps.append((n, gap))
        rows = [(p.t, p.energy, p.moment_q, p.moment_p, p.dq, p.dp) for p in region.points]
        files[f"meanfield_n{n}.csv"] = _csv_text(
            ["t", "energy", "moment_q", "moment_p", "dq", "dp"], rows)
        series.append((f"n={n}", [r[2] for r in rows], [r[3] for r in rows]))
    files["meanfield_gaps.csv"] = _csv_text(["n", "max_gap"], gaps)
    if svg:
        files["meanfield.svg"] = line_plot(series, title="qubit strings",
                                           xlabel="d(Q)^alpha", ylabel="d(P)^beta")
    return files, {"gaps": {str(n): g for n, g in gaps}}


VERBS = {
    "curve": cmd_curve,
    "constant": cmd_constant,
    "mur-check": cmd_murcheck,
    "clone": cmd_clone,
    "meanfield": cmd_meanfield,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasespace-ur", description=__doc__.splitlines()[0])
    ap.add_argument("verb", choices=sorted(VERBS))
    ap.add_argument("--config", help="JSON scenario file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--svg", action="store_true", help="also write SVG plots")
    ap.add_argument("--seed", type=int, default=None, help="seed for random sampling")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config scalar (repeatable)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.verb, args.config, args.overrides)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if seed is not None and (int(seed) < 0 or int(seed) >= 2**64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        files, summary = VERBS[args.verb](cfg, svg=args.svg, seed=seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotImplementedError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except CheckFailed as exc:
        msg, files = exc.args
        write_outputs(args.out, files)
        print(f"check failed: {msg}", file=sys.stderr)
        return EXIT_CHECK
    except (SolverError, analytic.ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    written = write_outputs(args.out, files)
    print(json.dumps(summary, default=_json_default))
    for path in written:
        log.info("wrote %s", path)
    return 0


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


if __name__ == "__main__":
    sys.exit(main())
