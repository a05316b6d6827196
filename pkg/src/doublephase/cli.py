"""Command line entry point: ``doublephase <subcommand> [--config PATH] [--out DIR]``.

Subcommands: ``grid-info``, ``verify-ckn``, ``embed``, ``probe``, ``solve``,
``sweep``. Every run writes its artifacts and a ``manifest.json`` into the
output directory.

Exit status: 0 on success (non-converged solves are flagged inside the
artifacts), 1 on configuration or hypothesis errors, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import estimate_embedding, scan_epsilon, verify_ckn
from .exprparse import ExprError, eval_on_grid, parse_expr
from .grid import DomainError, DomainSpec, Grid, build_grid, integrate, make_bump, random_bumps
from .solver import (GeometryReport, SolveConfig, default_seed_bump, make_rng,
                     probe_mountain, probe_valley, solve_eigen, sweep_lambda)
from .energy import ProblemParams
from .varexp import AdmissibilityError, ExponentField, validate_admissibility

log = logging.getLogger("doublephase")

SUBCOMMANDS = ("grid-info", "verify-ckn", "embed", "probe", "solve", "sweep")
_CONTEXT = {"grid-info": "ckn", "verify-ckn": "ckn", "embed": "embedding",
            "probe": "eigen", "solve": "eigen", "sweep": "eigen"}
_REQUIRED = {"grid-info": (), "verify-ckn": ("gamma",), "embed": ("gamma", "s"),
             "probe": ("gamma", "s", "lambda"), "solve": ("gamma", "s", "lambda"),
             "sweep": ("gamma", "s", "lambdas")}
_BLOCKS = ("solver", "ensemble", "probe", "ckn", "output")


class ConfigError(ValueError):
    pass


def default_config() -> dict:
    text = resources.files("doublephase").joinpath("data/default_config.json").read_text()
    return json.loads(text)


def load_config(path: str | None) -> dict:
    """Read a JSON config; option blocks fall back to the shipped defaults.

    Problem data (domain, exponent, gamma, s, lambda) is never defaulted
    when a file is given, so a missing value surfaces as a config error
    for the subcommands that need it.
    """
    defaults = default_config()
    if path is None:
        return defaults
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for block in _BLOCKS:
        merged = dict(defaults[block])
        merged.update(cfg.get(block) or {})
        cfg[block] = merged
    return cfg


def _domain_spec(cfg: dict) -> DomainSpec:
    d = cfg.get("domain")
    if not isinstance(d, dict):
        raise ConfigError("missing 'domain' block")
    try:
        n, m = int(d["n"]), int(d["m"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("domain needs integer 'n' and 'm'") from exc
    N = n + m
    bounds = d.get("bounds", [[-1.0, 1.0]] * N)
    res = d.get("resolution", 17)
    nodes = tuple(res) if isinstance(res, list) else (int(res),) * N
    if len(bounds) != N or len(nodes) != N:
        raise ConfigError(f"domain bounds/resolution must have n + m = {N} entries")
    return DomainSpec(n, m, tuple((float(a), float(b)) for a, b in bounds), nodes)


def _require(cfg: dict, keys) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")


def _setup(cfg: dict, sub: str):
    _require(cfg, ("exponent",) + _REQUIRED[sub])
    grid = build_grid(_domain_spec(cfg))
    G = ExponentField.from_values(
        eval_on_grid(parse_expr(cfg["exponent"], grid.n, grid.m), grid), grid)
    report = validate_admissibility(G, cfg.get("s"), cfg.get("gamma"), grid.N, _CONTEXT[sub])
    report.raise_if_failed()
    return grid, G, report


def _solve_config(cfg: dict) -> SolveConfig:
    sc = dict(cfg["solver"])
    sc.pop("max_rho", None)
    return SolveConfig(**sc)


def _fmt(x) -> str:
    return format(float(x), ".17g")


class Writer:
    """Collects artifacts in one directory and writes the manifest last."""

    def __init__(self, out: Path, fmt: str):
        if fmt not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {fmt!r}")
        self.out = out
        self.fmt = fmt
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def _write(self, name: str, text: str) -> None:
        with open(self.out / name, "w", newline="\n") as fh:
            fh.write(text)
        self.files.append(name)

    def json(self, name: str, obj) -> None:
        self._write(name + ".json", json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")

    def table(self, name: str, header: list[str], rows) -> None:
        rows = [[_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row]
                for row in rows]
        if self.fmt == "json":
            self.json(name, [dict(zip(header, r)) for r in rows])
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self._write(name + ".csv", buf.getvalue())

    def field(self, name: str, u: np.ndarray, grid: Grid) -> None:
        cols = [c.ravel() for c in grid.coords] + [np.asarray(u).ravel()]
        self.table(name, list(grid.axis_names) + ["value"], zip(*cols))

    def manifest(self, cfg: dict, sub: str, seed) -> None:
        # no timestamps or timings, so identical configs give identical bytes
        files = sorted(self.files)
        self.files = []
        self.json("manifest", {"subcommand": sub, "version": __version__, "seed": seed,
                               "config": cfg, "files": files})


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def cmd_grid_info(cfg, w: Writer):
    grid, G, report = _setup(cfg, "grid-info")
    info = {
        "n": grid.n, "m": grid.m, "shape": list(grid.shape), "nodes": grid.size,
        "spacing": list(grid.spacing), "volume": grid.volume,
        "weight_sum": integrate(np.ones(grid.shape), grid),
        "boundary_nodes": int(grid.boundary.sum()),
        "has_x_zero_layer": all(np.any(grid.axes[k] == 0.0) for k in range(grid.n)),
        "G_min": G.gmin, "G_max": G.gmax, "admissibility": report.to_dict(),
    }
    for k, v in info.items():
        print(f"{k}: {v}")
    w.json("grid_info", info)


def _ensemble(cfg, grid):
    e = cfg["ensemble"]
    return random_bumps(make_rng(e["seed"]), int(e["count"]), grid.spec,
                        radius_range=tuple(e["radius_range"]))


def cmd_verify_ckn(cfg, w: Writer):
    grid, G, _ = _setup(cfg, "verify-ckn")
    gamma = float(cfg["gamma"])
    c = cfg["ckn"]
    eps = c.get("eps")
    if c.get("scan"):
        eps = scan_epsilon(G, gamma, grid).eps
    rep = verify_ckn(_ensemble(cfg, grid), G, gamma, grid, eps=eps, slack=float(c["slack"]))
    w.json("ckn_report", rep.to_dict())
    w.table("ckn_members", ["index", "lhs", "rhs1", "rhs2", "ratio"], rep.member_rows())
    print(f"beta_formula={rep.beta_formula:.6g} beta_empirical={rep.beta_empirical:.6g} "
          f"violations={len(rep.violations)}")


def cmd_embed(cfg, w: Writer):
    grid, G, _ = _setup(cfg, "embed")
    bumps = _ensemble(cfg, grid)
    fields = (make_bump(grid, b.center, b.radii, b.amplitude) for b in bumps)
    rep = estimate_embedding(fields, G, float(cfg["gamma"]), float(cfg["s"]), grid)
    w.json("embedding_report", rep.to_dict())
    w.table("embedding_members", ["index", "ratio"], [[i, r] for i, r in enumerate(rep.ratios)])
    print(f"sup={rep.sup:.6g} mean={rep.mean:.6g} count={len(rep.ratios)}")


def _t_grid(cfg):
    p = cfg["probe"]
    return np.logspace(np.log10(p["t_min"]), np.log10(p["t_max"]), int(p["t_count"]))


def cmd_probe(cfg, w: Writer):
    grid, G, _ = _setup(cfg, "probe")
    params = ProblemParams(float(cfg["gamma"]), float(cfg["s"]), float(cfg["lambda"]))
    phi = default_seed_bump(grid, G, params.gamma)
    valley = probe_valley(phi, params, G, grid, _t_grid(cfg))
    p = cfg["probe"]
    mountain = probe_mountain(params, G, grid, p["rho_list"], int(p["samples"]),
                              int(cfg["ensemble"]["seed"]))
    geo = GeometryReport(valley, mountain)
    w.json("geometry", geo.to_dict())
    w.table("valley", ["t", "energy"], zip(valley.t, valley.energies))
    w.table("mountain", ["rho", "sphere_min"], zip(mountain.rho, mountain.minima))
    print(f"valley exists={valley.exists} slope={valley.slope} "
          f"first positive sphere rho={mountain.first_positive_rho}")


def cmd_solve(cfg, w: Writer):
    grid, G, _ = _setup(cfg, "solve")
    rep = solve_eigen(float(cfg["lambda"]), float(cfg["gamma"]), float(cfg["s"]), G, grid,
                      _solve_config(cfg), t_grid=_t_grid(cfg),
                      max_rho=float(cfg["solver"].get("max_rho", 64.0)))
    w.json("solve_report", rep.to_dict())
    w.field("solution", rep.u, grid)
    s = rep.summary()
    print(" ".join(f"{k}={v}" for k, v in s.items()))
    if not rep.converged:
        print(f"warning: solve not converged ({rep.reason})", file=sys.stderr)
        if "trivial basin" in rep.reason:
            print("hint: increase lambda or the valley scale t", file=sys.stderr)


def cmd_sweep(cfg, w: Writer):
    grid, G, _ = _setup(cfg, "sweep")
    rows = sweep_lambda([float(x) for x in cfg["lambdas"]], float(cfg["gamma"]),
                        float(cfg["s"]), G, grid, _solve_config(cfg), t_grid=_t_grid(cfg),
                        max_rho=float(cfg["solver"].get("max_rho", 64.0)))
    w.json("sweep", rows)
    keys = ["lambda", "m_inf", "norm", "residual", "converged", "certified", "reason"]
    w.table("sweep_table", keys, [[r.get(k) for k in keys] for r in rows])
    for r in rows:
        print(" ".join(f"{k}={r.get(k)}" for k in keys))


_COMMANDS = {"grid-info": cmd_grid_info, "verify-ckn": cmd_verify_ckn, "embed": cmd_embed,
             "probe": cmd_probe, "solve": cmd_solve, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doublephase", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="JSON config (default: shipped default config)")
    parser.add_argument("--out", help="output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="overrides solver and ensemble seeds")
    parser.add_argument("--resolution", type=int, help="nodes per axis (overrides domain)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        cfg = copy.deepcopy(cfg)
        if args.seed is not None:
            cfg["solver"]["seed"] = args.seed
            cfg["ensemble"]["seed"] = args.seed
        if args.resolution is not None:
            cfg.setdefault("domain", {})["resolution"] = args.resolution
        out = Path(args.out or cfg["output"]["directory"])
        writer = Writer(out, cfg["output"]["format"])
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    start = time.perf_counter()
    try:
        _COMMANDS[args.subcommand](cfg, writer)
    except AdmissibilityError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, DomainError, ExprError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.exception("runtime failure")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    log.info("%s finished in %.2f s", args.subcommand, time.perf_counter() - start)
    writer.manifest(cfg, args.subcommand, cfg["solver"].get("seed"))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
