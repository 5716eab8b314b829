"""Command-line front end: ``prodcode <command> [--config FILE] [--set key=value]``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bch import CodeError, CodeParams, construct_bch
from .de import (MODEL_VARIANTS, ConvergenceError, DeConfig, DeError,
                 default_x_grid, get_model, mc_transfer_estimate, threshold)
from .optimizer import (DECODERS, OhTarget, OptimizerError, oh_of, optimize, stall_floor)
from .product import DecoderError, DecoderSchedule, ProductCodeSpec
from .reach import LinkSpec, ReachError, optimal_power_dbm, optimal_snr_db, reach, reach_gain
from .sim import SimError, StopRule, config_hash, points_csv, run_ber, run_manifest

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {
    "optimize": {"targets": list(range(3, 17)), "decoders": list(DECODERS),
                 "model": "mc-estimated", "rule": "closest", "de": {}},
    "threshold": {"codes": [[9, 3, 0]], "decoders": list(DECODERS),
                  "model": "mc-estimated", "de": {}},
    "simulate": {"code": [9, 3, 0], "decoders": ["ibdd", "ideal-ibdd", "ibdd-sr"],
                 "ebn0_db": [4.9, 5.0, 5.1],
                 "stop": {"min_bit_errors": 100, "max_frames": 50, "round_frames": 8},
                 "all_zero": False, "whole_block": False, "de": {}},
    "floor": {"code": [9, 3, 0], "p": {"from": 1e-3, "to": 1e-2, "points": 19}},
    "reach": {"link": {}, "delta_db": 0.24, "baseline_km": 9680.0, "required_snr_db": None},
    "transfer-estimate": {"code": [9, 3], "x_grid": None, "points": 32, "trials": 10000,
                          "strict": True},
}
# Keys that do not influence results and are left out of the config hash.
UNHASHED = ("workers", "out")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config handling

def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_path(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {dotted}: {k} is not a section")
    node[keys[-1]] = value


def resolve_config(command: str, args) -> dict:
    cfg = copy.deepcopy(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(cfg) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(loaded)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        if key.split(".")[0] not in cfg and key != "seed":
            raise ConfigError(f"unknown config key {key!r} for {command}")
        _set_path(cfg, key, _parse_value(val))
    cfg["seed"] = args.seed if args.seed is not None else cfg.get("seed", 0)
    return cfg


def _hashable(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in UNHASHED}


def _params(triple) -> CodeParams:
    if not isinstance(triple, (list, tuple)) or len(triple) not in (2, 3):
        raise ConfigError(f"code must be [v, t] or [v, t, s], got {triple!r}")
    return CodeParams(*[int(x) for x in triple])


def _search_params(triple) -> CodeParams:
    p = _params(triple)
    if p.v not in range(8, 13) or p.t not in (3, 4):
        raise ConfigError(f"{p} is outside the search space v in 8..12, t in 3..4")
    return p


def _de_config(d: dict) -> DeConfig:
    if not isinstance(d, dict):
        raise ConfigError("'de' must be an object")
    try:
        return DeConfig(**d)
    except TypeError as exc:
        raise ConfigError(f"bad DE settings: {exc}") from exc


def _model(name: str) -> str:
    if name not in MODEL_VARIANTS:
        raise ConfigError(f"model must be one of {MODEL_VARIANTS}, got {name!r}")
    return name


# ---------------------------------------------------------------- output helpers

def _write_csv(path: Path, body: str, schema: str, cfg: dict) -> None:
    header = f"# schema: {schema}/{SCHEMA_VERSION} config_hash: {config_hash(_hashable(cfg))}\n"
    path.write_text(header + body)


def _echo_config(out: Path, command: str, cfg: dict) -> None:
    (out / f"{command}.config.json").write_text(
        json.dumps(_hashable(cfg), indent=1, sort_keys=True) + "\n")


def _rows_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def cmd_optimize(cfg: dict, out: Path, workers: int) -> None:
    targets = cfg["targets"]
    if not isinstance(targets, list) or not targets:
        raise ConfigError("targets must be a non-empty list of overhead denominators")
    tgs = [OhTarget(int(i)) for i in targets]
    decoders = cfg["decoders"]
    if not decoders or any(d not in DECODERS for d in decoders):
        raise ConfigError(f"decoders must be a non-empty subset of {DECODERS}")
    report = optimize(tgs, decoders, _de_config(cfg["de"]), _model(cfg["model"]), workers,
                      cfg["rule"])
    _write_csv(out / "optimize.csv", report.to_csv(), "prodcode-optimize", cfg)
    (out / "optimize.json").write_text(report.dumps_json() + "\n")


def cmd_threshold(cfg: dict, out: Path, workers: int) -> None:
    de_cfg = _de_config(cfg["de"])
    model = _model(cfg["model"])
    codes = cfg["codes"]
    if not codes:
        raise ConfigError("codes must be non-empty")
    rows, docs = [], []
    for triple in codes:
        p = _search_params(triple)
        for kind in cfg["decoders"]:
            if kind not in DECODERS:
                raise ConfigError(f"unknown decoder {kind!r}")
            r = threshold(p, kind, de_cfg, get_model(model, p.v, p.t))
            row = {"decoder": kind, "v": p.v, "t": p.t, "s": p.s, "n": p.n, "k": p.k,
                   "realized_oh": f"{float(oh_of(p)):.6f}",
                   "threshold_p": f"{r.threshold_p:.6e}",
                   "threshold_ebn0_db": f"{r.threshold_ebn0_db:.4f}",
                   "iterations": r.iterations}
            rows.append(row)
            docs.append({**row, "weights": r.weights, "model": r.model,
                         "threshold_sigma": r.threshold_sigma,
                         "mother_threshold_p": r.mother_threshold_p})
    _write_csv(out / "threshold.csv", _rows_csv(list(rows[0]), rows), "prodcode-threshold", cfg)
    (out / "threshold.json").write_text(json.dumps(docs, indent=1) + "\n")


def _sim_decoders(entries) -> list:
    if not isinstance(entries, list) or not entries:
        raise ConfigError("decoders must be a non-empty list")
    out = []
    for e in entries:
        if isinstance(e, str):
            out.append(e)
            continue
        if not isinstance(e, dict) or "kind" not in e:
            raise ConfigError(f"bad decoder entry {e!r}")
        kind = e["kind"]
        if kind == "ibdd-sr":
            w = e.get("weights")
            if w is None:
                raise ConfigError("an iBDD-SR decoder entry needs 'weights' (a list or \"de\")")
            if w == "de":
                out.append(kind)
                continue
            out.append(DecoderSchedule.sr(w, int(e.get("sr_iters", 10)),
                                          int(e.get("final_ibdd_iters", 2))))
        elif kind == "ibdd":
            out.append(DecoderSchedule.ibdd(int(e.get("iters", 12))))
        elif kind == "ideal-ibdd":
            out.append(DecoderSchedule.ideal(int(e.get("iters", 12))))
        else:
            raise ConfigError(f"unknown decoder kind {kind!r}")
    return out


def cmd_simulate(cfg: dict, out: Path, workers: int) -> None:
    params = _params(cfg["code"])
    spec = ProductCodeSpec(construct_bch(params))
    decoders = _sim_decoders(cfg["decoders"])
    grid = cfg["ebn0_db"]
    if not isinstance(grid, list) or not grid:
        raise ConfigError("ebn0_db must be a non-empty list")
    try:
        stop = StopRule(**cfg["stop"])
    except TypeError as exc:
        raise ConfigError(f"bad stop rule: {exc}") from exc
    points = run_ber(spec, decoders, [float(x) for x in grid], stop, int(cfg["seed"]),
                     workers, bool(cfg["all_zero"]), bool(cfg["whole_block"]),
                     _de_config(cfg["de"]))
    _write_csv(out / "simulate.csv", points_csv(points), "prodcode-simulate", cfg)
    (out / "simulate.manifest.json").write_text(
        json.dumps(run_manifest(spec, points, _hashable(cfg)), indent=1, default=str) + "\n")


def cmd_floor(cfg: dict, out: Path, workers: int) -> None:
    params = _params(cfg["code"])
    p = cfg["p"]
    if isinstance(p, dict):
        grid = np.geomspace(float(p["from"]), float(p["to"]), int(p["points"]))
    elif isinstance(p, list) and p:
        grid = np.asarray(p, dtype=float)
    else:
        raise ConfigError("p must be a list or {from, to, points}")
    floors = stall_floor(params, grid)
    rows = [{"p": f"{a:.6e}", "floor_ber": f"{b:.6e}"} for a, b in zip(grid, np.atleast_1d(floors))]
    _write_csv(out / "floor.csv", _rows_csv(["p", "floor_ber"], rows), "prodcode-floor", cfg)


def cmd_reach(cfg: dict, out: Path, workers: int) -> None:
    link = LinkSpec.from_dict(cfg["link"])
    doc = {"link": link.to_dict(), "optimal_power_dbm": optimal_power_dbm(link)}
    if cfg.get("required_snr_db") is not None:
        doc["reach"] = reach(float(cfg["required_snr_db"]), link).to_dict()
    base = float(cfg["baseline_km"])
    spans = base / link.span_km
    doc["baseline_km"] = base
    doc["baseline_snr_db"] = optimal_snr_db(round(spans), link)
    doc["delta_db"] = float(cfg["delta_db"])
    doc["gain_km"] = reach_gain(float(cfg["delta_db"]), base, link)
    doc["relative_gain"] = doc["gain_km"] / base
    doc["config_hash"] = config_hash(_hashable(cfg))
    (out / "reach.json").write_text(json.dumps(doc, indent=1) + "\n")


def cmd_transfer_estimate(cfg: dict, out: Path, workers: int) -> None:
    code = cfg["code"]
    if not isinstance(code, list) or len(code) != 2:
        raise ConfigError("code must be [v, t] (the mother code)")
    params = CodeParams(int(code[0]), int(code[1]))
    construct_bch(params, strict=bool(cfg["strict"]))      # validate before sampling
    grid = cfg["x_grid"] or default_x_grid(params.v, int(cfg["points"]))
    trials = int(cfg["trials"])
    if trials < 1:
        raise ConfigError("trials must be positive")
    model = mc_transfer_estimate(params, grid, trials, int(cfg["seed"]), workers,
                                 strict=bool(cfg["strict"]))
    model.save(out / f"transfer_v{params.v}_t{params.t}.json")


COMMANDS = {
    "optimize": cmd_optimize, "threshold": cmd_threshold, "simulate": cmd_simulate,
    "floor": cmd_floor, "reach": cmd_reach, "transfer-estimate": cmd_transfer_estimate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prodcode", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry (JSON value, dotted keys; repeatable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = resolve_config(args.command, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _echo_config(out, args.command, cfg)
        COMMANDS[args.command](cfg, out, args.workers)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, CodeError, DeError, OptimizerError, DecoderError, SimError,
            ReachError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
