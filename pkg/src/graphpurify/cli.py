"""Command-line front end: every run is a normalized JSON config plus a data file."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .analysis import InvalidFamily, find_fixed_points, p_threshold_from_alpha, alpha_threshold, threshold_scan, three_copy_family
from .graphs import GraphError, bicolor, edge_color, graph_from_json, make_standard
from .recursion import (
    BoundInapplicable,
    ParameterError,
    bandaid_map,
    conditional_bandaid_maps,
    postselect_zflip_map,
    postselection_bandaid_quality,
    three_copy_map,
)

COMMANDS = ("recurse", "fixed-point", "threshold", "mc", "dense-verify", "tradeoff", "creation")
SEEDED = ("mc", "creation", "dense-verify")
MC_PROTOCOLS = ("three-copy", "postselection", "bandaid", "conditional")
MAP_FAMILIES = ("three-copy", "postselect", "bandaid", "conditional")

log = logging.getLogger("graphpurify")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# -- config ------------------------------------------------------------------------


DEFAULTS: dict[str, Any] = {
    "graph": None,
    "map": None,
    "protocol": None,
    "degree": 2,
    "noise": {"p1": 0.0, "p2": 0.0, "measurement_noise": False},
    "q": 0.05,
    "bandaid_purity": None,
    "stage": "full",
    "grid": [0.0, 1.0, 0.01],
    "x": None,
    "correlators": None,
    "samples": 100_000,
    "seed": None,
    "workers": 1,
    "inputs": 20,
    "p1_grid": [0.0, 0.4, 0.02],
    "p2_grid": [0.0, 0.04, 0.002],
    "source": "linear",
    "output": {"path": None, "format": "csv"},
}


@dataclass
class RunConfig:
    data: dict

    def __getitem__(self, key):
        return self.data[key]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def _prob(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, "must be a number")
    if not 0.0 <= value <= 1.0:
        raise ConfigError(field, f"{value} outside [0, 1]")
    return float(value)


def _int(value, field: str, low: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, "must be an integer")
    if value < low:
        raise ConfigError(field, f"must be >= {low}")
    return value


def _grid(value, field: str) -> list[float]:
    if isinstance(value, str):
        parts = value.split(":")
        try:
            value = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(field, "expected start:stop:step") from None
    if not isinstance(value, list) or len(value) != 3 or not all(isinstance(v, (int, float)) for v in value):
        raise ConfigError(field, "expected [start, stop, step]")
    start, stop, step = map(float, value)
    if step <= 0 or stop < start:
        raise ConfigError(field, "need step > 0 and stop >= start")
    return [start, stop, step]


def grid_points(g: list[float]) -> np.ndarray:
    start, stop, step = g
    k = int(np.floor((stop - start) / step + 1e-9))
    return np.round(start + step * np.arange(k + 1), 12)


def _parse_map(spec, field: str = "map") -> tuple[str, str, str]:
    if not isinstance(spec, str):
        raise ConfigError(field, "must be a string like three-copy:full:A")
    parts = spec.split(":")
    if len(parts) != 3 or parts[0] not in MAP_FAMILIES:
        raise ConfigError(field, f"unknown map {spec!r}")
    fam, stage, branch = parts
    stages = ("P1", "P1-reference", "bound") if fam == "conditional" else ("P1", "P2", "full")
    if stage not in stages or branch not in ("A", "B"):
        raise ConfigError(field, f"unknown stage or branch in {spec!r}")
    return fam, stage, branch


def normalize_config(raw: dict) -> RunConfig:
    """Fill defaults and range-check; errors name the offending field path."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = set(raw) - set(DEFAULTS) - {"command"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    cmd = raw.get("command")
    if cmd not in COMMANDS:
        raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}")
    cfg = json.loads(json.dumps(DEFAULTS))
    for k, v in raw.items():
        if k in ("noise", "output"):
            if not isinstance(v, dict):
                raise ConfigError(k, "must be an object")
            extra = set(v) - set(cfg[k])
            if extra:
                raise ConfigError(f"{k}.{sorted(extra)[0]}", "unknown field")
            cfg[k].update(v)
        else:
            cfg[k] = v
    cfg["command"] = cmd

    noise = cfg["noise"]
    noise["p1"] = _prob(noise["p1"], "noise.p1")
    noise["p2"] = _prob(noise["p2"], "noise.p2")
    if not isinstance(noise["measurement_noise"], bool):
        raise ConfigError("noise.measurement_noise", "must be true or false")
    cfg["degree"] = _int(cfg["degree"], "degree", 1)
    cfg["q"] = _prob(cfg["q"], "q")
    if cfg["bandaid_purity"] is not None:
        cfg["bandaid_purity"] = _prob(cfg["bandaid_purity"], "bandaid_purity")
    cfg["grid"] = _grid(cfg["grid"], "grid")
    cfg["p1_grid"] = _grid(cfg["p1_grid"], "p1_grid")
    cfg["p2_grid"] = _grid(cfg["p2_grid"], "p2_grid")
    if cfg["x"] is not None:
        xs = cfg["x"] if isinstance(cfg["x"], list) else [cfg["x"]]
        cfg["x"] = [_prob(v, f"x[{i}]") for i, v in enumerate(xs)]
    cfg["samples"] = _int(cfg["samples"], "samples", 1)
    cfg["workers"] = _int(cfg["workers"], "workers", 1)
    cfg["inputs"] = _int(cfg["inputs"], "inputs", 1)
    if cfg["stage"] not in ("P1", "P2", "full"):
        raise ConfigError("stage", "must be P1, P2 or full")
    if cfg["source"] not in ("linear", "exact"):
        raise ConfigError("source", "must be linear or exact")
    out = cfg["output"]
    if out["format"] not in ("csv", "json"):
        raise ConfigError("output.format", "must be csv or json")
    if out["path"] is not None and not isinstance(out["path"], str):
        raise ConfigError("output.path", "must be a string")

    if cmd in SEEDED:
        if cfg["seed"] is None:
            raise ConfigError("seed", "required for stochastic commands (no default seed)")
        cfg["seed"] = _int(cfg["seed"], "seed")
    elif cfg["seed"] is not None:
        cfg["seed"] = _int(cfg["seed"], "seed")

    if cmd in ("recurse", "fixed-point"):
        if cfg["map"] is None:
            raise ConfigError("map", "required")
        _parse_map(cfg["map"])
    if cmd == "threshold":
        if cfg["protocol"] is None:
            cfg["protocol"] = "three-copy"
        if cfg["protocol"] != "three-copy":
            raise ConfigError("protocol", "threshold supports three-copy")
    if cmd == "mc":
        if cfg["protocol"] not in MC_PROTOCOLS:
            raise ConfigError("protocol", f"must be one of {', '.join(MC_PROTOCOLS)}")
    if cmd == "tradeoff":
        if cfg["protocol"] not in ("bandaid", "conditional"):
            raise ConfigError("protocol", "must be bandaid or conditional")
    if cmd in ("mc", "creation", "dense-verify"):
        if cfg["graph"] is None:
            if cmd != "dense-verify":
                raise ConfigError("graph", "required")
            cfg["graph"] = "path:2"
        load_graph(cfg["graph"])
    if cfg["correlators"] is not None:
        cs = cfg["correlators"]
        if not isinstance(cs, list) or not all(isinstance(c, list) and all(isinstance(v, int) for v in c) for c in cs):
            raise ConfigError("correlators", "expected a list of vertex lists")
    return RunConfig(cfg)


def validate_config(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError("<file>", f"{path} does not exist")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON ({exc.msg})") from None
    return normalize_config(raw)


def load_graph(ref):
    try:
        if isinstance(ref, dict):
            if "file" in ref:
                return graph_from_json(Path(ref["file"]).read_text())
            return graph_from_json(json.dumps(ref))
        if isinstance(ref, str):
            if ref.endswith(".json"):
                return graph_from_json(Path(ref).read_text())
            return make_standard(ref)
    except (GraphError, OSError, ValueError, KeyError) as exc:
        raise ConfigError("graph", str(exc)) from None
    raise ConfigError("graph", "must be a name like ring:6 or a graph object")


# -- commands ----------------------------------------------------------------------


def build_map(cfg: RunConfig):
    fam, stage, branch = _parse_map(cfg["map"])
    d, p2 = cfg["degree"], cfg["noise"]["p2"]
    xb = cfg["bandaid_purity"]
    if xb is None:
        xb = postselection_bandaid_quality(d, p2)
    if fam == "three-copy":
        return three_copy_map(branch, stage, d, p2)
    if fam == "postselect":
        return postselect_zflip_map(branch, stage)
    if fam == "bandaid":
        return bandaid_map(branch, d, p2, xb, stage)
    maps = conditional_bandaid_maps(d, p2, xb, cfg["noise"]["measurement_noise"])
    if stage == "P1":
        return maps.p1_derived
    if stage == "P1-reference":
        return maps.p1_exact
    return maps.composed_bound()


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _table(cfg, header, rows) -> str:
    if cfg["output"]["format"] == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    return _csv(header, rows)


def cmd_recurse(cfg):
    f = build_map(cfg)
    xs = cfg["x"] if cfg["x"] is not None else grid_points(cfg["grid"]).tolist()
    return _table(cfg, ["x", "fx"], [(float(x), float(f(x))) for x in xs])


def cmd_fixed_point(cfg):
    f = build_map(cfg)
    rep = find_fixed_points(f)
    for p in rep.fixed_points:
        log.info("fixed point %.12g %s (slope %.6g)", p.location, p.stability, p.derivative)
    rows = [(cfg["map"], p.location, p.stability) for p in rep.fixed_points]
    return _table(cfg, ["map_spec", "location", "stability"], rows)


def cmd_threshold(cfg):
    d = cfg["degree"]
    res = threshold_scan(three_copy_family(d), spec={"protocol": "three-copy", "d": d})
    a_th = alpha_threshold()
    out = {
        "protocol": cfg["protocol"],
        "degree": d,
        "p_th": res.p_th,
        "bracket": [res.lower, res.upper],
        "alpha_th": a_th,
        "p_th_from_alpha": p_threshold_from_alpha(a_th, d),
    }
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _correlators(cfg, g):
    if cfg["correlators"] is None:
        return [1 << v for v in range(g.n)]
    masks = []
    for i, c in enumerate(cfg["correlators"]):
        if any(not 0 <= v < g.n for v in c):
            raise ConfigError(f"correlators[{i}]", "vertex out of range")
        masks.append(sum(1 << v for v in set(c)))
    return masks


def _report_out(cfg, rep) -> str:
    return rep.to_json() + "\n" if cfg["output"]["format"] == "json" else rep.to_csv()


def cmd_mc(cfg):
    from .mc import core, protocols
    from .mc.estimate import estimate_correlators

    g = load_graph(cfg["graph"])
    col = bicolor(g)
    ctx = core.GraphContext(g, col)
    nz = cfg["noise"]
    noise = core.NoiseModel(nz["p1"], nz["p2"], nz["measurement_noise"])
    sampler = core.IndependentSampler.uniform(g.n, cfg["q"])
    proto, stage = cfg["protocol"], cfg["stage"]
    if proto in ("bandaid", "conditional") and ctx.nbr_table is None:
        raise ConfigError("graph", "bandaid protocols need a degree-regular graph")
    xb = cfg["bandaid_purity"]
    if xb is None:
        xb = postselection_bandaid_quality(ctx.degree, nz["p2"])
    band = core.BandaidSpec(xb)

    if proto == "three-copy":
        run = lambda rng, s: protocols.run_three_copy_round(ctx, sampler, noise, rng, s, stage)  # noqa: E731
    elif proto == "postselection":
        color = "B" if stage == "P2" else "A"
        run = lambda rng, s: protocols.run_postselection_round(ctx, sampler, noise, rng, s, color)  # noqa: E731
    elif proto == "bandaid":
        run = lambda rng, s: protocols.run_bandaid_round(ctx, sampler, band, noise, rng, s, stage)  # noqa: E731
    else:
        run = lambda rng, s: protocols.run_conditional_bandaid_round(ctx, sampler, band, noise, rng, s, stage)  # noqa: E731
    rep = estimate_correlators(
        run,
        _correlators(cfg, g),
        cfg["samples"],
        cfg["seed"],
        g.n,
        workers=cfg["workers"],
        metadata={"protocol": proto, "stage": stage, "graph": str(cfg["graph"])},
    )
    if rep.attempted is not None:
        log.info("accepted %d of %d", rep.accepted, rep.attempted)
    return _report_out(cfg, rep)


def cmd_creation(cfg):
    from .mc.creation import CreationSampler
    from .mc.estimate import estimate_correlators
    from .recursion import creation_purity

    g = load_graph(cfg["graph"])
    nz = cfg["noise"]
    sampler = CreationSampler(g, edge_color(g), nz["p1"], nz["p2"])
    rep = estimate_correlators(
        sampler.sample, _correlators(cfg, g), cfg["samples"], cfg["seed"], g.n, workers=cfg["workers"]
    )
    log.info("closed form for degree %d: %.10g", g.max_degree, creation_purity(g.max_degree, nz["p1"], nz["p2"]))
    return _report_out(cfg, rep)


def cmd_dense_verify(cfg):
    from . import dense
    from .generalized import ExpectationTable, generalized_p1_update
    from .graphs import CorrelatorIndex
    from .mc.core import NoiseModel

    g = load_graph(cfg["graph"])
    if g.n > dense.MAX_D_VERTICES or 3 * g.n > dense.MAX_QUBITS:
        raise ConfigError("graph", f"dense verification is limited to {dense.MAX_QUBITS // 3} vertices")
    col = bicolor(g)
    nz = cfg["noise"]
    noise = NoiseModel(nz["p1"], nz["p2"], nz["measurement_noise"])
    rng = np.random.default_rng(cfg["seed"])
    d = g.max_degree
    rows = []
    for i in range(cfg["inputs"]):
        rho = dense.random_density(g.n, rng)
        out = dense.run_P1_dense(g, col, rho, noise)
        corr = np.array([dense.stabilizer_expectation(g, rho, m) for m in range(1 << g.n)])
        table = ExpectationTable.from_correlators(g, col, corr)
        dev_general = dev_closed = 0.0
        for v in range(g.n):
            got = dense.stabilizer_expectation(g, out, 1 << v)
            dev_general = max(dev_general, abs(got - generalized_p1_update(table, CorrelatorIndex.of_vertices([v], col), nz["p2"])))
            branch = "A" if v in col.a_vertices else "B"
            dev_closed = max(dev_closed, abs(got - three_copy_map(branch, "P1", d, nz["p2"])(corr[1 << v])))
        comm = dense.check_commutation(g, col, rho, noise)
        rows.append((i, dev_closed, dev_general, comm))
    worst = max(max(r[2], r[3]) for r in rows)
    log.info("worst deviation (general update / commutation): %.3g", worst)
    return _table(cfg, ["input", "closed_form_dev", "general_update_dev", "commutation_dev"], rows)


def cmd_tradeoff(cfg):
    from .tradeoff import tradeoff_region

    curve = tradeoff_region(
        cfg["protocol"],
        cfg["degree"],
        p2_grid=grid_points(cfg["p2_grid"]),
        p1_grid=grid_points(cfg["p1_grid"]),
        source=cfg["source"],
    )
    log.info("p1 intercept %.6g, p2 intercept %.6g, area %.6g", curve.p1_intercept, curve.p2_intercept, curve.area())
    if cfg["output"]["format"] == "json":
        return curve.to_json() + "\n"
    keys = ["p1", "p2", "unpurified", "purified", "in_region"]
    return _csv(keys, [[r[k] for k in keys] for r in curve.rows])


HANDLERS = {
    "recurse": cmd_recurse,
    "fixed-point": cmd_fixed_point,
    "threshold": cmd_threshold,
    "mc": cmd_mc,
    "dense-verify": cmd_dense_verify,
    "tradeoff": cmd_tradeoff,
    "creation": cmd_creation,
}


# -- argv ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(2, "usage", message)


def _fail(code: int, kind: str, message: str, field: str | None = None):
    payload = {"error": kind, "message": message}
    if field is not None:
        payload["field"] = field
    sys.stderr.write(json.dumps(payload) + "\n")
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphpurify", description="Purification recursions, simulations and checks for graph states.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file; flags override its fields")
        s.add_argument("--out", help="output directory (data, config.json, log.txt)")
        s.add_argument("--format", choices=("csv", "json"))
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--p1", type=float)
        s.add_argument("--p2", type=float)
        s.add_argument("--measurement-noise", action="store_true", default=None)
        s.add_argument("--degree", type=int)
        s.add_argument("--graph")
        s.add_argument("--protocol")
        s.add_argument("--bandaid-purity", type=float)
        if name in ("recurse", "fixed-point"):
            s.add_argument("--map")
        if name == "recurse":
            s.add_argument("--x", type=float, action="append")
            s.add_argument("--grid")
        if name in ("mc", "creation"):
            s.add_argument("--samples", type=int)
        if name == "mc":
            s.add_argument("--q", type=float)
            s.add_argument("--stage", choices=("P1", "P2", "full"))
        if name == "dense-verify":
            s.add_argument("--inputs", type=int)
        if name == "tradeoff":
            s.add_argument("--p1-grid")
            s.add_argument("--p2-grid")
            s.add_argument("--source", choices=("linear", "exact"))
    return p


def _merge(args) -> dict:
    raw: dict = {}
    if args.config:
        p = Path(args.config)
        if not p.exists():
            raise ConfigError("<file>", f"{args.config} does not exist")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"not valid JSON ({exc.msg})") from None
        if raw.get("command", args.command) != args.command:
            raise ConfigError("command", f"config is for {raw.get('command')!r}, not {args.command!r}")
    raw["command"] = args.command
    v = vars(args)
    for key in ("seed", "workers", "degree", "graph", "protocol", "bandaid_purity", "map", "grid", "samples",
                "q", "stage", "inputs", "p1_grid", "p2_grid", "source"):
        if v.get(key) is not None:
            raw[key] = v[key]
    if v.get("x") is not None:
        raw["x"] = v["x"]
    for key in ("p1", "p2", "measurement_noise"):
        if v.get(key) is not None:
            raw.setdefault("noise", {})[key] = v[key]
    if args.out is not None:
        raw.setdefault("output", {})["path"] = args.out
    if args.format is not None:
        raw.setdefault("output", {})["format"] = args.format
    return raw


def run(cfg: RunConfig) -> str:
    out_dir = cfg["output"]["path"]
    handler = None
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(Path(out_dir) / "log.txt", mode="w")
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
    try:
        log.info("graphpurify %s, command %s", __version__, cfg["command"])
        payload = HANDLERS[cfg["command"]](cfg)
        if out_dir is not None:
            ext = "json" if cfg["command"] == "threshold" or cfg["output"]["format"] == "json" else "csv"
            (Path(out_dir) / f"data.{ext}").write_text(payload)
            stamped = dict(cfg.data, version=__version__)
            (Path(out_dir) / "config.json").write_text(json.dumps(stamped, indent=2, sort_keys=True) + "\n")
            log.info("wrote data.%s", ext)
        return payload
    finally:
        if handler is not None:
            log.removeHandler(handler)
            handler.close()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        _fail(2, "usage", "a subcommand is required")
    try:
        cfg = normalize_config(_merge(args))
    except ConfigError as exc:
        _fail(2, "config", str(exc), exc.field)
    try:
        payload = run(cfg)
    except ConfigError as exc:
        _fail(2, "config", str(exc), exc.field)
    except (InvalidFamily, BoundInapplicable, ParameterError, FloatingPointError, ArithmeticError) as exc:
        _fail(1, "numerical", str(exc))
    if cfg["output"]["path"] is None or cfg["command"] == "threshold":
        sys.stdout.write(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
