"""Command-line entry point: build graphs, check robustness, run scenarios and studies.

Exit codes: 0 success (or converged), 1 usage or config error, 2 domain error,
3 non-convergence.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import consensus as cs
from . import scenarios as sc
from .errors import DomainError, FormatError
from .geometry import read_positions
from .graph import graph_from_positions, read_edge_list, write_edge_list
from .robustness import DEFAULT_CAP, is_rs_robust, max_equal_rs
from .seeding import substream
from .study import formation_from_dict, generate_formation, random_specs, run_robustness_study

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    """Run metadata written next to every output set.

    ``outputs`` maps file names to SHA-256 digests so a rerun can be checked
    byte for byte; ``argv`` is enough to reproduce the run.
    """
    command: str
    config: str | None
    seed: int
    version: str
    wall_time_s: float
    argv: list
    outputs: dict = field(default_factory=dict)

    def write(self, out_dir: Path):
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _finish(args, argv, t0, paths, config=None):
    out = Path(args.out_dir)
    manifest = RunManifest(args.command, None if config is None else str(config), args.seed,
                           __version__, round(time.perf_counter() - t0, 6), list(argv),
                           {p.name: _digest(p) for p in paths})
    manifest.write(out)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- config loading --------------------------------------------------------

def load_schema(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text())


def load_config(path, schema: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, line=exc.lineno, path=path) from None
    try:
        jsonschema.validate(doc, load_schema(schema))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"{path}: config error at {where}: {exc.message}") from None
    return doc


def _values(spec, n, dim, rng, name):
    if isinstance(spec, dict):
        lo, hi = spec["uniform"]
        shape = (n,) if dim == 1 else (n, dim)
        return rng.uniform(lo, hi, size=shape)
    arr = np.asarray(spec, dtype=float)
    expected = (n,) if dim == 1 else (n, dim)
    if arr.shape != expected:
        raise UsageError(f"{name} has shape {arr.shape}, expected {expected}")
    return arr


def _positions(cfg, base: Path, seed: int):
    if "positions" in cfg:
        p = cfg["positions"]
        if isinstance(p, str):
            return read_positions(base / p)[1]
        return np.asarray(p, dtype=float)
    if "formation" in cfg:
        f = dict(cfg["formation"])
        if f["kind"] == "random_rect" and "seed" not in f:
            f["seed"] = int(substream(seed, "formation").integers(2 ** 32))
        return generate_formation(formation_from_dict(f))
    raise UsageError("config needs either 'positions' or 'formation'")


def _adversaries(cfg, n, seed, safe=None, delta_box=None):
    out = {}
    for a in cfg.get("adversaries", []):
        i = a["agent"]
        if i >= n:
            raise UsageError(f"adversary agent {i} out of range for {n} agents")
        kind = a["type"]
        if kind == "constant":
            if "value" not in a:
                raise UsageError(f"constant adversary {i} needs 'value'")
            out[i] = cs.ConstantAdversary(a["value"])
        elif kind == "drifting":
            if "start" in a and "drift" in a:
                out[i] = cs.DriftingAdversary(a["start"], a["drift"])
            elif "delta" in a and delta_box is not None:
                out[i] = sc.drifting_adversary(substream(seed, "adversary-drift", i), delta_box, a["delta"])
            else:
                raise UsageError(f"drifting adversary {i} needs 'start' and 'drift', or 'delta'")
        else:
            raise UsageError(f"adversary type {kind!r} only applies to map scenarios")
    return out


# -- commands --------------------------------------------------------------

def cmd_graph(args, argv):
    if args.K < 1:
        raise UsageError(f"K must be >= 1, got {args.K}")
    t0 = time.perf_counter()
    out = _out_dir(args)
    _, pts = read_positions(args.positions)
    g = graph_from_positions(pts, args.K, args.tie_break)
    if args.format == "json":
        path = out / "graph.json"
        edges = [{"u": u, "v": v, "kind": "delta" if (u, v) in g.delta_edges else "ext"}
                 for u, v in sorted(g.edges)]
        path.write_text(json.dumps({"n": g.n, "k": g.k, "edges": edges}, indent=2) + "\n")
    else:
        path = out / "graph.csv"
        write_edge_list(path, g)
    _finish(args, argv, t0, [path])
    print(f"n={g.n} K={g.k} edges={g.n_edges} delta={len(g.delta_edges)} ext={len(g.ext_edges)} -> {path}")
    return EXIT_OK


def cmd_check(args, argv):
    t0 = time.perf_counter()
    g = read_edge_list(args.edges)
    if args.max:
        if args.r is not None or args.s is not None:
            raise UsageError("give either r s or --max, not both")
        record = {"n": g.n, "edges": g.n_edges,
                  "max_rs": max_equal_rs(g, cap=args.cap, workers=args.threads)}
    else:
        if args.r is None or args.s is None:
            raise UsageError("check needs r and s, or --max")
        rep = is_rs_robust(g, args.r, args.s, cap=args.cap, workers=args.threads)
        record = dict(rep.to_record(), n=g.n, edges=g.n_edges)
    text = json.dumps(record, sort_keys=True)
    print(text)
    if args.out_dir:
        out = _out_dir(args)
        path = out / "check.json"
        path.write_text(text + "\n")
        _finish(args, argv, t0, [path])
    return EXIT_OK


def _write_positions_traj(path, positions, behaviors):
    with open(path, "w") as fh:
        fh.write("step,agent,x,y,behavior\n")
        for k, frame in enumerate(positions):
            for i, (x, y) in enumerate(frame):
                fh.write(f"{k},{i},{float(x)!r},{float(y)!r},{behaviors[i].tag}\n")


def _simulate_estimation(cfg, base, seed, out, fmt):
    pos = _positions(cfg, base, seed)
    n = len(pos)
    init = _values(cfg.get("initial_values", {"uniform": [0.0, 10.0]}), n, 1,
                   substream(seed, "initial-values"), "initial_values")
    adv = _adversaries(cfg, n, seed)
    wcfg = cs.WmsrConfig(cfg.get("F", 0), cfg.get("convergence_eps", 1e-6), cfg.get("max_steps", 10000))
    res = sc.run_parameter_estimation(pos, init, adv, K=cfg.get("K", 1), F=wcfg.F, cfg=wcfg)
    traj = out / f"trajectory.{fmt}"
    cs.write_trajectory(traj, res.trajectory, adv, fmt)
    record = {"verdict": res.verdict.to_record(), "inside_safe_interval": all(res.inside),
              "safe_interval": [res.safe.lo.tolist(), res.safe.hi.tolist()], "stalled": list(res.run.stalled)}
    return res.verdict.status == "converged", record, [traj]


def _simulate_rendezvous(cfg, base, seed, out, fmt):
    pos = _positions(cfg, base, seed)
    n = len(pos)
    centers = _values(cfg.get("centers", {"uniform": [0.0, 10.0]}), n, 2,
                      substream(seed, "centers"), "centers")
    box = cs.safe_interval(cs.initial_state(centers))
    adv = _adversaries(cfg, n, seed, delta_box=box)
    rcfg = sc.RendezvousConfig(radius=cfg.get("radius", 1.0), tau=cfg.get("tau", 0.5),
                               v_max=cfg.get("v_max", 1.0), K=cfg.get("K", 1), F=cfg.get("F", 0),
                               convergence_eps=cfg.get("convergence_eps", 1e-6),
                               max_steps=cfg.get("max_steps", 2000))
    res = sc.run_rendezvous(pos, centers, adv, rcfg)
    ppath = out / "positions.csv"
    _write_positions_traj(ppath, res.positions, res.behaviors)
    cpath = out / f"centers.{fmt}"
    cs.write_trajectory(cpath, [cs.ConsensusState(c, k) for k, c in enumerate(res.centers)], res.behaviors, fmt)
    record = {"verdict": res.verdict.to_record(), "centers_inside_every_step": all(res.centers_inside()),
              "safe_box": [res.safe.lo.tolist(), res.safe.hi.tolist()]}
    return res.verdict.status == "converged", record, [ppath, cpath]


def _claimed(a, env):
    cells = {tuple(c) for c in a.get("claimed", [])}
    if "claimed_rect" in a:
        (r0, r1), (c0, c1) = a["claimed_rect"]["rows"], a["claimed_rect"]["cols"]
        cells |= {(r, c) for r in range(r0, min(r1, env.height)) for c in range(c0, min(c1, env.width))
                  if env.cells[r, c] == 0}
    return frozenset(cells)


def _simulate_map(cfg, base, seed, out, fmt):
    if cfg.get("hallway"):
        scenario = sc.hallway_scenario()
        env, starts, adv = scenario.environment, list(scenario.starts), dict(scenario.adversaries)
    elif "grid" in cfg:
        env, starts, adv = sc.read_grid(base / cfg["grid"]), None, {}
    else:
        raise UsageError("map config needs 'grid' or 'hallway': true")
    if "starts" in cfg:
        starts = [tuple(s) for s in cfg["starts"]]
    if starts is None:
        raise UsageError("map config needs 'starts'")
    if "adversaries" in cfg:
        adv = {}
        for a in cfg["adversaries"]:
            if a["type"] != "map":
                raise UsageError("map scenarios only accept adversaries of type 'map'")
            if a["agent"] >= len(starts):
                raise UsageError(f"adversary agent {a['agent']} out of range")
            adv[a["agent"]] = cs.MapAdversary(_claimed(a, env))
    res = sc.run_map_consensus(env, starts, adv, F=cfg.get("F", 0), steps=cfg.get("max_steps", 500),
                               half_width=cfg.get("half_width", 2))
    snaps = sorted({min(k, res.steps) for k in cfg.get("snapshot_steps", [0])} | {res.steps})
    bpath = out / "beliefs.csv"
    sc.write_beliefs(bpath, res, snaps)
    ppath = out / "positions.csv"
    with open(ppath, "w") as fh:
        fh.write("step,agent,row,col,behavior\n")
        for k, frame in enumerate(res.positions):
            for i, (r, c) in enumerate(frame):
                fh.write(f"{k},{i},{r},{c},{res.behaviors[i].tag}\n")
    record = res.summary()
    return res.converged, record, [bpath, ppath]


_SIMULATORS = {"estimation": _simulate_estimation, "rendezvous": _simulate_rendezvous, "map": _simulate_map}


def cmd_simulate(args, argv):
    t0 = time.perf_counter()
    cfg = load_config(args.config, "scenario")
    if args.seed is None:
        args.seed = cfg.get("seed", 0)
    out = _out_dir(args)
    base = Path(args.config).resolve().parent
    ok, record, paths = _SIMULATORS[cfg["scenario"]](cfg, base, args.seed, out, args.format)
    record = {"scenario": cfg["scenario"], "seed": args.seed, **record}
    summary = out / "summary.json"
    summary.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    _finish(args, argv, t0, paths + [summary], args.config)
    print(json.dumps(record, sort_keys=True))
    print(f"wall time {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_study(args, argv):
    t0 = time.perf_counter()
    cfg = load_config(args.config, "study")
    if args.seed is None:
        args.seed = cfg.get("seed", 0)
    specs = [formation_from_dict(f) for f in cfg.get("formations", [])]
    if "random" in cfg:
        r = cfg["random"]
        specs += random_specs(r["count"], args.seed, tuple(r.get("n_range", (8, 12))),
                              tuple(r.get("aspect_range", (1.0, 8.0))))
    if not specs:
        raise UsageError("study config needs 'formations' or 'random'")
    report = run_robustness_study(specs, cfg["k_max"], cap=args.cap, workers=args.threads)
    out = _out_dir(args)
    paths = report.write(out, args.format)
    _finish(args, argv, t0, paths, args.config)
    for row in report.table():
        print(",".join(str(x) for x in row))
    for K in report.ks:
        print(f"K={K}: min r=s {report.minimum(K)}, complete {report.complete_percent(K):.1f}%")
    flagged = report.below_conjecture()
    if flagged:
        print(f"{len(flagged)} sample(s) below r=s=K+1 (expected only where K >= 3 or n is small)")
    print(f"wall time {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: config seed or 0)")
    common.add_argument("--out-dir", default=None, help="directory for output files")
    common.add_argument("--cap", type=_positive_int, default=DEFAULT_CAP,
                        help="largest vertex count the robustness checker accepts")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = _Parser(prog="resilient-voronoi", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("graph", parents=[common], help="build G_ΔK from a positions file")
    g.add_argument("positions", help="CSV with header id,x,y")
    g.add_argument("-K", "--K", type=int, default=1, dest="K")
    g.add_argument("--tie-break", choices=["min", "max"], default="min",
                   help="diagonal choice for cocircular quadrilaterals")

    c = sub.add_parser("check", parents=[common], help="(r,s)-robustness of an edge list")
    c.add_argument("edges")
    c.add_argument("r", type=_positive_int, nargs="?")
    c.add_argument("s", type=_positive_int, nargs="?")
    c.add_argument("--max", action="store_true", help="largest r with (r,r)-robustness")

    for name, help_ in (("simulate", "run a scenario config"), ("study", "run a robustness study config")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("config")
    return p


_COMMANDS = {"graph": cmd_graph, "check": cmd_check, "simulate": cmd_simulate, "study": cmd_study}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    if args.out_dir is None and args.command != "check":
        args.out_dir = "."
    try:
        return _COMMANDS[args.command](args, argv)
    except (UsageError, FormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
