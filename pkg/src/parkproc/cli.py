"""Experiment runner: config parsing, subcommands, bit-stable result files.

Subcommands
    simulate   one run -> series CSV + summary JSON (+ optional snapshots)
    sweep      density grid x replicas -> one aggregated table CSV
    verify     named invariant/oracle suite -> JSON report, exit 2 on failure

Configs are strict JSON (unknown keys rejected); command-line flags
override file values.  Every output embeds the resolved config and a
format-version field, and identical configs give byte-identical outputs
regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from parkproc import engine, oracles, stats
from parkproc.engine import BudgetError
from parkproc.randomness import RandomnessSource, derive_seed
from parkproc.topology import Boundary, Family, Topology, TopologySpec, build_topology

FORMAT_VERSION = 1

SERIES_COLUMNS = [
    "t", "vbar", "vbar_sq", "unparked_cars", "vacant_spots",
    "frac_spot_unvisited", "frac_closer_spot", "frac_closer_car", "frac_tie",
]

SWEEP_COLUMNS = [
    "kind", "p", "replica", "seed", "t_end", "absorption_time", "vbar",
    "frac_cars_parked", "frac_spots_parked_in", "vbar_mean", "vbar_se",
    "n_absorbed", "n_excluded",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK = 2
EXIT_BUDGET = 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


_CONFIG_KEYS = {
    "format_version", "topology", "p", "p_grid", "seed", "mode", "t_max",
    "t_cap", "replicas", "record_every", "trajectory", "snapshot_times",
    "nearest_every", "regression_window", "output_dir", "workers", "max_cells",
}


@dataclass
class RunConfig:
    topology: dict
    p: float | None = None
    p_grid: list[float] | None = None
    seed: int | None = None
    mode: str = "fixed"  # "fixed" | "absorption"
    t_max: int | None = None
    t_cap: int | None = None
    replicas: int = 1
    record_every: int = 1
    trajectory: bool = False
    snapshot_times: list[int] = field(default_factory=list)
    nearest_every: int | None = None
    regression_window: list[int] | None = None
    output_dir: str = "out"
    workers: int = 1
    max_cells: int = engine.DEFAULT_MAX_CELLS

    def resolved_dict(self) -> dict:
        d = {
            "format_version": FORMAT_VERSION,
            "topology": self.topology,
            "mode": self.mode,
            "seed": self.seed,
            "replicas": self.replicas,
            "record_every": self.record_every,
            "trajectory": self.trajectory,
            "snapshot_times": self.snapshot_times,
            "nearest_every": self.nearest_every,
            "regression_window": self.regression_window,
            "output_dir": self.output_dir,
            "workers": self.workers,
            "max_cells": self.max_cells,
        }
        if self.p is not None:
            d["p"] = self.p
        if self.p_grid is not None:
            d["p_grid"] = self.p_grid
        if self.t_max is not None:
            d["t_max"] = self.t_max
        if self.t_cap is not None:
            d["t_cap"] = self.t_cap
        return d


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(data: dict) -> RunConfig:
    """Validate a raw config dict; unknown keys are rejected outright."""
    unknown = set(data) - _CONFIG_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    _require("topology" in data, "config needs a 'topology' object")
    if "format_version" in data:
        _require(data["format_version"] == FORMAT_VERSION,
                 f"unsupported format_version {data['format_version']}")
    try:
        spec = TopologySpec.from_dict(data["topology"])
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid topology: {exc}") from exc

    cfg = RunConfig(topology=spec.to_dict())
    if "p" in data:
        cfg.p = float(data["p"])
        _require(0.0 <= cfg.p <= 1.0, "p must lie in [0, 1]")
    if "p_grid" in data:
        cfg.p_grid = [float(x) for x in data["p_grid"]]
        _require(len(cfg.p_grid) > 0, "p_grid must be nonempty")
        _require(all(0.0 <= x <= 1.0 for x in cfg.p_grid), "p_grid values must lie in [0, 1]")
    _require(not (cfg.p is not None and cfg.p_grid is not None),
             "give either 'p' or 'p_grid', not both")
    if "seed" in data and data["seed"] is not None:
        cfg.seed = int(data["seed"])
    cfg.mode = data.get("mode", "fixed")
    _require(cfg.mode in ("fixed", "absorption"), "mode must be 'fixed' or 'absorption'")
    if "t_max" in data:
        cfg.t_max = int(data["t_max"])
        _require(cfg.t_max >= 0, "t_max must be >= 0")
    if "t_cap" in data:
        cfg.t_cap = int(data["t_cap"])
        _require(cfg.t_cap >= 0, "t_cap must be >= 0")
    if cfg.mode == "fixed":
        _require(cfg.t_max is not None, "fixed mode needs t_max")
    else:
        _require(cfg.t_cap is not None, "absorption mode needs t_cap")
    cfg.replicas = int(data.get("replicas", 1))
    _require(cfg.replicas >= 1, "replicas must be >= 1")
    cfg.record_every = int(data.get("record_every", 1))
    _require(cfg.record_every >= 1, "record_every must be >= 1")
    cfg.trajectory = bool(data.get("trajectory", False))
    cfg.snapshot_times = [int(x) for x in data.get("snapshot_times", [])]
    if data.get("nearest_every") is not None:
        cfg.nearest_every = int(data["nearest_every"])
        _require(cfg.nearest_every >= 1, "nearest_every must be >= 1")
    if data.get("regression_window") is not None:
        win = data["regression_window"]
        _require(isinstance(win, (list, tuple)) and len(win) == 2,
                 "regression_window must be [t_lo, t_hi]")
        cfg.regression_window = [int(win[0]), int(win[1])]
        _require(cfg.regression_window[0] < cfg.regression_window[1],
                 "regression_window needs t_lo < t_hi")
    cfg.output_dir = str(data.get("output_dir", "out"))
    cfg.workers = int(data.get("workers", 1))
    _require(cfg.workers >= 1, "workers must be >= 1")
    cfg.max_cells = int(data.get("max_cells", engine.DEFAULT_MAX_CELLS))
    return cfg


def _read_config_file(path: str | None, overrides: dict) -> RunConfig:
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        _require(isinstance(data, dict), "config root must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = load_config(data)
    if cfg.seed is None:
        cfg.seed = secrets.randbits(62)
        print(f"generated seed {cfg.seed} (embedded in outputs)", file=sys.stderr)
    return cfg


# ---------------------------------------------------------------------------
# output writers


def _canon_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_table(path: Path, columns: list[str], rows: list[list], config: dict) -> None:
    lines = [f"# format_version={FORMAT_VERSION}", f"# config={_canon_json(config)}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_series_csv(path: Path, series: engine.SimSeries, config: dict) -> None:
    rows = []
    for r in series.rows:
        rows.append([
            r.t, r.vbar, r.vbar_sq, r.unparked_cars, r.vacant_spots,
            r.frac_spot_unvisited, r.frac_closer_spot, r.frac_closer_car, r.frac_tie,
        ])
    _write_table(path, SERIES_COLUMNS, rows, config)


def write_snapshot_csv(path: Path, topo: Topology, snap, config: dict) -> None:
    labels = stats.classify_snapshot(topo, snap).label_names()
    d = topo.coords.shape[1]
    columns = ["vertex_index"] + [f"coord_{i}" for i in range(d)] + [
        "role", "spot_status", "unparked_count", "nearest_label",
    ]
    rows = []
    for v in range(topo.n):
        occ = int(snap.occupied_at[v])
        if occ == engine.NO_SPOT:
            status = "not_a_spot"
        elif occ == engine.VACANT:
            status = "vacant"
        else:
            status = f"occupied:{occ}"
        rows.append(
            [v] + [int(c) for c in topo.coords[v]] + [
                "car" if snap.roles[v] == 1 else "spot",
                status, int(snap.unparked_count[v]), labels[v],
            ]
        )
    _write_table(path, columns, rows, config)


# ---------------------------------------------------------------------------
# simulate


def _final_checks(state: engine.SimState) -> list[dict]:
    ident = engine.visit_identity_check(state)
    parked = int((state.park_time != engine.UNPARKED).sum())
    occupied = int((state.occupied_at >= 0).sum())
    conserv = (parked == occupied
               and state.unparked_cars - state.vacant_spots == state.n_cars - state.n_spots)
    return [
        {"name": "visit_identity", "passed": ident.equal,
         "lhs": ident.lhs, "rhs": ident.rhs},
        {"name": "conservation", "passed": bool(conserv),
         "parked_cars": parked, "occupied_spots": occupied},
    ]


def cmd_simulate(cfg: RunConfig) -> int:
    _require(cfg.p is not None, "simulate needs 'p' (not 'p_grid')")
    spec = TopologySpec.from_dict(cfg.topology)
    topo = build_topology(spec)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    opts = dict(record_every=cfg.record_every, trajectory=cfg.trajectory,
                snapshot_times=tuple(cfg.snapshot_times), nearest_every=cfg.nearest_every)
    if cfg.mode == "fixed":
        series = engine.run(topo, cfg.p, cfg.seed, cfg.t_max,
                            max_cells=cfg.max_cells, **opts)
    else:
        series, _ = engine.run_to_absorption(topo, cfg.p, cfg.seed, cfg.t_cap, **opts)

    config_echo = cfg.resolved_dict()
    write_series_csv(outdir / "series.csv", series, config_echo)
    for t, snap in sorted(series.snapshots.items()):
        write_snapshot_csv(outdir / f"snapshot_t{t}.csv", topo, snap, config_echo)

    fit_obj = None
    if cfg.regression_window is not None:
        try:
            fit = stats.fit_power_law(series, tuple(cfg.regression_window))
            fit_obj = {"window": list(fit.window), "slope": fit.slope,
                       "intercept": fit.intercept}
        except ValueError as exc:
            print(f"fit skipped: {exc}", file=sys.stderr)

    probs = stats.empirical_park_probs(series.final_state)
    summary = {
        "format_version": FORMAT_VERSION,
        "config": config_echo,
        "seed": cfg.seed,
        "absorption_time": series.absorption_time,
        "frac_cars_parked": probs.frac_cars_parked,
        "frac_spots_parked_in": probs.frac_spots_parked_in,
        "fit": fit_obj,
        "checks": _final_checks(series.final_state),
    }
    (outdir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    if not all(c["passed"] for c in summary["checks"]):
        return EXIT_CHECK
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _sweep_task(args: tuple) -> dict:
    topo_dict, p, replica, seed, mode, horizon, max_cells = args
    topo = build_topology(TopologySpec.from_dict(topo_dict))
    if mode == "fixed":
        series = engine.run(topo, p, seed, horizon, record_every=max(horizon, 1),
                            max_cells=max_cells)
        absorbed = series.absorption_time
    else:
        series, absorbed = engine.run_to_absorption(topo, p, seed, horizon,
                                                    record_every=max(horizon, 1))
    probs = stats.empirical_park_probs(series.final_state)
    return {
        "p": p, "replica": replica, "seed": seed, "t_end": series.t_end,
        "absorption_time": absorbed, "vbar": series.rows[-1].vbar,
        "frac_cars_parked": probs.frac_cars_parked,
        "frac_spots_parked_in": probs.frac_spots_parked_in,
    }


def cmd_sweep(cfg: RunConfig) -> int:
    _require(cfg.p_grid is not None, "sweep needs 'p_grid'")
    spec = TopologySpec.from_dict(cfg.topology)
    build_topology(spec)  # validate before spawning any work
    horizon = cfg.t_max if cfg.mode == "fixed" else cfg.t_cap
    tasks = []
    for p in cfg.p_grid:
        for r in range(cfg.replicas):
            tasks.append((cfg.topology, p, r, derive_seed(cfg.seed, r), cfg.mode,
                          horizon, cfg.max_cells))

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = []
        for task in tasks:
            results.append(_sweep_task(task))
            print(f"sweep p={task[1]} replica={task[2]} done", file=sys.stderr)

    results.sort(key=lambda d: (d["p"], d["replica"]))
    rows = []
    for p in sorted(set(cfg.p_grid)):
        batch = [d for d in results if d["p"] == p]
        for d in batch:
            rows.append(["replica", d["p"], d["replica"], d["seed"], d["t_end"],
                         d["absorption_time"], d["vbar"], d["frac_cars_parked"],
                         d["frac_spots_parked_in"], None, None, None, None])
        good = [d["vbar"] for d in batch
                if cfg.mode == "fixed" or d["absorption_time"] is not None]
        n_exc = len(batch) - len(good)
        mean = float(np.mean(good)) if good else None
        se = float(np.std(good, ddof=1) / np.sqrt(len(good))) if len(good) > 1 else None
        rows.append(["aggregate", p, None, None, None, None, None, None, None,
                     mean, se, len(good), n_exc])

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_table(outdir / "sweep.csv", SWEEP_COLUMNS, rows, cfg.resolved_dict())
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites


def _check(name: str, expected, actual, tolerance, passed: bool) -> dict:
    return {"name": name, "expected": expected, "actual": actual,
            "tolerance": tolerance, "passed": bool(passed)}


def _suite_thresholds() -> list[dict]:
    checks = []
    topo_u = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=5, dimension=2))
    topo_o = build_topology(TopologySpec(Family.ORIENTED_TORUS, side=5, dimension=2))
    for name, topo, expected in [
        ("unoriented_z2_constant", topo_u, 2.0**-14 / np.e**2),
        ("oriented_z2_constant", topo_o, 2.0**-10 / np.e**2),
    ]:
        ks = topo.kernel_stats()
        th = oracles.small_p_threshold(ks.max_degree, ks.k_min)
        ok = abs(th.c / expected - 1.0) < 1e-5
        checks.append(_check(name, expected, th.c, "5 significant digits", ok))
        lo, hi = th.c, th.c / (1.0 - 2.0 * th.c)
        checks.append(_check(f"{name}_p_star_bracket", [lo, hi], th.p_star, "exact",
                             lo <= th.p_star <= hi))
    bad = 0
    for j in range(1, 61):
        for k in range(1, 100):
            p = Fraction(k, 200)  # densities below 1/2, where the bound applies
            exact, bound = oracles.binomial_busy(j, p)
            if float(exact) > bound + 1e-12:
                bad += 1
    checks.append(_check("binomial_busy_bound_grid", 0, bad, "exact", bad == 0))
    return checks


def _suite_conservation(n_runs: int = 100) -> list[dict]:
    rng = np.random.default_rng(20260809)
    failures = 0
    for i in range(n_runs):
        fam = rng.choice([Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS,
                          Family.CYCLE_1D, Family.ORIENTED_CYCLE_1D, Family.PATH_1D])
        if fam in (Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS):
            spec = TopologySpec(fam, side=int(rng.integers(3, 15)), dimension=2)
        elif fam is Family.PATH_1D:
            spec = TopologySpec(fam, side=int(rng.integers(5, 200)),
                                boundary=Boundary.REFLECTING)
        else:
            spec = TopologySpec(fam, side=int(rng.integers(5, 200)))
        topo = build_topology(spec)
        p = float(rng.uniform(0, 1))
        seed = int(rng.integers(0, 2**62))
        src = RandomnessSource(seed)
        state = engine.init_state(topo, engine.sample_initial(topo, p, src), src)
        for _ in range(int(rng.integers(1, 100))):
            engine.step(state, src)
            parked = int((state.park_time != engine.UNPARKED).sum())
            occupied = int((state.occupied_at >= 0).sum())
            if parked != occupied:
                failures += 1
            if state.unparked_cars - state.vacant_spots != state.n_cars - state.n_spots:
                failures += 1
            ident = engine.visit_identity_check(state)
            if not ident.equal:
                failures += 1
    return [_check("conservation_and_identity_violations", 0, failures, "exact",
                   failures == 0)]


def _suite_oriented1d() -> list[dict]:
    checks = []
    half = Fraction(1, 2)
    for t in (4, 6, 8):
        _, dist = oracles.oriented1d_exact(t + 2, t, half)
        mref = oracles.running_max_dist(t, half)
        same = (dist.support == mref.support and all(
            a == b for a, b in zip(dist.probs, mref.probs)))
        checks.append(_check(f"enumeration_matches_running_max_t{t}", True, same,
                             "exact", same))
    t = 8
    spec = TopologySpec(Family.ORIENTED_CYCLE_1D, side=20_000)
    topo = build_topology(spec)
    for p in (0.25, 0.5, 0.75):
        mean_exact, _ = oracles.oriented1d_exact(t + 2, t, Fraction(p).limit_denominator(4))
        series = engine.run(topo, p, seed=7_777, t_max=t, record_every=t)
        visits = series.final_state.visits
        mean_mc, se, _ = stats.block_mean_se(visits, block_len=40 * (t + 2))
        ok = abs(mean_mc - float(mean_exact)) <= 4 * se
        checks.append(_check(f"engine_mean_visits_p{p}", float(mean_exact), mean_mc,
                             f"4 standard errors ({4 * se:.4g})", ok))
    return checks


def _suite_coupling(n_pairs: int = 50) -> list[dict]:
    rng = np.random.default_rng(4242)
    violations = 0
    for _ in range(n_pairs):
        topo = build_topology(TopologySpec(Family.CYCLE_1D, side=int(rng.integers(20, 200))))
        p_lo = float(rng.uniform(0, 0.5))
        p_hi = float(rng.uniform(p_lo, 1.0))
        rep = engine.couple_run(topo, p_lo, p_hi, int(rng.integers(0, 2**62)),
                                t_max=int(rng.integers(10, 120)))
        violations += len(rep.park_violations) + len(rep.visit_violations)
    return [_check("coupling_violations", 0, violations, "exact", violations == 0)]


def _suite_reference(n_instances: int = 30) -> list[dict]:
    rng = np.random.default_rng(11)
    mismatches = 0
    for _ in range(n_instances):
        fam = rng.choice([Family.UNORIENTED_TORUS, Family.CYCLE_1D, Family.ORIENTED_CYCLE_1D])
        if fam is Family.UNORIENTED_TORUS:
            spec = TopologySpec(fam, side=int(rng.integers(3, 8)), dimension=2)
        else:
            spec = TopologySpec(fam, side=int(rng.integers(5, 60)))
        topo = build_topology(spec)
        seed = int(rng.integers(0, 2**62))
        src = RandomnessSource(seed)
        init = engine.sample_initial(topo, float(rng.uniform(0, 1)), src)
        fast = engine.init_state(topo, init, src)
        slow = engine.init_state(topo, init, src)
        for s in range(int(rng.integers(1, 40))):
            engine.step(fast, src)
            slow = oracles.reference_step(slow, src,
                                          order="reversed" if s % 2 else "forward")
            if not engine.states_equal(fast, slow):
                mismatches += 1
                break
    return [_check("reference_step_mismatches", 0, mismatches, "exact", mismatches == 0)]


_SUITES = {
    "thresholds": _suite_thresholds,
    "conservation": _suite_conservation,
    "oriented1d": _suite_oriented1d,
    "coupling": _suite_coupling,
    "reference": _suite_reference,
}


def cmd_verify(suite: str, out_path: str | None = None) -> int:
    if suite == "all":
        names = list(_SUITES)
    elif suite in _SUITES:
        names = [suite]
    else:
        raise ConfigError(f"unknown suite '{suite}'; choose from {sorted(_SUITES)} or 'all'")
    report = {"format_version": FORMAT_VERSION, "suite": suite, "checks": []}
    for name in names:
        report["checks"].extend(_SUITES[name]())
    report["passed"] = all(c["passed"] for c in report["checks"])
    text = json.dumps(report, sort_keys=True, indent=2, default=float)
    if out_path:
        Path(out_path).write_text(text + "\n")
    print(text)
    return EXIT_OK if report["passed"] else EXIT_CHECK


# ---------------------------------------------------------------------------
# argument parsing


def _add_override_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--topology", help="inline topology JSON object")
    sub.add_argument("--p", type=float)
    sub.add_argument("--p-grid", help="comma-separated densities (sweep)")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--mode", choices=["fixed", "absorption"])
    sub.add_argument("--t-max", type=int)
    sub.add_argument("--t-cap", type=int)
    sub.add_argument("--replicas", type=int)
    sub.add_argument("--record-every", type=int)
    sub.add_argument("--trajectory", action="store_true", default=None)
    sub.add_argument("--snapshot-times", help="comma-separated times")
    sub.add_argument("--nearest-every", type=int)
    sub.add_argument("--regression-window", help="t_lo,t_hi")
    sub.add_argument("--output-dir")
    sub.add_argument("--workers", type=int)
    sub.add_argument("--max-cells", type=int)


def _overrides_from_args(args: argparse.Namespace) -> dict:
    ov: dict = {
        "p": args.p, "seed": args.seed, "mode": args.mode, "t_max": args.t_max,
        "t_cap": args.t_cap, "replicas": args.replicas,
        "record_every": args.record_every, "trajectory": args.trajectory,
        "nearest_every": args.nearest_every, "output_dir": args.output_dir,
        "workers": args.workers, "max_cells": args.max_cells,
    }
    if args.topology is not None:
        try:
            ov["topology"] = json.loads(args.topology)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--topology is not valid JSON: {exc}") from exc
    if args.p_grid is not None:
        ov["p_grid"] = [float(x) for x in args.p_grid.split(",")]
    if args.snapshot_times is not None:
        ov["snapshot_times"] = [int(x) for x in args.snapshot_times.split(",") if x]
    if args.regression_window is not None:
        parts = args.regression_window.split(",")
        _require(len(parts) == 2, "--regression-window needs t_lo,t_hi")
        ov["regression_window"] = [int(parts[0]), int(parts[1])]
    return ov


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="parkproc",
        description="Deterministic parking-process simulator and verifier",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep"):
        sub = subs.add_parser(name)
        _add_override_flags(sub)
    ver = subs.add_parser("verify")
    ver.add_argument("suite")
    ver.add_argument("--out", help="also write the JSON report to this path")

    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.out)
        cfg = _read_config_file(args.config, _overrides_from_args(args))
        if args.command == "simulate":
            return cmd_simulate(cfg)
        return cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"write failure: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
