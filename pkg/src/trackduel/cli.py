"""Command-line entry points.

Subcommands:
  run    one episode, writes a trajectory file and prints the outcome
  batch  the full scenario x case x setting x seed grid in parallel
  check  re-apply the rule detectors to an exported trajectory file
  table  aggregate a batch directory into the summary table

Worker count for ``batch`` comes from --workers or TRACKDUEL_WORKERS.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from pathlib import Path

from . import __version__
from .config import CASES, SCENARIOS, SETTINGS, builtin_scenario, load_scenario
from .errors import TrackDuelError
from .experiment import nominal_episode, run_episode, sample_initial_states
from .records import EpisodeRecord, RunManifest, read_episode, write_episode
from .rules import RulesConfig, sportsmanship_violation


def _scenario(args):
    if getattr(args, "config", None):
        return load_scenario(args.config)
    return builtin_scenario(args.scenario)


def _apply_overrides(scenario_cfg, args) -> None:
    if getattr(args, "iterations", None):
        scenario_cfg.iterations = args.iterations


def cmd_run(args) -> int:
    sc = _scenario(args)
    _apply_overrides(sc, args)
    ep = nominal_episode(sc, args.case, args.setting, seed=args.seed)
    result = run_episode(sc, ep)
    out = Path(args.out or f"episode_{sc.name}_{args.case}_s{args.setting}_{args.seed}.csv")
    write_episode(out, result)
    print(f"wrote {out}")
    print(f"delta_x = {result.delta_x:+.3f} m")
    print(f"violation = {result.violation.violated}"
          + (f" ({result.violation.rule}, witness {result.violation.witness})"
             if result.violation.violated else ""))
    print(f"min distance = {result.min_distance:.3f} m")
    return 0


def _batch_cell(job) -> tuple[str, dict]:
    scenario_name, config_path, case, setting, index, base_seed, outdir, iterations = job
    sc = load_scenario(config_path) if config_path else builtin_scenario(scenario_name)
    if iterations:
        sc.iterations = iterations
    # the same sampled starts serve every (case, setting) cell of a scenario
    starts = sample_initial_states(sc, count=index + 1, seed=base_seed)
    ep = starts[index]
    ep.sps_case = case
    ep.setting = setting
    ep.seed = base_seed * 1000 + index
    name = f"{sc.name}_{case}_s{setting}_{index:03d}.csv"
    try:
        result = run_episode(sc, ep)
    except TrackDuelError as exc:
        return name, {"error": str(exc)}
    write_episode(Path(outdir) / name, result)
    return name, {
        "delta_x": result.delta_x,
        "violation": result.violation.violated,
    }


def cmd_batch(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scenarios = args.scenarios or list(SCENARIOS)
    cases = args.cases or list(CASES)
    settings = args.settings or list(SETTINGS)
    jobs = []
    for scen in scenarios:
        for case in cases:
            for setting in settings:
                for i in range(args.episodes):
                    jobs.append(
                        (scen, args.config, case, setting, i, args.seed, str(outdir), args.iterations)
                    )
    workers = args.workers or int(os.environ.get("TRACKDUEL_WORKERS", os.cpu_count() or 1))
    print(f"{len(jobs)} episodes on {workers} workers -> {outdir}")
    episodes = []
    failures = 0
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        for name, info in pool.map(_batch_cell, jobs, chunksize=1):
            if "error" in info:
                failures += 1
                print(f"  {name}  FAILED: {info['error']}", file=sys.stderr)
                continue
            episodes.append(name)
            mark = "V" if info["violation"] else " "
            print(f"  {name}  dx={info['delta_x']:+7.2f} {mark}")
    digest = (load_scenario(args.config) if args.config else builtin_scenario(scenarios[0])).digest()
    manifest = RunManifest(
        config_digest=digest,
        base_seed=args.seed,
        version=__version__,
        episodes=sorted(episodes),
    )
    manifest.write(outdir / "manifest.json")
    print(f"manifest written; {failures} failures")
    return 0 if failures == 0 else 1


def cmd_check(args) -> int:
    rec = read_episode(args.file)
    case = args.rules or rec.meta.get("case", "OM_and_ES")
    cfg = RulesConfig(
        car_width=args.car_width,
        track_width=args.track_width,
        delta_v=args.delta_v,
        active=CASES[case],
    )
    violation = sportsmanship_violation(rec.frenet("D"), rec.frenet("A"), cfg)
    print(f"rules = {case}")
    print(f"violation = {violation.violated}")
    if violation.violated:
        print(f"rule = {violation.rule}")
        print(f"witness timesteps = {violation.witness}")
        print(f"violating frames = {violation.frames}")
    stored = rec.meta.get("violation")
    if stored is not None and case == rec.meta.get("case"):
        agree = stored == violation.violated
        print(f"stored flag = {stored} ({'consistent' if agree else 'MISMATCH'})")
        return 0 if agree else 2
    return 0


def _fmt_row(label: str, values: list[str]) -> str:
    return f"{label:<26s}" + "".join(f"{v:>16s}" for v in values)


def cmd_table(args) -> int:
    rows = []
    directory = Path(args.dir)
    files = sorted(directory.glob("*.csv"))
    if not files:
        print(f"no episode files in {directory}", file=sys.stderr)
        return 1
    per_cell: dict[tuple, list[EpisodeRecord]] = {}
    for f in files:
        rec = read_episode(f)
        key = (rec.meta["scenario"], rec.meta["case"], rec.meta["setting"])
        per_cell.setdefault(key, []).append(rec)

    scenarios = [s for s in SCENARIOS if any(k[0] == s for k in per_cell)]
    header = [f"{s} S{n}" for s in scenarios for n in SETTINGS]
    lines = [_fmt_row("", header)]
    for case in CASES:
        dx_cells, rate_cells = [], []
        for s in scenarios:
            for n in SETTINGS:
                recs = per_cell.get((s, case, n))
                if not recs:
                    dx_cells.append("-")
                    rate_cells.append("-")
                    continue
                dx = sum(r.meta["delta_x"] for r in recs) / len(recs)
                rate = sum(1 for r in recs if r.meta["violation"]) / len(recs)
                dx_cells.append(f"{dx:+.2f}")
                rate_cells.append(f"{rate:.2f}")
        lines.append(_fmt_row(f"{case} lead dist (m)", dx_cells))
        lines.append(_fmt_row(f"{case} violation rate", rate_cells))
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trackduel", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one episode")
    run.add_argument("--scenario", choices=SCENARIOS, default="straightaway")
    run.add_argument("--config", help="scenario YAML overriding the builtin")
    run.add_argument("--case", choices=list(CASES), default="OM")
    run.add_argument("--setting", type=int, choices=SETTINGS, default=2)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--iterations", type=int, help="search iterations override")
    run.add_argument("--out", help="output trajectory file")
    run.set_defaults(fn=cmd_run)

    batch = sub.add_parser("batch", help="run the full experiment grid")
    batch.add_argument("--outdir", required=True)
    batch.add_argument("--episodes", type=int, default=50)
    batch.add_argument("--seed", type=int, default=0)
    batch.add_argument("--scenarios", nargs="*", choices=SCENARIOS)
    batch.add_argument("--cases", nargs="*", choices=list(CASES))
    batch.add_argument("--settings", nargs="*", type=int, choices=SETTINGS)
    batch.add_argument("--config", help="scenario YAML overriding the builtins")
    batch.add_argument("--iterations", type=int)
    batch.add_argument("--workers", type=int)
    batch.set_defaults(fn=cmd_batch)

    check = sub.add_parser("check", help="re-check rules on a trajectory file")
    check.add_argument("file")
    check.add_argument("--rules", choices=list(CASES))
    check.add_argument("--car-width", type=float, default=1.8)
    check.add_argument("--track-width", type=float, default=5.8)
    check.add_argument("--delta-v", type=float, default=1.5)
    check.set_defaults(fn=cmd_check)

    table = sub.add_parser("table", help="aggregate a batch directory")
    table.add_argument("dir")
    table.set_defaults(fn=cmd_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except TrackDuelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
