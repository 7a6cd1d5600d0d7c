"""Command-line entry point: `run` one campaign, `compare` result CSVs,
`bench` a repetition matrix of targets x schedulers."""

import argparse
import csv
import sys
import time
from pathlib import Path

from .corpus import DEFAULT_MAX_INPUT, CorpusError
from .es import DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_WINDOW
from .executor import DEFAULT_TIMEOUT_MS, TargetError, TargetSpec
from .fuzzer import DEFAULT_HAVOC_ROUNDS, CampaignConfig, run_campaign
from .metrics import mann_whitney_u, median
from .mutators import DictionaryError
from .scheduler import SchedulerError


class UsageError(Exception):
    pass


def _parse_duration(text: str) -> float:
    units = {"s": 1.0, "m": 60.0, "h": 3600.0}
    if text and text[-1] in units:
        return float(text[:-1]) * units[text[-1]]
    return float(text)


def _parse_target(text: str, command, timeout_ms: int) -> TargetSpec:
    if text.startswith("builtin:"):
        return TargetSpec(builtin=text.split(":", 1)[1], timeout_ms=timeout_ms)
    if text == "exec":
        if not command:
            raise UsageError("--target exec requires a command after '--'")
        return TargetSpec(command=list(command), timeout_ms=timeout_ms)
    raise UsageError(f"--target must be builtin:<name> or exec, got {text!r}")


def _split_scheduler(text: str):
    if text.startswith("static:"):
        return "static", text.split(":", 1)[1]
    return text, None


def _add_run_flags(parser):
    parser.add_argument("-i", "--input", required=True, help="seed directory")
    parser.add_argument("-o", "--output", required=True, help="output directory")
    parser.add_argument("--target", required=True,
                        help="builtin:<name> or 'exec' followed by -- <cmd...> with @@")
    parser.add_argument("--scheduler", default="darwin",
                        help="uniform | darwin | static:<file> (default: darwin)")
    parser.add_argument("--encoding", choices=("binary", "real"), default="binary")
    parser.add_argument("--seed", type=int, default=None,
                        help="campaign seed; a time-derived seed is chosen and printed if absent")
    parser.add_argument("--execs", type=int, default=None,
                        help="execution budget (deterministic mode)")
    parser.add_argument("--duration", default=None,
                        help="wall-clock budget, e.g. 300s / 5m / 2h")
    parser.add_argument("--mu", type=int, default=DEFAULT_MU)
    parser.add_argument("--lambda", dest="lam", type=int, default=DEFAULT_LAMBDA)
    parser.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    parser.add_argument("--dict", dest="dict_path", default=None)
    parser.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    parser.add_argument("--havoc-rounds", type=int, default=DEFAULT_HAVOC_ROUNDS)
    parser.add_argument("--max-len", type=int, default=DEFAULT_MAX_INPUT)
    parser.add_argument("command", nargs=argparse.REMAINDER,
                        help="external target command (after --) for --target exec")


def build_parser():
    parser = argparse.ArgumentParser(prog="darwinfuzz")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run_p = sub.add_parser("run", help="run one fuzzing campaign")
    _add_run_flags(run_p)

    cmp_p = sub.add_parser("compare", help="compare two groups of stats.csv files")
    cmp_p.add_argument("--a", nargs="+", required=True, metavar="CSV")
    cmp_p.add_argument("--b", nargs="+", required=True, metavar="CSV")

    bench_p = sub.add_parser("bench", help="run a target x scheduler repetition matrix")
    bench_p.add_argument("plan", help="plan file (key=value lines)")
    bench_p.add_argument("-o", "--output", required=True)
    return parser


def _config_from_args(args) -> CampaignConfig:
    if (args.execs is None) == (args.duration is None):
        raise UsageError("exactly one of --execs and --duration is required")
    seed = args.seed
    if seed is None:
        seed = time.time_ns() & ((1 << 64) - 1)
        print(f"seed not given; using time-derived seed {seed}")
    command = args.command
    if command and command[0] == "--":
        command = command[1:]
    kind, static_path = _split_scheduler(args.scheduler)
    return CampaignConfig(
        seed=seed,
        input_dir=args.input,
        output_dir=args.output,
        target=_parse_target(args.target, command, args.timeout_ms),
        scheduler_kind=kind,
        static_path=static_path,
        encoding=args.encoding,
        mu=args.mu,
        lam=args.lam,
        window=args.window,
        execs=args.execs,
        duration_s=_parse_duration(args.duration) if args.duration else None,
        havoc_rounds=args.havoc_rounds,
        dict_path=args.dict_path,
        max_len=args.max_len,
    )


def cmd_run(args) -> int:
    stats = run_campaign(_config_from_args(args))
    print(f"done: {stats.execs} execs, {stats.unique_paths} unique paths, "
          f"{stats.edges_covered} edges, {stats.crashes} crashes")
    return 0


def _final_row(csv_path):
    with open(csv_path, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise UsageError(f"{csv_path}: no data rows")
    return rows[-1]


def cmd_compare(args) -> int:
    finals_a = [int(_final_row(p)["unique_paths"]) for p in args.a]
    finals_b = [int(_final_row(p)["unique_paths"]) for p in args.b]
    for label, paths, finals in (("A", args.a, finals_a), ("B", args.b, finals_b)):
        for p, v in zip(paths, finals):
            print(f"{label} {p}: final unique_paths = {v}")
        print(f"{label} median = {median(finals)}")
    u, p = mann_whitney_u(finals_a, finals_b)
    print(f"U = {u}")
    print(f"p (two-sided) = {p}")
    return 0


def parse_plan(path):
    plan = {"runs": 10, "base_seed": 1, "execs": None, "duration": None,
            "targets": None, "schedulers": None}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("targets", "schedulers"):
            plan[key] = [v.strip() for v in value.split(",") if v.strip()]
        elif key in ("runs", "base_seed", "execs"):
            plan[key] = int(value)
        elif key in ("duration", "seeds"):
            plan[key] = value
        else:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
    for key in ("targets", "schedulers", "seeds"):
        if not plan.get(key):
            raise UsageError(f"{path}: plan must set {key}")
    if (plan["execs"] is None) == (plan["duration"] is None):
        raise UsageError(f"{path}: plan must set exactly one of execs, duration")
    if plan["runs"] < 1:
        raise UsageError(f"{path}: runs must be >= 1")
    return plan


def _sanitize(name: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in name)


def cmd_bench(args) -> int:
    plan = parse_plan(args.plan)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    duration = _parse_duration(plan["duration"]) if plan["duration"] else None
    results = {}  # (target, scheduler) -> list of final stats
    for target_name in plan["targets"]:
        for sched_name in plan["schedulers"]:
            cell = []
            for r in range(plan["runs"]):
                run_dir = out / _sanitize(target_name) / _sanitize(sched_name) / f"run_{r}"
                kind, static_path = _split_scheduler(sched_name)
                cfg = CampaignConfig(
                    seed=plan["base_seed"] + r,
                    input_dir=plan["seeds"],
                    output_dir=str(run_dir),
                    target=_parse_target(target_name, None, DEFAULT_TIMEOUT_MS),
                    scheduler_kind=kind,
                    static_path=static_path,
                    execs=plan["execs"],
                    duration_s=duration,
                )
                stats = run_campaign(cfg)
                cell.append(stats)
                print(f"{target_name} / {sched_name} / run {r}: "
                      f"{stats.unique_paths} paths, {stats.edges_covered} edges")
            results[(target_name, sched_name)] = cell
    _write_summary(out / "summary.csv", plan, results)
    return 0


def _write_summary(path, plan, results):
    baseline = plan["schedulers"][0]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["target", "scheduler", "runs", "median_paths",
                         "mean_paths", "median_edges", "mean_edges",
                         f"p_vs_{_sanitize(baseline)}"])
        for (target, sched), cell in results.items():
            paths = [s.unique_paths for s in cell]
            edges = [s.edges_covered for s in cell]
            base = [s.unique_paths for s in results[(target, baseline)]]
            if sched == baseline or len(cell) < 2:
                p_text = ""
            else:
                _, p = mann_whitney_u(paths, base)
                p_text = repr(p)
            writer.writerow([target, sched, len(cell), median(paths),
                             sum(paths) / len(paths), median(edges),
                             sum(edges) / len(edges), p_text])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "compare": cmd_compare, "bench": cmd_bench}
    try:
        return handlers[args.subcommand](args)
    except (UsageError, CorpusError, SchedulerError, TargetError,
            DictionaryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
