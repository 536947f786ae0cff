"""CLI entrypoint for tagtrack batch experiments."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from config.settings import METHOD_LABELS, TAGTRACK_JOBS, TAGTRACK_OUTPUT_DIR
from tagtrack.bearing.detectors import AoaConfig
from tagtrack.bearing.rotation_log import load_rotation_logs
from tagtrack.bearing.study import run_detector_study, study_logs, summarize_detector_study
from tagtrack.bernoulli.belief import export_belief_csv
from tagtrack.cli.scenario_config import (
    ScenarioConfig,
    apply_overrides,
    load_config,
    parse_config,
    serialize_config,
)
from tagtrack.errors import ConfigError, TagTrackError
from tagtrack.propagation.antenna import PATTERN_BUILDERS, load_pattern
from tagtrack.scenario.monte_carlo import (
    TrialOutcome,
    missions_frame,
    results_frame,
    run_trials,
    summarize,
)

console = Console()

FLOAT_FORMAT = "%.6f"


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="python -m tagtrack.cli.run",
        description="tagtrack: simulated UAV localization of radio-tagged wildlife.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Monte-Carlo trials of one scenario")
    _add_common(run_p)
    run_p.add_argument("--traces", action="store_true", help="Write planner decision logs and 1 Hz traces")

    sweep_p = sub.add_parser("sweep", help="Cross-product of config values")
    _add_common(sweep_p)
    sweep_p.add_argument(
        "--axis",
        action="append",
        default=[],
        metavar="KEY=V1,V2",
        help="Config key and the values to sweep, e.g. mission.method=metap,imp_rssi",
    )

    check_p = sub.add_parser("validate-config", help="Parse and validate a scenario config")
    check_p.add_argument("--config", metavar="PATH", help="Scenario JSON (defaults apply when omitted)")
    check_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    study_p = sub.add_parser("detector-study", help="Compare the AoA detectors")
    study_p.add_argument("--log", metavar="CSV", help="Rotation log CSV; synthetic rotations when omitted")
    study_p.add_argument("--pattern", metavar="PATH", help="Antenna gain table (degrees, dB)")
    study_p.add_argument(
        "--antenna", choices=sorted(PATTERN_BUILDERS), default="two_lobe", help="Built-in pattern when --pattern is omitted"
    )
    study_p.add_argument("--rotations", type=int, default=500)
    study_p.add_argument("--rate", type=float, default=0.3, help="Target detection rate")
    study_p.add_argument("--seed", type=int, default=0)
    study_p.add_argument("--output", metavar="DIR", default=TAGTRACK_OUTPUT_DIR)

    args = parser.parse_args(argv)
    if args.command == "run":
        sys.exit(cmd_run(args))
    if args.command == "sweep":
        sys.exit(cmd_sweep(args))
    if args.command == "validate-config":
        sys.exit(cmd_validate(args))
    sys.exit(cmd_detector_study(args))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="Scenario JSON (defaults apply when omitted)")
    p.add_argument("--seed", type=int, help="Base seed; trial i uses seed + i")
    p.add_argument("--trials", type=int, help="Number of Monte-Carlo trials")
    p.add_argument("--jobs", type=int, default=TAGTRACK_JOBS, help="Parallel trial workers")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--output", metavar="DIR", default=TAGTRACK_OUTPUT_DIR)


def _load(args: argparse.Namespace, extra: list[str] | None = None) -> ScenarioConfig:
    overrides = list(args.override) + (extra or [])
    if args.config is None:
        return parse_config(apply_overrides({}, overrides))
    return load_config(args.config, overrides)


# ── run ───────────────────────────────────────────────────────────────────────


def cmd_run(args: argparse.Namespace) -> int:
    # ── 1. Load config ────────────────────────────────────────────────────────
    console.print("\n[bold cyan]Loading scenario...[/bold cyan]")
    try:
        config = _load(args)
    except (TagTrackError, OSError) as exc:
        console.print(f"\n[bold red]Config failed:[/bold red] {exc}")
        return 1
    trials = args.trials or config.mission.trials
    base_seed = args.seed if args.seed is not None else config.mission.base_seed
    console.print(
        f"[green]✓[/green] {METHOD_LABELS[config.mission.method]} on {config.terrain.kind} terrain, "
        f"{config.tags.count} tags, {trials} trial(s) from seed {base_seed}"
    )

    # ── 2. Run trials ─────────────────────────────────────────────────────────
    console.print(f"\n[bold cyan]Running trials...[/bold cyan] ({args.jobs} job(s))")
    outcomes = run_trials(config, trials, base_seed, args.jobs, trace=args.traces)
    for o in outcomes:
        if o.success:
            r = o.result
            console.print(
                f"[green]✓[/green] trial {o.trial} (seed {o.seed}): {r.total_time_s:.0f} s, "
                f"mean error {r.mean_error_m:.1f} m" + (" [yellow](time cap)[/yellow]" if r.timed_out else "")
            )
        else:
            console.print(f"[yellow]⚠[/yellow] trial {o.trial} (seed {o.seed}) failed: {o.error}")

    # ── 3. Write outputs ──────────────────────────────────────────────────────
    out_dir = Path(args.output)
    try:
        summary = write_run_outputs(out_dir, config, outcomes, traces=args.traces)
    except OSError as exc:
        console.print(f"\n[bold red]Writing results failed:[/bold red] {exc}")
        return 1

    # ── 4. Summary ────────────────────────────────────────────────────────────
    _print_summary([summary], out_dir)
    failed = sum(not o.success for o in outcomes)
    if failed:
        console.print(f"[bold red]{failed} trial(s) failed.[/bold red]")
        return 1
    return 0


def write_run_outputs(
    out_dir: Path, config: ScenarioConfig, outcomes: list[TrialOutcome], traces: bool = False
) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    results_frame(outcomes).to_csv(out_dir / "results.csv", index=False, float_format=FLOAT_FORMAT)
    missions_frame(outcomes, config.mission.method, config.terrain.kind).to_csv(
        out_dir / "missions.csv", index=False, float_format=FLOAT_FORMAT
    )
    summary = summarize(outcomes)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump({config.mission.method: summary}, fh, indent=2, sort_keys=True)
    with open(out_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(serialize_config(config), fh, indent=2)

    if traces:
        trace_dir = out_dir / "traces"
        trace_dir.mkdir(exist_ok=True)
        for o in outcomes:
            if not o.success:
                continue
            with open(trace_dir / f"decisions_{o.trial:04d}.jsonl", "w", encoding="utf-8") as fh:
                for record in o.result.decisions:
                    fh.write(json.dumps(record) + "\n")
            if o.result.trace is not None:
                frame = o.result.trace.assign(trial=o.trial)
                frame.to_csv(trace_dir / f"trace_{o.trial:04d}.csv", index=False, float_format=FLOAT_FORMAT)
            for belief in o.result.beliefs or []:
                export_belief_csv(belief, trace_dir / f"belief_{o.trial:04d}_tag{belief.tag_id:02d}.csv")
    return summary


# ── sweep ─────────────────────────────────────────────────────────────────────


def parse_axis(spec: str) -> tuple[str, list[str]]:
    key, sep, raw = spec.partition("=")
    values = [v.strip() for v in raw.split(",") if v.strip()]
    if not sep or not key.strip():
        raise ConfigError(spec, "axis must look like block.key=v1,v2")
    if not values:
        raise ConfigError(key.strip(), "axis has no values")
    return key.strip(), values


def cmd_sweep(args: argparse.Namespace) -> int:
    # ── 1. Axes ───────────────────────────────────────────────────────────────
    try:
        if not args.axis:
            raise ConfigError("--axis", "at least one sweep axis is required")
        axes = [parse_axis(a) for a in args.axis]
        cells = list(itertools.product(*(values for _, values in axes)))
        configs = [
            _load(args, [f"{key}={value}" for (key, _), value in zip(axes, cell)]) for cell in cells
        ]
    except (TagTrackError, OSError) as exc:
        console.print(f"\n[bold red]Sweep setup failed:[/bold red] {exc}")
        return 1
    console.print(
        f"\n[bold cyan]Sweeping[/bold cyan] {' x '.join(k for k, _ in axes)}: {len(cells)} cell(s)"
    )

    # ── 2. Run every cell ─────────────────────────────────────────────────────
    frames = []
    summaries = []
    failed = 0
    for cell, config in zip(cells, configs):
        trials = args.trials or config.mission.trials
        base_seed = args.seed if args.seed is not None else config.mission.base_seed
        outcomes = run_trials(config, trials, base_seed, args.jobs)
        failed += sum(not o.success for o in outcomes)
        labels = {key: value for (key, _), value in zip(axes, cell)}
        frames.append(results_frame(outcomes).assign(**labels))
        summaries.append({**labels, **summarize(outcomes)})
        console.print(f"[green]✓[/green] {labels}")

    # ── 3. Write long-format tables ───────────────────────────────────────────
    out_dir = Path(args.output)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        axis_cols = [k for k, _ in axes]
        long = pd.concat(frames, ignore_index=True)
        long = long[axis_cols + [c for c in long.columns if c not in axis_cols]]
        long.to_csv(out_dir / "sweep.csv", index=False, float_format=FLOAT_FORMAT)
        pd.DataFrame(summaries).to_csv(out_dir / "sweep_summary.csv", index=False, float_format=FLOAT_FORMAT)
    except OSError as exc:
        console.print(f"\n[bold red]Writing sweep failed:[/bold red] {exc}")
        return 1

    _print_summary(summaries, out_dir)
    if failed:
        console.print(f"[bold red]{failed} trial(s) failed.[/bold red]")
        return 1
    return 0


# ── validate-config ───────────────────────────────────────────────────────────


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = _load(args)
    except (TagTrackError, OSError) as exc:
        console.print(f"[bold red]Invalid config:[/bold red] {exc}")
        return 1

    table = Table(show_header=False, box=None, padding=(0, 1))
    table.add_column("Block", style="bold dim", min_width=12)
    table.add_column("Values")
    for block, values in serialize_config(config).items():
        table.add_row(block, ", ".join(f"{k}={v}" for k, v in values.items()))
    console.print(Panel(table, title="[bold]Scenario[/bold]", border_style="blue"))
    console.print("[green]✓[/green] Config is valid.")
    return 0


# ── detector-study ────────────────────────────────────────────────────────────


def cmd_detector_study(args: argparse.Namespace) -> int:
    try:
        pattern = load_pattern(args.pattern) if args.pattern else PATTERN_BUILDERS[args.antenna]()
    except (OSError, ValueError) as exc:
        console.print(f"\n[bold red]Pattern load failed:[/bold red] {exc}")
        return 1

    out_dir = Path(args.output)
    if args.log:
        console.print(f"\n[bold cyan]Reading rotations:[/bold cyan] {args.log}")
        try:
            logs = load_rotation_logs(args.log)
        except (OSError, ValueError) as exc:
            console.print(f"\n[bold red]Rotation log failed:[/bold red] {exc}")
            return 1
        frame = study_logs(logs, pattern, AoaConfig())
        console.print(f"[green]✓[/green] {len(frame)} rotation(s) processed.")
        name = "detector_study_offline.csv"
        summary = None
    else:
        console.print(
            f"\n[bold cyan]Synthetic study:[/bold cyan] {args.rotations} rotations "
            f"at {args.rate:.0%} detection rate"
        )
        try:
            frame = run_detector_study(
                n_rotations=args.rotations, detection_rate=args.rate, pattern=pattern, seed=args.seed
            )
        except ValueError as exc:
            console.print(f"\n[bold red]Study failed:[/bold red] {exc}")
            return 1
        summary = summarize_detector_study(frame)
        name = "detector_study.csv"

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out_dir / name, index=False, float_format=FLOAT_FORMAT)
    except OSError as exc:
        console.print(f"\n[bold red]Writing study failed:[/bold red] {exc}")
        return 1

    if summary is not None:
        table = Table(title="AoA detectors")
        for col in ("detector", "rotations", "median |err| (deg)", "std (deg)", "> 90 deg"):
            table.add_column(col)
        for row in summary.itertuples(index=False):
            table.add_row(
                row.detector,
                str(row.rotations),
                f"{row.median_abs_error_deg:.1f}",
                f"{row.std_error_deg:.1f}",
                f"{row.frac_above_90:.1%}",
            )
        console.print(table)
    console.print(f"[green]✓[/green] Wrote {out_dir / name}")
    return 0


def _print_summary(summaries: list[dict], out_dir: Path) -> None:
    table = Table(title="Localization summary")
    for col in ("method", "terrain", "trials", "mean time (s)", "median (s)", "std (s)", "mean error (m)", "AoA share"):
        table.add_column(col)
    for s in summaries:
        if not s.get("trials"):
            table.add_row(s.get("method", "?"), "-", "0", "-", "-", "-", "-", "-")
            continue
        table.add_row(
            s["label"],
            s["terrain"],
            str(s["trials"]),
            f"{s['mean_time_s']:.0f}",
            f"{s['median_time_s']:.0f}",
            f"{s['std_time_s']:.0f}",
            f"{s['mean_error_m']:.1f}",
            f"{s['mean_aoa_fraction']:.0%}",
        )
    console.print(table)
    console.print(
        Panel(f"[bold green]✓ Results written[/bold green]\n\n[bold]Output:[/bold] {out_dir}", border_style="green")
    )


if __name__ == "__main__":
    main()
