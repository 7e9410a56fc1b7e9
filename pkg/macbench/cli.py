#!/usr/bin/env python3
"""
Command-line front end for the MAC channel-access workbench

  python -m macbench analytic pure-aloha t-vs-g 0 2 0.5
  python -m macbench timing configs/default.yaml
  python -m macbench simulate configs/default.yaml --seed 7
  python -m macbench compare configs/compare.yaml out/run1

CSV goes to standard output (or files for compare); log lines go to standard error.
Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

import argparse
import io
import sys

import pandas as pd

from macbench import des_engine
from macbench.analytic_models import AS_PRINTED, RELATIONS, canonical_technique, generate_curve, peak_load, peak_throughput
from macbench.config_manager import ConfigManager
from macbench.errors import ConfigError, DomainError, MacBenchError
from macbench.frame_timing import (
    FRAME_TECHNIQUES,
    frame_delay,
    rank_techniques,
    throughput_from_delay,
    throughput_vs_payload,
)
from macbench.plots import plot_relation
from macbench.run_logger import RunLogger
from macbench.sweep_harness import reproduce_conclusion, run_sweep

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

FLOAT_FORMAT = "%.6g"
PAYLOAD_GRID = (16, 32, 64, 127)


def _csv(frame, out):
    frame.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def cmd_analytic(args, out, logger):
    """Evaluate one closed-form relation over a grid"""
    technique = canonical_technique(args.technique)
    if args.relation not in RELATIONS:
        raise DomainError(f"unknown relation {args.relation!r}; choose from {', '.join(RELATIONS)}")

    manager = ConfigManager(args.config, cli_seed=args.seed)
    updates = {
        field: value for field, value in (
            ("n_nodes", args.n_nodes),
            ("pkt_len", args.pkt_len),
            ("cycle_len", args.cycle_len),
            ("queue_occ", args.queue_occ),
            ("norm_prop_delay", args.a),
            ("retrans_window", args.k),
        ) if value is not None
    }
    try:
        params = manager.analytic_params().with_updates(**updates)
    except ValueError as e:
        raise ConfigError(f"invalid analytic parameters: {e}")
    logger.info(f"seed={manager.seed}", component="analytic")

    curve = generate_curve(technique, args.relation, (args.lo, args.hi, args.step), params)
    if curve.note == AS_PRINTED:
        logger.info(f"{technique} {args.relation} is evaluated as printed", technique=technique)
    for x in curve.skipped:
        logger.warning(f"skipped x={x:g}: outside the relation's domain", technique=technique, component="analytic")
    if args.relation == "t-vs-g" and technique in ("pure_aloha", "slotted_aloha"):
        ratio = peak_throughput("slotted_aloha") / peak_throughput("pure_aloha")
        logger.info(
            f"peak S={peak_throughput(technique):.5g} at G={peak_load(technique):g}; "
            f"slotted/pure peak ratio={ratio:.4g}",
            technique=technique, component="analytic",
        )

    frame = pd.DataFrame(
        [(p.technique, p.relation, p.x, p.y) for p in curve.points],
        columns=["technique", "relation", "x", "y"],
    )
    _csv(frame, out)
    return EXIT_OK, len(frame)


def cmd_timing(args, out, logger):
    """Frame-delay breakdown, totals, ranking and payload sweep for the configured frame timing"""
    manager = ConfigManager(args.config, cli_seed=args.seed)
    ft = manager.frame_timing()
    logger.info(f"seed={manager.seed}", component="timing")

    breakdowns = [frame_delay(technique, ft) for technique in FRAME_TECHNIQUES]
    components = pd.DataFrame(
        [(b.technique, name, seconds) for b in breakdowns for name, seconds in b.components.items()],
        columns=["technique", "component", "seconds"],
    )
    totals = pd.DataFrame(
        [(b.technique, b.total, throughput_from_delay(ft.payload_bytes, b.total)) for b in breakdowns],
        columns=["technique", "total_s", "throughput_bps"],
    )
    ranking = pd.DataFrame(
        [(rank, technique, bps) for rank, (technique, bps) in enumerate(rank_techniques(ft), start=1)],
        columns=["rank", "technique", "throughput_bps"],
    )
    payload_rows = []
    for technique in FRAME_TECHNIQUES:
        try:
            points = throughput_vs_payload(technique, ft, PAYLOAD_GRID)
        except DomainError as e:
            logger.warning(f"payload sweep skipped: {e}", technique=technique, component="timing")
            continue
        payload_rows.extend((technique, size, bps) for size, bps in points)
    payload = pd.DataFrame(payload_rows, columns=["technique", "payload_bytes", "throughput_bps"])

    _csv(components, out)
    out.write("\n")
    _csv(totals, out)
    out.write("\n")
    _csv(ranking, out)
    out.write("\n")
    _csv(payload, out)
    return EXIT_OK, len(totals)


def cmd_simulate(args, out, logger):
    """Run one simulation and print its metrics row"""
    manager = ConfigManager(args.config, cli_seed=args.seed)
    overrides = {}
    if args.technique is not None:
        overrides["technique"] = canonical_technique(args.technique)
    if args.g is not None:
        overrides["offered_load_g"] = args.g
    if args.stop_packets is not None:
        overrides["stop_packets"] = args.stop_packets
    config = manager.sim_config(**overrides)

    logger.info(
        f"Simulating {config.technique} at g={config.offered_load_g:g}, seed={config.seed}",
        technique=config.technique, component="simulate",
    )
    result = des_engine.run(config, trace=args.trace is not None, logger=logger)
    metrics = result.metrics
    if metrics.status != des_engine.COMPLETED:
        logger.warning(f"run ended {metrics.status} before the stop rule", technique=config.technique)

    if args.trace is not None:
        des_engine.write_trace(result.trace, args.trace)
        logger.info(f"Trace written to {args.trace}", component="simulate")

    row = metrics.to_dict()
    frame = pd.DataFrame([row], columns=[
        "technique", "g", "attempted", "succeeded", "collided",
        "throughput_s", "mean_delay", "ci_lo", "ci_hi", "seed",
    ])
    _csv(frame, out)
    return EXIT_OK, 1


def cmd_compare(args, out, logger):
    """
    Sweep and write <prefix>.csv, one <prefix>-<relation>.svg per relation,
    the resolved manifest as <prefix>-config.yaml and, when sweep.conclusion_g
    is set, <prefix>-conclusion.csv
    """
    manager = ConfigManager(args.config, cli_seed=args.seed)
    spec = manager.sweep_spec()
    csv_path = f"{args.prefix}.csv"

    # fail on an unwritable destination before spending time simulating
    try:
        with open(csv_path, "w"):
            pass
    except OSError as e:
        logger.error(f"Cannot write output {csv_path}: {e}", component="compare")
        return EXIT_RUNTIME, 0

    config_path = f"{args.prefix}-config.yaml"
    with open(config_path, "w") as f:
        f.write(manager.dump())
    logger.info(f"Wrote {config_path}", component="compare")

    table = run_sweep(spec, logger)
    table.to_csv(csv_path)
    logger.info(f"Wrote {csv_path} ({len(table)} rows, seed={table.seed})", component="compare")
    for diagnostic in table.diagnostics:
        logger.warning(
            f"{diagnostic['technique']} g={diagnostic['g']:g} {diagnostic['component']}: {diagnostic['error']}",
            technique=diagnostic["technique"], component="compare",
        )

    for relation in spec.relations:
        svg_path = f"{args.prefix}-{relation}.svg"
        plot_relation(table.frame, relation, svg_path)
        logger.info(f"Wrote {svg_path}", component="compare")

    if spec.conclusion_g is not None:
        report = reproduce_conclusion(spec, logger=logger)
        conclusion_path = f"{args.prefix}-conclusion.csv"
        report.to_frame().to_csv(conclusion_path, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote {conclusion_path}", component="compare")
    return EXIT_OK, len(table)


def build_parser():
    parser = argparse.ArgumentParser(prog="macbench", description="MAC channel-access workbench")
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    analytic_parser = subparsers.add_parser("analytic", help="Evaluate a closed-form relation")
    analytic_parser.add_argument("technique", help="pure-aloha, slotted-aloha, csma, csma-ca, tdma or fdma")
    analytic_parser.add_argument("relation", help="d-vs-g, t-vs-g or d-vs-t")
    analytic_parser.add_argument("lo", type=float)
    analytic_parser.add_argument("hi", type=float)
    analytic_parser.add_argument("step", type=float)
    analytic_parser.add_argument("--config", help="YAML run manifest for the analytic section")
    analytic_parser.add_argument("--n-nodes", type=int, dest="n_nodes")
    analytic_parser.add_argument("--pkt-len", type=float, dest="pkt_len")
    analytic_parser.add_argument("--cycle-len", type=float, dest="cycle_len")
    analytic_parser.add_argument("--queue-occ", type=float, dest="queue_occ")
    analytic_parser.add_argument("--a", type=float, help="normalized propagation delay")
    analytic_parser.add_argument("--k", type=float, help="retransmission window")

    timing_parser = subparsers.add_parser("timing", help="Frame-delay breakdown and ranking")
    timing_parser.add_argument("config", nargs="?", help="YAML run manifest (defaults if omitted)")

    simulate_parser = subparsers.add_parser("simulate", help="Run one simulation")
    simulate_parser.add_argument("config", nargs="?", help="YAML run manifest (defaults if omitted)")
    simulate_parser.add_argument("--technique")
    simulate_parser.add_argument("--g", type=float, help="offered load")
    simulate_parser.add_argument("--stop-packets", type=int, dest="stop_packets")
    simulate_parser.add_argument("--trace", help="write the event trace to this file")

    compare_parser = subparsers.add_parser("compare", help="Sweep and compare against the closed forms")
    compare_parser.add_argument("config", help="YAML run manifest")
    compare_parser.add_argument("prefix", help="output prefix for the CSV and SVG files")

    for sub in (analytic_parser, timing_parser, simulate_parser, compare_parser):
        sub.add_argument("--seed", type=int, help="random seed (default: MACBENCH_SEED or 42)")
    return parser


COMMANDS = {
    "analytic": cmd_analytic,
    "timing": cmd_timing,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    logger = RunLogger(stream=err)
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    if not args.command:
        parser.print_help(err or sys.stderr)
        return EXIT_USAGE

    # Buffer stdout so a failing command never leaves a partial table behind
    buffer = io.StringIO()
    try:
        code, records = COMMANDS[args.command](args, buffer, logger)
    except (ConfigError, DomainError) as e:
        logger.update_run_status("failed", error_message=str(e))
        return EXIT_USAGE
    except MacBenchError as e:
        logger.update_run_status("failed", error_message=str(e))
        return EXIT_RUNTIME
    except OSError as e:
        logger.update_run_status("failed", error_message=f"I/O failure: {e}")
        return EXIT_RUNTIME

    if code != EXIT_OK:
        logger.update_run_status("failed", records_processed=records)
        return code

    out.write(buffer.getvalue())
    out.flush()
    # rows aborted inside a sweep are logged as errors but do not fail the run
    status = "completed with errors" if logger.errors() else "completed"
    logger.update_run_status(status, records_processed=records)
    return code


if __name__ == "__main__":
    sys.exit(main())
