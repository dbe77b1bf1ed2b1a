"""
Command-line interface for Rendezvous Lab.

Subcommands:
    colour      run the early-stopping colouring on a path or cycle
    rendezvous  run one scenario and check it against its bound
    sweep       run a grid of scenarios and print one CSV row per cell
    verify      run the acceptance suite

Exit codes: 0 pass, 1 property or bound failure, 2 usage or config error.
"""

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from agents import Algorithm
from colouring import TERMINATION_SLACK, Topology, run_local
from config import DEFAULT_SEED, load_config, resolve_kappa, save_config
from errors import ConfigError, LabelWindowError, PreconditionError, RendezvousLabError
from harness import (
    REPRO_KEYS,
    SweepSpec,
    first_failure,
    repro_command,
    run_sweep,
    run_verify,
    write_sweep_csv,
)
from line import GeneratorKind, LabelGenSpec, label_at, load_label_file, make_line
from numerics import log_star
from simulator import Met, run_rendezvous, scenario_bound, scenario_ell, scenario_from_config, write_trace_csv


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

RENDEZVOUS_COLUMNS = ["algorithm", "D", "delay", "ell", "elapsed", "bound", "ok"]
COLOUR_COLUMNS = ["node_index", "label", "final_colour", "termination_round"]

ORIENTATION_SETS = {
    "agree": ((1, 1),),
    "oppose": ((1, -1),),
    "both": ((1, 1), (1, -1)),
    "all": ((1, 1), (1, -1), (-1, 1), (-1, -1)),
}

REPRO_FILE_NAME = "failing_scenario.cfg"


def _banner(title: str, lines: Sequence[str] = ()) -> None:
    print("=" * 70, file=sys.stderr)
    print(title, file=sys.stderr)
    print("=" * 70, file=sys.stderr)
    for line in lines:
        print(line, file=sys.stderr)


def parse_int_list(text: str) -> Tuple[int, ...]:
    """
    Parse "1,2,5-8" into (1, 2, 5, 6, 7, 8).

    Raises:
        ConfigError: On malformed items or an empty result
    """
    values: List[int] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if "-" in item[1:]:
                split_at = item.index("-", 1)
                low, high = int(item[:split_at]), int(item[split_at + 1:])
                values.extend(range(low, high + 1))
            else:
                values.append(int(item))
        except ValueError as exc:
            raise ConfigError(f"bad integer list item {item!r}") from exc
    if not values:
        raise ConfigError(f"empty integer list {text!r}")
    return tuple(values)


def _generator_kinds(text: str) -> Tuple[GeneratorKind, ...]:
    try:
        return tuple(GeneratorKind(item.strip()) for item in text.split(",") if item.strip())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# colour
# ---------------------------------------------------------------------------

def _colour_labels(args: argparse.Namespace) -> List[int]:
    if args.labels_file:
        labels, _ = load_label_file(args.labels_file)
        return list(labels)
    kind = GeneratorKind(args.generator)
    if kind == GeneratorKind.EXPLICIT:
        raise ConfigError("use --labels-file for explicit labels")
    spec = LabelGenSpec(kind, tier=args.tier, starts=(0,))
    line = make_line(spec, seed=args.seed)
    return [label_at(line, pos) + args.label_shift for pos in range(args.count)]


def cmd_colour(args: argparse.Namespace) -> int:
    try:
        labels = _colour_labels(args)
        topology = Topology(args.topology)
        result = run_local(labels, topology)
    except (ConfigError, PreconditionError) as exc:
        _banner("ERROR: invalid colouring input", [str(exc)])
        return EXIT_USAGE
    except RendezvousLabError as exc:
        _banner("FAILED: colouring run broke an invariant", [str(exc)])
        return EXIT_FAILED

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(COLOUR_COLUMNS)
    late = []
    for index, (label, colour, finished) in enumerate(
        zip(labels, result.final_colours, result.termination_rounds)
    ):
        writer.writerow([index, label, colour, finished])
        if finished > log_star(label) + TERMINATION_SLACK:
            late.append(f"node {index} (label {label}) finished in round {finished}")

    problems = late
    if not result.is_proper(topology):
        problems = ["adjacent nodes share a final colour"] + late
    if problems:
        _banner("FAILED: colouring properties violated", problems)
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# rendezvous
# ---------------------------------------------------------------------------

def _rendezvous_config(args: argparse.Namespace) -> Dict[str, Any]:
    config: Dict[str, Any] = {}
    if args.scenario:
        config, status = load_config(args.scenario, return_status=True)
        if status != "ok":
            raise ConfigError(f"scenario file {args.scenario} is {status}")
    for key in REPRO_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if args.kappa is not None:
        config["kappa"] = args.kappa
    return config


def cmd_rendezvous(args: argparse.Namespace) -> int:
    try:
        config = _rendezvous_config(args)
        scenario = scenario_from_config(config)
        bound = scenario_bound(scenario)
        ell = scenario_ell(scenario)
        outcome, trace = run_rendezvous(scenario, record_trace=bool(args.trace_out))
    except LabelWindowError as exc:
        _banner("ERROR: an agent walked off the finite line", [str(exc), "Widen --radius or the label file."])
        return EXIT_USAGE
    except (ConfigError, PreconditionError) as exc:
        _banner("ERROR: invalid scenario", [str(exc)])
        return EXIT_USAGE
    except RendezvousLabError as exc:
        _banner("FAILED: agent lost track of itself", [str(exc), repro_command(config)])
        return EXIT_FAILED

    if args.trace_out:
        write_trace_csv(trace, args.trace_out)

    met = isinstance(outcome, Met)
    elapsed = outcome.elapsed_from_earlier_wake if met else "timeout"
    ok = met and outcome.elapsed_from_earlier_wake <= bound
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(RENDEZVOUS_COLUMNS)
    writer.writerow([
        scenario.algorithm_a.algorithm.value, scenario.distance, scenario.delay,
        ell, elapsed, bound, "true" if ok else "false",
    ])
    if not ok:
        reason = f"no meeting within {outcome.limit} rounds" if not met else f"elapsed {elapsed} > bound {bound}"
        _banner("FAILED: rendezvous bound not met", [reason, "Reproduce with:", repro_command(config)])
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = SweepSpec(
            algorithm=Algorithm(args.algorithm),
            distances=parse_int_list(args.distances),
            delays=parse_int_list(args.delays),
            generators=_generator_kinds(args.generators),
            orientations=ORIENTATION_SETS[args.orientations],
            trials=args.trials,
            seed=args.seed,
            kappa=args.kappa if args.kappa is not None else resolve_kappa(),
            tier=args.tier,
            label_shift=args.label_shift,
            max_rounds=args.max_rounds,
        )
        results = run_sweep(spec, workers=args.workers)
    except (ConfigError, PreconditionError, ValueError) as exc:
        _banner("ERROR: invalid sweep", [str(exc)])
        return EXIT_USAGE
    except RendezvousLabError as exc:
        _banner("FAILED: sweep aborted", [str(exc)])
        return EXIT_FAILED

    write_sweep_csv(results, sys.stdout)

    failed = first_failure(results)
    if failed is None:
        return EXIT_OK
    lines = [f"first failing cell: {failed.key}", "Reproduce with:", repro_command(failed.failure)]
    if args.repro_dir:
        repro_path = Path(args.repro_dir) / REPRO_FILE_NAME
        if save_config(str(repro_path), failed.failure):
            lines.append(f"Scenario file: {repro_path}")
        else:
            lines.append(f"Could not write scenario file {repro_path}")
    _banner("FAILED: sweep cells exceeded their bounds", lines)
    return EXIT_FAILED


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args: argparse.Namespace) -> int:
    results = run_verify(
        quick=args.quick,
        seed=args.seed,
        kappa=args.kappa,
        workers=args.workers,
        max_rounds=args.max_rounds,
    )
    for result in results:
        verdict = "PASS" if result.ok else "FAIL"
        print(f"[{verdict}] {result.number}. {result.name}: {result.detail}")
    failed = [str(result.number) for result in results if not result.ok]
    if failed:
        _banner("FAILED: acceptance criteria " + ", ".join(failed))
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", type=str, default=None, help="key=value scenario file")
    parser.add_argument("--algorithm", choices=[a.value for a in Algorithm], default=None)
    parser.add_argument("--generator", choices=[g.value for g in GeneratorKind], default=None)
    parser.add_argument("--seed", type=int, default=None, help="line generator seed")
    parser.add_argument("--start-a", dest="start_a", type=int, default=None)
    parser.add_argument("--start-b", dest="start_b", type=int, default=None)
    parser.add_argument("--distance", type=int, default=None, help="start_b = start_a + distance")
    parser.add_argument("--delay", type=int, default=None, help="agent B wakes this many rounds later")
    parser.add_argument("--wake-a", dest="wake_a", type=int, default=None)
    parser.add_argument("--wake-b", dest="wake_b", type=int, default=None)
    parser.add_argument("--orientation-a", dest="orientation_a", type=int, choices=(1, -1), default=None)
    parser.add_argument("--orientation-b", dest="orientation_b", type=int, choices=(1, -1), default=None)
    parser.add_argument("--tier", type=int, default=None, help="huge-neighbours tower tier (4 or 5)")
    parser.add_argument("--radius", type=int, default=None, help="random-window materialisation radius")
    parser.add_argument("--labels-file", dest="labels_file", type=str, default=None)
    parser.add_argument("--label-shift", dest="label_shift", type=int, default=None)
    parser.add_argument("--max-rounds", dest="max_rounds", type=int, default=None,
                        help="round budget (0 derives it from the bound)")
    parser.add_argument("--trace-out", dest="trace_out", type=str, default=None,
                        help="write the per-round trace CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_cli.py",
        description="Rendezvous Lab: deterministic rendezvous on labeled lines",
    )
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    parser.add_argument("--kappa", type=int, default=None,
                        help="colouring termination constant (default: $RLAB_KAPPA or 60)")
    sub = parser.add_subparsers(dest="command", required=True)

    colour = sub.add_parser("colour", help="3-colour a path or cycle")
    colour.add_argument("--labels-file", dest="labels_file", type=str, default=None)
    colour.add_argument("--generator", choices=[g.value for g in GeneratorKind],
                        default=GeneratorKind.RANDOM_WINDOW.value)
    colour.add_argument("--count", type=int, default=100, help="number of nodes for generated labels")
    colour.add_argument("--seed", type=int, default=DEFAULT_SEED)
    colour.add_argument("--tier", type=int, default=4)
    colour.add_argument("--label-shift", dest="label_shift", type=int, default=0)
    colour.add_argument("--topology", choices=[t.value for t in Topology], default=Topology.PATH.value)
    colour.set_defaults(handler=cmd_colour)

    rendezvous = sub.add_parser("rendezvous", help="run one scenario")
    _add_scenario_flags(rendezvous)
    rendezvous.set_defaults(handler=cmd_rendezvous)

    sweep = sub.add_parser("sweep", help="run a grid of scenarios")
    sweep.add_argument("--algorithm", choices=[a.value for a in Algorithm], required=True)
    sweep.add_argument("--distances", type=str, required=True, help='e.g. "1-16" or "1,2,4"')
    sweep.add_argument("--delays", type=str, default="0", help='e.g. "0,1,2,100"')
    sweep.add_argument("--generators", type=str, default=GeneratorKind.CANONICAL.value)
    sweep.add_argument("--orientations", choices=sorted(ORIENTATION_SETS), default="both")
    sweep.add_argument("--trials", type=int, default=1)
    sweep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sweep.add_argument("--tier", type=int, default=4)
    sweep.add_argument("--label-shift", dest="label_shift", type=int, default=None)
    sweep.add_argument("--max-rounds", dest="max_rounds", type=int, default=0)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--repro-dir", dest="repro_dir", type=str, default=None,
                       help="write the first failing scenario here")
    sweep.set_defaults(handler=cmd_sweep)

    verify = sub.add_parser("verify", help="run the acceptance suite")
    verify.add_argument("--quick", action="store_true", help="reduced scale smoke run")
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify.add_argument("--workers", type=int, default=1)
    verify.add_argument("--max-rounds", dest="max_rounds", type=int, default=0)
    verify.set_defaults(handler=cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the command line."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.kappa is not None and args.kappa < 1:
        _banner("ERROR: --kappa must be a positive integer")
        return EXIT_USAGE
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
