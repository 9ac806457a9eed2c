"""
subfins - Sub-Finsler geometry toolkit, command-line entry point.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .cli import Command, config_from_dict, load_config, run
from .cli.commands import report_error
from .config import settings
from .errors import SubFinslerError
from .laplacian import VolumeForm
from .logger import logger


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--system", help="Catalog system name (overrides the config)")
    common.add_argument("--dim", type=int, help="Dimension of the euclidean system")
    common.add_argument("--metric", help="Metric variant: quadratic or curvature_weighted")
    common.add_argument("--alpha", type=float, help="Curvature weight")
    common.add_argument("--seed", type=int, help="Seed for every randomized step")
    common.add_argument("--threads", type=int, help="Worker threads, default all cores")
    common.add_argument("--record", action="store_true", help="Append this run to the run ledger")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    return common


def _curve_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trajectory", type=Path, help="Trajectory CSV to analyse")
    parser.add_argument("--from", dest="source", help="Start point x0")
    parser.add_argument("--to", dest="target", help="End point, the curve is the shot geodesic")
    parser.add_argument("--momentum", help="Initial momentum, the curve is the flow")
    parser.add_argument("--controls", help="Constant controls, the curve is horizontal")
    parser.add_argument("--T", type=float, help="Duration of flows and control curves")
    parser.add_argument("--method", choices=["rk4", "rk45"], help="Integrator")
    parser.add_argument("--dt", type=float, help="RK4 step")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="subfins", description="Numerical sub-Finsler geometry")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser(Command.VALIDATE.value, parents=[common], help="Check the metric axioms")
    validate.add_argument("--samples", type=int)

    brackets = commands.add_parser(Command.BRACKETS.value, parents=[common], help="Bracket-generating step")
    brackets.add_argument("--at", help="Point, the origin by default")
    brackets.add_argument("--max-depth", dest="max_depth", type=int)

    flow = commands.add_parser(Command.FLOW.value, parents=[common], help="Integrate the sub-Hamiltonian flow")
    flow.add_argument("--from", dest="source", required=True)
    flow.add_argument("--momentum", required=True)
    flow.add_argument("--T", type=float, default=1.0)
    flow.add_argument("--method", choices=["rk4", "rk45"])
    flow.add_argument("--dt", type=float)

    for command, text in ((Command.SHOOT, "Shoot a geodesic"), (Command.DISTANCE, "Sub-Finsler distance")):
        sub = commands.add_parser(command.value, parents=[common], help=text)
        sub.add_argument("--from", dest="source", required=True)
        sub.add_argument("--to", dest="target", required=True)
        if command == Command.DISTANCE:
            sub.add_argument("--direct", action="store_true", help="Use the direct method instead of shooting")

    variation = commands.add_parser(Command.VARIATION.value, parents=[common], help="First-variation residual")
    _curve_options(variation)
    variation.add_argument("--variations", type=int)

    for command, text in ((Command.CLASSIFY, "Abnormal certificate"), (Command.VAKONOMIC, "Vakonomic comparison")):
        sub = commands.add_parser(command.value, parents=[common], help=text)
        _curve_options(sub)
        sub.add_argument("--tol", type=float)

    laplacian = commands.add_parser(Command.LAPLACIAN.value, parents=[common], help="Sub-Laplacian and flatness scan")
    laplacian.add_argument("--field", action="append", help="Test function (repeatable)")
    laplacian.add_argument("--at", help="Evaluate at one point instead of scanning")
    laplacian.add_argument("--samples", type=int)
    laplacian.add_argument("--half-width", dest="half_width", type=float)
    laplacian.add_argument("--volume", choices=[v.value for v in VolumeForm])
    laplacian.add_argument("--pretty", action="store_true", help="Text table instead of JSON")

    invariance = commands.add_parser(Command.INVARIANCE.value, parents=[common], help="Geodesic invariance of D")
    invariance.add_argument("--from", dest="source", required=True)
    invariance.add_argument("--velocity", help="Initial velocity, the first frame field by default")
    invariance.add_argument("--T", type=float, default=1.0)
    invariance.add_argument("--dt", type=float)

    systems = commands.add_parser(Command.SYSTEMS.value, parents=[common], help="List the catalog")
    systems.add_argument("action", nargs="?", choices=["list"], default="list")

    history = commands.add_parser(Command.HISTORY.value, parents=[common], help="Recent recorded runs")
    history.add_argument("--limit", type=int)
    history.add_argument("--only", help="Filter by command")

    for sub in (flow, commands.choices[Command.SHOOT.value]):
        sub.add_argument("--out", type=Path, help="Trajectory CSV")
        sub.add_argument("--plot", type=Path, help="gnuplot script for the trajectory")
    for sub in (commands.choices[Command.CLASSIFY.value], commands.choices[Command.VAKONOMIC.value]):
        sub.add_argument("--certificate", type=Path, help="Certificate CSV")
    return parser


def _load(args: argparse.Namespace):
    overrides = {"system": args.system, "dim": args.dim, "metric": args.metric, "alpha": args.alpha}
    if args.config is not None:
        config = load_config(args.config, **overrides)
    else:
        config = config_from_dict({key: value for key, value in overrides.items() if value is not None})
    outputs = {
        "trajectory": getattr(args, "out", None),
        "plot": getattr(args, "plot", None),
        "certificate": getattr(args, "certificate", None),
    }
    outputs = {key: value for key, value in outputs.items() if value is not None}
    if outputs:
        config = config.model_copy(update={"output": config.output.model_copy(update=outputs)})
    return config


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, load the configuration and run one command."""
    args = build_parser().parse_args(argv)
    if args.verbose or settings.debug:
        logger.setLevel(logging.DEBUG)
        for handler in logger.handlers:
            handler.setLevel(logging.DEBUG)
    try:
        config = _load(args)
    except SubFinslerError as e:
        return report_error(e)
    return run(Command(args.command), config, args)


if __name__ == "__main__":
    sys.exit(main())
