"""Command-line interface.

One subcommand per task kind; the scenario file supplies the task
parameters and the subcommand must match its task.kind.  Exit codes:
0 success, 2 hypothesis violation, 3 budget exhausted / no convergence,
4 input error.
"""

import argparse
import sys

from . import harness, render
from .errors import ScenarioError

EXIT_INPUT_ERROR = 4


def _parser():
    parser = argparse.ArgumentParser(
        prog="nilsphere",
        description="Fixed-point experiments for near-identity sphere "
                    "diffeomorphism groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in harness.TASK_KINDS:
        p = sub.add_parser(kind, help=f"run a '{kind}' scenario")
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--out", default=None,
                       help="report path (default: stdout)")
        p.add_argument("--svg", default=None, help="optional SVG figure path")
        p.add_argument("--projection", default="stereographic_north",
                       choices=["stereographic_north", "stereographic_south",
                                "orthographic"])
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--mesh-level", type=int, default=None)
        p.add_argument("--max-steps", type=int, default=None,
                       help="override the orbit / segment budget")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        scenario = harness.load_scenario(args.scenario)
        if scenario.task["kind"] != args.command:
            raise ScenarioError(
                f"scenario task kind {scenario.task['kind']!r} does not match "
                f"subcommand {args.command!r}",
                where="task.kind",
            )
        if args.seed is not None:
            scenario.seed = args.seed
            scenario.config.seed = args.seed
        if args.tol is not None:
            scenario.config.tol = args.tol
        if args.mesh_level is not None:
            scenario.config.mesh_level = args.mesh_level
        if args.max_steps is not None:
            scenario.config.orbit_budget = args.max_steps
            scenario.config.max_segments = args.max_steps
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    report = harness.run(scenario)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render.render_svg(report, args.projection))
    code = harness.exit_code_for(report)
    if code != 0:
        err = report.payload["error"]
        print(f"{err['code']}: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
