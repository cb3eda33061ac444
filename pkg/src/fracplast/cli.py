import argparse, logging, sys
from pathlib import Path
from typing import List, Optional
from .errors import ConstitutiveError, DimensionMismatchError, MeshError, ProbeError, ScenarioError, SolverError
from .output import emit_outputs, flow_vector_sweep, write_flow_sweep
from .runner import Runner
from .scenario import DELTA_PRESETS, Scenario, list_presets, load_scenario
from .util import OUTPUT_DIR_ENV, Util

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _add_scenario_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("scenario", help="Scenario JSON file or preset name (see `fracplast presets`).")
    parser.add_argument("--alpha", type=float, help="Override the fractional order.")
    parser.add_argument("--delta-scale", type=float, help="Multiply every interval length by this factor.")
    parser.add_argument("--delta-preset", choices=sorted(DELTA_PRESETS), help="Replace the interval matrix.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracplast",
        description="Elasto-plasticity with a fractional flow rule: load-stepping runs and flow-vector sweeps.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log every Newton iterate.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors.")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a load-stepping scenario and write its CSV/VTK outputs.")
    _add_scenario_arguments(run)
    run.add_argument("--out", help=f"Output directory (default: ${OUTPUT_DIR_ENV} or ./fracplast-output).")
    run.add_argument(
        "--mesh", help="Mesh file replacing the scenario geometry; a relative path is taken from the working directory."
    )
    run.add_argument("--steps", type=int, help="Number of uniform time steps.")
    run.add_argument("--refinement", type=int, help="Refinement level of the generated notched bar.")
    run.add_argument("--peak-scale", type=float, help="Scale the peak traction.")
    run.add_argument("--material-update", choices=["explicit", "implicit", "classical"])
    run.add_argument("--vtk", action="store_true", default=None, help="Write legacy-VTK field snapshots.")

    sweep = commands.add_parser("sweep-flow", help="Sample the yield surface and compare flow directions.")
    _add_scenario_arguments(sweep)
    sweep.add_argument("--samples", type=int, default=72)
    sweep.add_argument("--out", help="Output directory.")

    commands.add_parser("presets", help="List scenario and interval-matrix presets.")

    check = commands.add_parser("check", help="Validate a scenario and print material diagnostics.")
    _add_scenario_arguments(check)
    return parser


def _scenario(args: argparse.Namespace, **extra) -> Scenario:
    scenario = load_scenario(args.scenario)
    return scenario.with_overrides(
        alpha=args.alpha, delta_scale=args.delta_scale, delta_preset=args.delta_preset, **extra
    )


def _run(args: argparse.Namespace) -> int:
    scenario = _scenario(
        args,
        n_steps=args.steps,
        mesh_path=str(Path(args.mesh).resolve()) if args.mesh else None,
        refinement=args.refinement,
        peak_scale=args.peak_scale,
        material_update=args.material_update,
        vtk=args.vtk,
    )
    record = Runner(scenario).run()
    emit_outputs(record, Util.output_dir(args.out), scenario.outputs)
    return EXIT_OK


def _sweep(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    rows = flow_vector_sweep(scenario.material, scenario.frac, args.samples)
    path = write_flow_sweep(rows, Util.output_dir(args.out) / "flow_sweep.csv")
    logging.info(f"Wrote {path} ({len(rows)} samples, max angle {rows[:, -1].max(initial=0.0):.4f} deg)")
    return EXIT_OK


def _presets(args: argparse.Namespace) -> int:
    print("Scenario presets:")
    for name, description in list_presets().items():
        print(f"  {name:<18} {description}")
    print("Interval-matrix presets (--delta-preset):")
    for name, delta in DELTA_PRESETS.items():
        print(f"  {name:<18} {delta}")
    return EXIT_OK


def _check(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    mesh = scenario.build_mesh()
    print(f"Scenario '{scenario.name}': {mesh.dim}D, {mesh.n_vertices} vertices, {mesh.n_cells} cells")
    diagnostics = scenario.diagnostics()
    for diagnostic in diagnostics:
        print(f"  {diagnostic.level}: {diagnostic.message}")
    if not diagnostics:
        print("  no material diagnostics")
    return EXIT_OK


COMMANDS = {"run": _run, "sweep-flow": _sweep, "presets": _presets, "check": _check}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ScenarioError, MeshError, ProbeError, DimensionMismatchError) as e:
        logging.error(str(e))
        return EXIT_VALIDATION
    except (SolverError, ConstitutiveError) as e:
        logging.error(str(e))
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
