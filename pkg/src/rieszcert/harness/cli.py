"""Command-line front end: ``rieszcert generate|project|verify|bounds|report``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Sequence, Tuple

from ..bounds import BoundChecker
from ..config import SECTIONS, CertConfig, get_config
from ..errors import InvalidInput, NumericalError, RieszCertError
from ..projections import ProjectionEngine
from ..spectral_model import PerturbedPair, SegmentFamily, check_hypothesis
from .instance import InstanceSpec, generate_instance
from .matrix_io import load_instance, save_instance, save_projections
from .pipeline import EXIT_FAILURE, EXIT_NUMERICAL, EXIT_PASS, EXIT_USAGE, run_certification
from .report import json_safe, read_json, render

logger = logging.getLogger('rieszcert')

_PREFIX = 'cfg:'
ALIASES: Tuple[Tuple[str, str, Any], ...] = (
    ('--seed', 'instance.seed', int),
    ('--b-ratio', 'instance.b_ratio', float),
    ('--tol', 'tolerances.projection', float),
    ('--quad-order', 'quadrature.order', int),
    ('--out', 'output.out_dir', str),
    ('--parallel', 'mode.parallel', int),
)


def setup_logging(verbosity: int) -> None:
    """One stream handler in the ``[rieszcert] message`` register."""
    level = {-1: logging.WARNING, 0: logging.INFO}.get(verbosity, logging.DEBUG)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('[rieszcert] %(message)s'))
    root = logging.getLogger('rieszcert')
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help="TOML file with [instance], [quadrature], "
                        "[tolerances], [mode], [output] sections")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument('-v', '--verbose', action='store_const', const=1, default=0,
                       dest='verbosity', help="debug output")
    noise.add_argument('-q', '--quiet', action='store_const', const=-1, dest='verbosity',
                       help="warnings and errors only")
    for flag, key, kind in ALIASES:
        common.add_argument(flag, dest=_PREFIX + key, type=kind, default=None,
                            help=f"alias for --{key}")
    common.add_argument('--force', dest=_PREFIX + 'mode.force', action='store_const',
                        const=True, default=None, help="proceed when b ≥ d/2")

    dotted = common.add_argument_group('configuration keys')
    defaults = CertConfig()
    for section in SECTIONS:
        for f in dataclasses.fields(getattr(defaults, section)):
            key = f"{section}.{f.name}"
            dotted.add_argument(f"--{key}", dest=_PREFIX + key, default=None, metavar='VALUE',
                                help=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='rieszcert',
        description="Certify spectral projections and basis properties of A = T + B.",
    )
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('generate', parents=[common],
                        help="write T.mtx, B.mtx and instance.json for the configured spec")
    project = commands.add_parser('project', parents=[common],
                                  help="compute contour projections Q_j and write them")
    project.add_argument('--input', type=Path, help="instance directory (default: generate)")
    verify = commands.add_parser('verify', parents=[common], help="run the full certification")
    verify.add_argument('--input', type=Path, help="instance directory (default: generate)")
    bounds = commands.add_parser('bounds', parents=[common], help="run the bound suite only")
    bounds.add_argument('--input', type=Path, help="instance directory (default: generate)")
    report = commands.add_parser('report', parents=[common],
                                 help="re-render CSV and SVG from a stored report")
    report.add_argument('report_path', type=Path, help="report.json written by verify")
    return parser


def resolve_config(args: argparse.Namespace) -> CertConfig:
    """Defaults < environment < --config file < command-line flags."""
    config = get_config()
    if args.config is not None:
        config = CertConfig.from_toml(args.config, base=config)
    overrides: Dict[str, Any] = {
        name[len(_PREFIX):]: value for name, value in vars(args).items()
        if name.startswith(_PREFIX) and value is not None
    }
    return config.with_overrides(overrides)


def _instance(args: argparse.Namespace, config: CertConfig
              ) -> Tuple[PerturbedPair, SegmentFamily, InstanceSpec | None]:
    if getattr(args, 'input', None) is not None:
        return load_instance(args.input)
    spec = InstanceSpec.from_config(config.instance)
    pair, family = generate_instance(spec)
    return pair, family, spec


def _hypothesis_blocks(pair: PerturbedPair, family: SegmentFamily, config: CertConfig) -> bool:
    report = check_hypothesis(pair, family)
    if report.holds or config.mode.force:
        return False
    logger.error("b = %.6g ≥ d/2 = %.6g; rerun with --force to continue", report.b, report.d / 2)
    return True


def cmd_generate(args: argparse.Namespace, config: CertConfig) -> int:
    spec = InstanceSpec.from_config(config.instance)
    pair, family = generate_instance(spec)
    paths = save_instance(pair, family, config.output.out_dir, spec)
    logger.info("instance written → %s (b = %.6g, d = %.6g)", paths['instance'].parent,
                pair.b_norm, family.gap)
    return EXIT_PASS


def cmd_project(args: argparse.Namespace, config: CertConfig) -> int:
    pair, family, _ = _instance(args, config)
    if _hypothesis_blocks(pair, family, config):
        return EXIT_FAILURE
    projections = ProjectionEngine(config).contour_projections(pair, family,
                                                               allow_stall=config.mode.force)
    save_projections(projections, config.output.out_dir)
    ok = projections.satisfies_invariants()
    logger.info("projections written → %s (minimality %.3e, completeness %.3e)",
                config.output.out_dir, projections.minimality_residual(),
                projections.completeness_residual())
    return EXIT_PASS if ok else EXIT_FAILURE


def cmd_verify(args: argparse.Namespace, config: CertConfig) -> int:
    pair, family, spec = _instance(args, config)
    report = run_certification(pair, family, config, spec)
    out = config.output
    render(report, out.out_dir, out.report_filename, out.eigenvalue_filename,
           out.plot_filename if out.write_plot else None)
    for name in report.failed_checks:
        logger.warning("check failed: %s", name)
    return report.exit_code


def cmd_bounds(args: argparse.Namespace, config: CertConfig) -> int:
    pair, family, _ = _instance(args, config)
    if _hypothesis_blocks(pair, family, config):
        return EXIT_FAILURE
    checker = BoundChecker(config)
    try:
        projections = checker.engine.contour_projections(pair, family,
                                                         allow_stall=config.mode.force)
    except NumericalError as exc:
        logger.warning("no contour projections (%s); the projection-difference identity "
                       "will be reported failed", exc)
        projections = None
    reports, c1 = checker.run_suite(pair, family, projections)
    target = Path(config.output.out_dir) / 'bounds.json'
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {'c1': c1, 'bounds': [r.to_dict() for r in reports]}
    target.write_text(json.dumps(json_safe(payload), indent=2, sort_keys=True, allow_nan=False)
                      + "\n", encoding='utf-8')
    failed = [r.name for r in reports if not r.passed]
    for name in failed:
        logger.warning("bound failed: %s", name)
    logger.info("%d/%d bounds pass → %s", len(reports) - len(failed), len(reports), target)
    return EXIT_FAILURE if failed else EXIT_PASS


def cmd_report(args: argparse.Namespace, config: CertConfig) -> int:
    try:
        report = read_json(args.report_path)
    except (OSError, ValueError, TypeError) as exc:
        raise InvalidInput(f"cannot read report {args.report_path}: {exc}") from exc
    out = config.output
    render(report, out.out_dir, out.report_filename, out.eigenvalue_filename,
           out.plot_filename if out.write_plot else None)
    return EXIT_PASS


COMMANDS = {
    'generate': cmd_generate,
    'project': cmd_project,
    'verify': cmd_verify,
    'bounds': cmd_bounds,
    'report': cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbosity)
    config: CertConfig | None = None
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except InvalidInput as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_USAGE
    except RieszCertError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        force = config is not None and config.mode.force
        return EXIT_FAILURE if force else EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
