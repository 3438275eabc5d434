"""Subcommand registration for the command-line front end."""

import argparse
import logging
import sys
from pathlib import Path

from app.modules.runs import service
from app.modules.runs.schemas import KernelGrid

logger = logging.getLogger("udcd.cli")


def write_output(text: str, path: str | None) -> None:
    """Write to `path`, or to stdout when no path is configured."""
    if not path:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    logger.info("Output written", extra={"path": str(target)})


def _target(args: argparse.Namespace, config) -> str | None:
    return args.out if args.out is not None else config.out


# ── Handlers ──

def api_sweep(args: argparse.Namespace) -> None:
    config = service.load_config(args.config)
    write_output(service.run_sweep(config).render(), _target(args, config))


def api_kernel(args: argparse.Namespace) -> None:
    config = service.load_config(args.config)
    grid = KernelGrid(
        k_list=tuple(int(k) for k in args.k_list.split(",") if k.strip()) if args.k_list is not None else (4, 8, 13, 17),
        points=args.points,
        omega_min=args.omega_min,
        omega_max=args.omega_max,
        regularized=args.regularized,
    )
    write_output(service.run_kernel(config, grid).render(), _target(args, config))


def api_angles(args: argparse.Namespace) -> None:
    config = service.load_config(args.config)
    write_output(service.run_angles(config).render(), _target(args, config))


def api_gates(args: argparse.Namespace) -> None:
    config = service.load_config(args.config)
    write_output(service.export_gates(config), _target(args, config))


def api_twolevel_check(args: argparse.Namespace) -> None:
    config = service.load_config(args.config)
    write_output(service.run_twolevel_check(config).render(), _target(args, config))


def api_complexity(args: argparse.Namespace) -> None:
    config = service.load_config(args.config)
    write_output(service.run_complexity(config).render(), _target(args, config))


# ── Registration ──

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="flat key = value run configuration")
    parser.add_argument("--out", default=None, help="output file (overrides the config's 'out'; default stdout)")


def register(subparsers) -> None:
    sweep = subparsers.add_parser("sweep", help="infidelity against K for K = 1..k_max")
    _add_common(sweep)
    sweep.set_defaults(handler=api_sweep)

    kernel = subparsers.add_parser("kernel", help="kernel curves over an omega grid")
    _add_common(kernel)
    kernel.add_argument("--k-list", default=None, help="comma-separated K values (default 4,8,13,17)")
    kernel.add_argument("--points", type=int, default=400)
    kernel.add_argument("--omega-min", type=float, default=None)
    kernel.add_argument("--omega-max", type=float, default=None)
    kernel.add_argument("--regularized", action="store_true", help="use omega/(omega^2+eta^2) and regularized angles")
    kernel.set_defaults(handler=api_kernel)

    angles = subparsers.add_parser("angles", help="dump the (k, theta_k, phi_k) schedule")
    _add_common(angles)
    angles.set_defaults(handler=api_angles)

    gates = subparsers.add_parser("gates", help="export the gate sequence as EXPH/EXPDH lines")
    _add_common(gates)
    gates.set_defaults(handler=api_gates)

    check = subparsers.add_parser("twolevel-check", help="exact two-level schedule over a ladder of steps")
    _add_common(check)
    check.set_defaults(handler=api_twolevel_check)

    complexity = subparsers.add_parser("complexity", help="gate complexity per K")
    _add_common(complexity)
    complexity.set_defaults(handler=api_complexity)
