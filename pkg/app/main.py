"""Command-line entry point: `python -m app.main <command> <config>`."""
import argparse
import sys

from app.config import settings
from app.core.exceptions import handle_cli_error
from app.core.logging_config import setup_logging
from app.modules.runs.router import register


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udcd", description=settings.APP_NAME)
    parser.add_argument("--log-level", default=None, help=f"default {settings.LOG_LEVEL}")
    parser.add_argument("--log-format", choices=["json", "plain"], default=None)
    subparsers = parser.add_subparsers(dest="command", required=True)
    register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or settings.LOG_LEVEL, args.log_format or settings.LOG_FORMAT)
    try:
        args.handler(args)
    except Exception as exc:
        return handle_cli_error(exc, command=args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
