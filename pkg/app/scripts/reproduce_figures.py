"""Replay the reproduction recipes from figures.yaml.

Usage:
    python -m app.scripts.reproduce_figures              # every recipe
    python -m app.scripts.reproduce_figures kernel_curves

Deterministic: re-running overwrites the CSV files with identical bytes.
"""
import logging
import sys
from pathlib import Path

import yaml

from app.config import settings
from app.core.csv_table import format_number
from app.core.exceptions import ConfigError, handle_cli_error
from app.core.logging_config import setup_logging
from app.modules.runs import service
from app.modules.runs.router import write_output
from app.modules.runs.schemas import KernelGrid

logger = logging.getLogger("udcd.cli")

RECIPES_PATH = Path(__file__).resolve().parent.parent.parent / "figures.yaml"


def load_yaml(path: Path = RECIPES_PATH) -> dict:
    with open(path) as f:
        return yaml.safe_load(f)


def config_text(values: dict) -> str:
    """Render a recipe's config mapping as the flat key = value document."""
    lines = []
    for key, value in values.items():
        rendered = value if isinstance(value, str) else format_number(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def run_recipe(name: str, recipe: dict, out_dir: Path) -> Path:
    config = service.parse_config(config_text(recipe["config"]))
    command = recipe["command"]
    if command == "sweep":
        text = service.run_sweep(config).render()
    elif command == "kernel":
        text = service.run_kernel(config, KernelGrid(**recipe.get("grid", {}))).render()
    elif command == "angles":
        text = service.run_angles(config).render()
    elif command == "gates":
        text = service.export_gates(config)
    elif command == "twolevel-check":
        text = service.run_twolevel_check(config).render()
    elif command == "complexity":
        text = service.run_complexity(config).render()
    else:
        raise ConfigError(f"unknown command {command!r} in recipe '{name}'", key="command")

    target = out_dir / recipe.get("out", f"{name}.csv")
    write_output(text, str(target))
    return target


def main(argv: list[str] | None = None) -> int:
    setup_logging(settings.LOG_LEVEL, settings.LOG_FORMAT)
    names = sys.argv[1:] if argv is None else argv
    recipes = load_yaml()["recipes"]
    out_dir = Path(settings.OUTPUT_DIR)
    try:
        for name in names or list(recipes):
            if name not in recipes:
                raise ConfigError(f"unknown recipe '{name}' (known: {', '.join(recipes)})")
            logger.info("Running recipe %s: %s", name, recipes[name].get("description", ""), extra={"command": name})
            print(f"  {name} -> {run_recipe(name, recipes[name], out_dir)}")
    except Exception as exc:
        return handle_cli_error(exc, command="reproduce_figures")
    print("\nAll recipes completed.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
