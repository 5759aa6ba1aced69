"""Regenerate the CLI golden files after an intentional output change."""

import pathlib

from lctc.cli import main

GOLDEN = pathlib.Path(__file__).resolve().parent.parent / "tests" / "golden"


def golden_argv(config: pathlib.Path) -> tuple[list[str], pathlib.Path]:
    command, _ = config.stem.split("__")
    argv = ["--config", str(config)]
    if command.startswith("sweep_"):
        command, figure = command.split("_")
        argv += ["--figure", figure]
    # tables are CSV, reports JSON
    suffix = ".csv" if command == "sweep" else ".json"
    return [command, *argv], config.with_suffix(suffix)


if __name__ == "__main__":
    for config in sorted(GOLDEN.glob("*.toml")):
        argv, out = golden_argv(config)
        code = main([*argv, "--out", str(out)])
        print(f"{out.name}: exit {code}")
