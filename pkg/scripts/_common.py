"""Shared helpers for the reproduction scripts."""

import argparse
import pathlib
import sys
import time

from lctc.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def parse_args(description: str) -> argparse.Namespace:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", default=str(ROOT / "results"))
    p.add_argument("--jobs", type=int, default=1)
    return p.parse_args()


def run(out_dir: str, name: str, argv: list[str]) -> int:
    path = pathlib.Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    start = time.perf_counter()
    code = main([*argv, "--out", str(target)])
    print(f"{target}  exit={code}  {time.perf_counter() - start:.1f}s", file=sys.stderr)
    return code
