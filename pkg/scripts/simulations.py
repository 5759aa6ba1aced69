"""Monte Carlo rounds and the pipeline simulation on the reference node."""

from _common import CONFIGS, parse_args, run

if __name__ == "__main__":
    args = parse_args(__doc__)
    run(args.out_dir, "rounds.json", ["simulate", "--config", str(CONFIGS / "rounds.toml")])
    run(args.out_dir, "pipeline.json", ["simulate", "--config", str(CONFIGS / "pipeline.toml")])
