"""Reference node performance report and operational criteria."""

from _common import CONFIGS, parse_args, run

if __name__ == "__main__":
    args = parse_args(__doc__)
    cfg = ["--config", str(CONFIGS / "table2.toml")]
    run(args.out_dir, "table2.json", ["table2", *cfg])
    run(args.out_dir, "criteria.json", ["criteria", *cfg])
