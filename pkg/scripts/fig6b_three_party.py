"""Three-party majority game: gap over (beta, p)."""

from _common import parse_args, run

if __name__ == "__main__":
    args = parse_args(__doc__)
    run(args.out_dir, "fig6b.csv", ["multiparty", "--figure", "fig6b", "--jobs", str(args.jobs)])
