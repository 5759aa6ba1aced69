"""GHZ generation against cooperativity, and minimum readout time."""

from _common import parse_args, run

if __name__ == "__main__":
    args = parse_args(__doc__)
    jobs = ["--jobs", str(args.jobs)]
    run(args.out_dir, "fig6e.csv", ["cqed", "--figure", "fig6e", *jobs])
    run(args.out_dir, "fig5d.csv", ["cqed", "--figure", "fig5d", *jobs])
