"""Gap landscapes: Bernoulli and correlated inputs, and gap against infidelity."""

from _common import parse_args, run

if __name__ == "__main__":
    args = parse_args(__doc__)
    jobs = ["--jobs", str(args.jobs)]
    run(args.out_dir, "fig2a.csv", ["gap", "--figure", "fig2a", *jobs])
    run(args.out_dir, "fig2b.csv", ["gap", "--figure", "fig2b", *jobs])
    run(args.out_dir, "fig2c.csv", ["gap", "--figure", "fig2c"])
