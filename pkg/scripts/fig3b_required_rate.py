"""Required pair rate against infidelity for several T_env and alpha values.

Also prints the largest infidelity the reference node supports at each T_env.
"""

from _common import CONFIGS, parse_args, run

from lctc import hardware
from lctc.figures import rate_crossing

if __name__ == "__main__":
    args = parse_args(__doc__)
    run(args.out_dir, "fig3b.csv",
        ["sweep", "--figure", "fig3b", "--config", str(CONFIGS / "table2.toml"),
         "--jobs", str(args.jobs)])
    r_heg = hardware.heg_rate(hardware.table2_timings(), hardware.table2_link())
    for t_env in (0.1, 0.01):
        eps = rate_crossing(r_heg, t_env, 0.05)
        print(f"T_env={t_env:g} s: rate criterion holds up to eps={eps:.3f}")
