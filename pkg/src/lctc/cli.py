"""Command-line front end.

    lctc <command> --config FILE [--out FILE] [--seed U64] [--format json|csv]
                   [--preset NAME] [--figure NAME] [--jobs N]

Reports are JSON by default, figure grids CSV. Floats carry 12 significant
digits; non-finite values are written as the strings "inf", "-inf", "nan".
Exit codes: 0 success, 1 criteria fail, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from lctc import certify, config, cqed, figures, hardware, multiparty, simulate
from lctc.errors import ConfigError, ConvergenceError, InfeasibleError, UncertifiableError
from lctc.xor_game import (
    GameMatrix,
    InputDistribution,
    NoiseModel,
    UtilityWeights,
    analyze,
    build_game_matrix,
    build_game_matrix_general,
    combined_infidelity,
    load_balancing_utility,
)

COMMANDS = ("gap", "criteria", "nreq", "sweep", "table2", "simulate", "multiparty", "cqed")
FIGURES = {
    "gap": ("fig2a", "fig2b", "fig2c"),
    "sweep": ("fig3b",),
    "multiparty": ("fig6b",),
    "cqed": ("fig6e", "fig5d"),
}
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class Output:
    """A command result: either a report dict or a (header, rows) table."""

    def __init__(self, sections, report=None, table=None, code=EXIT_OK):
        self.sections = sections
        self.report = report
        self.table = table
        self.code = code


# ---------------------------------------------------------------- serialization


def _clean(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.12g}")
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    return v


def _cell(v) -> str:
    v = _clean(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, bool):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                yield from _flatten(item, f"{key}.{i}.")
        elif isinstance(v, (list, tuple)):
            yield key, ";".join(_cell(x) for x in v)
        else:
            yield key, _cell(v)


def render(out: Output, cfg: dict, command: str, fmt: str) -> str:
    echo = config.echo(cfg, out.sections)
    buf = io.StringIO()
    if out.table is not None:
        header, rows = out.table
        if fmt == "json":
            data = {"command": command, "config": echo, "columns": list(header),
                    "rows": [list(r) for r in rows]}
            return json.dumps(_clean(data), indent=2, ensure_ascii=False) + "\n"
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    data = {"command": command, "config": echo, "result": out.report}
    if fmt == "json":
        return json.dumps(_clean(data), indent=2, ensure_ascii=False) + "\n"
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(_clean(data)):
        w.writerow([k, v])
    return buf.getvalue()


# ---------------------------------------------------------------- builders


def build_distribution(g: dict) -> InputDistribution:
    kind = g["distribution"]
    if kind == "uniform":
        return InputDistribution.uniform()
    if kind == "bernoulli":
        return InputDistribution.bernoulli(g["p"])
    if kind == "correlated":
        return InputDistribution.correlated(g["p"])
    if kind == "explicit":
        if g["probs"] is None or len(g["probs"]) != 4:
            raise ConfigError("game.probs needs 4 entries (p00, p01, p10, p11)")
        return InputDistribution.from_array(np.reshape(g["probs"], (2, 2)))
    raise ConfigError(f"unknown game.distribution {kind!r}")


def build_game(cfg: dict) -> GameMatrix:
    g = cfg["game"]
    P = build_distribution(g)
    if g["utility"] is not None:
        if len(g["utility"]) != 8:
            raise ConfigError("game.utility needs 8 entries u[o][x][y]")
        return build_game_matrix_general(P, np.reshape(g["utility"], (2, 2, 2)))
    return build_game_matrix(P, UtilityWeights(g["beta1"], g["beta2"]))


def build_noise(cfg: dict) -> NoiseModel:
    return NoiseModel(cfg["noise"]["eps_s"], cfg["noise"]["eps_meas"])


def build_eps(cfg: dict) -> float:
    eps = cfg["noise"]["eps"]
    return combined_infidelity(build_noise(cfg)) if eps is None else eps


def build_timings(cfg: dict) -> hardware.NodeTimings:
    return hardware.NodeTimings(**cfg["hardware"])


def build_link(cfg: dict) -> hardware.LinkBudget:
    k = cfg["link"]
    transmission = k["transmission"]
    table = hardware.table2_link()
    if transmission is None and k["length"] == table.length_km * 1e3 and k["alpha_att"] == table.alpha_att:
        # the tabulated value at the reference length
        transmission = table.transmission
    return hardware.LinkBudget(
        length_km=k["length"] / 1e3,
        alpha_att=k["alpha_att"],
        v_g=k["v_g"],
        eta_det=k["eta_det"],
        eta_misc=k["eta_misc"],
        dark_rate=k["dark_rate"],
        n_ch=k["n_ch"],
        transmission=transmission,
    )


def _no_eps_override(cfg: dict, command: str):
    if cfg["noise"]["eps"] is not None:
        raise ConfigError(f"{command} derives eps from noise.eps_s and noise.eps_meas; drop noise.eps")


def _angles(a) -> dict:
    return {"theta": a.theta, "phi0": a.phi0, "phi1": a.phi1}


def _gap_report(M: GameMatrix, eps: float) -> dict:
    r = analyze(M, eps)
    return {
        "matrix": np.asarray(M.m).tolist(),
        "classical": r.classical,
        "quantum": r.quantum,
        "omega_c": r.omega_c,
        "omega_q": r.omega_q,
        "eps": eps,
        "gap": r.gap,
        "eps_th": r.eps_th,
        "advantage": r.advantage,
        "angles": _angles(r.angles),
        "classical_signs": list(r.signs),
    }


def _nreq_report(M, eps, alpha, t_env, cap, strict=True):
    r = analyze(M, eps)
    rep = {"omega_c": r.omega_c, "omega_q": r.omega_q, "gap": r.gap, "eps": eps,
           "eps_th": r.eps_th, "alpha": alpha, "t_env": t_env, "advantage": r.advantage}
    if not r.omega_q > r.omega_c:
        rep.update(n_req=None, r_req=math.inf)
        return rep
    try:
        n = certify.n_required(r.omega_c, r.omega_q, alpha, cap=cap)
    except UncertifiableError:
        if strict:
            raise
        rep.update(n_req=None, r_req=math.inf)
        return rep
    rep.update(n_req=n, r_req=n / t_env, expected_wins=int(certify.expected_wins(n, r.omega_q)))
    return rep


# ---------------------------------------------------------------- commands


def cmd_gap(cfg, args) -> Output:
    sections = ["game", "noise"]
    if args.figure in ("fig2a", "fig2b"):
        # landscapes are ideal unless noise.eps is set explicitly
        eps = cfg["noise"]["eps"] or 0.0
        fig = figures.fig2a if args.figure == "fig2a" else figures.fig2b
        return Output(["noise", "sweep"], table=fig(cfg["sweep"]["grid"], eps, args.jobs))
    if args.figure == "fig2c":
        s = cfg["sweep"]
        return Output(["sweep"], table=figures.fig2c(steps=s["steps"], eps_max=s["stop"]))
    return Output(sections, report=_gap_report(build_game(cfg), build_eps(cfg)))


def _verdict_dict(v: hardware.CriteriaVerdict) -> dict:
    return {
        "all_ok": v.all_ok,
        "fidelity_ok": v.fidelity_ok,
        "rate_ok": v.rate_ok,
        "decision_ok": v.decision_ok,
        "memory_ok": v.memory_ok,
        "status": v.status,
        "margins": v.margins,
        "eps": v.eps,
        "eps_th": v.eps_th,
        "n_req": v.n_req,
        "r_req": v.r_req,
        "r_heg": v.r_heg,
        "tau_mem_th": v.tau_mem_th,
        "notes": list(v.notes),
    }


def _criteria(cfg):
    _no_eps_override(cfg, "criteria")
    c = cfg["certification"]
    return hardware.evaluate_criteria(
        build_game(cfg), build_noise(cfg), build_timings(cfg), build_link(cfg),
        c["t_loc"], c["t_env"], c["alpha"], cap=c["cap"],
    )


def cmd_criteria(cfg, args) -> Output:
    v = _criteria(cfg)
    sections = ["game", "noise", "hardware", "link", "certification"]
    return Output(sections, report=_verdict_dict(v), code=EXIT_OK if v.all_ok else EXIT_FAIL)


def cmd_nreq(cfg, args) -> Output:
    c = cfg["certification"]
    rep = _nreq_report(build_game(cfg), build_eps(cfg), c["alpha"], c["t_env"], c["cap"])
    return Output(["game", "noise", "certification"], report=rep)


def _sweep_values(s: dict) -> np.ndarray:
    if s["steps"] < 2:
        raise ConfigError("sweep.steps must be >= 2")
    if s["scale"] == "linear":
        return np.linspace(s["start"], s["stop"], s["steps"])
    if s["scale"] == "log":
        if not (s["start"] > 0 and s["stop"] > 0):
            raise ConfigError("log sweeps need positive bounds")
        return np.geomspace(s["start"], s["stop"], s["steps"])
    raise ConfigError(f"sweep.scale must be linear or log, got {s['scale']!r}")


def _sweep_point(item):
    cfg, path, value = item
    section, key = path
    point = {s: dict(v) for s, v in cfg.items()}
    point[section][key] = int(round(value)) if config.SCHEMA[section][key][0] == "int" else value
    c = point["certification"]
    M = build_game(point)
    eps = build_eps(point)
    rep = _nreq_report(M, eps, c["alpha"], c["t_env"], c["cap"], strict=False)
    r_heg = hardware.heg_rate(build_timings(point), build_link(point))
    return (value, eps, rep["omega_c"], rep["omega_q"], rep["gap"], rep["eps_th"], rep["n_req"],
            rep["r_req"], r_heg, int(rep["r_req"] <= r_heg))


def cmd_sweep(cfg, args) -> Output:
    s = cfg["sweep"]
    if args.figure == "fig3b":
        c = cfg["certification"]
        r_heg = hardware.heg_rate(build_timings(cfg), build_link(cfg))
        table = figures.fig3b(
            steps=s["steps"], eps_max=s["stop"], t_envs=s["t_envs"], alphas=s["alphas"],
            r_heg=r_heg, M=build_game(cfg), cap=c["cap"], jobs=args.jobs,
        )
        return Output(["game", "hardware", "link", "certification", "sweep"], table=table)
    parts = s["param"].split(".")
    if len(parts) != 2 or parts[0] not in config.SCHEMA or parts[1] not in config.SCHEMA[parts[0]]:
        raise ConfigError(f"unknown sweep.param {s['param']!r}")
    kind = config.SCHEMA[parts[0]][parts[1]][0]
    if kind in ("str", "floats", "times"):
        raise ConfigError(f"sweep.param {s['param']!r} is not a scalar")
    items = [(cfg, tuple(parts), float(v)) for v in _sweep_values(s)]
    header = [s["param"], "eps", "omega_c", "omega_q", "gap", "eps_th", "n_req", "r_req",
              "r_heg", "rate_ok"]
    rows = figures.ordered_map(_sweep_point, items, args.jobs)
    return Output(["game", "noise", "hardware", "link", "certification", "sweep"],
                  table=(header, rows))


def cmd_table2(cfg, args) -> Output:
    _no_eps_override(cfg, "table2")
    c = cfg["certification"]
    t, link, n = build_timings(cfg), build_link(cfg), build_noise(cfg)
    perf = hardware.performance(t, link, n)
    rows = hardware.compare_table2(perf)
    verdict = _criteria(cfg)
    rep = {
        "performance": {k: getattr(perf, k) for k in perf.__dataclass_fields__},
        "eta_att": link.eta_att(),
        "rows": rows,
        "rows_ok": all(r["ok"] for r in rows),
        "criteria": _verdict_dict(verdict),
        "tpi_infidelity": cqed.tpi_infidelity(cfg["cqed"]["tpi_purity"]),
        "alpha": c["alpha"],
    }
    return Output(["noise", "hardware", "link", "certification"], report=rep)


def cmd_simulate(cfg, args) -> Output:
    s = cfg["simulation"]
    if s["mode"] == "pipeline":
        pc = simulate.PipelineConfig(
            timings=build_timings(cfg), link=build_link(cfg), duration=s["duration"],
            seed=s["seed"], trigger=s["trigger"], trigger_rate=s["trigger_rate"] or 0.0,
            p_ent=s["p_ent"],
        )
        stats = simulate.simulate_pipeline(pc)
        rep = {k: getattr(stats, k) for k in stats.__dataclass_fields__}
        pairs = stats.successes
        rep["rate_stderr"] = math.sqrt(pairs) / s["duration"]
        rep["r_heg_analytic"] = hardware.heg_rate(pc.timings, pc.link)
        rep["p_ent"] = pc.success_prob()
        return Output(["hardware", "link", "simulation"], report=rep)
    if s["mode"] != "rounds":
        raise ConfigError(f"simulation.mode must be rounds or pipeline, got {s['mode']!r}")
    g = cfg["game"]
    P = build_distribution(g)
    if g["utility"] is not None:
        u = np.reshape(g["utility"], (2, 2, 2))
    else:
        u = load_balancing_utility(UtilityWeights(g["beta1"], g["beta2"]))
    M = build_game_matrix_general(P, u)
    eps = build_eps(cfg)
    r = analyze(M, eps)
    if s["strategy"] == "quantum":
        B = simulate.behavior_from_correlators(-(1.0 - eps) * r.angles.overlaps())
        analytic = B.expected_utility(P, u)
    elif s["strategy"] == "classical":
        B = simulate.best_classical_behavior(M)
        analytic = B.expected_utility(P, u)
    else:
        raise ConfigError(f"simulation.strategy must be quantum or classical, got {s['strategy']!r}")
    log = simulate.simulate_rounds(P, u, B, s["rounds"], s["seed"])
    rep = {k: getattr(log, k) for k in log.__dataclass_fields__}
    rep["analytic_omega"] = analytic
    rep["sigma"] = math.sqrt(max(analytic * (1 - analytic), 0.0) / s["rounds"])
    rep["omega_c"] = simulate.classical_omega_general(P, u)
    return Output(["game", "noise", "simulation"], report=rep)


def _three_distribution(m: dict) -> multiparty.MultiInputDistribution:
    kind = m["distribution"]
    if kind == "uniform":
        return multiparty.MultiInputDistribution.uniform()
    if kind == "bernoulli":
        return multiparty.MultiInputDistribution.bernoulli(m["p"])
    if kind == "explicit":
        if m["probs"] is None or len(m["probs"]) != 8:
            raise ConfigError("multiparty.probs needs 8 entries")
        return multiparty.MultiInputDistribution(m["probs"])
    raise ConfigError(f"unknown multiparty.distribution {kind!r}")


def cmd_multiparty(cfg, args) -> Output:
    m = cfg["multiparty"]
    if args.figure == "fig6b":
        return Output(["multiparty"], table=figures.fig6b(m["grid"], args.jobs))
    P = _three_distribution(m)
    g = multiparty.build_three_party(P, m["beta"])
    r = multiparty.analyze_three(g)
    noise = multiparty.GhzNoise(m["eps_ghz"], m["eps_meas"])
    eps_prime = multiparty.ghz_combined_infidelity(noise)
    ok, margin = multiparty.ghz_threshold(g, eps_prime, r)
    a = r.angles
    rep = {
        "classical": r.classical,
        "quantum": r.quantum,
        "omega_c": r.omega_c,
        "omega_q": r.omega_q,
        "gap": r.gap,
        "eps_th": r.eps_th,
        "advantage": r.gap > 1e-12,
        "angles": {"phi0": a.phi0, "phi1": a.phi1, "phi2": a.phi2, "phi3": a.phi3},
        "classical_table": [list(t) for t in r.table],
        "eps_prime": eps_prime,
        "noisy_advantage": ok,
        "noisy_margin": margin,
    }
    sections = ["multiparty"]
    if m["rounds"] > 0:
        seed = cfg["simulation"]["seed"]
        log = multiparty.simulate_rounds_three(
            P, m["beta"], multiparty.behavior_three(eps_prime, a), m["rounds"], seed,
            omega_c=r.omega_c,
        )
        rep["simulation"] = {k: getattr(log, k) for k in log.__dataclass_fields__}
        sections.append("simulation")
    return Output(sections, report=rep)


def cmd_cqed(cfg, args) -> Output:
    q = cfg["cqed"]
    if args.figure == "fig6e":
        table = figures.fig6e(q["c_min"], q["c_max"], q["steps"], k_window=q["k_window"],
                              p_e_src=q["p_e_src"], jobs=args.jobs)
        return Output(["cqed"], table=table)
    if args.figure == "fig5d":
        table = figures.fig5d(q["c_min"], q["c_max"], q["steps"], eta_det=q["eta_det"],
                              detuning_ratio=q["detuning_ratio"], t_life=q["t_life"], jobs=args.jobs)
        return Output(["cqed"], table=table)
    p = cqed.readout_params(q["c_in"], q["eta_det"], q["detuning_ratio"], q["t_life"])
    readout = {"r_bright": p.r_bright, "r_dark": p.r_dark, "target": q["target"]}
    try:
        tau = cqed.min_readout_time(q["target"], p)
        readout.update(tau_meas=tau, n_th=cqed.optimal_threshold(tau, p)[0], feasible=True)
    except InfeasibleError:
        readout.update(tau_meas=math.nan, n_th=None, feasible=False)
    res = cqed.ghz_generation(
        cqed.equal_node_spec(q["c_in"], q["sigma_t_gamma"], k_window=q["k_window"],
                             p_e_src=q["p_e_src"])
    )
    rep = {
        "readout": readout,
        "ghz": {k: getattr(res, k) for k in res.__dataclass_fields__},
        "tpi_infidelity": cqed.tpi_infidelity(q["tpi_purity"]),
    }
    return Output(["cqed"], report=rep)


HANDLERS = {
    "gap": cmd_gap,
    "criteria": cmd_criteria,
    "nreq": cmd_nreq,
    "sweep": cmd_sweep,
    "table2": cmd_table2,
    "simulate": cmd_simulate,
    "multiparty": cmd_multiparty,
    "cqed": cmd_cqed,
}


# ---------------------------------------------------------------- entry point


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lctc", description="Quantum advantage checks for LCTC tasks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML configuration file (defaults if omitted)")
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--seed", type=_u64, help="overrides simulation.seed")
    p.add_argument("--format", choices=("json", "csv"), help="json for reports, csv for figures by default")
    p.add_argument("--preset", choices=sorted(config.PRESETS))
    p.add_argument("--figure", help="figure grid to emit: " + ", ".join(
        f"{c}: {'/'.join(f)}" for c, f in FIGURES.items()))
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid sweeps")
    return p


def run(argv=None) -> tuple[int, str, str | None]:
    args = parser().parse_args(argv)
    if args.figure is not None and args.figure not in FIGURES.get(args.command, ()):
        raise ConfigError(f"--figure {args.figure!r} is not available for {args.command}")
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    cfg = config.load(args.config, args.preset)
    if args.seed is not None:
        cfg["simulation"]["seed"] = args.seed
    out = HANDLERS[args.command](cfg, args)
    fmt = args.format or ("csv" if out.table is not None else "json")
    return out.code, render(out, cfg, args.command, fmt), args.out


def main(argv=None) -> int:
    try:
        code, text, path = run(argv)
    except (ConvergenceError, UncertifiableError, InfeasibleError) as exc:
        print(f"lctc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # includes ConfigError
        print(f"lctc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
