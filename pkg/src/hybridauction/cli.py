"""Command-line front end.

    hybridauction run scenario.json --out results.csv
    hybridauction experiment theorem2 --alpha 1 --beta 10000 --trials 100000
    hybridauction gittins 1 1 0.5

CSV goes to ``--out`` (or stdout when omitted), the human-readable summary
to stdout, progress and diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from typing import Sequence

from .indices import IndexOptions, check_discount, gittins_index
from .priors import Beta
from .scenario import ScenarioError, load_scenario
from .sim.engine import run_simulation
from .sim.experiments import experiment_explore, experiment_theorem2, experiment_typical_case, lemma3_ratio
from .strategies import ExponentialAverse, RiskNeutral, risk_bid, risk_dominance_sweep

log = logging.getLogger("hybridauction")

EXPERIMENTS = ("theorem2", "typical", "explore", "lemma3", "risk")

# defaults reproduce the acceptance runs
DEFAULTS = {
    "theorem2": dict(alpha=1.0, beta=1e4, gamma_a=0.0, n_advertisers=2, trials=100_000, seed=0, v=1.0),
    "typical": dict(K=5, trials=10_000, seed=0, v=1.0),
    "explore": dict(p=0.5, epsilon=0.1, alpha=1.0, beta=20.0, r_star=None, trials=10_000, seed=0, v=1.0),
    "lemma3": dict(alpha=1.0, beta=1e4),
    "risk": dict(instances=50, lambdas=None, seed=0),
}


def fmt(x: float) -> str:
    """Shortest decimal that parses back to the same double."""
    return repr(float(x))


def _write_csv(rows: list[dict], columns: Sequence[str], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row.get(c, "") for c in columns])


def _emit(rows: list[dict], columns: Sequence[str], out_path: str | None) -> None:
    if out_path is None:
        _write_csv(rows, columns, sys.stdout)
        return
    buf = io.StringIO()
    _write_csv(rows, columns, buf)
    with open(out_path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    for row in rows:
        err = f" +/- {row['stderr']}" if row["stderr"] not in ("", fmt(0.0)) else ""
        print(f"{row['metric']:<36} {row['value']}{err}")


def _metric_rows(experiment: str, params: dict, metrics) -> list[dict]:
    base = {"experiment": experiment, **{k: _param(v) for k, v in params.items()}}
    return [{**base, "metric": name, "value": fmt(value), "stderr": fmt(stderr)} for name, value, stderr in metrics]


def _param(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return fmt(value)
    return str(value)


# ------------------------------------------------------------------ commands

def cmd_run(scenario_path: str, out_path: str | None = None, workers: int = 1) -> int:
    try:
        scenario = load_scenario(scenario_path)
    except OSError as exc:
        log.error("cannot read scenario: %s", exc)
        return 1
    except ScenarioError as exc:
        log.error("invalid scenario: %s", exc)
        return 1
    log.info("running %s: %d trials x %d rounds", scenario.name, scenario.trials, scenario.rounds)
    try:
        metrics = run_simulation(scenario, workers=workers)
    except ValueError as exc:
        log.error("simulation failed: %s", exc)
        return 1
    rows = _metric_rows("run", {"scenario": scenario.name, "trials": scenario.trials, "seed": scenario.seed}, metrics.rows())
    _emit(rows, ("experiment", "scenario", "trials", "seed", "metric", "value", "stderr"), out_path)
    return 0


def _risk_metrics(instances: int, lambdas, seed: int):
    lambdas = tuple(lambdas) if lambdas else (0.5, 1.0, 2.0, 5.0)
    checks = risk_dominance_sweep(instances, lambdas, seed)
    out = []
    for lam in lambdas:
        for concave, kind in ((True, "averse"), (False, "seeking")):
            group = [c for c in checks if c.utility.lam == lam and c.concave == concave]
            held = sum(c.holds for c in group) / len(group)
            gaps = [c.m_star - c.v * (c.prior.alpha / (c.prior.alpha + c.prior.beta)) for c in group]
            out.append((f"{kind}_lambda_{lam:g}_holds_fraction", held, 0.0))
            out.append((f"{kind}_lambda_{lam:g}_max_m_star_minus_vp", max(gaps), 0.0))
            out.append((f"{kind}_lambda_{lam:g}_min_m_star_minus_vp", min(gaps), 0.0))
    neutral = max(abs(risk_bid(c.v, c.prior, RiskNeutral()).m - c.v * c.prior.alpha / (c.prior.alpha + c.prior.beta))
                  for c in checks if isinstance(c.utility, ExponentialAverse) and c.utility.lam == lambdas[0])
    out.append(("neutral_m_star_max_error", neutral, 0.0))
    return out


def cmd_experiment(name: str, params: dict, out_path: str | None = None) -> int:
    if name not in EXPERIMENTS:
        log.error("unknown experiment %r; valid names: %s", name, ", ".join(EXPERIMENTS))
        return 2
    p = {**DEFAULTS[name], **{k: v for k, v in params.items() if k in DEFAULTS[name] and v is not None}}
    log.info("experiment %s with %s", name, p)
    try:
        if name == "theorem2":
            res = experiment_theorem2(p["alpha"], p["beta"], p["gamma_a"], p["n_advertisers"], p["trials"], p["seed"], p["v"])
            metrics = res.rows()
        elif name == "typical":
            metrics = experiment_typical_case(p["K"], p["trials"], p["seed"], p["v"]).rows()
        elif name == "explore":
            metrics = experiment_explore(
                p["p"], p["epsilon"], p["alpha"], p["beta"], p["r_star"], p["trials"], p["seed"], p["v"]
            ).rows()
        elif name == "lemma3":
            Beta(p["alpha"], p["beta"])
            metrics = [("lemma3_ratio", lemma3_ratio(p["alpha"], p["beta"]), 0.0)]
        else:
            metrics = _risk_metrics(p["instances"], p["lambdas"], p["seed"])
            p["lambdas"] = " ".join(f"{x:g}" for x in (p["lambdas"] or (0.5, 1.0, 2.0, 5.0)))
    except ValueError as exc:
        log.error("experiment %s failed: %s", name, exc)
        return 1
    columns = ("experiment", *p.keys(), "metric", "value", "stderr")
    _emit(_metric_rows(name, p, metrics), columns, out_path)
    return 0


def cmd_gittins(alpha: float, beta: float, gamma: float, tolerance: float = 1e-9) -> int:
    try:
        check_discount(gamma, "gamma")
        prior = Beta(alpha, beta)
        value = gittins_index(prior, gamma, IndexOptions(tolerance=tolerance))
    except ValueError as exc:
        log.error("%s", exc)
        return 1
    print(f"{value:.10g}")
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridauction", description="Hybrid per-impression/per-click auction toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress output on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario file")
    run.add_argument("scenario")
    run.add_argument("--out", help="CSV path (default: CSV to stdout, no summary)")
    run.add_argument("--workers", type=int, default=1, help="parallel trial workers")

    exp = sub.add_parser(
        "experiment",
        help="run a packaged experiment",
        description="Experiments: " + ", ".join(EXPERIMENTS) + ". Unset flags take the defaults below.",
        epilog="defaults: " + "; ".join(f"{k}: {v}" for k, v in DEFAULTS.items()),
    )
    exp.add_argument("name", help="one of " + ", ".join(EXPERIMENTS))
    exp.add_argument("--alpha", type=float)
    exp.add_argument("--beta", type=float)
    exp.add_argument("--gamma-a", dest="gamma_a", type=float)
    exp.add_argument("--K", dest="K", type=int, help="typical case size; 4**K advertisers")
    exp.add_argument("--epsilon", type=float)
    exp.add_argument("--lambda", dest="lambdas", type=float, action="append", help="risk parameter (repeatable)")
    exp.add_argument("--trials", type=int)
    exp.add_argument("--seed", type=int)
    exp.add_argument("--p", type=float, help="true CTR of the explore bidder")
    exp.add_argument("--r-star", dest="r_star", type=float, help="competitor's fixed effective bid")
    exp.add_argument("--v", type=float, help="per-click valuation")
    exp.add_argument("--n-advertisers", dest="n_advertisers", type=int)
    exp.add_argument("--instances", type=int, help="random instances for the risk sweep")
    exp.add_argument("--out")

    git = sub.add_parser("gittins", help="Gittins index of a Beta(alpha, beta) arm")
    git.add_argument("alpha", type=float)
    git.add_argument("beta", type=float)
    git.add_argument("gamma", type=float)
    git.add_argument("--tol", type=float, default=1e-9)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    if args.command == "run":
        return cmd_run(args.scenario, args.out, args.workers)
    if args.command == "experiment":
        params = {k: v for k, v in vars(args).items() if k not in ("command", "name", "out", "verbose")}
        return cmd_experiment(args.name, params, args.out)
    return cmd_gittins(args.alpha, args.beta, args.gamma, args.tol)


if __name__ == "__main__":
    sys.exit(main())
