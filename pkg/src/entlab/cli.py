"""Batch experiment runner.

Subcommands: entropy, average, tower-gap, claim52, growth, coloring,
verify-lemmas.  A flat KEY=VALUE config file can preset any flag; explicit
flags win.  Exit codes: 0 success, 1 invalid configuration, 2 budget
exceeded, 3 verification-suite failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import BudgetError, ConfigError
from .experiments import (averaging_suite, coloring_suite, lowerbound_lemma_suite,
                          mnorm_lemma_suite, partitions_lemma_suite, sandwich_suite,
                          write_csv)


def _parse_config_file(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line without '=': {line!r}")
        key, value = line.split("=", 1)
        cfg[key.strip().replace("_", "-")] = value.strip()
    return cfg


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"bad int list {text!r}") from exc


def _check_eps_grid(grid: list[float]) -> list[float]:
    if not grid:
        raise ConfigError("empty epsilon grid")
    for eps in grid:
        if not 0.0 < eps <= 1.0:
            raise ConfigError(f"epsilon {eps} outside (0, 1]")
    return grid


def _apply_config(args: argparse.Namespace, parser_defaults: dict) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    cfg = _parse_config_file(args.config)
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr not in parser_defaults:
            raise ConfigError(f"unknown config key {key!r}")
        # the config only fills flags the command line left at their default
        if getattr(args, attr) == parser_defaults[attr]:
            setattr(args, attr, value)
    return args


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(args, extra: dict | None = None) -> dict:
    base = {"command": args.command, "seed": args.seed}
    if extra:
        base.update(extra)
    return base


def _cmd_entropy(args) -> int:
    from .entropy import eps_entropy_bracket
    from .spaces import semimetric_from_csv, space_from_csv

    grid = _check_eps_grid(_floats(args.eps))
    out = _out_dir(args)
    rows = []
    if args.metric_csv:
        space = space_from_csv(args.space_csv) if args.space_csv else None
        rho = semimetric_from_csv(args.metric_csv, space)
        if rho.space.n > int(args.cap_atoms):
            raise BudgetError(f"{rho.space.n} atoms exceed --cap-atoms {args.cap_atoms}")
        for eps in grid:
            res = eps_entropy_bracket(rho.space, rho, eps, exact_cap=int(args.exact_cap))
            rows.append((0, rho.space.n, eps, res.lower_bits, res.upper_bits, res.exact))
    else:
        result = sandwich_suite(int(args.instances), grid, seed=args.seed,
                                max_atoms=min(int(args.cap_atoms), 12))
        rows = [(t, n, eps, exact, exact, True)
                for (t, n, eps, lo, exact, up, ok) in result.rows]
        if not result.passed:
            print(f"sandwich violations: {result.violations}")
            return 3
    write_csv(out / "entropy.csv",
              ["instance", "n_atoms", "epsilon", "lower_bits", "upper_bits", "exact_flag"],
              rows, _echo(args, {"eps": args.eps}))
    print(f"wrote {out / 'entropy.csv'} ({len(rows)} rows)")
    return 0


def _cmd_average(args) -> int:
    out = _out_dir(args)
    result = averaging_suite(int(args.trials), seed=args.seed)
    write_csv(out / "average.csv",
              ["instance", "group", "n_atoms", "window", "blocks",
               "decomposition_err", "l1_err", "ok"],
              result.rows, _echo(args, {"trials": args.trials}))
    print(f"averaging identities: {result.trials - result.violations}/{result.trials} ok")
    return 0 if result.passed else 3


def _cmd_tower_gap(args) -> int:
    from .constructions import tower_entropy_profile, transversal_entropy_table

    grid = _check_eps_grid(_floats(args.eps))
    eps0 = float(args.transversal_eps)
    if not 0.0 < eps0 <= 1.0:
        raise ConfigError(f"transversal epsilon {eps0} outside (0, 1]")
    out = _out_dir(args)
    p, depth = int(args.p), int(args.depth)
    if p < 3 or depth < 1:
        raise ConfigError("need an odd prime p >= 3 and depth >= 1")
    profile = tower_entropy_profile(p, depth, grid, atom_cap=int(args.cap_atoms))
    header = ["p", "n", "order_Gn", "epsilon", "lower_bits", "upper_bits",
              "log2_order", "log2_qn"]
    write_csv(out / "gap.csv", header,
              [(r.p, r.level, r.order, r.epsilon, r.lower_bits, r.upper_bits,
                r.log2_order, r.log2_q) for r in profile],
              _echo(args, {"p": p, "depth": depth, "eps": args.eps}))
    report = transversal_entropy_table(_ints(args.qs), eps0,
                                       exact_cap=int(args.transversal_exact_cap))
    write_csv(out / "gap_transversal.csv", header,
              [(r.p, r.level, r.order, r.epsilon, r.lower_bits, r.upper_bits,
                r.log2_order, r.log2_q) for r in report.rows],
              _echo(args, {"qs": args.qs, "transversal-eps": eps0}))
    print(f"wrote {out / 'gap.csv'} and {out / 'gap_transversal.csv'}; "
          f"empirical c = {report.empirical_c}")
    return 0


def _cmd_claim52(args) -> int:
    from .constructions import invariant_metric_entropy_table

    grid = _check_eps_grid(_floats(args.eps))
    recipes = [r.strip() for r in str(args.recipes).split(",") if r.strip()]
    if not recipes:
        raise ConfigError("no metric recipes given")
    out = _out_dir(args)
    qs = _ints(args.qs)
    rows = []
    c_values = []

    def run(eps):
        return invariant_metric_entropy_table(qs, eps, recipes, seed=args.seed,
                                              exact_cap=int(args.exact_cap))

    with ThreadPoolExecutor(max_workers=max(1, int(args.workers))) as pool:
        reports = list(pool.map(run, grid))
    for report in reports:
        for r in report.rows:
            rows.append((r.q, r.recipe, r.epsilon, r.diam, r.lower_bits,
                         r.upper_bits, r.log2_q))
        if report.empirical_c is not None:
            c_values.append(report.empirical_c)
    write_csv(out / "claim52.csv",
              ["q", "recipe", "epsilon", "diam", "lower_bits", "upper_bits", "log2_q"],
              rows, _echo(args, {"qs": args.qs, "eps": args.eps, "recipes": args.recipes}))
    print(f"wrote {out / 'claim52.csv'}; empirical c = {min(c_values) if c_values else None}")
    return 0


def _cmd_growth(args) -> int:
    from .constructions import triple_product_experiment

    out = _out_dir(args)
    ps = _ints(args.ps)
    for p in ps:
        if p < 3:
            raise ConfigError("primes must be odd and >= 3")
    report = triple_product_experiment(ps, int(args.trials), seed=args.seed)
    write_csv(out / "growth.csv",
              ["p", "trial", "set_size", "square_size", "cube_size",
               "generates", "saturated"],
              [(r.p, r.trial, r.set_size, r.square_size, r.cube_size,
                r.generates, r.saturated) for r in report.rows],
              _echo(args, {"ps": args.ps, "trials": args.trials}))
    print(f"wrote {out / 'growth.csv'}; fitted log-log exponent = {report.fitted_exponent}")
    return 0


def _cmd_coloring(args) -> int:
    out = _out_dir(args)
    result = coloring_suite(int(args.windows), seed=args.seed)
    write_csv(out / "coloring.csv",
              ["window", "ambient", "size", "k_size", "max_degree",
               "colors", "bound", "ok"],
              result.rows, _echo(args, {"windows": args.windows}))
    print(f"coloring windows: {result.trials - result.violations}/{result.trials} ok")
    return 0 if result.passed else 3


def _cmd_verify_lemmas(args) -> int:
    out = _out_dir(args)
    suites = [
        lowerbound_lemma_suite(int(args.trials_lowerbound), seed=args.seed),
        partitions_lemma_suite(int(args.trials_partitions), seed=args.seed),
        mnorm_lemma_suite(int(args.trials_mnorm), seed=args.seed),
    ]
    rows = [(s.name, s.trials, s.violations, "PASS" if s.passed else "FAIL")
            for s in suites]
    write_csv(out / "lemmas.csv", ["suite", "trials", "violations", "status"],
              rows, _echo(args))
    width = max(len(s.name) for s in suites)
    for name, trials, violations, status in rows:
        print(f"{name:<{width}}  trials={trials:<5} violations={violations:<4} {status}")
    return 0 if all(s.passed for s in suites) else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entlab",
        description="Entropy experiments for averaged semimetrics on finite group actions")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="KEY=VALUE preset file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--cap-atoms", type=int, default=10_000, dest="cap_atoms")

    p = sub.add_parser("entropy", help="entropy brackets for a metric CSV or a random suite")
    common(p)
    p.add_argument("--metric-csv", default=None, dest="metric_csv")
    p.add_argument("--space-csv", default=None, dest="space_csv")
    p.add_argument("--eps", default="0.05,0.1,0.2,0.3,0.5")
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--exact-cap", type=int, default=24, dest="exact_cap")
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("average", help="window-average identity checks")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=_cmd_average)

    p = sub.add_parser("tower-gap", help="subgroup-tower entropy profile and transversal table")
    common(p)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--eps", default="0.05,0.1,0.25")
    p.add_argument("--qs", default="3,5,7,9")
    p.add_argument("--transversal-eps", default=0.25, dest="transversal_eps")
    p.add_argument("--transversal-exact-cap", type=int, default=150,
                   dest="transversal_exact_cap")
    p.set_defaults(func=_cmd_tower_gap)

    p = sub.add_parser("claim52", help="invariant-metric entropy against log2 q")
    common(p)
    p.add_argument("--qs", default="3,5,7,9")
    p.add_argument("--eps", default="0.25")
    p.add_argument("--recipes", default="word,discrete")
    p.add_argument("--exact-cap", type=int, default=24, dest="exact_cap")
    p.set_defaults(func=_cmd_claim52)

    p = sub.add_parser("growth", help="triple-product growth of random generating sets")
    common(p)
    p.add_argument("--ps", default="3,5,7")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=_cmd_growth)

    p = sub.add_parser("coloring", help="difference-graph coloring windows")
    common(p)
    p.add_argument("--windows", type=int, default=50)
    p.set_defaults(func=_cmd_coloring)

    p = sub.add_parser("verify-lemmas", help="randomised lemma verification suites")
    common(p)
    p.add_argument("--trials-lowerbound", type=int, default=200, dest="trials_lowerbound")
    p.add_argument("--trials-partitions", type=int, default=200, dest="trials_partitions")
    p.add_argument("--trials-mnorm", type=int, default=100, dest="trials_mnorm")
    p.set_defaults(func=_cmd_verify_lemmas)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {a.dest: a.default
                for a in parser._subparsers._group_actions[0].choices[args.command]._actions
                if a.dest != "help"}
    try:
        args = _apply_config(args, defaults)
        args.seed = int(args.seed)
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
