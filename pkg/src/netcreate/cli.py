"""Command line entry point: ``netcreate <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import (
    check_cost_bound_unilateral,
    check_distance_stretch,
    check_doubling_lemma,
    generate_lower_bound_instance,
    social_optimum_exact,
    social_optimum_lower_bound,
    unilateral_stretch_profile,
)
from .config import OUTPUT_DIR_ENV, ConfigError, ExperimentConfig, read_config_file
from .equilibrium import CapabilityError, MAX_EXACT_DEGREE, verify_collaborative, verify_unilateral_nash
from .experiment import load_host, render_csv, run_experiment
from .game import PaymentMatrix, StrategyError, format_strategy, parse_strategy, realize_network
from .graphcore import GraphError, Graph, format_edge_list

EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

_CONFIG_FLAGS = (
    "host_file", "generator", "n", "k", "l", "p", "graph_seed", "model", "alpha",
    "init", "policy", "seed", "max_steps", "checks", "output_dir", "name", "optimum_cap", "jobs",
)


def _add_host_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="flat key=value config file; flags override it")
    g.add_argument("--host-file", help="host graph in edge-list format")
    g.add_argument("--generator", help="complete | lower_bound | gnp")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--l", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--graph-seed", type=int)
    g.add_argument("--model", help="cooperative | unilateral")
    g.add_argument("--alpha", help="link price (rational), comma-separated sweep, or 'suggested'")
    g.add_argument("--init", help="empty | host-complete | g2 | file:<path>")
    g.add_argument("--policy", help="round_robin | random | greedy")
    g.add_argument("--seed", type=int)
    g.add_argument("--max-steps", type=int)
    g.add_argument("--checks", help="comma list of equilibrium, lemmas, poa")
    g.add_argument("--output-dir", help=f"defaults to ${OUTPUT_DIR_ENV} or the working directory")
    g.add_argument("--name", help="output file stem")
    g.add_argument("--optimum-cap", type=int)
    g.add_argument("--jobs", type=int)


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = read_config_file(args.config) if args.config else {}
    for key in _CONFIG_FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if "alpha" in values and "alphas" in values:
        values.pop("alphas")
    return ExperimentConfig.from_mapping(values)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcreate", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("simulate", "run the dynamics at one alpha"), ("sweep", "run the dynamics over an alpha list")):
        p = sub.add_parser(name, help=help_)
        _add_host_flags(p)

    p = sub.add_parser("verify", help="verify a strategy file")
    _add_host_flags(p)
    p.add_argument("--strategy", required=True, help="strategy text file")
    p.add_argument("--mode", default="exact", choices=("exact", "local"))

    p = sub.add_parser("check-lemmas", help="run the structural lemma checks on a strategy")
    _add_host_flags(p)
    p.add_argument("--strategy", required=True)

    p = sub.add_parser("optimum", help="social optimum or its lower bound")
    _add_host_flags(p)
    p.add_argument("--lower-bound", action="store_true", help="skip enumeration, print the bound")

    p = sub.add_parser("construct", help="write a lower-bound instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--alpha", help="override the suggested 12 n k^2")
    p.add_argument("--output-dir")
    return parser


def _single_alpha_host(args):
    cfg = _config_from_args(args)
    if cfg.model not in ("cooperative", "unilateral"):
        raise ConfigError("model", f"unknown model {cfg.model!r}")
    if (cfg.host_file is None) == (cfg.generator is None):
        raise ConfigError("host", "exactly one of host_file or generator is required")
    if len(cfg.alphas) != 1:
        raise ConfigError("alpha", "exactly one value is required")
    host, inst = load_host(cfg, cfg.alphas[0])
    return cfg, host, inst


def _load_strategy(path: str, host):
    strategy = parse_strategy(Path(path).read_text(), host.n)
    strategy.validate(host)
    return strategy


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    cfg.validate()
    if args.command == "simulate" and len(cfg.alphas) != 1:
        raise ConfigError("alpha", "simulate takes exactly one value; use sweep for lists")
    results, paths = run_experiment(cfg)
    sys.stdout.write(render_csv(results))
    for r in results:
        if not r.converged:
            print(f"did not converge at alpha={r.detail['alpha']}; trajectory in {cfg.resolved_output_dir}",
                  file=sys.stderr)
    return 0 if all(r.converged for r in results) else EXIT_NOT_CONVERGED


def cmd_verify(args) -> int:
    _, host, _ = _single_alpha_host(args)
    strategy = _load_strategy(args.strategy, host)
    if isinstance(strategy, PaymentMatrix):
        report = verify_collaborative(host, strategy)
    else:
        report = verify_unilateral_nash(host, strategy, args.mode)
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.passed else EXIT_FAIL


def cmd_check_lemmas(args) -> int:
    _, host, _ = _single_alpha_host(args)
    strategy = _load_strategy(args.strategy, host)
    built = realize_network(host, strategy)
    if isinstance(strategy, PaymentMatrix):
        reports = check_doubling_lemma(built, host.alpha, "cooperative")
        reports.append(check_distance_stretch(host, built))
    else:
        reports = check_doubling_lemma(built, host.alpha, "unilateral")
        reports.append(check_cost_bound_unilateral(built, host.alpha, strategy.purchases()))
        reports.append(unilateral_stretch_profile(host, built))
    print(json.dumps([r.to_dict() for r in reports], indent=2))
    return 0 if all(r.passed for r in reports) else EXIT_FAIL


def cmd_optimum(args) -> int:
    cfg, host, _ = _single_alpha_host(args)
    if args.lower_bound:
        print(json.dumps({"basis": "lower_bound", "cost": str(social_optimum_lower_bound(host))}))
        return 0
    edges, cost = social_optimum_exact(host, model=cfg.model)
    print(json.dumps({"basis": "exact", "cost": str(cost), "edges": [list(e) for e in edges]}))
    return 0


def cmd_construct(args) -> int:
    import os

    inst = generate_lower_bound_instance(args.k, args.l, args.alpha)
    out = Path(args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    header = [f"k={inst.k} l={inst.l} alpha={inst.alpha}"]
    stem = f"G_{inst.k}_{inst.l}"
    files = {
        f"{stem}_host.txt": format_edge_list(inst.host, header + ["host"]),
        f"{stem}_g1.txt": format_edge_list(Graph(inst.n, inst.g1), header + ["G1: cheap unicyclic subgraph"]),
        f"{stem}_g2.txt": format_edge_list(Graph(inst.n, inst.g2), header + ["G2: expensive equilibrium"]),
        f"{stem}_g2_payments.txt": f"# {header[0]}\n" + format_strategy(inst.g2_payments),
    }
    for name, text in files.items():
        (out / name).write_text(text)
        print(out / name)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {
        "simulate": cmd_run, "sweep": cmd_run, "verify": cmd_verify,
        "check-lemmas": cmd_check_lemmas, "optimum": cmd_optimum, "construct": cmd_construct,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GraphError, StrategyError, CapabilityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
