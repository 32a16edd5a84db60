"""Run dynamics, verification, lemma checks and PoA for configured experiments."""
from __future__ import annotations

import csv
import io
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .analysis import (
    LowerBoundInstance,
    check_cost_bound_unilateral,
    check_distance_stretch,
    check_doubling_lemma,
    generate_lower_bound_instance,
    price_of_anarchy,
    social_optimum_exact,
    social_optimum_lower_bound,
    unilateral_stretch_profile,
)
from .config import ConfigError, ExperimentConfig
from .equilibrium import (
    MAX_EXACT_DEGREE,
    run_best_response_dynamics,
    run_dynamics,
    verify_collaborative,
    verify_unilateral_nash,
)
from .game import PaymentMatrix, UnilateralStrategy, parse_strategy, realize_network, social_cost
from .graphcore import GraphError, HostGraph, build_host_graph, complete_host, parse_edge_list

log = logging.getLogger(__name__)

CSV_VERSION = "netcreate-sweep v1"
CSV_COLUMNS = [
    "alpha_num", "alpha_den", "n", "edges_realized", "diameter",
    "social_cost_num", "social_cost_den", "optimum_basis", "poa_num", "poa_den",
    "converged", "steps", "lemma_verdicts",
]


def gnp_edges(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    rng = random.Random(seed)
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]


def load_host(cfg: ExperimentConfig, alpha) -> tuple[HostGraph, LowerBoundInstance | None]:
    if cfg.host_file is not None:
        try:
            n, edges, _ = parse_edge_list(Path(cfg.host_file).read_text())
        except OSError as exc:
            raise ConfigError("host_file", str(exc)) from exc
        return build_host_graph(n, edges, 0 if alpha == "suggested" else alpha), None
    if cfg.generator == "complete":
        return complete_host(cfg.n, alpha), None
    if cfg.generator == "gnp":
        return build_host_graph(cfg.n, gnp_edges(cfg.n, cfg.p, cfg.graph_seed), alpha), None
    inst = generate_lower_bound_instance(cfg.k, cfg.l, None if alpha == "suggested" else alpha)
    return inst.host, inst


def _initial_strategy(cfg: ExperimentConfig, host: HostGraph, inst: LowerBoundInstance | None):
    kind, _, arg = cfg.init.partition(":")
    coop = cfg.model == "cooperative"
    if kind == "empty":
        return PaymentMatrix() if coop else UnilateralStrategy.empty(host.n)
    if kind == "host-complete":
        if coop:
            return PaymentMatrix.split_evenly(host.edges, host.alpha)
        sets = [set() for _ in range(host.n)]
        for u, v in host.edges:
            sets[u].add(v)
        return UnilateralStrategy.from_sets(host, sets)
    if kind == "g2":
        assert inst is not None
        if coop:
            return PaymentMatrix.single_owner({e: e[0] for e in inst.g2}, host.alpha)
        sets = [set() for _ in range(host.n)]
        for u, v in inst.g2:
            sets[u].add(v)
        return UnilateralStrategy.from_sets(host, sets)
    try:
        strategy = parse_strategy(Path(arg).read_text(), host.n)
    except OSError as exc:
        raise ConfigError("init", str(exc)) from exc
    if coop != isinstance(strategy, PaymentMatrix):
        raise ConfigError("init", f"strategy file does not match model {cfg.model!r}")
    strategy.validate(host)
    return strategy


def _split(x: Fraction) -> tuple[int, int]:
    x = Fraction(x)
    return x.numerator, x.denominator


@dataclass
class AlphaResult:
    row: dict
    detail: dict
    trajectory: str
    converged: bool


def run_alpha(cfg: ExperimentConfig, alpha) -> AlphaResult:
    """One experiment at a single link price."""
    host, inst = load_host(cfg, alpha)
    alpha = host.alpha
    init = _initial_strategy(cfg, host, inst)
    lemma_reports = []
    if cfg.model == "cooperative":
        traj = run_dynamics(host, init, cfg.policy, seed=cfg.seed, max_steps=cfg.max_steps)
        final = traj.final_payments
        converged, steps, dump = traj.converged, traj.step_count, traj.dump()
        built = realize_network(host, final)
        report = verify_collaborative(host, final) if "equilibrium" in cfg.checks else None
        if "lemmas" in cfg.checks:
            lemma_reports = check_doubling_lemma(built, alpha, "cooperative")
            lemma_reports.append(check_distance_stretch(host, built, alpha))
    else:
        rounds = cfg.max_steps or 100
        final, converged, steps = run_best_response_dynamics(host, init, max_rounds=rounds)
        dump = f"rounds {steps} converged {converged}\n"
        built = realize_network(host, final)
        report = None
        if "equilibrium" in cfg.checks:
            mode = "exact" if host.max_degree() <= MAX_EXACT_DEGREE else "local"
            report = verify_unilateral_nash(host, final, mode)
        if "lemmas" in cfg.checks:
            lemma_reports = check_doubling_lemma(built, alpha, "unilateral")
            lemma_reports.append(check_cost_bound_unilateral(built, alpha, final.purchases()))
            lemma_reports.append(unilateral_stretch_profile(host, built, alpha))

    cost = social_cost(built, final).total
    basis, poa, optimum = "", None, None
    if "poa" in cfg.checks and host.n > 1 and not cost.unreachable:
        try:
            if host.m <= cfg.optimum_cap:
                _, optimum = social_optimum_exact(host, alpha, cfg.model)
                basis = "exact"
            else:
                optimum = social_optimum_lower_bound(host, alpha)
                basis = "lower_bound"
            poa = price_of_anarchy(cost, optimum)
        except (GraphError, ValueError) as exc:
            log.warning("price of anarchy unavailable at alpha=%s: %s", alpha, exc)
            basis = ""

    verdicts = []
    if report is not None:
        verdicts.append(f"{report.concept}={report.verdict}")
    verdicts.extend(f"{r.lemma}={r.verdict}" for r in lemma_reports)
    a_num, a_den = _split(alpha)
    if cost.unreachable:
        c_num, c_den = "inf", ""
    else:
        c_num, c_den = _split(cost.finite)
    p_num, p_den = _split(poa) if poa is not None else ("", "")
    row = {
        "alpha_num": a_num, "alpha_den": a_den, "n": host.n,
        "edges_realized": built.graph.m, "diameter": built.distances.diameter,
        "social_cost_num": c_num, "social_cost_den": c_den, "optimum_basis": basis,
        "poa_num": p_num, "poa_den": p_den, "converged": int(converged), "steps": steps,
        "lemma_verdicts": ";".join(verdicts),
    }
    detail = {
        "alpha": str(alpha),
        "model": cfg.model,
        "converged": converged,
        "steps": steps,
        "edges": [list(e) for e in built.edges],
        "optimum": None if optimum is None else str(optimum),
        "optimum_basis": basis or None,
        "equilibrium": None if report is None else report.to_dict(),
        "lemmas": [
            {"lemma": r.lemma, "verdict": r.verdict, "witness_count": len(r.witnesses),
             "violations": [w.to_dict() for w in r.violations]}
            for r in lemma_reports
        ],
    }
    if cfg.model == "cooperative":
        detail["payments"] = [
            {"edge": list(e), "payments": {str(i): str(p) for i, p in sorted(row_.items())}}
            for e, row_ in final.items()
        ]
    else:
        detail["strategy"] = {str(i): sorted(s) for i, s in enumerate(final.choices)}
    return AlphaResult(row, detail, dump, converged)


def _run_one(args):
    cfg, alpha = args
    return run_alpha(cfg, alpha)


def sweep_alpha(cfg: ExperimentConfig) -> list[AlphaResult]:
    """Run every configured alpha; results come back in alpha order."""
    cfg.validate()
    if cfg.jobs > 1 and len(cfg.alphas) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_run_one, [(cfg, a) for a in cfg.alphas]))
    return [run_alpha(cfg, a) for a in cfg.alphas]


def render_csv(results: list[AlphaResult]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row)
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig) -> tuple[list[AlphaResult], dict[str, Path]]:
    """Run the sweep and write ``<name>.csv``, ``<name>.json`` and one
    trajectory dump per alpha into the output directory."""
    results = sweep_alpha(cfg)
    out = cfg.resolved_output_dir
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / f"{cfg.name}.csv", "json": out / f"{cfg.name}.json"}
    paths["csv"].write_text(render_csv(results))
    paths["json"].write_text(json.dumps([r.detail for r in results], indent=2, sort_keys=True) + "\n")
    for r in results:
        p = out / f"{cfg.name}_alpha{r.row['alpha_num']}_{r.row['alpha_den']}.trajectory"
        p.write_text(r.trajectory)
        paths[f"trajectory_{r.row['alpha_num']}_{r.row['alpha_den']}"] = p
    return results, paths
