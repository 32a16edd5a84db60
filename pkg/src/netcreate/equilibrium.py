"""Edge valuations, equilibrium verification, best responses and the
cooperative bidding dynamics."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Literal, Sequence

import numpy as np

from .game import (
    BuiltGraph,
    PaymentMatrix,
    UnilateralStrategy,
    realize_network,
    realized_edges,
)
from .graphcore import (
    DistanceMatrix,
    Edge,
    Graph,
    HostGraph,
    Usage,
    ZERO_USAGE,
    all_pairs_distances,
    bfs_distances,
    canonical_edge,
    usage_from,
)

MAX_EXACT_DEGREE = 16


class CapabilityError(RuntimeError):
    """Requested computation exceeds a documented size cap."""


@dataclass(frozen=True)
class EdgeValuation:
    """Per-player value of one host edge in the current network.

    For an absent edge ``values[i]`` is player ``i``'s usage-cost decrease if
    the edge is added; for a present edge it is the increase if it is removed.
    """

    edge: Edge
    present: bool
    values: tuple[Usage, ...]

    @property
    def total(self) -> Usage:
        t = ZERO_USAGE
        for v in self.values:
            t = t + v
        return t

    def positive_players(self) -> list[int]:
        return [i for i, v in enumerate(self.values) if v > ZERO_USAGE]


def _addition_gains(matrix: DistanceMatrix, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-player (unreachable decrease, finite decrease) when adding ``{a, b}``.

    Only pairs (x, y) with x strictly closer to ``a`` (after crossing the new
    edge) and y strictly closer to ``b`` can improve, so the work is confined
    to that rectangle of the distance matrix.
    """
    n = matrix.n
    big = matrix.pad
    d = matrix.padded
    da, db = d[:, a], d[:, b]
    side_a = np.flatnonzero(da + 1 < db)
    side_b = np.flatnonzero(db + 1 < da)
    unreach = np.zeros(n, dtype=np.int64)
    finite = np.zeros(n, dtype=np.int64)
    if side_a.size == 0 or side_b.size == 0:
        return unreach, finite
    old = d[np.ix_(side_a, side_b)]
    new = da[side_a][:, None] + 1 + db[side_b][None, :]
    improved = new < old
    was_unreach = old >= big
    reconnect = improved & was_unreach
    shorter = improved & ~was_unreach
    gain = np.where(shorter, old - new, 0) - np.where(reconnect, new, 0)
    unreach[side_a] = reconnect.sum(axis=1)
    unreach[side_b] = reconnect.sum(axis=0)
    finite[side_a] = gain.sum(axis=1)
    finite[side_b] = gain.sum(axis=0)
    return unreach, finite


def _without_edge(graph: Graph, e: Edge) -> Graph:
    return Graph(graph.n, tuple(x for x in graph.edges if x != e))


def _with_edge(graph: Graph, e: Edge) -> Graph:
    return Graph(graph.n, tuple(sorted(graph.edges + (e,))))


def edge_valuations(built: BuiltGraph, e: Edge) -> EdgeValuation:
    """Exact per-player benefit (absent edge) or loss (present edge)."""
    e = canonical_edge(*e)
    if not built.host.has_edge(*e):
        raise ValueError(f"({e[0]}, {e[1]}) is not a host edge")
    if built.has_edge(*e):
        before = built.distances.usages()
        after = all_pairs_distances(_without_edge(built.graph, e)).usages()
        return EdgeValuation(e, True, tuple(a - b for a, b in zip(after, before)))
    unreach, finite = _addition_gains(built.distances, *e)
    return EdgeValuation(e, False, tuple(Usage(int(u), int(f)) for u, f in zip(unreach, finite)))


def addition_benefit_total(built: BuiltGraph, e: Edge) -> Usage:
    unreach, finite = _addition_gains(built.distances, *canonical_edge(*e))
    return Usage(int(unreach.sum()), int(finite.sum()))


def removal_loss(built: BuiltGraph, e: Edge, player: int) -> Usage:
    """Usage increase of one player if present edge ``e`` is deleted."""
    return usage_from(built.graph, player, removed=canonical_edge(*e)) - built.distances.usage(player)


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    edge: Edge | None
    kind: str
    coalition: tuple[int, ...]
    gain: Usage
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "edge": list(self.edge) if self.edge is not None else None,
            "kind": self.kind,
            "coalition": list(self.coalition),
            "gain": _usage_json(self.gain),
            "detail": self.detail,
        }


def _usage_json(u: Usage):
    finite = Fraction(u.finite)
    text = str(finite.numerator) if finite.denominator == 1 else f"{finite.numerator}/{finite.denominator}"
    return {"unreachable": u.unreachable, "finite": text}


@dataclass(frozen=True)
class EquilibriumReport:
    concept: str
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "verdict": self.verdict,
            "violations": [v.to_dict() for v in self.violations],
        }


def verify_collaborative(host: HostGraph, payments: PaymentMatrix, *, first_only: bool = False) -> EquilibriumReport:
    """Check that no coalition gains by changing contributions on one edge.

    A deviation blocks only if no coalition member is worse off and at least
    one is strictly better off. With every edge funded exactly 0 or alpha this
    reduces to two per-edge tests: an absent edge must have total benefit at
    most alpha, and every contributor to a present edge must pay at most their
    own loss from its removal.
    """
    alpha = host.alpha
    payments.validate(host)
    built = realize_network(host, payments)
    violations: list[Violation] = []
    bridges = built.graph.bridges()

    def add(v: Violation) -> bool:
        violations.append(v)
        return first_only

    for e in host.edges:
        row = payments.on(e)
        total = sum(row.values(), Fraction(0))
        if total not in (0, alpha):
            state = "present" if total > alpha else "absent"
            if add(Violation(e, "structural", tuple(sorted(row)), Usage(0, abs(total - alpha)),
                             f"contributions sum to {total} on {state} edge; expected 0 or {alpha}")):
                break
            continue
        if built.has_edge(*e):
            if e in bridges:
                # removal disconnects every contributor from someone
                continue
            for i, p in sorted(row.items()):
                loss = removal_loss(built, e, i)
                if Usage(0, p) > loss:
                    if add(Violation(e, "remove", (i,), Usage(0, p) - loss,
                                     f"player {i} pays {p} but loses only {loss}")):
                        break
            else:
                continue
            break
        else:
            val = edge_valuations(built, e)
            gain = val.total - Usage(0, alpha)
            if gain > ZERO_USAGE:
                if add(Violation(e, "add", tuple(val.positive_players()), gain,
                                 f"total benefit {val.total} exceeds price {alpha}")):
                    break
    return EquilibriumReport("collaborative", tuple(violations))


# -- unilateral model --------------------------------------------------------


def _others_adjacency(host: HostGraph, strategy: UnilateralStrategy, i: int) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(host.n)]
    for k, s in enumerate(strategy.choices):
        if k == i:
            continue
        for j in s:
            adj[k].add(j)
            adj[j].add(k)
    return adj


def _usage_with(adj: list[set[int]], i: int, bought: Iterable[int]) -> Usage:
    """Usage of player ``i`` when it adds links to ``bought`` on top of ``adj``."""
    first = adj[i] | set(bought)
    dist = {i: 0}
    frontier = [i]
    level = total = 0
    while frontier:
        level += 1
        nxt = []
        for u in frontier:
            for w in first if u == i else adj[u]:
                if w not in dist:
                    dist[w] = level
                    total += level
                    nxt.append(w)
        frontier = nxt
    return Usage(len(adj) - len(dist), total)


def _player_cost(adj: list[set[int]], i: int, s_i: Iterable[int], alpha: Fraction) -> Usage:
    s_i = tuple(s_i)
    usage = _usage_with(adj, i, s_i)
    return Usage(usage.unreachable, alpha * len(s_i) + usage.finite)


def _check_degree(host: HostGraph, i: int) -> None:
    if host.degree(i) > MAX_EXACT_DEGREE:
        raise CapabilityError(
            f"player {i} has host degree {host.degree(i)} > {MAX_EXACT_DEGREE}; "
            "exhaustive enumeration is capped, use local mode"
        )


def _subsets(items: Sequence[int]):
    for r in range(len(items) + 1):
        for c in combinations(items, r):
            yield frozenset(c)


def _local_moves(host: HostGraph, s_i: frozenset[int], i: int):
    nbrs = host.neighbors(i)
    outside = [j for j in nbrs if j not in s_i]
    for j in outside:
        yield s_i | {j}
    for j in sorted(s_i):
        yield s_i - {j}
        for k in outside:
            yield (s_i - {j}) | {k}


def verify_unilateral_nash(
    host: HostGraph,
    strategy: UnilateralStrategy,
    mode: Literal["exact", "local"] = "exact",
    *,
    first_only: bool = False,
) -> EquilibriumReport:
    """Nash check by full enumeration (``exact``) or single-link moves (``local``).

    Local mode only proves link stability: no single add, drop or swap helps.
    """
    strategy.validate(host)
    if mode not in ("exact", "local"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact":
        for i in range(host.n):
            _check_degree(host, i)
    alpha = host.alpha
    violations = []
    for i in range(host.n):
        adj = _others_adjacency(host, strategy, i)
        current = strategy.choices[i]
        cost = _player_cost(adj, i, current, alpha)
        candidates = _subsets(host.neighbors(i)) if mode == "exact" else _local_moves(host, current, i)
        best, best_set = cost, None
        for alt in candidates:
            c = _player_cost(adj, i, alt, alpha)
            if c < best:
                best, best_set = c, alt
        if best_set is not None:
            violations.append(Violation(
                None, "deviate", (i,), cost - best,
                f"player {i} switches {sorted(current)} -> {sorted(best_set)}",
            ))
            if first_only:
                break
    return EquilibriumReport("nash" if mode == "exact" else "link-stable", tuple(violations))


def best_response(host: HostGraph, strategy: UnilateralStrategy, i: int) -> frozenset[int]:
    """A cost-minimizing link set for player ``i`` with everyone else fixed.

    Ties keep the current set if it is optimal, otherwise prefer fewer links
    and then the lexicographically smallest sorted neighbor list.
    """
    _check_degree(host, i)
    adj = _others_adjacency(host, strategy, i)
    current = strategy.choices[i]
    best_cost = _player_cost(adj, i, current, host.alpha)
    best_key = None
    best = current
    for alt in _subsets(host.neighbors(i)):
        c = _player_cost(adj, i, alt, host.alpha)
        key = (len(alt), tuple(sorted(alt)))
        if c < best_cost or (c == best_cost and best is not current and key < best_key):
            best_cost, best, best_key = c, alt, key
    return best


def run_best_response_dynamics(
    host: HostGraph, init: UnilateralStrategy, max_rounds: int = 100
) -> tuple[UnilateralStrategy, bool, int]:
    """Round-robin best responses until a full round changes nothing.

    Returns the final strategy, whether it stabilized, and the number of
    rounds played. Unilateral best-response dynamics may cycle.
    """
    s = init
    for rnd in range(1, max_rounds + 1):
        changed = False
        for i in range(host.n):
            br = best_response(host, s, i)
            if br != s.choices[i]:
                s = s.replace(i, br)
                changed = True
        if not changed:
            return s, True, rnd
    return s, False, max_rounds


# -- cooperative bidding dynamics -------------------------------------------

Action = Literal["add", "remove", "repair", "none"]


@dataclass(frozen=True)
class Step:
    index: int
    edge: Edge
    action: str
    payments: dict[int, Fraction]
    potential: Usage

    def dump(self) -> str:
        pot = Fraction(self.potential.finite)
        line = f"{self.index} edge({self.edge[0]},{self.edge[1]}) {self.action} {pot.numerator}/{pot.denominator}"
        if self.potential.unreachable:
            line += f" unreachable={self.potential.unreachable}"
        return line


@dataclass
class Trajectory:
    initial_potential: Usage
    steps: list[Step] = field(default_factory=list)
    converged: bool = False
    final_payments: PaymentMatrix = field(default_factory=PaymentMatrix)
    final_edges: tuple[Edge, ...] = ()

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def mutations(self) -> list[Step]:
        return [s for s in self.steps if s.action in ("add", "remove")]

    def dump(self) -> str:
        lines = [s.dump() for s in self.steps]
        return "\n".join(lines) + ("\n" if lines else "")


def _proportional(alpha: Fraction, values: dict[int, Usage]) -> dict[int, Fraction]:
    """Split ``alpha`` proportionally to lexicographic values.

    Players with a connectivity stake take the whole amount, weighted by the
    number of pairs at stake; otherwise weights are the finite values.
    """
    conn = {i: v.unreachable for i, v in values.items() if v.unreachable > 0}
    weights = conn if conn else {i: Fraction(v.finite) for i, v in values.items() if v.finite > 0}
    total = sum(weights.values())
    if not total:
        return {}
    return {i: alpha * Fraction(w) / total for i, w in sorted(weights.items())}


class _State:
    def __init__(self, host: HostGraph, payments: PaymentMatrix):
        self.host = host
        self.payments = payments
        self.built = realize_network(host, payments)
        self.bridges = self.built.graph.bridges()

    def rebuild(self):
        self.built = BuiltGraph.from_edges(self.host, realized_edges(self.host, self.payments))
        self.bridges = self.built.graph.bridges()

    def decide(self, e: Edge) -> tuple[str, dict[int, Fraction], Usage]:
        """Action the bidding rule takes on ``e`` and the potential decrease it yields."""
        alpha = self.host.alpha
        row = self.payments.on(e)
        total = sum(row.values(), Fraction(0))
        if self.built.has_edge(*e) and total == alpha:
            # contributors alone already value the edge at alpha or more:
            # it stays, and nobody overpays, without a full valuation
            if e in self.bridges:
                return "none", row, ZERO_USAGE
            losses = {i: removal_loss(self.built, e, i) for i in row}
            funded = ZERO_USAGE
            for v in losses.values():
                funded = funded + v
            if funded >= Usage(0, alpha) and all(Usage(0, p) <= losses[i] for i, p in row.items()):
                return "none", row, ZERO_USAGE
        val = edge_valuations(self.built, e)
        vt = val.total
        if self.built.has_edge(*e):
            if vt < Usage(0, alpha):
                return "remove", {}, Usage(0, alpha) - vt
            losses = dict(enumerate(val.values))
            if total != alpha or any(Usage(0, p) > losses[i] for i, p in row.items()):
                return "repair", _proportional(alpha, losses), ZERO_USAGE
            return "none", row, ZERO_USAGE
        if vt > Usage(0, alpha):
            gains = {i: v for i, v in enumerate(val.values) if v > ZERO_USAGE}
            return "add", _proportional(alpha, gains), vt - Usage(0, alpha)
        if total:
            return "repair", {}, ZERO_USAGE
        return "none", row, ZERO_USAGE

    def apply(self, e: Edge, action: str, new_row: dict[int, Fraction]) -> None:
        self.payments = self.payments.with_edge(e, new_row)
        if action in ("add", "remove"):
            self.rebuild()


def run_dynamics(
    host: HostGraph,
    init: PaymentMatrix | None = None,
    policy: Literal["round_robin", "random", "greedy"] = "round_robin",
    *,
    seed: int | None = None,
    max_steps: int | None = None,
    alpha=None,
) -> Trajectory:
    """Edge-bidding dynamics for the cooperative game.

    Every step examines one host edge. An absent edge whose total benefit
    exceeds alpha is bought with contributions proportional to benefit; a
    present edge whose total loss is below alpha is dropped; a present edge
    with an overpaying contributor has its contributions reassigned in
    proportion to losses. The run converges once a full pass over the host
    edges changes nothing. ``max_steps`` defaults to ``50 * |E|``.
    """
    if alpha is not None:
        host = host.with_alpha(alpha)
    if max_steps is None:
        max_steps = 50 * max(host.m, 1)
    state = _State(host, init if init is not None else PaymentMatrix())
    traj = Trajectory(initial_potential=state.built.potential())
    edges = list(host.edges)

    def record(e, action, row):
        traj.steps.append(Step(len(traj.steps) + 1, e, action, dict(row), state.built.potential()))

    if policy == "greedy":
        while len(traj.steps) < max_steps:
            best = None
            repair = None
            for e in edges:
                action, row, gain = state.decide(e)
                if action in ("add", "remove") and (best is None or gain > best[3]):
                    best = (e, action, row, gain)
                elif action == "repair" and repair is None:
                    repair = (e, action, row, gain)
            choice = best or repair
            if choice is None:
                traj.converged = True
                break
            e, action, row, _ = choice
            state.apply(e, action, row)
            record(e, action, row)
        else:
            traj.converged = not any(state.decide(e)[0] != "none" for e in edges)
    elif policy in ("round_robin", "random"):
        rng = random.Random(seed)
        quiet: set[Edge] = set()
        order = list(edges)
        pos = len(order)
        while len(traj.steps) < max_steps and edges:
            if pos == len(order):
                order = list(edges)
                if policy == "random":
                    rng.shuffle(order)
                pos = 0
            e = order[pos]
            pos += 1
            action, row, _ = state.decide(e)
            if action != "none":
                state.apply(e, action, row)
                quiet.clear()
            else:
                quiet.add(e)
            record(e, action, row)
            if len(quiet) == len(edges):
                traj.converged = True
                break
        if not edges:
            traj.converged = True
    else:
        raise ValueError(f"unknown policy {policy!r}")
    traj.final_payments = state.payments
    traj.final_edges = state.built.edges
    return traj
