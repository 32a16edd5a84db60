"""Strategies, realized networks and cost functions for both game models."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .graphcore import (
    DistanceMatrix,
    Edge,
    Graph,
    GraphError,
    HostGraph,
    Usage,
    all_pairs_distances,
    canonical_edge,
)


class StrategyError(ValueError):
    """A strategy refers to links the host graph does not offer."""


@dataclass(frozen=True)
class UnilateralStrategy:
    """``choices[i]`` is the set of neighbors player ``i`` links to."""

    choices: tuple[frozenset[int], ...]

    @classmethod
    def from_sets(cls, host: HostGraph, sets: Iterable[Iterable[int]] | Mapping[int, Iterable[int]]) -> "UnilateralStrategy":
        if isinstance(sets, Mapping):
            rows = [frozenset(sets.get(i, ())) for i in range(host.n)]
        else:
            rows = [frozenset(s) for s in sets]
            rows += [frozenset()] * (host.n - len(rows))
        strategy = cls(tuple(rows))
        strategy.validate(host)
        return strategy

    @classmethod
    def empty(cls, n: int) -> "UnilateralStrategy":
        return cls(tuple(frozenset() for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.choices)

    def validate(self, host: HostGraph) -> None:
        if len(self.choices) != host.n:
            raise StrategyError(f"strategy has {len(self.choices)} players, host has {host.n}")
        for i, s in enumerate(self.choices):
            for j in s:
                if j == i or not (0 <= j < host.n) or not host.has_edge(i, j):
                    raise StrategyError(f"player {i} buys ({i}, {j}), which is not a host edge")

    def replace(self, i: int, s_i: Iterable[int]) -> "UnilateralStrategy":
        rows = list(self.choices)
        rows[i] = frozenset(s_i)
        return UnilateralStrategy(tuple(rows))

    def edges(self) -> frozenset[Edge]:
        return frozenset(canonical_edge(i, j) for i, s in enumerate(self.choices) for j in s)

    def purchases(self) -> int:
        return sum(len(s) for s in self.choices)


class PaymentMatrix:
    """Sparse per-edge, per-player contributions ``s(i, e)``.

    Instances are treated as values: the ``with_*`` methods return new
    matrices. Amounts are stored as :class:`~fractions.Fraction`.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[Edge, Mapping[int, object]] | None = None):
        clean: dict[Edge, dict[int, Fraction]] = {}
        for e, row in (entries or {}).items():
            e = canonical_edge(*e)
            payments = {}
            for i, amount in row.items():
                amount = Fraction(amount)
                if amount < 0:
                    raise StrategyError(f"negative payment {amount} by player {i} on edge {e}")
                if amount:
                    payments[int(i)] = amount
            if payments:
                clean[e] = payments
        self._entries = clean

    def __eq__(self, other):
        return isinstance(other, PaymentMatrix) and self._entries == other._entries

    def __hash__(self):
        return hash(tuple(sorted((e, tuple(sorted(r.items()))) for e, r in self._entries.items())))

    def __repr__(self):
        return f"PaymentMatrix({self._entries!r})"

    def on(self, e: Edge) -> dict[int, Fraction]:
        return dict(self._entries.get(canonical_edge(*e), {}))

    def get(self, i: int, e: Edge) -> Fraction:
        return self._entries.get(canonical_edge(*e), {}).get(i, Fraction(0))

    def total(self, e: Edge) -> Fraction:
        return sum(self._entries.get(canonical_edge(*e), {}).values(), Fraction(0))

    def edges(self) -> list[Edge]:
        """Edges carrying any nonzero payment."""
        return sorted(self._entries)

    def items(self):
        for e in sorted(self._entries):
            yield e, dict(self._entries[e])

    def with_edge(self, e: Edge, payments: Mapping[int, object]) -> "PaymentMatrix":
        entries = {k: dict(v) for k, v in self._entries.items()}
        entries[canonical_edge(*e)] = dict(payments)
        return PaymentMatrix(entries)

    def scaled_edge(self, e: Edge, factor) -> "PaymentMatrix":
        return self.with_edge(e, {i: p * Fraction(factor) for i, p in self.on(e).items()})

    def validate(self, host: HostGraph) -> None:
        for (u, v), row in self._entries.items():
            if not host.has_edge(u, v):
                raise StrategyError(f"payments on ({u}, {v}), which is not a host edge")
            for i in row:
                if not 0 <= i < host.n:
                    raise StrategyError(f"payment by unknown player {i} on edge ({u}, {v})")

    @classmethod
    def split_evenly(cls, edges: Iterable[Edge], alpha) -> "PaymentMatrix":
        """Each edge paid half-and-half by its two endpoints."""
        half = Fraction(alpha) / 2
        return cls({e: {e[0]: half, e[1]: half} for e in edges})

    @classmethod
    def single_owner(cls, owners: Mapping[Edge, int], alpha) -> "PaymentMatrix":
        return cls({e: {i: Fraction(alpha)} for e, i in owners.items()})


JointStrategy = Union[UnilateralStrategy, PaymentMatrix]


@dataclass(frozen=True)
class BuiltGraph:
    """The network ``G_s`` realized from a joint strategy, with distances."""

    host: HostGraph
    graph: Graph
    distances: DistanceMatrix

    @classmethod
    def from_edges(cls, host: HostGraph, edges: Iterable[Edge]) -> "BuiltGraph":
        g = Graph(host.n, tuple(sorted(canonical_edge(*e) for e in set(edges))))
        for u, v in g.edges:
            if not host.has_edge(u, v):
                raise StrategyError(f"edge ({u}, {v}) is not a host edge")
        return cls(host, g, all_pairs_distances(g))

    @property
    def n(self) -> int:
        return self.host.n

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.graph.edges

    def has_edge(self, u: int, v: int) -> bool:
        return self.graph.has_edge(u, v)

    def potential(self, alpha=None) -> Usage:
        """Social cost ``alpha |E_s| + sum of ordered distances``."""
        alpha = self.host.alpha if alpha is None else Fraction(alpha)
        usage = self.distances.total_usage()
        return Usage(usage.unreachable, alpha * self.graph.m + usage.finite)


def realized_edges(host: HostGraph, strategy: JointStrategy) -> frozenset[Edge]:
    if isinstance(strategy, UnilateralStrategy):
        strategy.validate(host)
        return strategy.edges()
    strategy.validate(host)
    return frozenset(e for e in strategy.edges() if strategy.total(e) >= host.alpha)


def realize_network(host: HostGraph, strategy: JointStrategy) -> BuiltGraph:
    """Build ``G_s``: an edge exists if either endpoint buys it (unilateral)
    or its contributions reach ``alpha`` (cooperative)."""
    return BuiltGraph.from_edges(host, realized_edges(host, strategy))


def normalize_payments(host: HostGraph, payments: PaymentMatrix) -> PaymentMatrix:
    """Scale every over-funded edge down so its contributions sum to alpha."""
    alpha = host.alpha
    entries = {}
    for e, row in payments.items():
        total = sum(row.values())
        if total > alpha:
            row = {i: alpha * p / total for i, p in row.items()}
        entries[e] = row
    return PaymentMatrix(entries)


@dataclass(frozen=True)
class CostRow:
    player: int
    creation: Fraction
    usage: Usage

    @property
    def total(self) -> Usage:
        return Usage(self.usage.unreachable, self.creation + self.usage.finite)


@dataclass(frozen=True)
class CostBreakdown:
    rows: tuple[CostRow, ...]

    @property
    def creation(self) -> Fraction:
        return sum((r.creation for r in self.rows), Fraction(0))

    @property
    def usage(self) -> Usage:
        u = Usage(0, 0)
        for r in self.rows:
            u = u + r.usage
        return u

    @property
    def total(self) -> Usage:
        usage = self.usage
        return Usage(usage.unreachable, self.creation + usage.finite)


def _creation(built: BuiltGraph, strategy: JointStrategy, i: int) -> Fraction:
    alpha = built.host.alpha
    if isinstance(strategy, UnilateralStrategy):
        return alpha * len(strategy.choices[i])
    creation = Fraction(0)
    for e in strategy.edges():
        if not built.has_edge(*e):
            continue
        row = strategy.on(e)
        p = row.get(i)
        if p:
            total = sum(row.values())
            creation += alpha * p / total if total > alpha else p
    return creation


def player_cost(built: BuiltGraph, strategy: JointStrategy, i: int) -> CostRow:
    """Creation plus usage cost of player ``i``; the model follows the strategy type."""
    return CostRow(i, _creation(built, strategy, i), built.distances.usage(i))


def social_cost(built: BuiltGraph, strategy: JointStrategy) -> CostBreakdown:
    usages = built.distances.usages()
    if isinstance(strategy, UnilateralStrategy):
        alpha = built.host.alpha
        creations = [alpha * len(s) for s in strategy.choices]
    else:
        creations = [Fraction(0)] * built.n
        alpha = built.host.alpha
        for e, row in strategy.items():
            if not built.has_edge(*e):
                continue
            total = sum(row.values())
            for i, p in row.items():
                creations[i] += alpha * p / total if total > alpha else p
    return CostBreakdown(tuple(CostRow(i, creations[i], usages[i]) for i in range(built.n)))


# -- text serialization ------------------------------------------------------

_PLAYER_RE = re.compile(r"^player\s+(\d+)\s*:(.*)$")
_EDGE_RE = re.compile(r"^edge\s+(\d+)\s+(\d+)\s*:(.*)$")


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_strategy(strategy: JointStrategy) -> str:
    if isinstance(strategy, UnilateralStrategy):
        lines = [
            f"player {i}:" + "".join(f" {j}" for j in sorted(s)) for i, s in enumerate(strategy.choices)
        ]
    else:
        lines = [
            f"edge {u} {v}:" + "".join(f" {i}={_fmt(p)}" for i, p in sorted(row.items()))
            for (u, v), row in strategy.items()
        ]
    return "\n".join(lines) + "\n"


def parse_strategy(text: str, n: int) -> JointStrategy:
    """Parse either strategy block format; the first content line decides."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise StrategyError("empty strategy text")
    if lines[0].startswith("player"):
        rows: list[frozenset[int]] = [frozenset()] * n
        for ln in lines:
            m = _PLAYER_RE.match(ln)
            if not m:
                raise StrategyError(f"bad unilateral strategy line {ln!r}")
            i = int(m.group(1))
            if i >= n:
                raise StrategyError(f"player {i} out of range for n={n}")
            rows[i] = frozenset(int(x) for x in m.group(2).split())
        return UnilateralStrategy(tuple(rows))
    entries: dict[Edge, dict[int, Fraction]] = {}
    for ln in lines:
        m = _EDGE_RE.match(ln)
        if not m:
            raise StrategyError(f"bad payment line {ln!r}")
        e = canonical_edge(int(m.group(1)), int(m.group(2)))
        row = entries.setdefault(e, {})
        for tok in m.group(3).split():
            who, _, amount = tok.partition("=")
            try:
                row[int(who)] = row.get(int(who), Fraction(0)) + Fraction(amount)
            except (ValueError, ZeroDivisionError) as exc:
                raise StrategyError(f"bad payment token {tok!r} in {ln!r}") from exc
    return PaymentMatrix(entries)


__all__ = [
    "BuiltGraph",
    "CostBreakdown",
    "CostRow",
    "GraphError",
    "JointStrategy",
    "PaymentMatrix",
    "StrategyError",
    "UnilateralStrategy",
    "format_strategy",
    "normalize_payments",
    "parse_strategy",
    "player_cost",
    "realize_network",
    "realized_edges",
    "social_cost",
]
