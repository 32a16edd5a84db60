"""Social optimum, price of anarchy, the cycle-of-paths lower-bound family and
empirical checkers for structural equilibrium properties."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .equilibrium import CapabilityError
from .game import BuiltGraph, PaymentMatrix
from .graphcore import (
    DistanceMatrix,
    Edge,
    Graph,
    GraphError,
    HostGraph,
    Usage,
    all_pairs_distances,
    build_host_graph,
    canonical_edge,
)

MAX_EXACT_EDGES = 20


# -- social optimum ----------------------------------------------------------


def _distance_sum_bitmask(n: int, masks: list[int]) -> int | None:
    """Ordered distance sum of the graph given by neighbor bitmasks, or None
    if it is disconnected."""
    full = (1 << n) - 1
    total = 0
    for s in range(n):
        seen = frontier = 1 << s
        level = 0
        while frontier:
            level += 1
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= masks[low.bit_length() - 1]
                f ^= low
            nxt &= ~seen
            total += level * bin(nxt).count("1")
            seen |= nxt
            frontier = nxt
        if seen != full:
            return None
    return total


def social_optimum_exact(host: HostGraph, alpha=None, model: str = "cooperative") -> tuple[tuple[Edge, ...], Fraction]:
    """Cheapest realized network by enumerating edge subsets.

    Both models share the optimum ``alpha |E_s| + sum of distances`` since no
    edge is ever worth buying twice. Ties go to the lexicographically smallest
    sorted edge tuple.
    """
    alpha = host.alpha if alpha is None else Fraction(alpha)
    if model not in ("cooperative", "unilateral"):
        raise ValueError(f"unknown model {model!r}")
    if host.m > MAX_EXACT_EDGES:
        raise CapabilityError(f"host has {host.m} edges; exact optimum is capped at {MAX_EXACT_EDGES}")
    n = host.n
    if n == 1:
        return (), Fraction(0)
    if not host.is_connected():
        raise GraphError("host graph is disconnected; every joint strategy has infinite cost")
    host_sum = int(all_pairs_distances(host).total_usage().finite)
    m = host.m
    # each missing host edge stretches its pair from 1 to at least 2, both directions
    sizes = sorted(range(n - 1, m + 1), key=lambda k: alpha * k + 2 * (m - k))
    best_cost: Fraction | None = None
    best_edges: tuple[Edge, ...] = ()
    for size in sizes:
        if best_cost is not None and alpha * size + host_sum + 2 * (m - size) > best_cost:
            break
        for subset in combinations(host.edges, size):
            masks = [0] * n
            for u, v in subset:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
            dsum = _distance_sum_bitmask(n, masks)
            if dsum is None:
                continue
            cost = alpha * size + dsum
            if best_cost is None or cost < best_cost or (cost == best_cost and subset < best_edges):
                best_cost, best_edges = cost, subset
    assert best_cost is not None
    return best_edges, best_cost


def social_optimum_lower_bound(host: HostGraph, alpha=None) -> Fraction:
    """``alpha (n-1) + sum of host distances``: no spanning connected network
    has fewer edges or shorter distances."""
    alpha = host.alpha if alpha is None else Fraction(alpha)
    usage = all_pairs_distances(host).total_usage()
    if usage.unreachable:
        raise GraphError("host graph is disconnected")
    return alpha * (host.n - 1) + usage.finite


def price_of_anarchy(equilibrium_cost, optimum_cost) -> Fraction:
    for name, value in (("equilibrium", equilibrium_cost), ("optimum", optimum_cost)):
        if isinstance(value, Usage):
            if value.unreachable:
                raise ValueError(f"{name} cost is infinite")
        elif isinstance(value, float) and not math.isfinite(value):
            raise ValueError(f"{name} cost is infinite")
    eq = Fraction(equilibrium_cost.finite if isinstance(equilibrium_cost, Usage) else equilibrium_cost)
    opt = Fraction(optimum_cost.finite if isinstance(optimum_cost, Usage) else optimum_cost)
    if opt <= 0:
        raise ValueError(f"optimum cost must be positive, got {opt}")
    return eq / opt


# -- lower-bound family ------------------------------------------------------


@dataclass(frozen=True)
class LowerBoundInstance:
    """Host ``G_{k,l}`` with its cheap subgraph ``G_1`` and expensive
    equilibrium ``G_2``.

    Cycle vertex ``v_i`` (1-based in the construction) has id ``i - 1``;
    path interiors follow in the order P_1..P_2l, Q_1..Q_l.
    """

    k: int
    l: int
    host: HostGraph
    cycle: tuple[int, ...]
    p_paths: tuple[tuple[int, ...], ...]
    q_paths: tuple[tuple[int, ...], ...]
    g1: tuple[Edge, ...]
    g2: tuple[Edge, ...]
    alpha: Fraction
    g2_payments: PaymentMatrix = field(compare=False)

    @property
    def n(self) -> int:
        return self.host.n

    def cycle_edges(self) -> list[Edge]:
        c = self.cycle
        return [canonical_edge(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]


def suggested_alpha(n: int, k: int) -> int:
    return 12 * n * k * k


def _path_edges(path: tuple[int, ...]) -> list[Edge]:
    return [canonical_edge(path[t], path[t + 1]) for t in range(len(path) - 1)]


def generate_lower_bound_instance(k: int, l: int, alpha=None) -> LowerBoundInstance:
    """Build the cycle-of-paths host and its two unicyclic spanning subgraphs.

    One edge is dropped from a path at position ``k // 2``. ``G_2`` keeps the
    Q-cycle and the odd P-paths in full, breaks every even P-path and drops
    all direct cycle edges; each of its edges is bought by its lower-numbered
    endpoint.
    """
    if not (isinstance(k, int) and isinstance(l, int)) or k < 2 or l < 3:
        raise ValueError(f"need integers k >= 2 and l >= 3, got k={k!r}, l={l!r}")
    cyc = tuple(range(2 * l))
    nxt = 2 * l

    def make_path(a: int, b: int) -> tuple[int, ...]:
        nonlocal nxt
        inner = tuple(range(nxt, nxt + k - 1))
        nxt += k - 1
        return (a, *inner, b)

    p_paths = tuple(make_path(cyc[i], cyc[(i + 1) % (2 * l)]) for i in range(2 * l))
    # Q_i joins v_{2i} and v_{2i+2}; v_j has id j-1
    q_paths = tuple(make_path(cyc[2 * i - 1], cyc[(2 * i + 1) % (2 * l)]) for i in range(1, l + 1))
    n = nxt
    cycle_edges = [canonical_edge(cyc[i], cyc[(i + 1) % (2 * l)]) for i in range(2 * l)]
    all_edges = cycle_edges + [e for p in p_paths + q_paths for e in _path_edges(p)]
    alpha = Fraction(suggested_alpha(n, k) if alpha is None else alpha)
    host = build_host_graph(n, all_edges, alpha)

    mid = k // 2
    g1 = set(host.edges)
    for p in p_paths + q_paths:
        g1.discard(_path_edges(p)[mid])
    g2 = set(host.edges) - set(cycle_edges)
    for i in range(1, l + 1):
        # P_{2i} sits at tuple index 2i - 1
        g2.discard(_path_edges(p_paths[2 * i - 1])[mid])
    g2_sorted = tuple(sorted(g2))
    payments = PaymentMatrix.single_owner({e: e[0] for e in g2_sorted}, alpha)
    return LowerBoundInstance(
        k=k, l=l, host=host, cycle=cyc, p_paths=p_paths, q_paths=q_paths,
        g1=tuple(sorted(g1)), g2=g2_sorted, alpha=alpha, g2_payments=payments,
    )


def network_cost(built: BuiltGraph, alpha=None) -> Usage:
    return built.potential(alpha)


# -- lemma checkers ----------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    u: int
    k: int
    bound: object
    observed: object

    def to_dict(self) -> dict:
        return {"u": self.u, "k": self.k, "bound": _jsonable(self.bound), "observed": _jsonable(self.observed)}


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, float):
        return x
    return x


@dataclass(frozen=True)
class LemmaCheckReport:
    lemma: str
    witnesses: tuple[Witness, ...]
    violations: tuple[Witness, ...] = ()
    informational: bool = False

    @property
    def verdict(self) -> str:
        if self.informational:
            return "info"
        return "fail" if self.violations else "pass"

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "verdict": self.verdict,
        }


def _ceil_sqrt(x: Fraction) -> int:
    """Smallest integer c with c*c >= x, for rational x >= 0."""
    c = math.isqrt(x.numerator // x.denominator)
    while c * c < x:
        c += 1
    while c > 0 and (c - 1) * (c - 1) >= x:
        c -= 1
    return c


def _doubling(matrix: DistanceMatrix, lemma: str, slack: int) -> LemmaCheckReport:
    """Whenever more than half the vertices lie within ``k`` of ``u``, all of
    them must lie within ``2k + slack``.

    Only the smallest qualifying ``k`` per vertex is recorded: larger ``k``
    give larger radii over the same monotone neighborhoods.
    """
    a = matrix.array
    n = matrix.n
    big = np.iinfo(np.int64).max
    d = np.where(a >= 0, a, big)
    half = n // 2  # |N_k(u)| > n/2  <=>  k >= sorted_row[n // 2]
    kmin = np.partition(d, half, axis=1)[:, half]
    ecc = d.max(axis=1)
    witnesses, violations = [], []
    for u in range(n):
        if kmin[u] == big:
            continue
        radius = 2 * int(kmin[u]) + slack
        observed = n if ecc[u] <= radius else int((d[u] <= radius).sum())
        w = Witness(u, int(kmin[u]), n, observed)
        witnesses.append(w)
        if observed < n:
            violations.append(w)
    return LemmaCheckReport(lemma, tuple(witnesses), tuple(violations))


def check_doubling_lemma(built: BuiltGraph, alpha=None, model: str = "cooperative") -> list[LemmaCheckReport]:
    """Neighborhood doubling radii on an equilibrium network.

    Radii ``2k + 2 alpha / n`` (both models) and ``2k + 4 sqrt(alpha / n)``
    (cooperative) are rounded up to integers.
    """
    alpha = built.host.alpha if alpha is None else Fraction(alpha)
    n = built.n
    reports = [_doubling(built.distances, "doubling_2k+2a/n", math.ceil(2 * alpha / n))]
    if model == "cooperative":
        reports.append(_doubling(built.distances, "doubling_2k+4sqrt(a/n)", _ceil_sqrt(16 * alpha / n)))
    return reports


def _icbrt(x: int) -> int:
    """Floor of the real cube root of a nonnegative integer."""
    if x < 2:
        return x
    r = 1 << ((x.bit_length() + 2) // 3)
    while True:
        r2 = (2 * r + x // (r * r)) // 3
        if r2 >= r:
            break
        r = r2
    while r * r * r > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def _exact_cbrt(x: Fraction) -> Fraction | None:
    p, q = x.numerator, x.denominator
    a, b = _icbrt(p), _icbrt(q)
    return Fraction(a, b) if a ** 3 == p and b ** 3 == q else None


def _cbrt_bounds(x: Fraction, scale: int) -> tuple[Fraction, Fraction]:
    r = _icbrt(x.numerator * scale ** 3 // x.denominator)
    return Fraction(r, scale), Fraction(r + 1, scale)


def stretch_threshold(d: int, alpha: Fraction) -> int:
    """Largest integer not exceeding ``3d + 7 a^(1/3) + 5 a^(1/3) d^(2/3)``.

    Computed exactly: rational cube roots are used directly, otherwise
    bracketing intervals are refined until both ends share a floor.
    """
    alpha = Fraction(alpha)
    c = _exact_cbrt(alpha)
    t2 = _exact_cbrt(Fraction(d * d))
    if c is not None and t2 is not None:
        return math.floor(3 * d + c * (7 + 5 * t2))
    scale = 10 ** 6
    for _ in range(40):
        c_lo, c_hi = (c, c) if c is not None else _cbrt_bounds(alpha, scale)
        t_lo, t_hi = (t2, t2) if t2 is not None else _cbrt_bounds(Fraction(d * d), scale)
        lo = math.floor(3 * d + c_lo * (7 + 5 * t_lo))
        hi = math.floor(3 * d + c_hi * (7 + 5 * t_hi))
        if lo == hi:
            return lo
        scale *= 10 ** 6
    raise ArithmeticError(f"could not resolve stretch threshold for d={d}, alpha={alpha}")


def check_distance_stretch(host: HostGraph, built: BuiltGraph, alpha=None) -> LemmaCheckReport:
    """``d_Gs(u,v) <= 3 d_G + 7 a^(1/3) + 5 a^(1/3) d_G^(2/3)`` over all pairs.

    One witness per host distance value records the worst pair at that
    distance; a pair joined in the host but not in ``G_s`` always fails.
    """
    alpha = host.alpha if alpha is None else Fraction(alpha)
    dg = all_pairs_distances(host).array.ravel()
    ds = built.distances.array.ravel()
    keep = dg >= 0
    dg, ds, flat = dg[keep], ds[keep], np.flatnonzero(keep)
    ds = np.where(ds >= 0, ds, np.iinfo(np.int64).max)
    dmax = int(dg.max())
    worst = np.full(dmax + 1, -1, dtype=np.int64)
    np.maximum.at(worst, dg, ds)
    at_worst = np.flatnonzero(ds == worst[dg])
    values, first = np.unique(dg[at_worst], return_index=True)
    witnesses, violations = [], []
    for d, pos in zip(values.tolist(), first.tolist()):
        u, _ = divmod(int(flat[at_worst[pos]]), built.n)
        thr = stretch_threshold(d, alpha)
        observed = int(worst[d])
        unreachable = observed == np.iinfo(np.int64).max
        w = Witness(u, d, thr, "UNREACHABLE" if unreachable else observed)
        witnesses.append(w)
        if unreachable or observed > thr:
            violations.append(w)
    return LemmaCheckReport("stretch_3d+7a^(1/3)+5a^(1/3)d^(2/3)", tuple(witnesses), tuple(violations))


def unilateral_stretch_profile(host: HostGraph, built: BuiltGraph, alpha=None, constant: float = 1.0) -> LemmaCheckReport:
    """Ratios ``d_Gs / (C (d_G + sqrt(alpha d_G)))`` per host distance.

    The unilateral analogue carries no explicit constants, so this is an
    informational report only.
    """
    alpha = float(host.alpha if alpha is None else alpha)
    dg = all_pairs_distances(host).array
    ds = built.distances.array
    witnesses = []
    for d in np.unique(dg[dg > 0]):
        d = int(d)
        vals = ds[dg == d]
        worst = int(vals.max()) if (vals >= 0).all() else math.inf
        baseline = constant * (d + math.sqrt(alpha * d))
        witnesses.append(Witness(-1, d, baseline, worst / baseline))
    return LemmaCheckReport("stretch_unilateral_ratio", tuple(witnesses), informational=True)


def check_cost_bound_unilateral(built: BuiltGraph, alpha=None, purchases: int | None = None) -> LemmaCheckReport:
    """Total cost of a unilateral equilibrium is at most
    ``alpha n + 2 * sum of ordered distances``.

    ``purchases`` is the number of links bought (counting double purchases);
    it defaults to the realized edge count.
    """
    alpha = built.host.alpha if alpha is None else Fraction(alpha)
    usage = built.distances.total_usage()
    bought = built.graph.m if purchases is None else purchases
    if usage.unreachable:
        w = Witness(-1, 0, "finite", "UNREACHABLE")
        return LemmaCheckReport("cost_bound_tree", (w,), (w,))
    cost = alpha * bought + usage.finite
    bound = alpha * built.n + 2 * usage.finite
    w = Witness(-1, 0, bound, cost)
    return LemmaCheckReport("cost_bound_tree", (w,), () if cost <= bound else (w,))


def greedy_center_points(matrix: DistanceMatrix, u: int, k: int) -> list[int]:
    """Greedy 2k-separated centers among vertices at distance exactly 4k+3 from u."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    a = matrix.array
    ring = [int(v) for v in np.flatnonzero(a[u] == 4 * k + 3)]
    marked: set[int] = set()
    centers = []
    for z in ring:
        if z in marked:
            continue
        centers.append(z)
        for v in ring:
            if v not in marked and 0 <= a[z, v] <= 2 * k:
                marked.add(v)
    return centers
