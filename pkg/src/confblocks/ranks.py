"""Ranks of sl_r conformal blocks by factorization.

Genus-0 ranks reduce to three-point fusion by splitting off two points at a
time.  A vertex of genus h is reduced by h non-separating factorizations.
On a nodal curve the rank is the sum over node labels of products of vertex
ranks; that sum is evaluated as a sparse tensor-network contraction, with
unlabeled legs allowed to stay open so that a whole family of labelings is
computed in one pass.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from functools import lru_cache

from .curves import StableGraph, Vertex, WeightAssignment, check, degenerate_to_trivalent, smooth_graph
from .errors import InstabilityError, InvariantError
from .fusion import (
    FusionTable,
    LevelContext,
    WeightPartition,
    default_table,
    dual,
    weights_at_level,
)

Key = tuple[tuple[int, ...], ...]


class RankEngine:
    """Memoized rank computations for one rank and level."""

    def __init__(self, ctx: LevelContext, table: FusionTable | None = None):
        self.ctx = ctx
        self.table = table if table is not None else default_table(ctx)
        self.weights = weights_at_level(ctx)
        self._dual = {w.parts: dual(w).parts for w in self.weights}
        self._g0: dict[Key, int] = {}
        self._vertex: dict[tuple[int, Key], int] = {}

    # -- vertex ranks --

    def genus0_rank(self, weights) -> int:
        self.ctx.check(*weights)
        return self._genus0(tuple(sorted(w.parts for w in weights)))

    def _genus0(self, key: Key) -> int:
        n = len(key)
        if n == 0:
            return 1
        if n == 1:
            return int(not any(key[0]))
        if n == 2:
            return int(self._dual[key[0]] == key[1])
        if n == 3:
            r = self.ctx.r
            return self.table.get(*(WeightPartition(p, r) for p in key))
        value = self._g0.get(key)
        if value is not None:
            return value
        a, b, rest = key[0], key[1], key[2:]
        value = 0
        for mu in self._dual:
            left = self._genus0(tuple(sorted((a, b, mu))))
            if left:
                value += left * self._genus0(tuple(sorted((self._dual[mu],) + rest)))
        self._g0[key] = value
        return value

    def vertex_rank(self, genus: int, weights) -> int:
        self.ctx.check(*weights)
        return self._vertex_rank(genus, tuple(sorted(w.parts for w in weights)))

    def _vertex_rank(self, genus: int, key: Key) -> int:
        if genus == 0:
            return self._genus0(key)
        memo = (genus, key)
        value = self._vertex.get(memo)
        if value is not None:
            return value
        value = 0
        for mu, mu_star in self._dual.items():
            value += self._vertex_rank(genus - 1, tuple(sorted(key + (mu, mu_star))))
        self._vertex[memo] = value
        return value

    # -- graphs --

    def graph_tensor(self, graph: StableGraph, fixed: dict[int, WeightPartition] | None = None):
        """Contract the factorization network of ``graph``.

        Legs in ``fixed`` are held at the given weight; all other legs stay
        open.  Returns ``(open_legs, table)`` where ``table`` maps a tuple of
        weights (as parts, ordered like ``open_legs``) to a nonzero rank.
        """
        check(graph)
        fixed = dict(fixed or {})
        self.ctx.check(*fixed.values())
        fixed_parts = {k: w.parts for k, w in fixed.items()}
        open_legs = [leg for leg in graph.legs if leg not in fixed_parts]
        # variables: ("e", k) for edges, ("l", leg) for open legs
        factors = [self._vertex_factor(graph, i, fixed_parts) for i in range(len(graph.vertices))]
        edge_vars = [("e", k) for k in range(len(graph.edges))]
        factors = _eliminate(factors, edge_vars)
        result = _multiply_all(factors)
        names, table = result
        order = [names.index(("l", leg)) for leg in open_legs]
        table = {tuple(key[j] for j in order): v for key, v in table.items()}
        return open_legs, table

    def _vertex_factor(self, graph: StableGraph, i: int, fixed_parts):
        v: Vertex = graph.vertices[i]
        names = []
        slots = []  # per variable: list of (is_dual) occurrences at this vertex
        for k, (a, b) in enumerate(graph.edges):
            occ = [False] * (a == i) + [True] * (b == i)
            if occ:
                names.append(("e", k))
                slots.append(occ)
        constant = []
        for leg in v.legs:
            if leg in fixed_parts:
                constant.append(fixed_parts[leg])
            else:
                names.append(("l", leg))
                slots.append([False])
        labels = list(self._dual)
        table = {}
        for combo in itertools.product(labels, repeat=len(names)):
            parts = list(constant)
            for mu, occ in zip(combo, slots):
                parts.extend(self._dual[mu] if d else mu for d in occ)
            value = self._vertex_rank(v.genus, tuple(sorted(parts)))
            if value:
                table[combo] = value
        return names, table

    def graph_rank(self, graph: StableGraph, assignment: WeightAssignment) -> int:
        if assignment.ctx != self.ctx:
            raise InvariantError("assignment context differs from engine context")
        weights = assignment.as_dict()
        missing = [leg for leg in graph.legs if leg not in weights]
        if missing:
            from .errors import UnlabeledLeg

            raise UnlabeledLeg(f"legs {missing} carry no weight")
        _, table = self.graph_tensor(graph, {leg: weights[leg] for leg in graph.legs})
        return table.get((), 0)


def _eliminate(factors, order):
    """Sum out each variable in ``order``; greedy by result size, ties by order."""
    remaining = list(order)
    factors = list(factors)
    while remaining:
        best = None
        for pos, var in enumerate(remaining):
            touching = [f for f in factors if var in f[0]]
            scope = {x for f in touching for x in f[0]} - {var}
            cost = (len(scope), pos)
            if best is None or cost < best[0]:
                best = (cost, var)
        var = best[1]
        remaining.remove(var)
        touching = [f for f in factors if var in f[0]]
        others = [f for f in factors if var not in f[0]]
        if not touching:
            continue
        product = _multiply_all(touching)
        others.append(_sum_out(product, var))
        factors = others
    return factors


def _multiply(f, g):
    fn, ft = f
    gn, gt = g
    shared = [x for x in fn if x in gn]
    extra = [x for x in gn if x not in fn]
    gi_shared = [gn.index(x) for x in shared]
    gi_extra = [gn.index(x) for x in extra]
    fi_shared = [fn.index(x) for x in shared]
    index = defaultdict(list)
    for key, val in gt.items():
        index[tuple(key[j] for j in gi_shared)].append((tuple(key[j] for j in gi_extra), val))
    out = {}
    for key, val in ft.items():
        for ext, gval in index.get(tuple(key[j] for j in fi_shared), ()):
            out[key + ext] = val * gval
    return fn + extra, out


def _multiply_all(factors):
    if not factors:
        return [], {(): 1}
    factors = sorted(factors, key=lambda f: len(f[1]))
    acc = factors[0]
    acc = (list(acc[0]), acc[1])
    for f in factors[1:]:
        acc = _multiply(acc, f)
    return acc


def _sum_out(factor, var):
    names, table = factor
    j = names.index(var)
    out = defaultdict(int)
    for key, val in table.items():
        out[key[:j] + key[j + 1:]] += val
    return names[:j] + names[j + 1:], {k: v for k, v in out.items() if v}


# -- module-level API ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _engine(ctx: LevelContext) -> RankEngine:
    return RankEngine(ctx)


def engine_for(ctx: LevelContext) -> RankEngine:
    engine = _engine(ctx)
    if engine.table is not default_table(ctx):
        # a table was installed after the engine was built
        _engine.cache_clear()
        engine = _engine(ctx)
    return engine


def reset_engines() -> None:
    _engine.cache_clear()


def genus0_rank(ctx: LevelContext, weights) -> int:
    """Rank of the genus-0 block with the given weights (any number of points)."""
    return engine_for(ctx).genus0_rank(list(weights))


def graph_rank(graph: StableGraph, assignment: WeightAssignment) -> int:
    """Rank of the conformal block on the nodal curve with dual graph ``graph``."""
    return engine_for(assignment.ctx).graph_rank(graph, assignment)


def canonical_graph(g: int, n: int) -> StableGraph:
    """The trivalent graph used by :func:`rank` for type (g, n)."""
    return degenerate_to_trivalent(smooth_graph(g, n))


def rank(g: int, ctx: LevelContext, weights) -> int:
    """Rank of V^dagger_{X, level, weights} for any curve X of genus g.

    ``weights`` is a sequence of WeightPartition (or plain partitions).
    """
    weights = [w if isinstance(w, WeightPartition) else WeightPartition.of(w, ctx.r) for w in weights]
    ctx.check(*weights)
    n = len(weights)
    if g == 0 and n < 3:
        if any(not w.is_zero() for w in weights):
            raise InstabilityError(f"type (0, {n}) is unstable; use genus0_rank")
        return 1
    if g < 0 or (g, n) != (1, 0) and 2 * g - 2 + n <= 0:
        raise InstabilityError(f"type ({g}, {n}) is unstable")
    graph = canonical_graph(g, n)
    return graph_rank(graph, WeightAssignment.from_list(ctx, weights))


def anticanonical_weight(r: int) -> WeightPartition:
    """Twice the sum of the fundamental weights: (2(r-1), 2(r-2), ..., 2)."""
    return WeightPartition(tuple(2 * (r - j) for j in range(1, r)), r)


def anticanonical_section_rank(g: int, r: int, n: int) -> int:
    """Dimension of the anticanonical sections: the level-2r block with every
    point weighted by twice the sum of fundamental weights."""
    ctx = LevelContext(r, 2 * r)
    weights = [anticanonical_weight(r)] * n
    if g == 0 and n < 3:
        return genus0_rank(ctx, weights)
    return rank(g, ctx, weights)
