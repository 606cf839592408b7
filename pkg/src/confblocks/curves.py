"""Dual graphs of stable pointed curves.

A graph has vertices carrying a genus and a set of external legs (marked
points, ids 1..n) and edges given as pairs of vertex indices; an edge
``(u, v)`` is a node whose first branch sits on ``u`` and second on ``v``.
Loops ``(v, v)`` are allowed.  Legs may carry weight labels (partitions).

All operations return new graphs.  After a leg is removed the surviving legs
are renumbered 1..n keeping their relative order.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

from .errors import GraphError, InstabilityError, NonzeroWeightLeg, UnlabeledLeg
from .fusion import LevelContext, WeightPartition, dual


@dataclass(frozen=True)
class Vertex:
    genus: int
    legs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(sorted(self.legs)))


@dataclass(frozen=True)
class StableGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, int], ...] = ()
    labels: tuple[tuple[int, tuple[int, ...]], ...] = field(default=(), compare=True)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        labels = self.labels.items() if isinstance(self.labels, dict) else self.labels
        object.__setattr__(self, "labels", tuple(sorted((int(k), tuple(v)) for k, v in labels)))

    # -- basic counts --

    @property
    def legs(self) -> list[int]:
        return sorted(leg for v in self.vertices for leg in v.legs)

    @property
    def n(self) -> int:
        return sum(len(v.legs) for v in self.vertices)

    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + self.components()

    @property
    def genus(self) -> int:
        return sum(v.genus for v in self.vertices) + self.betti()

    @property
    def type(self) -> tuple[int, int]:
        return self.genus, self.n

    def valence(self, index: int) -> int:
        ends = sum((u == index) + (v == index) for u, v in self.edges)
        return len(self.vertices[index].legs) + ends

    def components(self) -> int:
        parent = list(range(len(self.vertices)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            parent[find(u)] = find(v)
        return len({find(x) for x in range(len(self.vertices))})

    def label_map(self) -> dict[int, tuple[int, ...]]:
        return dict(self.labels)

    def vertex_of(self, leg: int) -> int:
        for i, v in enumerate(self.vertices):
            if leg in v.legs:
                return i
        raise GraphError(f"leg {leg} is not in the graph")

    def with_labels(self, labels) -> "StableGraph":
        return StableGraph(self.vertices, self.edges, labels)

    # -- serialization --

    def to_json(self) -> dict:
        return {
            "vertices": [{"genus": v.genus, "legs": list(v.legs)} for v in self.vertices],
            "edges": [list(e) for e in self.edges],
            "labels": {str(k): list(p) for k, p in self.labels},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "StableGraph":
        try:
            vertices = tuple(Vertex(int(v["genus"]), tuple(int(x) for x in v.get("legs", ())))
                             for v in doc["vertices"])
            edges = tuple((int(a), int(b)) for a, b in doc.get("edges", ()))
            labels = {int(k): tuple(int(x) for x in p) for k, p in doc.get("labels", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph document: {exc!r}") from None
        return cls(vertices, edges, labels)

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def smooth_graph(g: int, n: int, labels=None) -> StableGraph:
    """The one-vertex graph of a smooth curve of genus g with n marked points."""
    return StableGraph((Vertex(g, tuple(range(1, n + 1))),), (), labels or {})


def _exceptional(graph: StableGraph) -> bool:
    # (g, n) = (1, 0): a smooth elliptic curve or a nodal rational curve
    if len(graph.vertices) != 1 or graph.n:
        return False
    v = graph.vertices[0]
    return (v.genus, graph.edges) in ((1, ()), (0, ((0, 0),)))


def validate(graph: StableGraph) -> str | None:
    """Return None if the graph is a valid stable graph, else a description
    of the first problem found.

    The unpointed genus-1 graphs (one genus-1 vertex, or one genus-0 vertex
    with a loop) are accepted although they fail the vertex inequality.
    """
    if not graph.vertices:
        return "graph has no vertices"
    seen = set()
    for i, v in enumerate(graph.vertices):
        if v.genus < 0:
            return f"negative genus at vertex {i}"
        for leg in v.legs:
            if leg in seen:
                return f"leg {leg} attached to more than one vertex"
            seen.add(leg)
    if seen and sorted(seen) != list(range(1, len(seen) + 1)):
        return f"leg ids must be 1..{len(seen)}, got {sorted(seen)}"
    for k, (u, v) in enumerate(graph.edges):
        if not (0 <= u < len(graph.vertices) and 0 <= v < len(graph.vertices)):
            return f"edge {k} refers to a missing vertex"
    for leg, _ in graph.labels:
        if leg not in seen:
            return f"label for missing leg {leg}"
    if graph.components() != 1:
        return "graph is disconnected"
    if _exceptional(graph):
        return None
    for i, v in enumerate(graph.vertices):
        if 2 * v.genus - 2 + graph.valence(i) <= 0:
            return f"stability violated at vertex {i}"
    return None


def check(graph: StableGraph) -> StableGraph:
    problem = validate(graph)
    if problem is not None:
        raise GraphError(problem)
    return graph


def _renumber(vertices, edges, labels):
    order = sorted(leg for v in vertices for leg in v.legs)
    new_id = {old: i + 1 for i, old in enumerate(order)}
    vertices = tuple(Vertex(v.genus, tuple(new_id[x] for x in v.legs)) for v in vertices)
    labels = {new_id[k]: p for k, p in labels.items() if k in new_id}
    return StableGraph(vertices, tuple(edges), labels)


def _drop_vertex(vertices, edges, index):
    vertices = [v for i, v in enumerate(vertices) if i != index]
    shift = lambda x: x - (x > index)  # noqa: E731
    return vertices, [(shift(u), shift(v)) for u, v in edges]


def forget_leg(graph: StableGraph, leg: int) -> StableGraph:
    """Forget a marked point carrying weight 0 (or no label), then stabilize."""
    check(graph)
    labels = graph.label_map()
    if leg in labels and any(labels[leg]):
        raise NonzeroWeightLeg(f"leg {leg} carries nonzero weight {labels[leg]}")
    vi = graph.vertex_of(leg)
    vertices = list(graph.vertices)
    edges = list(graph.edges)
    v = vertices[vi]
    vertices[vi] = Vertex(v.genus, tuple(x for x in v.legs if x != leg))
    labels.pop(leg, None)

    trial = StableGraph(tuple(vertices), tuple(edges))
    if v.genus == 0 and trial.valence(vi) == 2 and not _exceptional(trial):
        incident = [k for k, e in enumerate(edges) if vi in e]
        rest = vertices[vi].legs
        if len(incident) == 1 and edges[incident[0]] != (vi, vi) and len(rest) == 1:
            # bivalent vertex with one leg and one edge: slide the leg across
            u, w = edges[incident[0]]
            other = w if u == vi else u
            o = vertices[other]
            vertices[other] = Vertex(o.genus, o.legs + rest)
            del edges[incident[0]]
            vertices, edges = _drop_vertex(vertices, edges, vi)
        elif len(incident) == 2:
            # bivalent vertex between two edges: replace the path by one edge
            e1, e2 = (edges[k] for k in incident)
            a = e1[0] if e1[1] == vi else e1[1]
            b = e2[1] if e2[0] == vi else e2[0]
            edges = [e for k, e in enumerate(edges) if k not in incident] + [(a, b)]
            vertices, edges = _drop_vertex(vertices, edges, vi)
        else:
            raise InstabilityError(f"forgetting leg {leg} leaves an unstable curve "
                                   f"of type ({graph.genus}, {graph.n - 1})")
    out = _renumber(vertices, edges, labels)
    problem = validate(out)
    if problem is not None:
        raise InstabilityError(f"forgetting leg {leg}: {problem}")
    return out


def _check_glue_labels(labels, a, b):
    if a in labels and b in labels:
        la, lb = labels[a], labels[b]
        r = len(la) + 1
        if len(lb) != len(la) or dual(WeightPartition(la, r)).parts != tuple(lb):
            raise GraphError(f"legs {a} and {b} carry non-dual weights {la}, {lb}")
    elif (a in labels) != (b in labels):
        raise GraphError(f"legs {a} and {b}: only one is labeled")


def glue_nonseparating(graph: StableGraph, leg_a: int, leg_b: int) -> StableGraph:
    """Glue two legs of one graph into a node (raises the genus by one)."""
    check(graph)
    if leg_a == leg_b:
        raise GraphError("cannot glue a leg to itself")
    legs = set(graph.legs)
    if leg_a not in legs or leg_b not in legs:
        raise GraphError("both legs must lie on the graph; use glue_separating for two graphs")
    labels = graph.label_map()
    _check_glue_labels(labels, leg_a, leg_b)
    va, vb = graph.vertex_of(leg_a), graph.vertex_of(leg_b)
    vertices = [Vertex(v.genus, tuple(x for x in v.legs if x not in (leg_a, leg_b)))
                for v in graph.vertices]
    labels.pop(leg_a, None)
    labels.pop(leg_b, None)
    return check(_renumber(vertices, list(graph.edges) + [(va, vb)], labels))


def glue_separating(g1: StableGraph, g2: StableGraph, leg_a: int, leg_b: int) -> StableGraph:
    """Glue leg_a of g1 to leg_b of g2.

    Legs of g1 are numbered before those of g2 in the result.
    """
    if g1 is g2:
        raise GraphError("legs lie on the same graph; use glue_nonseparating")
    check(g1)
    check(g2)
    l1, l2 = g1.label_map(), g2.label_map()
    if (leg_a in l1) != (leg_b in l2):
        raise GraphError(f"legs {leg_a} and {leg_b}: only one is labeled")
    if leg_a in l1:
        la, lb = l1[leg_a], l2[leg_b]
        if dual(WeightPartition(la, len(la) + 1)).parts != tuple(lb):
            raise GraphError(f"legs carry non-dual weights {la}, {lb}")
    va, vb = g1.vertex_of(leg_a), g2.vertex_of(leg_b)
    offset = max(g1.legs, default=0)
    shift = len(g1.vertices)
    vertices = [Vertex(v.genus, tuple(x for x in v.legs if x != leg_a)) for v in g1.vertices]
    vertices += [Vertex(v.genus, tuple(x + offset for x in v.legs if x != leg_b)) for v in g2.vertices]
    edges = list(g1.edges) + [(u + shift, v + shift) for u, v in g2.edges] + [(va, vb + shift)]
    labels = {k: p for k, p in l1.items() if k != leg_a}
    labels.update({k + offset: p for k, p in l2.items() if k != leg_b})
    return check(_renumber(vertices, edges, labels))


def degenerate_to_trivalent(graph: StableGraph) -> StableGraph:
    """A maximal degeneration: all vertices genus 0 and trivalent.

    Each vertex of genus h with ports (legs, then edge ends) is replaced by a
    caterpillar over the port list ``a_1..a_h, b_1..b_h, legs, edge ends``,
    where each pair ``a_t, b_t`` becomes a node.  The unpointed genus-1
    graphs map to the one-vertex loop graph.
    """
    check(graph)
    if _exceptional(graph):
        return StableGraph((Vertex(0),), ((0, 0),), graph.labels)
    vertices: list[Vertex] = []
    edges: list[tuple[int, int]] = []
    # half-edge (edge index, end) -> new vertex index
    home: dict[tuple[int, int], int] = {}
    for i, v in enumerate(graph.vertices):
        ends = [(k, s) for k, e in enumerate(graph.edges) for s in (0, 1) if e[s] == i]
        h = v.genus
        ports = [("loop", t) for t in range(2 * h)] + [("leg", x) for x in v.legs] + [("end", he) for he in ends]
        m = len(ports)
        base = len(vertices)
        if m == 3:
            slots = [[0, 1, 2]]
        else:
            # caterpillar: first and last spine vertex take two ports each
            slots = [[0, 1]] + [[j] for j in range(2, m - 2)] + [[m - 2, m - 1]]
        where = {}
        for s, idx in enumerate(slots):
            for j in idx:
                where[j] = base + s
        for s in range(len(slots)):
            legs = tuple(ports[j][1] for j in slots[s] if ports[j][0] == "leg")
            vertices.append(Vertex(0, legs))
        for s in range(len(slots) - 1):
            edges.append((base + s, base + s + 1))
        for t in range(h):
            edges.append((where[t], where[h + t]))
        for j, (kind, payload) in enumerate(ports):
            if kind == "end":
                home[payload] = where[j]
    for k in range(len(graph.edges)):
        edges.append((home[(k, 0)], home[(k, 1)]))
    return check(StableGraph(tuple(vertices), tuple(edges), graph.labels))


# -- catalogs of stable graphs ---------------------------------------------------


def canonical_form(graph: StableGraph, forget_leg_ids: bool = False):
    """An isomorphism invariant key (brute force over vertex orderings).

    With ``forget_leg_ids`` the legs are treated as indistinguishable.
    """
    nv = len(graph.vertices)
    best = None
    for perm in itertools.permutations(range(nv)):
        pos = {old: new for new, old in enumerate(perm)}
        verts = tuple(
            (graph.vertices[old].genus,
             len(graph.vertices[old].legs) if forget_leg_ids else graph.vertices[old].legs)
            for old in perm
        )
        if best is not None and verts > best[0]:
            continue
        es = tuple(sorted(tuple(sorted((pos[u], pos[v]))) for u, v in graph.edges))
        key = (verts, es)
        if best is None or key < best:
            best = key
    return best


def _degenerations(graph: StableGraph):
    verts = list(graph.vertices)
    edges = list(graph.edges)
    for i, v in enumerate(verts):
        if v.genus >= 1:
            nv = verts.copy()
            nv[i] = Vertex(v.genus - 1, v.legs)
            yield StableGraph(tuple(nv), tuple(edges + [(i, i)]))
        ends = [(k, s) for k, e in enumerate(edges) for s in (0, 1) if e[s] == i]
        ports = [("leg", x) for x in v.legs] + [("end", he) for he in ends]
        new = len(verts)
        for mask in range(1 << len(ports)):
            side_b = [ports[j] for j in range(len(ports)) if mask >> j & 1]
            side_a = [ports[j] for j in range(len(ports)) if not mask >> j & 1]
            for ga in range(v.genus + 1):
                gb = v.genus - ga
                if 2 * ga - 2 + len(side_a) + 1 <= 0 or 2 * gb - 2 + len(side_b) + 1 <= 0:
                    continue
                nv = verts.copy()
                nv[i] = Vertex(ga, tuple(x for kind, x in side_a if kind == "leg"))
                nv.append(Vertex(gb, tuple(x for kind, x in side_b if kind == "leg")))
                ne = [list(e) for e in edges]
                for kind, he in side_b:
                    if kind == "end":
                        ne[he[0]][he[1]] = new
                ne.append([i, new])
                yield StableGraph(tuple(nv), tuple(tuple(e) for e in ne))


def enumerate_stable_graphs(g: int, n: int, forget_leg_ids: bool = False) -> list[StableGraph]:
    """All stable graphs of type (g, n) up to isomorphism.

    Includes the two unpointed genus-1 graphs for (1, 0).  With
    ``forget_leg_ids`` graphs differing only by a relabeling of legs are
    identified.
    """
    if (g, n) == (1, 0):
        return [smooth_graph(1, 0), StableGraph((Vertex(0),), ((0, 0),))]
    if 2 * g - 2 + n <= 0:
        raise InstabilityError(f"no stable curves of type ({g}, {n})")
    start = smooth_graph(g, n)
    seen = {canonical_form(start, forget_leg_ids): start}
    frontier = [start]
    while frontier:
        nxt = []
        for graph in frontier:
            for d in _degenerations(graph):
                key = canonical_form(d, forget_leg_ids)
                if key not in seen:
                    seen[key] = d
                    nxt.append(d)
        frontier = nxt
    return [seen[k] for k in sorted(seen)]


# -- weight assignments ----------------------------------------------------------


@dataclass(frozen=True)
class WeightAssignment:
    """Weights on the external legs, all within the level of ``ctx``."""

    ctx: LevelContext
    weights: tuple[tuple[int, WeightPartition], ...]

    def __post_init__(self):
        items = self.weights.items() if isinstance(self.weights, dict) else self.weights
        ws = tuple(sorted((int(k), w) for k, w in items))
        object.__setattr__(self, "weights", ws)
        self.ctx.check(*(w for _, w in ws))

    def as_dict(self) -> dict[int, WeightPartition]:
        return dict(self.weights)

    @classmethod
    def from_list(cls, ctx: LevelContext, weights) -> "WeightAssignment":
        ws = [w if isinstance(w, WeightPartition) else WeightPartition.of(w, ctx.r) for w in weights]
        return cls(ctx, {i + 1: w for i, w in enumerate(ws)})

    @classmethod
    def from_graph(cls, graph: StableGraph, ctx: LevelContext) -> "WeightAssignment":
        labels = graph.label_map()
        missing = [leg for leg in graph.legs if leg not in labels]
        if missing:
            raise UnlabeledLeg(f"legs {missing} carry no weight")
        return cls(ctx, {k: WeightPartition.of(p, ctx.r) for k, p in labels.items()})
