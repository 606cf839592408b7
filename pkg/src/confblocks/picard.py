"""Picard lattice of the moduli of parabolic bundles.

A class is ``(level, d)`` with ``d[i][j-1]`` the coefficient of the
generator attached to point i and fundamental weight j.  Weights are
recovered by partial sums ``lambda_j = d_j + ... + d_{r-1}``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .curves import StableGraph, WeightAssignment, check
from .errors import InputError, MismatchedType, NotBig, NotOnBoundary
from .fusion import LevelContext, WeightPartition
from .ranks import engine_for
from .weights import ParabolicWeight


@dataclass(frozen=True)
class DivisorClass:
    r: int
    level: int
    d: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        try:
            d = tuple(tuple(int(x) for x in row) for row in self.d)
            level = int(self.level)
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed divisor: {exc}") from None
        if self.r < 2:
            raise InputError(f"rank must be >= 2, got {self.r}")
        for i, row in enumerate(d):
            if len(row) != self.r - 1:
                raise InputError(f"point {i + 1} needs {self.r - 1} coefficients, got {len(row)}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "level", level)

    @property
    def n(self) -> int:
        return len(self.d)

    def coordinates(self) -> tuple[int, ...]:
        return (self.level,) + tuple(x for row in self.d for x in row)

    @classmethod
    def from_coordinates(cls, r: int, coords) -> "DivisorClass":
        coords = list(coords)
        rows = tuple(tuple(coords[1 + k:1 + k + r - 1]) for k in range(0, len(coords) - 1, r - 1))
        return cls(r, coords[0], rows)

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        if (self.r, self.n) != (other.r, other.n):
            raise MismatchedType("divisors live on different lattices")
        return DivisorClass.from_coordinates(self.r, [x + y for x, y in zip(self.coordinates(), other.coordinates())])

    def __neg__(self) -> "DivisorClass":
        return DivisorClass.from_coordinates(self.r, [-x for x in self.coordinates()])

    def __mul__(self, m: int) -> "DivisorClass":
        return DivisorClass.from_coordinates(self.r, [m * x for x in self.coordinates()])

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"r": self.r, "level": self.level, "d": [list(row) for row in self.d]}

    @classmethod
    def from_json(cls, doc: dict, r: int | None = None) -> "DivisorClass":
        if not isinstance(doc, dict) or "level" not in doc:
            raise InputError("divisor document needs 'level' and 'd'")
        r = doc.get("r", r)
        d = doc.get("d", [])
        if r is None:
            if not d:
                raise InputError("rank is required for a divisor with no points")
            r = len(d[0]) + 1
        return cls(int(r), doc["level"], d)


@dataclass(frozen=True)
class LevelWeights:
    level: int
    weights: tuple[tuple[int, ...], ...]
    dominant: bool  # False when some d is negative, so weights need not be partitions

    def partitions(self, r: int) -> list[WeightPartition]:
        if not self.dominant:
            raise InputError("class has negative coefficients; weights are not dominant")
        return [WeightPartition(w, r) for w in self.weights]


def divisor_to_level_weights(D: DivisorClass) -> LevelWeights:
    weights = tuple(tuple(sum(row[j:]) for j in range(len(row))) for row in D.d)
    dominant = all(x >= 0 for row in D.d for x in row)
    return LevelWeights(D.level, weights, dominant)


def from_level_weights(r: int, level: int, weights) -> DivisorClass:
    rows = []
    for w in weights:
        parts = w.parts if isinstance(w, WeightPartition) else tuple(w)
        if len(parts) != r - 1:
            raise InputError(f"weight {parts} needs {r - 1} parts")
        seq = tuple(parts) + (0,)
        rows.append(tuple(seq[j] - seq[j + 1] for j in range(r - 1)))
    return DivisorClass(r, level, tuple(rows))


def weight_sum(D: DivisorClass) -> int:
    """Sum over points of |lambda^i|, i.e. sum of j * d_j^i."""
    return sum(j * x for row in D.d for j, x in enumerate(row, start=1))


def descends(D: DivisorClass, r: int | None = None) -> bool:
    r = D.r if r is None else r
    return weight_sum(D) % r == 0


def descent_index(r: int, n: int) -> int:
    """Index of the descending sublattice: the order of the subgroup of Z/r
    generated by the residues of the standard generators."""
    g = r
    for gen in lattice_generators(r, n):
        g = math.gcd(g, weight_sum(gen) % r)
    return r // g


def lattice_generators(r: int, n: int) -> list[DivisorClass]:
    dim = 1 + n * (r - 1)
    return [DivisorClass.from_coordinates(r, [int(k == e) for k in range(dim)]) for e in range(dim)]


def anticanonical_class(r: int, n: int) -> DivisorClass:
    return DivisorClass(r, 2 * r, tuple((2,) * (r - 1) for _ in range(n)))


def in_cone_E(D: DivisorClass) -> str:
    """'outside', 'boundary' or 'interior' for the cone
    level >= 0, d >= 0, sum_j d_j^i <= level."""
    slacks = [D.level] + [x for row in D.d for x in row] + [D.level - sum(row) for row in D.d]
    if any(s < 0 for s in slacks):
        return "outside"
    if any(s == 0 for s in slacks):
        return "boundary"
    return "interior"


def projective_model_weight(D: DivisorClass) -> ParabolicWeight:
    """The (possibly partial) weight lambda/level whose moduli space is Proj of the section ring of D.

    Vanishing d_j^i only degenerates the flag and is accepted; the class is
    rejected when the level vanishes, when some lambda_1^i reaches the level,
    or when it lies outside the cone.
    """
    status = in_cone_E(D)
    if status == "outside":
        raise NotBig("class lies outside the effective cone")
    lw = divisor_to_level_weights(D)
    if D.level == 0:
        raise NotBig("level zero class is not big")
    for i, row in enumerate(D.d):
        if sum(row) == D.level:
            raise NotBig(f"lambda_1 equals the level at point {i + 1}; use boundary_model_descriptor")
    pts = tuple(tuple(Fraction(x, D.level) for x in w) for w in lw.weights)
    return ParabolicWeight(D.r, pts, partial=True)


def boundary_model_descriptor(D: DivisorClass) -> dict:
    """Describe the model attached to a class on the boundary of the cone."""
    if in_cone_E(D) != "boundary":
        raise NotOnBoundary(f"class is {in_cone_E(D)}, not on the boundary")
    if all(x == 0 for x in D.coordinates()):
        return {"facets": [{"type": "apex"}], "twist": [], "weight": None}
    facets = []
    if D.level == 0:
        facets.append({"type": "level_zero"})
    for i, row in enumerate(D.d, start=1):
        for j, x in enumerate(row, start=1):
            if x == 0:
                facets.append({"type": "d_zero", "point": i, "j": j, "effect": "forget flag step"})
    twist = []
    weight = None
    lw = divisor_to_level_weights(D)
    if D.level > 0:
        weight = []
        for i, (row, lam) in enumerate(zip(D.d, lw.weights), start=1):
            if sum(row) == D.level:
                facets.append({"type": "sum_equals_level", "point": i})
                twist.append(i)
                weight.append([_fs(Fraction(x - lam[-1], D.level)) for x in lam])
            else:
                weight.append([_fs(Fraction(x, D.level)) for x in lam])
    return {
        "facets": facets,
        "twist": [f"O(-p^{k})" for k in twist],
        "weight": weight,
    }


def _fs(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# -- lattice subgroups ---------------------------------------------------------------


def integer_kernel(rows: list[list[int]], dim: int) -> list[tuple[int, ...]]:
    """A basis of {x in Z^dim : rows . x = 0}.

    Integer column operations bring the matrix to column echelon form while
    tracking a unimodular transform; the transform's columns over zero
    columns span the kernel, and unimodularity makes that span saturated.
    """
    A = [list(r) for r in rows]
    U = [[int(i == j) for j in range(dim)] for i in range(dim)]

    def colop(dst, src, factor):  # col dst -= factor * col src
        for M in (A, U):
            for row in M:
                row[dst] -= factor * row[src]

    def swap(a, b):
        for M in (A, U):
            for row in M:
                row[a], row[b] = row[b], row[a]

    pivot = 0
    for row in range(len(A)):
        if pivot == dim:
            break
        while True:
            nz = [c for c in range(pivot, dim) if A[row][c]]
            if not nz:
                break
            c = min(nz, key=lambda c: abs(A[row][c]))
            swap(pivot, c)
            for other in range(pivot + 1, dim):
                if A[row][other]:
                    colop(other, pivot, A[row][other] // A[row][pivot])
            if all(A[row][c] == 0 for c in range(pivot + 1, dim)):
                pivot += 1
                break
    basis = [tuple(U[i][c] for i in range(dim)) for c in range(pivot, dim)]
    return basis


@dataclass(frozen=True)
class LatticeSubgroup:
    """Solutions of integer linear equations on a coordinate lattice Z^dim."""

    dim: int
    equations: tuple[tuple[int, ...], ...]

    def contains(self, x) -> bool:
        return all(sum(a * b for a, b in zip(eq, x)) == 0 for eq in self.equations)

    def basis(self) -> list[tuple[int, ...]]:
        return integer_kernel([list(e) for e in self.equations], self.dim)

    def rank(self) -> int:
        return len(self.basis())

    def to_json(self) -> dict:
        return {"dim": self.dim, "equations": [list(e) for e in self.equations],
                "basis": [list(b) for b in self.basis()]}


def subgroup_for_weight(a: ParabolicWeight) -> LatticeSubgroup:
    """Equations a_j^i * level = lambda_j^i(d) on (level, d)."""
    r, n = a.r, a.n
    dim = 1 + n * (r - 1)
    eqs = []
    for i, p in enumerate(a.points):
        for j, x in enumerate(p):
            row = [0] * dim
            row[0] = x.numerator
            for k in range(j, r - 1):
                row[1 + i * (r - 1) + k] = -x.denominator
            eqs.append(tuple(row))
    return LatticeSubgroup(dim, tuple(eqs))


def ray_generator(a: ParabolicWeight) -> DivisorClass:
    """The generator of the ray with least positive level."""
    level = 1
    for x in a.flat():
        level = level * x.denominator // math.gcd(level, x.denominator)
    lam = [[int(x * level) for x in p] for p in a.points]
    return from_level_weights(a.r, level, lam)


def subgroup_K_nodal(r: int, sizes, nodes=()) -> LatticeSubgroup:
    """Subgroup of the product of component lattices with equal levels and
    dual weights at each node.

    ``sizes`` lists the number of points on each component; ``nodes`` lists
    pairs ``((c, p), (c', q))`` of (component, 1-based point) glued together.
    """
    sizes = list(sizes)
    offsets = []
    total = 0
    for s in sizes:
        offsets.append(total)
        total += 1 + s * (r - 1)
    eqs = []
    for c in range(1, len(sizes)):
        row = [0] * total
        row[offsets[0]] = 1
        row[offsets[c]] = -1
        eqs.append(tuple(row))
    for (c1, p), (c2, q) in nodes:
        for cp, pt in ((c1, p), (c2, q)):
            if not 0 <= cp < len(sizes) or not 1 <= pt <= sizes[cp]:
                raise InputError(f"node endpoint ({cp}, {pt}) does not exist")
        for j in range(r - 1):
            # dual reverses the Dynkin coordinates
            row = [0] * total
            row[offsets[c2] + 1 + (q - 1) * (r - 1) + j] += 1
            row[offsets[c1] + 1 + (p - 1) * (r - 1) + (r - 2 - j)] -= 1
            eqs.append(tuple(row))
    return LatticeSubgroup(total, tuple(eqs))


def subgroup_for_graph(graph: StableGraph, r: int) -> LatticeSubgroup:
    """subgroup_K_nodal for the normalization of a nodal curve.

    Points on vertex v are its legs (in order) followed by its edge ends.
    """
    check(graph)
    ports = [list(("leg", leg) for leg in v.legs) for v in graph.vertices]
    nodes = []
    for k, (u, v) in enumerate(graph.edges):
        ports[u].append(("edge", k, 0))
        ports[v].append(("edge", k, 1))
        nodes.append(((u, len(ports[u])), (v, len(ports[v]))))
    return subgroup_K_nodal(r, [len(p) for p in ports], nodes)


# -- Hilbert functions ---------------------------------------------------------------


def hilbert_function(graph: StableGraph, a: ParabolicWeight, M: int, parallel: bool = False) -> list[int]:
    """Graded dimensions h_m, m = 0..M, along the ray of ``a``."""
    check(graph)
    if graph.n != a.n:
        raise MismatchedType(f"graph has {graph.n} legs but the weight has {a.n} points")
    if M < 0:
        raise InputError("M must be non-negative")
    gen = ray_generator(a)
    lam = divisor_to_level_weights(gen).weights
    legs = graph.legs
    bare = StableGraph(graph.vertices, graph.edges)

    def degree(m: int) -> int:
        ctx = LevelContext(a.r, m * gen.level)
        weights = [WeightPartition(tuple(m * x for x in w), a.r) for w in lam]
        assignment = WeightAssignment(ctx, tuple(zip(legs, weights)))
        return engine_for(ctx).graph_rank(bare, assignment)

    if parallel:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(degree, range(M + 1)))
    return [degree(m) for m in range(M + 1)]


def flatness_check(graphs, a: ParabolicWeight, M: int) -> bool:
    graphs = list(graphs)
    if not graphs:
        raise InputError("no graphs given")
    types = {g.type for g in graphs}
    if len(types) > 1:
        raise MismatchedType(f"graphs have different types {sorted(types)}")
    vectors = {tuple(hilbert_function(g, a, M)) for g in graphs}
    return len(vectors) == 1
