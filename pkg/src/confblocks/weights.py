"""Parabolic weights: slopes, walls, chambers and the codimension bound.

Everything here is exact rational arithmetic (``fractions.Fraction``).
A weight for n points and rank r is stored as n tuples ``(a_1, ..., a_{r-1})``;
the last entry ``a_r = 0`` is implicit.  Coordinates of weight space are
flattened point-major: index ``i * (r - 1) + (j - 1)`` for ``a_j^i``.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import CannotPerturb, NonGeneralWeight, NotDestabilizing, OutOfScope, WeightError


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class ParabolicWeight:
    """Per-point decreasing weight sequences in [0, 1).

    With ``partial=False`` each sequence is strictly decreasing with
    ``1 > a_1`` and ``a_{r-1} > 0``.  Partial weights allow ties (degenerate
    flags) and zeros; :meth:`degeneracies` lists them.
    """

    r: int
    points: tuple[tuple[Fraction, ...], ...]
    partial: bool = False

    def __post_init__(self):
        pts = tuple(tuple(_frac(x) for x in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if self.r < 2:
            raise WeightError(f"rank must be >= 2, got {self.r}")
        for i, p in enumerate(pts):
            if len(p) != self.r - 1:
                raise WeightError(f"point {i + 1} needs {self.r - 1} weights, got {len(p)}")
            seq = (Fraction(1),) + p + (Fraction(0),)
            if self.partial:
                ok = seq[0] > seq[1] and all(a >= b for a, b in zip(seq[1:], seq[2:]))
            else:
                ok = all(a > b for a, b in zip(seq, seq[1:]))
            if not ok:
                kind = "non-increasing" if self.partial else "strictly decreasing"
                raise WeightError(f"weights at point {i + 1} are not {kind} in [0, 1): {p}")

    @property
    def n(self) -> int:
        return len(self.points)

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(x for p in self.points for x in p)

    def value(self, i: int, j: int) -> Fraction:
        """a_j^i with 1-based j; a_r^i = 0."""
        return Fraction(0) if j == self.r else self.points[i][j - 1]

    def degeneracies(self) -> list[tuple[int, int]]:
        """Pairs (i, j), 1-based, with a_j^i = a_{j+1}^i (j = r - 1 compares with a_r = 0)."""
        out = []
        for i, p in enumerate(self.points):
            seq = p + (Fraction(0),)
            out += [(i + 1, j + 1) for j in range(self.r - 1) if seq[j] == seq[j + 1]]
        return out

    def to_json(self) -> list[list[str]]:
        return [[_frac_str(x) for x in p] for p in self.points]

    @classmethod
    def from_json(cls, doc, r: int | None = None, partial: bool = False) -> "ParabolicWeight":
        if isinstance(doc, dict):
            r = doc.get("r", r)
            partial = doc.get("partial", partial)
            doc = doc.get("points", doc.get("weights"))
        try:
            points = tuple(tuple(_frac(x) for x in p) for p in doc)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise WeightError(f"malformed weight document: {exc}") from None
        if r is None:
            if not points:
                raise WeightError("rank is required for a weight with no points")
            r = len(points[0]) + 1
        return cls(r, points, partial)


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def pdeg(deg: int, a: ParabolicWeight) -> Fraction:
    """Parabolic degree: deg plus all weights."""
    return deg + sum(a.flat(), Fraction(0))


def slope(deg: int, a: ParabolicWeight) -> Fraction:
    return pdeg(deg, a) / a.r


def _check_subsets(J, size, r, n):
    if len(J) != n:
        raise WeightError(f"need {n} index subsets, got {len(J)}")
    out = []
    for sub in J:
        sub = tuple(sorted(int(x) for x in sub))
        if len(sub) != size or len(set(sub)) != size or any(not 1 <= x <= r for x in sub):
            raise WeightError(f"subset {sub} is not a {size}-subset of 1..{r}")
        out.append(sub)
    return tuple(out)


def induced_weight(a: ParabolicWeight, J) -> tuple[tuple[Fraction, ...], ...]:
    """Weights of the induced flag on a subbundle meeting the flag at positions J."""
    if not J:
        return ()
    size = len(J[0])
    J = _check_subsets(J, size, a.r, a.n)
    return tuple(tuple(a.value(i, j) for j in sub) for i, sub in enumerate(J))


# -- walls ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WallSpec:
    s: int
    d: int
    J: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(tuple(sorted(x)) for x in self.J))

    def to_json(self) -> dict:
        return {"s": self.s, "d": self.d, "J": [list(x) for x in self.J]}


def _check_wall(w: WallSpec, r: int, n: int):
    if not 1 <= w.s <= r - 1:
        raise WeightError(f"wall rank s={w.s} outside 1..{r - 1}")
    _check_subsets(w.J, w.s, r, n)


def wall_residual(a: ParabolicWeight, w: WallSpec) -> Fraction:
    """r (d + sum_J a) - s (sum a); zero exactly on the wall."""
    _check_wall(w, a.r, a.n)
    sub = sum((a.value(i, j) for i, Ji in enumerate(w.J) for j in Ji), Fraction(0))
    return a.r * (w.d + sub) - w.s * sum(a.flat(), Fraction(0))


def wall_linear_form(w: WallSpec, r: int, n: int) -> tuple[tuple[int, ...], int]:
    """The residual as (integer coefficients on flat coordinates, constant)."""
    coeffs = []
    for i in range(n):
        for j in range(1, r):
            coeffs.append(r * (j in w.J[i]) - w.s)
    return tuple(coeffs), r * w.d


def _normalize(coeffs, const):
    g = 0
    for c in coeffs + (const,):
        g = math.gcd(g, c)
    lead = next(c for c in coeffs if c)
    if lead < 0:
        g = -g
    return tuple(c // g for c in coeffs), const // g


@dataclass(frozen=True)
class Wall:
    """A geometric wall: normalized equation ``coeffs . a + const = 0`` and
    every (s, d, J) producing it."""

    coeffs: tuple[int, ...]
    const: int
    specs: tuple[WallSpec, ...] = field(compare=False)

    @property
    def spec(self) -> WallSpec:
        return self.specs[0]

    def evaluate(self, a: ParabolicWeight) -> Fraction:
        return sum((c * x for c, x in zip(self.coeffs, a.flat())), Fraction(self.const))

    def to_json(self) -> dict:
        return {
            "equation": {"coeffs": list(self.coeffs), "const": self.const},
            **self.spec.to_json(),
            "generators": [s.to_json() for s in self.specs],
        }


def enumerate_walls(r: int, n: int) -> list[Wall]:
    """Every wall meeting the open weight polytope, merged by equation.

    For fixed (s, J) the residual is r*d plus a linear form L; L attains its
    extremes over the closed polytope at vertices, which per point are
    (1, .., 1, 0, .., 0).  The wall meets the interior iff
    min L < -r d < max L, which bounds d.
    """
    return list(_enumerate_walls(r, n))


@lru_cache(maxsize=None)
def _enumerate_walls(r: int, n: int) -> tuple[Wall, ...]:
    if r < 2 or n < 0:
        raise WeightError(f"invalid (r, n) = ({r}, {n})")
    found: dict[tuple, list[WallSpec]] = {}
    for s in range(1, r):
        subsets = list(itertools.combinations(range(1, r + 1), s))
        for J in itertools.product(subsets, repeat=n):
            spec0 = WallSpec(s, 0, J)
            coeffs, _ = wall_linear_form(spec0, r, n)
            lo = hi = 0
            for i in range(n):
                c = coeffs[i * (r - 1):(i + 1) * (r - 1)]
                partial = [sum(c[:k]) for k in range(r)]
                lo += min(partial)
                hi += max(partial)
            # need lo < -r d < hi
            for d in range(math.floor(-hi / r), math.ceil(-lo / r) + 1):
                if lo < -r * d < hi:
                    spec = WallSpec(s, d, J)
                    key = _normalize(coeffs, r * d)
                    found.setdefault(key, []).append(spec)
    walls = [Wall(k[0], k[1], tuple(v)) for k, v in found.items()]
    walls.sort(key=lambda w: (w.coeffs, w.const))
    return tuple(walls)


def is_general(a: ParabolicWeight) -> bool:
    """True when the weight lies on no wall."""
    if a.partial:
        raise WeightError("generality is defined for full-flag weights")
    return all(w.evaluate(a) != 0 for w in _enumerate_walls(a.r, a.n))


def weight_ac(r: int, n: int) -> ParabolicWeight:
    """The central weight (r-1, r-2, ..., 1)/r at every point."""
    return ParabolicWeight(r, tuple(tuple(Fraction(r - j, r) for j in range(1, r)) for _ in range(n)))


def _primes():
    found = []
    k = 2
    while True:
        if all(k % p for p in found if p * p <= k):
            found.append(k)
            yield k
        k += 1


def boundary_distance(a: ParabolicWeight) -> Fraction:
    """A lower bound for the sup-norm distance to the boundary of the polytope."""
    dist = Fraction(1)
    for p in a.points:
        seq = (Fraction(1),) + p + (Fraction(0),)
        for k in range(len(seq) - 1):
            gap = seq[k] - seq[k + 1]
            # the two end constraints involve one coordinate, the rest two
            dist = min(dist, gap if k in (0, len(seq) - 2) else gap / 2)
    return dist


def perturb_general(a: ParabolicWeight, eps, attempts: int = 64) -> ParabolicWeight:
    """Move ``a`` off every wall by offsets eps/p_k (distinct primes p_k).

    Coordinates get primes 2, 3, 5, ... in flat order; if that lands on a
    wall the prime sequence is shifted by one and retried.
    """
    eps = _frac(eps)
    if eps <= 0:
        raise CannotPerturb("eps must be positive")
    if a.n and eps >= boundary_distance(a):
        raise CannotPerturb(f"eps={eps} reaches the boundary of the weight polytope")
    m = a.n * (a.r - 1)
    primes = list(itertools.islice(_primes(), m + attempts))
    for shift in range(attempts):
        offsets = iter(primes[shift:shift + m])
        pts = tuple(tuple(x + eps / next(offsets) for x in p) for p in a.points)
        b = ParabolicWeight(a.r, pts)
        if is_general(b):
            return b
    raise CannotPerturb(f"no general weight found within {eps} of {a.to_json()}")


def near_central(a: ParabolicWeight) -> bool:
    """True when ``a`` is on the same side as a_c of every wall not through a_c,
    i.e. a lies in a chamber whose closure contains a_c."""
    ac = weight_ac(a.r, a.n)
    for w in _enumerate_walls(a.r, a.n):
        ref = w.evaluate(ac)
        if ref and (w.evaluate(a) > 0) != (ref > 0):
            return False
    return True


# -- chambers ------------------------------------------------------------------------


def polytope_constraints(r: int, n: int):
    """Strict inequalities ``c . a + const > 0`` cutting out the open polytope."""
    m = n * (r - 1)
    cons = []
    for i in range(n):
        base = i * (r - 1)
        for j in range(r):
            c = [0] * m
            const = 0
            if j == 0:
                c[base] = -1
                const = 1  # 1 - a_1 > 0
            elif j == r - 1:
                c[base + r - 2] = 1  # a_{r-1} > 0
            else:
                c[base + j - 1] = 1
                c[base + j] = -1  # a_j - a_{j+1} > 0
            cons.append((tuple(Fraction(x) for x in c), Fraction(const)))
    return cons


def _scale(con):
    c, k = con
    lead = next((abs(x) for x in c if x), None)
    if lead is None:
        return c, k
    return tuple(x / lead for x in c), k / lead


def strictly_feasible(constraints, nvars: int) -> bool:
    """Decide whether ``{x : c . x + const > 0 for all}`` is nonempty.

    Fourier-Motzkin elimination; exact for strict systems.
    """
    cons = {_scale(c) for c in constraints}
    for var in range(nvars):
        pos, neg, keep = [], [], []
        for c, k in cons:
            (pos if c[var] > 0 else neg if c[var] < 0 else keep).append((c, k))
        for pc, pk in pos:
            for nc, nk in neg:
                # both are scaled so that their var coefficients are +-1 relative
                fp, fn = 1 / pc[var], -1 / nc[var]
                keep.append((tuple(fp * x + fn * y for x, y in zip(pc, nc)), fp * pk + fn * nk))
        cons = set()
        for c, k in keep:
            if not any(c):
                if k <= 0:
                    return False
                continue
            cons.add(_scale((c, k)))
    return all(k > 0 for _, k in cons)


@dataclass(frozen=True)
class Chamber:
    signs: tuple[int, ...]  # +1/-1 per wall, in enumerate_walls order


def chambers(r: int, n: int) -> list[Chamber]:
    """Exact chambers of the wall arrangement inside the open polytope."""
    walls = _enumerate_walls(r, n)
    m = n * (r - 1)
    regions = [((), polytope_constraints(r, n))]
    for w in walls:
        plus = (tuple(Fraction(x) for x in w.coeffs), Fraction(w.const))
        minus = (tuple(-x for x in plus[0]), -plus[1])
        nxt = []
        for signs, cons in regions:
            for sign, half in ((1, plus), (-1, minus)):
                if strictly_feasible(cons + [half], m):
                    nxt.append((signs + (sign,), cons + [half]))
        regions = nxt
    return [Chamber(s) for s, _ in regions]


def count_chambers(r: int, n: int) -> int:
    return len(chambers(r, n))


def chamber_adjacency(r: int, n: int) -> list[tuple[int, int, int]]:
    """Triples (chamber, chamber, wall index) for chambers sharing a wall facet."""
    cs = chambers(r, n)
    out = []
    for x, y in itertools.combinations(range(len(cs)), 2):
        diff = [k for k, (p, q) in enumerate(zip(cs[x].signs, cs[y].signs)) if p != q]
        if len(diff) == 1:
            out.append((x, y, diff[0]))
    return out


def random_weight(r: int, n: int, rng: random.Random, denominator: int = 10**6) -> ParabolicWeight:
    pts = []
    for _ in range(n):
        picks = sorted(rng.sample(range(1, denominator), r - 1), reverse=True)
        pts.append(tuple(Fraction(x, denominator) for x in picks))
    return ParabolicWeight(r, tuple(pts))


def sample_sign_vectors(r: int, n: int, samples: int = 10_000, seed: int = 0) -> set[tuple[int, ...]]:
    """Sign vectors (over enumerate_walls) realized by random rational points."""
    rng = random.Random(seed)
    walls = _enumerate_walls(r, n)
    seen = set()
    for _ in range(samples):
        a = random_weight(r, n, rng)
        vals = [w.evaluate(a) for w in walls]
        if all(vals):
            seen.add(tuple(1 if v > 0 else -1 for v in vals))
    return seen


# -- destabilizing data and dominance -------------------------------------------------


@dataclass(frozen=True)
class DestabilizingDatum:
    r1: int
    d1: int
    J: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(tuple(sorted(x)) for x in self.J))

    def to_json(self) -> dict:
        return {"r1": self.r1, "d1": self.d1, "J": [list(x) for x in self.J]}


def schubert_codim(r: int, r1: int, Ji) -> int:
    """Codimension of the Schubert cell of flags meeting an r1-subspace at positions Ji."""
    return sum(r - r1 - jj + j for j, jj in enumerate(sorted(Ji), start=1))


def destabilizing_rhs(a: ParabolicWeight, r1: int, J) -> Fraction:
    """The bound that r*d1 must strictly exceed."""
    r = a.r
    total = Fraction(0)
    for i, Ji in enumerate(J):
        total += r1 * sum(a.points[i], Fraction(0)) - r * sum((a.value(i, j) for j in Ji), Fraction(0))
    return total


def codim_lower_bound(g: int, r: int, n: int, a: ParabolicWeight, datum: DestabilizingDatum) -> int:
    """Lower bound for the codimension of the unstable stratum of ``datum``."""
    if a.r != r or a.n != n:
        raise WeightError(f"weight is for (r, n) = ({a.r}, {a.n}), expected ({r}, {n})")
    if not 1 <= datum.r1 <= r - 1:
        raise WeightError(f"r1={datum.r1} outside 1..{r - 1}")
    J = _check_subsets(datum.J, datum.r1, r, n)
    if not r * datum.d1 > destabilizing_rhs(a, datum.r1, J):
        raise NotDestabilizing(f"datum {datum.to_json()} does not destabilize")
    r1, r2 = datum.r1, r - datum.r1
    return r1 * r2 * (g - 1) + sum(schubert_codim(r, r1, Ji) for Ji in J) + r * datum.d1


def destabilizing_data(a: ParabolicWeight, d_range=None):
    """Yield (datum, bound-ready) for every r1 and J; d1 ranges over
    ``d_range`` if given, else only the smallest admissible d1."""
    r, n = a.r, a.n
    for r1 in range(1, r):
        subsets = list(itertools.combinations(range(1, r + 1), r1))
        for J in itertools.product(subsets, repeat=n):
            rhs = destabilizing_rhs(a, r1, J)
            dmin = math.floor(rhs / r) + 1
            ds = [dmin] if d_range is None else [d for d in d_range if d >= dmin]
            for d1 in ds:
                yield DestabilizingDatum(r1, d1, J)


def minimal_codim_bound(g: int, a: ParabolicWeight):
    """Minimum of codim_lower_bound over all destabilizing data.

    The bound is increasing in d1, so only the least admissible d1 matters.
    """
    best = None
    for datum in destabilizing_data(a):
        value = codim_lower_bound(g, a.r, a.n, a, datum)
        if best is None or value < best[0]:
            best = (value, datum)
    return best


class Verdict(str, enum.Enum):
    YES = "yes"
    YES_BY_THEOREM = "yes-by-theorem"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Dominance:
    verdict: Verdict
    reason: str
    bound: int | None = None
    datum: DestabilizingDatum | None = None

    def __str__(self):
        return f"{self.verdict.value}: {self.reason}"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict.value, "reason": self.reason, "summary": str(self)}
        if self.bound is not None:
            out["min_codim_bound"] = str(self.bound)
        if self.datum is not None:
            out["datum"] = self.datum.to_json()
        return out


def is_dominant(g: int, r: int, n: int, a: ParabolicWeight | None = None) -> Dominance:
    """Decide whether the unstable locus has codimension at least two.

    The answer is one-sided: INCONCLUSIVE means neither a theorem nor the
    minimized lower bound certifies codimension two.
    """
    if a is None:
        a = ParabolicWeight(r, ())
    if a.r != r or a.n != n:
        raise WeightError(f"weight is for (r, n) = ({a.r}, {a.n}), expected ({r}, {n})")
    if not is_general(a):
        raise NonGeneralWeight("weight lies on a wall")
    if g >= 2:
        return Dominance(Verdict.YES_BY_THEOREM, "(r-1)(g-1)+1")
    if g == 1 and n > r and near_central(a):
        return Dominance(Verdict.YES_BY_THEOREM, "g=1, n>r, weight near a_c")
    best = minimal_codim_bound(g, a)
    if best is None:
        return Dominance(Verdict.INCONCLUSIVE, "no destabilizing data")
    value, datum = best
    if value >= 2:
        return Dominance(Verdict.YES, "minimized codimension bound", value, datum)
    return Dominance(Verdict.INCONCLUSIVE, "minimized codimension bound below 2", value, datum)


def is_effective(g: int, a: ParabolicWeight | None = None) -> bool:
    """Every weight is effective in positive genus."""
    if g >= 1:
        return True
    raise OutOfScope("effectivity in genus 0 depends on the weight; not computed here")
