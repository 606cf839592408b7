"""Level-truncated fusion for sl_r.

Weights are stored as partitions with exactly ``r - 1`` parts.  Classical
tensor products are computed with the Racah-Speiser (Brauer-Klimyk) rule over
Gelfand-Tsetlin characters; level truncation uses the Kac-Walton folding of
the shifted affine Weyl group action at level ``level + r``.
"""

from __future__ import annotations

import itertools
import json
import threading
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .errors import InputError, LevelViolation

FORMAT_VERSION = 1


@dataclass(frozen=True, order=True)
class WeightPartition:
    """A dominant integral sl_r weight, as a partition with r - 1 parts."""

    parts: tuple[int, ...]
    r: int

    def __post_init__(self):
        if self.r < 2:
            raise InputError(f"rank must be >= 2, got {self.r}")
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if len(parts) != self.r - 1:
            raise InputError(f"sl_{self.r} weight needs {self.r - 1} parts, got {parts}")
        if any(p < 0 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise InputError(f"not a partition: {parts}")

    @classmethod
    def of(cls, parts, r: int) -> "WeightPartition":
        """Build from a possibly short partition, padding with zeros.

        A partition with r rows is normalized by stripping full columns.
        """
        parts = list(parts)
        if len(parts) == r:
            parts = [p - parts[-1] for p in parts[:-1]]
        if len(parts) > r - 1:
            raise InputError(f"partition {tuple(parts)} has too many rows for sl_{r}")
        return cls(tuple(parts) + (0,) * (r - 1 - len(parts)), r)

    @classmethod
    def zero(cls, r: int) -> "WeightPartition":
        return cls((0,) * (r - 1), r)

    def theta_pairing(self) -> int:
        return self.parts[0] if self.parts else 0

    def size(self) -> int:
        return sum(self.parts)

    def dynkin_labels(self) -> tuple[int, ...]:
        p = self.parts + (0,)
        return tuple(p[j] - p[j + 1] for j in range(self.r - 1))

    @classmethod
    def from_dynkin(cls, labels, r: int) -> "WeightPartition":
        labels = tuple(labels)
        return cls(tuple(sum(labels[j:]) for j in range(r - 1)), r)

    def gl(self) -> tuple[int, ...]:
        """The same weight as a GL_r partition with a trailing zero row."""
        return self.parts + (0,)

    def is_zero(self) -> bool:
        return not any(self.parts)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class LevelContext:
    r: int
    level: int

    def __post_init__(self):
        if self.r < 2:
            raise InputError(f"rank must be >= 2, got {self.r}")
        if self.level < 0:
            raise InputError(f"level must be non-negative, got {self.level}")

    def admits(self, lam: WeightPartition) -> bool:
        return lam.r == self.r and lam.theta_pairing() <= self.level

    def check(self, *weights: WeightPartition) -> None:
        for lam in weights:
            if lam.r != self.r:
                raise InputError(f"weight {lam} is for sl_{lam.r}, context is sl_{self.r}")
            if lam.theta_pairing() > self.level:
                raise LevelViolation(f"weight {lam} exceeds level {self.level}")


def weights_at_level(ctx: LevelContext) -> list[WeightPartition]:
    """All weights with first part at most the level, in lexicographic order."""
    return list(_weights_at_level(ctx.r, ctx.level))


@lru_cache(maxsize=None)
def _weights_at_level(r: int, level: int) -> tuple[WeightPartition, ...]:
    out = []
    # combinations_with_replacement yields non-decreasing tuples; reverse each
    for combo in itertools.combinations_with_replacement(range(level + 1), r - 1):
        out.append(WeightPartition(tuple(reversed(combo)), r))
    return tuple(sorted(out))


def dual(lam: WeightPartition) -> WeightPartition:
    """The highest weight of the dual representation."""
    p = lam.gl()
    r = lam.r
    top = p[0]
    return WeightPartition(tuple(top - p[r - j] for j in range(1, r)), r)


# -- classical representation theory ---------------------------------------


@lru_cache(maxsize=None)
def gl_character(shape: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    """Weight multiplicities of the GL_r module with highest weight ``shape``.

    ``shape`` has exactly r entries.  Computed by Gelfand-Tsetlin branching:
    the restriction to GL_{r-1} is the sum over interlacing partitions.
    """
    r = len(shape)
    if r == 1:
        return {shape: 1}
    total = sum(shape)
    ranges = [range(shape[i + 1], shape[i] + 1) for i in range(r - 1)]
    char: dict[tuple[int, ...], int] = defaultdict(int)
    for inner in itertools.product(*ranges):
        last = total - sum(inner)
        for w, m in gl_character(inner).items():
            char[w + (last,)] += m
    return dict(char)


def _straighten(x: list[int]) -> tuple[int, list[int]] | None:
    """Sort ``x`` decreasingly, returning the permutation sign, or None on a tie."""
    sign = 1
    x = list(x)
    # insertion sort to track parity
    for i in range(1, len(x)):
        j = i
        while j > 0 and x[j - 1] < x[j]:
            x[j - 1], x[j] = x[j], x[j - 1]
            sign = -sign
            j -= 1
    if any(a == b for a, b in zip(x, x[1:])):
        return None
    return sign, x


@lru_cache(maxsize=None)
def gl_tensor_product(lam: tuple[int, ...], mu: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    """Decompose V_lam (x) V_mu for GL_r (both given with r entries)."""
    r = len(lam)
    if sum(mu) > sum(lam):
        lam, mu = mu, lam
    rho = list(range(r - 1, -1, -1))
    out: dict[tuple[int, ...], int] = defaultdict(int)
    for w, m in gl_character(mu).items():
        st = _straighten([lam[i] + w[i] + rho[i] for i in range(r)])
        if st is None:
            continue
        sign, x = st
        kappa = tuple(x[i] - rho[i] for i in range(r))
        out[kappa] += sign * m
    return {k: v for k, v in out.items() if v}


def tensor_decomposition(lam: WeightPartition, mu: WeightPartition) -> dict[WeightPartition, int]:
    """Classical sl_r decomposition of V_lam (x) V_mu."""
    if lam.r != mu.r:
        raise InputError("weights of different rank")
    r = lam.r
    return {
        WeightPartition.of(kappa, r): m
        for kappa, m in gl_tensor_product(lam.gl(), mu.gl()).items()
    }


def lr_coefficient(lam: WeightPartition, mu: WeightPartition, nu: WeightPartition) -> int:
    """Multiplicity of V_nu in V_lam (x) V_mu for sl_r."""
    if not (lam.r == mu.r == nu.r):
        raise InputError("weights of different rank")
    return tensor_decomposition(lam, mu).get(nu, 0)


def kac_walton_fold(kappa: tuple[int, ...], level: int) -> tuple[int, WeightPartition | None]:
    """Fold a GL_r highest weight into the level-``level`` alcove.

    Returns ``(sign, weight)``; weight is None when kappa + rho lies on an
    affine wall, in which case it contributes nothing.
    """
    r = len(kappa)
    k = level + r
    rho = range(r - 1, -1, -1)
    x = [a + b for a, b in zip(kappa, rho)]
    sign = 1
    while True:
        st = _straighten(x)
        if st is None:
            return 0, None
        s, x = st
        sign *= s
        spread = x[0] - x[-1]
        if spread < k:
            break
        if spread == k:
            return 0, None
        # reflection in the affine wall x_1 - x_r = k
        x[0], x[-1] = x[-1] + k, x[0] - k
        sign = -sign
    folded = [a - b for a, b in zip(x, rho)]
    return sign, WeightPartition.of(folded, r)


def truncated_product(ctx: LevelContext, lam: WeightPartition, mu: WeightPartition) -> dict[WeightPartition, int]:
    """Level-truncated fusion product lam * mu as {nu: N_{lam mu}^nu}."""
    ctx.check(lam, mu)
    out: dict[WeightPartition, int] = defaultdict(int)
    for kappa, m in gl_tensor_product(lam.gl(), mu.gl()).items():
        sign, nu = kac_walton_fold(kappa, ctx.level)
        if nu is not None:
            out[nu] += sign * m
    for nu, v in out.items():
        if v < 0:
            raise AssertionError(f"negative fusion coefficient {v} for {lam}*{mu}->{nu}")
    return {nu: v for nu, v in out.items() if v}


def fuse(ctx: LevelContext, lam: WeightPartition, mu: WeightPartition, nu: WeightPartition,
         table: "FusionTable | None" = None) -> int:
    """Rank of the three-point genus-0 conformal block with weights lam, mu, nu."""
    if table is None:
        table = default_table(ctx)
    elif table.context != ctx:
        raise InputError("fusion table is for a different rank or level")
    return table.get(lam, mu, nu)


# -- memo table ----------------------------------------------------------------


class FusionTable:
    """Memo of three-point ranks for one (r, level), keyed by the sorted triple.

    Lookups are lock-free; insertions take a lock. Two threads may compute the
    same entry, which is harmless because values are deterministic.
    """

    def __init__(self, context: LevelContext):
        self.context = context
        self._entries: dict[tuple[tuple[int, ...], ...], int] = {}
        self._products: dict[tuple[WeightPartition, WeightPartition], dict] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(lam, mu, nu):
        return tuple(sorted((lam.parts, mu.parts, nu.parts)))

    def __len__(self):
        return len(self._entries)

    def get(self, lam: WeightPartition, mu: WeightPartition, nu: WeightPartition) -> int:
        key = self.key(lam, mu, nu)
        value = self._entries.get(key)
        if value is not None:
            self.hits += 1
            return value
        self.misses += 1
        self.context.check(lam, mu, nu)
        value = self._product(lam, mu).get(dual(nu), 0)
        with self._lock:
            self._entries.setdefault(key, value)
        return value

    def _product(self, lam, mu):
        pair = (lam, mu) if lam <= mu else (mu, lam)
        prod = self._products.get(pair)
        if prod is None:
            prod = truncated_product(self.context, *pair)
            with self._lock:
                self._products.setdefault(pair, prod)
        return prod

    def fill(self) -> "FusionTable":
        """Compute every entry at this level."""
        ws = weights_at_level(self.context)
        for lam, mu, nu in itertools.combinations_with_replacement(ws, 3):
            self.get(lam, mu, nu)
        return self

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "r": self.context.r,
            "level": self.context.level,
            "entries": [[list(a), list(b), list(c), n] for (a, b, c), n in sorted(self._entries.items())],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FusionTable":
        try:
            version = doc["format_version"]
            ctx = LevelContext(int(doc["r"]), int(doc["level"]))
            entries = doc["entries"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed fusion table: {exc}") from None
        if version != FORMAT_VERSION:
            raise InputError(f"unsupported fusion table version {version}")
        table = cls(ctx)
        for row in entries:
            if len(row) != 4:
                raise InputError(f"malformed fusion entry {row}")
            a, b, c, n = row
            ws = [WeightPartition(tuple(x), ctx.r) for x in (a, b, c)]
            for w in ws:
                if w.theta_pairing() > ctx.level:
                    raise InputError(f"fusion entry {row} violates level {ctx.level}")
            if not isinstance(n, int) or n < 0:
                raise InputError(f"fusion entry {row} has invalid value")
            if n and sum(w.size() for w in ws) % ctx.r:
                raise InputError(f"fusion entry {row} violates the mod-r grading")
            key = cls.key(*ws)
            if table._entries.get(key, n) != n:
                raise InputError(f"fusion entries for {key} are not symmetric")
            table._entries[key] = n
        return table

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "FusionTable":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"fusion table {path} is not valid JSON: {exc}") from None
        return cls.from_json(doc)


_tables: dict[LevelContext, FusionTable] = {}
_tables_lock = threading.Lock()


def default_table(ctx: LevelContext) -> FusionTable:
    """Process-wide shared table for ``ctx``."""
    table = _tables.get(ctx)
    if table is None:
        with _tables_lock:
            table = _tables.setdefault(ctx, FusionTable(ctx))
    return table


def install_table(table: FusionTable) -> None:
    with _tables_lock:
        _tables[table.context] = table


def clear_tables() -> None:
    with _tables_lock:
        _tables.clear()
