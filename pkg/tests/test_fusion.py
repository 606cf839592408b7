import itertools
import threading

import pytest
from hypothesis import given, settings, strategies as st

from confblocks.errors import InputError, LevelViolation
from confblocks.fusion import (
    FusionTable,
    LevelContext,
    WeightPartition,
    clear_tables,
    default_table,
    dual,
    fuse,
    install_table,
    kac_walton_fold,
    lr_coefficient,
    tensor_decomposition,
    truncated_product,
    weights_at_level,
)

from oracles import level_weights, lr_sl, sl2_fusion


def W(*parts, r=None):
    return WeightPartition(tuple(parts), r if r is not None else len(parts) + 1)


class TestWeightPartition:
    def test_accessors(self):
        w = W(3, 1, 0)
        assert w.theta_pairing() == 3
        assert w.size() == 4
        assert w.dynkin_labels() == (2, 1, 0)
        assert WeightPartition.from_dynkin((2, 1, 0), 4) == w
        assert w.gl() == (3, 1, 0, 0)

    @pytest.mark.parametrize("parts,r", [((1, 2), 3), ((1,), 3), ((-1,), 2)])
    def test_rejects_bad_parts(self, parts, r):
        with pytest.raises(InputError):
            WeightPartition(parts, r)

    def test_of_strips_full_columns(self):
        assert WeightPartition.of((3, 2, 1), 3) == W(2, 1)
        assert WeightPartition.of((2,), 3) == W(2, 0)


class TestWeightsAtLevel:
    def test_examples(self):
        assert [w.parts for w in weights_at_level(LevelContext(2, 0))] == [(0,)]
        assert [w.parts for w in weights_at_level(LevelContext(2, 2))] == [(0,), (1,), (2,)]
        assert [w.parts for w in weights_at_level(LevelContext(3, 1))] == [(0, 0), (1, 0), (1, 1)]

    @pytest.mark.parametrize("r,level", [(2, 5), (3, 3), (4, 2)])
    def test_count_is_binomial(self, r, level):
        from math import comb

        assert len(weights_at_level(LevelContext(r, level))) == comb(level + r - 1, r - 1)
        assert [w.parts for w in weights_at_level(LevelContext(r, level))] == level_weights(r, level)

    def test_level_violation(self):
        with pytest.raises(LevelViolation):
            LevelContext(2, 1).check(W(2))


class TestDual:
    def test_examples(self):
        assert dual(W(1)) == W(1)
        assert dual(W(1, 0)) == W(1, 1)
        assert dual(W(2, 1)) == W(2, 1)

    @pytest.mark.parametrize("r,level", [(3, 3), (4, 2)])
    def test_involution_and_size(self, r, level):
        for w in weights_at_level(LevelContext(r, level)):
            assert dual(dual(w)) == w
            assert w.size() + dual(w).size() == r * w.theta_pairing()


class TestLR:
    def test_examples(self):
        assert lr_coefficient(W(1), W(1), W(2)) == 1
        assert lr_coefficient(W(1), W(1), W(1)) == 0
        assert lr_coefficient(W(1, 0), W(1, 1), W(0, 0)) == 1

    def test_adjoint_squared(self):
        d = tensor_decomposition(W(2, 1), W(2, 1))
        assert {w.parts: m for w, m in d.items()} == {(4, 2): 1, (3, 0): 1, (3, 3): 1, (2, 1): 2, (0, 0): 1}

    @pytest.mark.parametrize("r", [2, 3, 4])
    def test_against_tableaux(self, r):
        ws = [w for w in weights_at_level(LevelContext(r, 3)) if w.size() <= 4]
        for lam, mu in itertools.product(ws, repeat=2):
            for nu in weights_at_level(LevelContext(r, lam.theta_pairing() + mu.theta_pairing())):
                assert lr_coefficient(lam, mu, nu) == lr_sl(lam.parts, mu.parts, nu.parts, r), (lam, mu, nu)

    @pytest.mark.parametrize("r", [2, 3, 4])
    def test_dimension_count(self, r):
        # dim(lam (x) mu) = sum of multiplicities times dims (Weyl dimension formula)
        from math import prod

        def dim(p):
            x = list(p) + [0]
            return prod(x[i] - x[j] + j - i for i in range(r) for j in range(i + 1, r)) // prod(
                j - i for i in range(r) for j in range(i + 1, r))

        for lam, mu in itertools.product(weights_at_level(LevelContext(r, 2)), repeat=2):
            dec = tensor_decomposition(lam, mu)
            assert sum(m * dim(nu.parts) for nu, m in dec.items()) == dim(lam.parts) * dim(mu.parts)


class TestKacWalton:
    def test_on_wall_vanishes(self):
        assert kac_walton_fold((2, 0), 1)[1] is None  # (2) at level 1 sits on the affine wall

    def test_reflection(self):
        sign, w = kac_walton_fold((3, 0), 1)
        assert (sign, w) == (-1, W(1))

    def test_truncated_product_level_one(self):
        ctx = LevelContext(2, 1)
        assert truncated_product(ctx, W(1), W(1)) == {W(0): 1}


class TestFuse:
    def test_examples(self):
        assert fuse(LevelContext(2, 1), W(1), W(1), W(0)) == 1
        assert fuse(LevelContext(2, 1), W(1), W(1), W(1)) == 0
        assert fuse(LevelContext(2, 2), W(2), W(1), W(1)) == 1

    def test_level_violation(self):
        with pytest.raises(LevelViolation):
            fuse(LevelContext(2, 1), W(2), W(0), W(0))

    @pytest.mark.parametrize("level", range(0, 7))
    def test_sl2_closed_form(self, level):
        ctx = LevelContext(2, level)
        for a, b, c in itertools.product(range(level + 1), repeat=3):
            assert fuse(ctx, W(a), W(b), W(c)) == sl2_fusion(level, a, b, c)

    @pytest.mark.parametrize("r,level", [(3, 2), (3, 3), (4, 2)])
    def test_symmetry_vacuum_grading(self, r, level):
        ctx = LevelContext(r, level)
        ws = weights_at_level(ctx)
        zero = WeightPartition.zero(r)
        for lam, mu, nu in itertools.product(ws, repeat=3):
            v = fuse(ctx, lam, mu, nu)
            assert all(fuse(ctx, *p) == v for p in itertools.permutations((lam, mu, nu)))
            if (lam.size() + mu.size() + nu.size()) % r:
                assert v == 0
        for lam, nu in itertools.product(ws, repeat=2):
            assert fuse(ctx, lam, zero, nu) == int(nu == dual(lam))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.data())
def test_stabilization_property(r, data):
    parts = st.lists(st.integers(0, 3), min_size=r - 1, max_size=r - 1).map(lambda x: tuple(sorted(x, reverse=True)))
    lam = WeightPartition(data.draw(parts), r)
    mu = WeightPartition(data.draw(parts), r)
    level = lam.theta_pairing() + mu.theta_pairing() + data.draw(st.integers(0, 2))
    ctx = LevelContext(r, level)
    for nu in weights_at_level(ctx):
        assert fuse(ctx, lam, mu, nu) == lr_coefficient(lam, mu, dual(nu))


class TestFusionTable:
    def test_fill_and_roundtrip(self, tmp_path):
        ctx = LevelContext(3, 2)
        table = FusionTable(ctx).fill()
        path = tmp_path / "t.json"
        table.save(path)
        loaded = FusionTable.load(path)
        ws = weights_at_level(ctx)
        for triple in itertools.product(ws, repeat=3):
            assert loaded.get(*triple) == fuse(ctx, *triple)
        assert loaded.hits > 0

    def test_json_is_deterministic(self):
        ctx = LevelContext(2, 3)
        assert FusionTable(ctx).fill().to_json() == FusionTable(ctx).fill().to_json()

    @pytest.mark.parametrize("mutate,msg", [
        (lambda d: d["entries"].append([[4], [0], [4], 1]), "level"),
        (lambda d: d["entries"].append([[1], [1], [1], 1]), None),
        (lambda d: d.update(format_version=99), "version"),
        (lambda d: d["entries"].append([[1], [0], [1], -1]), None),
    ])
    def test_load_validates(self, mutate, msg):
        doc = FusionTable(LevelContext(2, 2)).fill().to_json()
        mutate(doc)
        with pytest.raises(InputError, match=msg):
            FusionTable.from_json(doc)

    def test_conflicting_symmetric_entries(self):
        doc = {"format_version": 1, "r": 3, "level": 1,
               "entries": [[[1, 0], [1, 0], [1, 0], 1], [[1, 0], [1, 0], [1, 0], 0]]}
        with pytest.raises(InputError):
            FusionTable.from_json(doc)

    def test_concurrent_lookups(self):
        ctx = LevelContext(3, 3)
        table = FusionTable(ctx)
        ws = weights_at_level(ctx)
        triples = list(itertools.product(ws, repeat=3))
        errors = []

        def worker():
            try:
                for t in triples:
                    assert table.get(*t) == fuse(ctx, *t)
            except AssertionError as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors

    def test_registry(self):
        ctx = LevelContext(2, 4)
        clear_tables()
        t = FusionTable(ctx)
        install_table(t)
        assert default_table(ctx) is t
        clear_tables()
        assert default_table(ctx) is not t
