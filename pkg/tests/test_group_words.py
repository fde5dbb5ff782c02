import pytest

from nilsphere.errors import NotNilpotent
from nilsphere.group_words import (
    FiniteGroupOracle,
    Word,
    commutator_word,
    derived_generators,
    elementary_transvection,
    free_reduce,
    level_sets,
    mat_identity,
    mat_inv_unitriangular,
    mat_mul,
    oracle_generate,
    oracle_lower_central_series,
    verify_section_2,
    word,
)


class TestFreeReduce:
    def test_cancel_pair(self):
        assert free_reduce([("a", 1), ("a", -1)]).is_identity()

    def test_inner_cancellation(self):
        w = free_reduce([("a", 1), ("b", 1), ("b", -1), ("a", 1)])
        assert w.letters == (("a", 1), ("a", 1))

    def test_idempotent(self):
        w = word("a", "b", ("a", -1))
        assert free_reduce(w) == w

    def test_never_grows(self):
        import itertools

        letters = [("a", 1), ("a", -1), ("b", 1), ("b", -1)]
        for combo in itertools.product(letters, repeat=5):
            assert len(free_reduce(list(combo))) <= 5


class TestCommutatorWord:
    def test_self_commutator_trivial(self):
        a = word("a")
        assert commutator_word(a, a).is_identity()

    def test_basic_length_four(self):
        w = commutator_word(word("a"), word("b"))
        assert w.letters == (("a", 1), ("b", 1), ("a", -1), ("b", -1))

    def test_with_identity(self):
        assert commutator_word(word("a"), Word(())).is_identity()


class TestLevelSets:
    def test_two_generators_level_one(self):
        ls = level_sets({"a", "b"}, 1)
        assert set(ls.levels[0]) == {word("a"), word("b")}
        assert set(ls.levels[1]) == {
            commutator_word(word("a"), word("b")),
            commutator_word(word("b"), word("a")),
        }

    def test_single_generator_trivial_levels(self):
        ls = level_sets({"a"}, 3)
        for lvl in ls.levels[1:]:
            assert lvl == ()

    def test_counting_bound(self):
        ls = level_sets({"a", "b", "c"}, 2)
        assert len(ls.levels[2]) <= 3 * len(ls.levels[1])

    def test_deterministic(self):
        a = level_sets({"b", "a"}, 2)
        b = level_sets({"a", "b"}, 2)
        assert a.levels == b.levels


class TestDerivedGenerators:
    def test_k1_is_level_one(self):
        assert set(derived_generators({"a", "b"}, 1)) == set(
            level_sets({"a", "b"}, 1).levels[1]
        )

    def test_k2_union(self):
        ls = level_sets({"a", "b"}, 2)
        expected = set(ls.levels[1]) | set(ls.levels[2])
        assert set(derived_generators({"a", "b"}, 2)) == expected

    def test_singleton_empty(self):
        assert derived_generators({"a"}, 2) == ()


def ut3_gens(m):
    return [
        elementary_transvection(3, m, 1, 2),
        elementary_transvection(3, m, 2, 3),
    ]


def ut4_gens(m):
    return [
        elementary_transvection(4, m, 1, 2),
        elementary_transvection(4, m, 2, 3),
        elementary_transvection(4, m, 3, 4),
    ]


class TestOracle:
    def test_identity_generates_itself(self):
        oracle = FiniteGroupOracle(3, 3, [mat_identity(3)])
        assert oracle.elements == frozenset({mat_identity(3)})

    def test_ut3_mod3_closure(self):
        oracle = FiniteGroupOracle(3, 3, ut3_gens(3))
        assert len(oracle.elements) == 27

    def test_ut4_mod2_closure(self):
        oracle = FiniteGroupOracle(4, 2, ut4_gens(2))
        assert len(oracle.elements) == 64

    def test_matrix_inverse(self):
        m = 5
        a = elementary_transvection(3, m, 1, 2, 3)
        b = mat_inv_unitriangular(a, m)
        assert mat_mul(a, b, m) == mat_identity(3)

    def test_oracle_generate_subset(self):
        oracle = FiniteGroupOracle(3, 3, ut3_gens(3))
        center_gen = elementary_transvection(3, 3, 1, 3)
        sub = oracle_generate(oracle, [center_gen])
        assert len(sub) == 3

    def test_ambient_cap(self):
        with pytest.raises(ValueError):
            FiniteGroupOracle(6, 11, [mat_identity(6)])


class TestLowerCentralSeries:
    def test_ut3_mod3_chain(self):
        oracle = FiniteGroupOracle(3, 3, ut3_gens(3))
        chain, k = oracle_lower_central_series(oracle)
        assert tuple(len(c) for c in chain) == (27, 3, 1)
        assert k == 2

    def test_ut4_mod2_length(self):
        oracle = FiniteGroupOracle(4, 2, ut4_gens(2))
        chain, k = oracle_lower_central_series(oracle)
        assert k == 3
        assert len(chain[0]) == 64

    def test_abelian_length_one(self):
        oracle = FiniteGroupOracle(2, 5, [elementary_transvection(2, 5, 1, 2)])
        chain, k = oracle_lower_central_series(oracle)
        assert k == 1
        assert tuple(len(c) for c in chain) == (5, 1)

    def test_not_nilpotent_detected(self):
        # no unitriangular counterexample exists (they are all nilpotent), so
        # exercise the guard through a degenerate max_depth instead
        oracle = FiniteGroupOracle(4, 2, ut4_gens(2))
        with pytest.raises(NotNilpotent):
            oracle_lower_central_series(oracle, max_depth=1)


class TestVerifySection2:
    def test_ut3_mod3_all_hold(self):
        oracle = FiniteGroupOracle(3, 3, ut3_gens(3))
        report = verify_section_2(oracle, ut3_gens(3))
        assert report.all_hold
        assert report.nilpotency_length == 2
        assert report.chain_orders == (27, 3, 1)

    def test_ut3_mod5_all_hold(self):
        oracle = FiniteGroupOracle(3, 5, ut3_gens(5))
        report = verify_section_2(oracle, ut3_gens(5))
        assert report.all_hold
        assert report.nilpotency_length == 2

    def test_ut4_mod2_all_hold(self):
        oracle = FiniteGroupOracle(4, 2, ut4_gens(2))
        report = verify_section_2(oracle, ut4_gens(2))
        assert report.all_hold
        assert report.nilpotency_length == 3

    def test_abelian_trivially_true(self):
        oracle = FiniteGroupOracle(2, 5, [elementary_transvection(2, 5, 1, 2)])
        report = verify_section_2(oracle, [elementary_transvection(2, 5, 1, 2)])
        assert report.all_hold
        assert report.nilpotency_length == 1

    def test_rejects_nongenerating_set(self):
        oracle = FiniteGroupOracle(3, 3, ut3_gens(3))
        with pytest.raises(ValueError):
            verify_section_2(oracle, [elementary_transvection(3, 3, 1, 3)])
