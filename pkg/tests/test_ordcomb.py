"""Tests for G-set combinatorics: orbits, points, maps and relations."""

from fractions import Fraction
from math import comb

import pytest

from delannoy.config import settings
from delannoy.errors import (
    CounterexampleError,
    InvalidInputError,
    PreconditionError,
    ResourceCapError,
    StructuralError,
)
from delannoy.services.ordcomb import (
    Amalgam,
    EquivRelation,
    GSet,
    automorphisms,
    closed_orbit_sets,
    compose_maps,
    delannoy_number,
    diagonal_indices,
    equivalence_relations,
    factor_product_relation,
    fiber_bimodules,
    identity_map,
    is_equivalence,
    kernel_relation,
    orbit_of_point,
    orbits_of_product,
    power_count,
    point_set,
    product_equivalence_relations,
    product_gset,
    product_relation,
    quotient,
    representative,
    shuffle_words,
    swap_permutation,
    terminal_map,
    transitive,
    transitive_homs,
    triple_count,
    triple_table,
    word_count,
)


class TestDelannoyNumbers:
    """Tests for the counting functions."""

    def test_small_values(self):
        """D(n, m) for a few known entries."""
        assert delannoy_number(0, 5) == 1
        assert delannoy_number(1, 1) == 3
        assert delannoy_number(2, 2) == 13
        assert delannoy_number(3, 3) == 63
        assert delannoy_number(4, 4) == 321

    def test_symmetry(self):
        """D(n, m) = D(m, n)."""
        for n in range(5):
            for m in range(5):
                assert delannoy_number(n, m) == delannoy_number(m, n)

    def test_closed_form(self):
        """D(n, m) = sum_k C(n, k) C(m, k) 2^k."""
        for n in range(6):
            for m in range(6):
                expected = sum(comb(n, k) * comb(m, k) * 2 ** k for k in range(min(n, m) + 1))
                assert delannoy_number(n, m) == expected

    def test_word_count_matches_enumeration(self):
        """word_count should count the words shuffle_words lists."""
        for counts in [(1, 1), (2, 1), (2, 2), (1, 1, 1), (2, 0, 1)]:
            assert word_count(counts) == len(shuffle_words(counts))


class TestShuffleWords:
    """Tests for the canonical word order."""

    def test_pair_of_points(self):
        """R x R has the orbits x < y, x > y and x = y in that order."""
        assert shuffle_words((1, 1)) == ((1, 2), (2, 1), (3,))

    def test_words_are_sorted(self):
        """Words come out lexicographically."""
        words = shuffle_words((2, 2))
        assert list(words) == sorted(words)

    def test_each_factor_placed_counts_times(self):
        """Every word places factor i exactly counts[i] times."""
        for word in shuffle_words((2, 1, 1)):
            assert [sum(1 for m in word if m >> i & 1) for i in range(3)] == [2, 1, 1]


class TestGSetParse:
    """Tests for GSet.parse."""

    def test_schwartz_space_notation(self):
        """C(R^2) reads as the transitive set R^(2)."""
        assert GSet.parse("C(R^2)") == transitive(2)

    def test_sums_and_products(self):
        """+ separates orbits, x separates group factors."""
        assert GSet.parse("R^1 + pt") == GSet.of(1, 0)
        assert GSet.parse("R^(2) x R") == GSet.of((2, 1))

    def test_point(self):
        """pt is the one-point set."""
        assert GSet.parse("pt") == point_set(1)

    def test_garbage_rejected(self):
        """Unreadable factors are input errors."""
        with pytest.raises(InvalidInputError):
            GSet.parse("C(Q^2)")

    def test_mixed_group_powers_rejected(self):
        """Orbits over different powers of G cannot be summed."""
        with pytest.raises(StructuralError):
            GSet.parse("R + R x R")


class TestProducts:
    """Tests for orbits_of_product and product_gset."""

    def test_orbit_count_is_delannoy(self):
        """R^(n) x R^(m) has D(n, m) orbits."""
        for n in range(4):
            for m in range(4):
                assert len(orbits_of_product([transitive(n), transitive(m)])) == delannoy_number(n, m)

    def test_unit_is_neutral(self):
        """X x pt has the orbits of X in the same order."""
        X = GSet.of(2, 0, 1)
        assert product_gset(X, point_set(1)) == X
        assert product_gset(point_set(1), X) == X

    def test_empty_product_rejected(self):
        """A product needs a factor."""
        with pytest.raises(StructuralError):
            orbits_of_product([])

    def test_mixed_group_powers_rejected(self):
        """Factors must live over the same G^s."""
        with pytest.raises(StructuralError):
            orbits_of_product([transitive(1), GSet.of((1, 1))])

    def test_product_cap(self, monkeypatch):
        """Too many arms in one orbit tuple hits MAX_PRODUCT_ARMS."""
        monkeypatch.setattr(settings, "MAX_PRODUCT_ARMS", 3)
        with pytest.raises(ResourceCapError):
            orbits_of_product([transitive(2), transitive(2)])

    def test_two_factor_coordinates(self):
        """Over G^2 the count is the product of the per-coordinate counts."""
        X = GSet.of((1, 1))
        assert len(orbits_of_product([X, X])) == 9

    def test_triple_count(self):
        """triple_count agrees with the triple table."""
        X, Y = transitive(1), GSet.of(2, 0)
        assert triple_count(X, Y, X) == triple_table(X, Y, X).size


class TestPoints:
    """Tests for representatives and orbit_of_point."""

    def test_orbit_of_representative(self):
        """The representative of every orbit lies in that orbit."""
        factors = (transitive(2), transitive(1))
        for amalgam in orbits_of_product(factors):
            points = representative(amalgam)
            assert orbit_of_point(points, amalgam.orbits) == amalgam

    def test_rational_points(self):
        """Concrete rationals are classified by their relative order."""
        x = ((Fraction(1, 2), Fraction(3)),)
        y = ((Fraction(3),),)
        assert orbit_of_point((x, y)) == Amalgam(orbits=(0, 0), words=((1, 3),))

    def test_non_increasing_arm_rejected(self):
        """Points of R^(n) have strictly increasing coordinates."""
        with pytest.raises(InvalidInputError):
            orbit_of_point((((2, 1),), ((0,),)))

    def test_swap_is_an_involution(self):
        """Swapping twice returns every orbit of X x Y to itself."""
        X, Y = transitive(2), GSet.of(1, 0)
        forward = swap_permutation(X, Y)
        back = swap_permutation(Y, X)
        assert [back[j] for j in forward] == list(range(len(forward)))

    def test_diagonal_indices(self):
        """R x R has its diagonal last."""
        assert diagonal_indices(transitive(1)) == (2,)


class TestMaps:
    """Tests for G-maps."""

    def test_transitive_homs_count(self):
        """Maps R^(n) -> R^(m) are the m-subsets of n coordinates."""
        assert len(transitive_homs(transitive(3).orbits[0], transitive(2).orbits[0])) == 3

    def test_identity_and_composition(self):
        """The identity map is neutral for composition."""
        (f,) = transitive_homs(transitive(2).orbits[0], transitive(0).orbits[0])
        assert compose_maps(f, identity_map(transitive(2))) == f
        assert compose_maps(terminal_map(transitive(0)), f) == f

    def test_incompatible_maps_rejected(self):
        """Composition requires matching G-sets."""
        with pytest.raises(StructuralError):
            compose_maps(identity_map(transitive(1)), identity_map(transitive(2)))

    def test_automorphisms_are_trivial(self):
        """Transitive sets over G have only the identity as automorphism."""
        for n in range(5):
            X = transitive(n)
            assert automorphisms(X) == [identity_map(X)]
        assert automorphisms(GSet.of((2, 1))) == [identity_map(GSet.of((2, 1)))]

    def test_automorphisms_need_transitive_set(self):
        """Non-transitive sets are out of scope."""
        with pytest.raises(PreconditionError):
            automorphisms(GSet.of(1, 1))


class TestRelations:
    """Tests for equivalence relations and quotients."""

    def test_count_is_power_of_two(self):
        """R^(n) has 2^n G-stable equivalence relations."""
        for n in range(4):
            assert len(equivalence_relations(transitive(n))) == 2 ** n

    def test_kernels_are_equivalences(self):
        """Kernels of coordinate projections are equivalence relations."""
        X = transitive(2)
        for f in transitive_homs(X.orbits[0], transitive(1).orbits[0]):
            assert is_equivalence(X, kernel_relation(f).orbit_set)

    def test_swap_closure_required(self):
        """The relation x <= y is not symmetric."""
        X = transitive(1)
        assert not is_equivalence(X, (0, 2))

    def test_quotient_recovers_projection(self):
        """Quotienting by a kernel gives back the projection's target."""
        X = transitive(3)
        for relation in equivalence_relations(X):
            target, f = quotient(X, relation)
            assert kernel_relation(f).orbit_set == relation.orbit_set
            assert target.is_transitive

    def test_quotient_rejects_non_relation(self):
        """Quotients need an equivalence relation."""
        X = transitive(1)
        with pytest.raises(PreconditionError):
            quotient(X, EquivRelation(base=X, orbit_set=(0, 2)))

    def test_triangle_rule_agrees_with_transitivity(self):
        """For Schwartz spaces both closure rules find the same sets."""
        X = transitive(2)
        assert closed_orbit_sets(X, "triangle") == closed_orbit_sets(X, "transitive")

    def test_unknown_rule(self):
        """Closure rules are named."""
        with pytest.raises(InvalidInputError):
            closed_orbit_sets(transitive(1), "reflexive")

    def test_relation_cap(self, monkeypatch):
        """Arms above MAX_RELATION_ARMS are refused."""
        monkeypatch.setattr(settings, "MAX_RELATION_ARMS", 1)
        with pytest.raises(ResourceCapError):
            equivalence_relations(transitive(2))


class TestProductRelations:
    """Tests for factor_product_relation over G x G."""

    def test_every_relation_factors(self):
        """Relations on R^(n) x R^(m) over G^2 are products."""
        for n, m in [(1, 1), (2, 1), (1, 2)]:
            X = GSet.of((n, m))
            relations = equivalence_relations(X)
            assert len(relations) == 2 ** (n + m)
            for relation in relations:
                left, right = factor_product_relation(relation)
                assert is_equivalence(left.base, left.orbit_set)
                assert is_equivalence(right.base, right.orbit_set)

    def test_non_product_detected(self):
        """A relation that mixes the two factors does not factor."""
        X = GSet.of((1, 1))
        # every pair except (x1 < y1, x2 < y2)
        members = tuple(range(1, len(product_gset(X, X).orbits)))
        with pytest.raises(CounterexampleError):
            factor_product_relation(EquivRelation(base=X, orbit_set=members))

    def test_needs_split_group(self):
        """Factoring needs s >= 2."""
        X = transitive(1)
        with pytest.raises(PreconditionError):
            factor_product_relation(EquivRelation(base=X, orbit_set=(2,)))

    def test_fibers_of_the_diagonal(self):
        """Over the diagonal of R only the empty set and the diagonal are fibers."""
        diagonal = EquivRelation(base=transitive(1), orbit_set=diagonal_indices(transitive(1)))
        assert fiber_bimodules(diagonal) == [(), diagonal.orbit_set]

    def test_fibers_of_the_total_relation(self):
        """Over the total relation a fiber is empty or everything."""
        total = EquivRelation(base=transitive(1), orbit_set=(0, 1, 2))
        assert fiber_bimodules(total) == [(), (0, 1, 2)]

    def test_fibers_for_every_relation_on_r3(self):
        """R^(3) has no fiber other than the empty set and the relation."""
        for relation in equivalence_relations(transitive(3)):
            assert fiber_bimodules(relation) == [(), relation.orbit_set]

    def test_factored_search_matches_direct_search(self):
        """Relations built from the factors are those found on the product."""
        for n, m in [(1, 1), (2, 1), (0, 2), (2, 2)]:
            factored = product_equivalence_relations(transitive(n), transitive(m))
            direct = equivalence_relations(GSet.of((n, m)))
            assert sorted(r.orbit_set for r in factored) == sorted(r.orbit_set for r in direct)

    def test_product_relation_round_trip(self):
        """factor_product_relation undoes product_relation."""
        left = equivalence_relations(transitive(2))[1]
        right = equivalence_relations(transitive(1))[0]
        relation = product_relation(left, right)
        assert relation.base == GSet.of((2, 1))
        assert factor_product_relation(relation) == (left, right)

    def test_three_by_three_counts(self):
        """R^(3) x R^(3) over G^2 has 64 relations, all products."""
        relations = product_equivalence_relations(transitive(3), transitive(3))
        assert len(relations) == 64
        assert len({r.orbit_set for r in relations}) == 64

    def test_product_relations_need_transitive_factors(self):
        """Both factors must be transitive."""
        with pytest.raises(PreconditionError):
            product_equivalence_relations(GSet.of(1, 0), transitive(1))

    def test_fiber_cap(self, monkeypatch):
        """The fiber search honors MAX_RELATION_ARMS."""
        monkeypatch.setattr(settings, "MAX_RELATION_ARMS", 1)
        relation = EquivRelation(base=transitive(2), orbit_set=diagonal_indices(transitive(2)))
        with pytest.raises(ResourceCapError):
            fiber_bimodules(relation)


class TestPowerCount:
    """Tests for power_count."""

    def test_single_arm(self):
        """Orbits of R^k are counted by the ordered Bell numbers."""
        assert power_count(transitive(1), 2) == 3
        assert power_count(transitive(1), 5) == 541

    def test_sum_of_orbits(self):
        """Orbit tuples of R + pt are counted separately."""
        assert power_count(GSet.of(1, 0), 2) == 6

    def test_agrees_with_products(self):
        """power_count(X, 2) is the orbit count of X x X."""
        X = GSet.of(2, 1)
        assert power_count(X, 2) == len(product_gset(X, X).orbits)
