"""Tests for the Karoubi envelope: simples, decomposition, restriction, tensor rules."""

import pytest
from sympy import QQ

from delannoy.errors import InvalidInputError, PreconditionError, StructuralError
from delannoy.services.karoubi import (
    SimpleLabel,
    boxtimes_gset,
    center_dimension,
    decompose,
    dual_label_check,
    dual_labels,
    invariants_dim,
    invariants_dim_after_restriction,
    is_iso,
    karoubi_object,
    khom_dim,
    labels_of_length,
    restrict,
    restricted_gset,
    restriction_rule,
    self_dual_labels,
    simple_dimension,
    tensor_decompose,
    verify_restriction_rule,
)
from delannoy.services.ordcomb import GSet, point_set, transitive
from delannoy.services.permcat import compose, morphism


def label(word: str) -> SimpleLabel:
    return SimpleLabel(word=word)


class TestSimpleLabel:
    """Tests for words naming simple objects."""

    def test_parse_unit_spellings(self):
        """∅, 1 and the empty string all name the unit."""
        for text in ("", "∅", "1"):
            assert SimpleLabel.parse(text) == SimpleLabel()

    def test_parse_rejects_other_letters(self):
        """Only a and b are letters."""
        with pytest.raises(InvalidInputError):
            SimpleLabel.parse("abc")

    def test_dual_swaps_letters(self):
        """The dual label swaps a and b."""
        assert label("aab").dual() == label("bba")

    def test_str(self):
        """The unit prints as ∅."""
        assert str(SimpleLabel()) == "∅"
        assert str(label("ab")) == "ab"

    def test_labels_of_length(self):
        """There are 2^n words of length n."""
        assert [str(l) for l in labels_of_length(2)] == ["aa", "ab", "ba", "bb"]


class TestKaroubiObjects:
    """Tests for objects with idempotents."""

    def test_identity_default(self):
        """Without an idempotent the object is C(X) itself."""
        M = karoubi_object(transitive(1), K=QQ)
        assert str(M) == "C(R^1)"
        assert khom_dim(M, M) == 3

    def test_non_idempotent_rejected(self):
        """2 id is not idempotent."""
        X = transitive(1)
        with pytest.raises(StructuralError):
            karoubi_object(X, morphism(X, X, [0, 0, 2], QQ))

    def test_invariants_of_schwartz_space(self):
        """Hom(1, C(X)) has one dimension per orbit."""
        assert invariants_dim(karoubi_object(GSet.of(2, 1, 0), K=QQ)) == 3

    def test_boxtimes_gset(self):
        """Orbits of X ⊠ Y are pairs of orbits."""
        Z = boxtimes_gset(GSet.of(1, 0), transitive(2))
        assert Z.s == 2
        assert [o.arms for o in Z.orbits] == [(1, 2), (0, 2)]


class TestDecomposition:
    """Tests for decompose against the registry."""

    def test_schwartz_space_of_r(self, registry):
        """C(R) = L_a + 1 + L_b."""
        table = decompose(karoubi_object(transitive(1), K=QQ), registry).multiplicities()
        assert table == {"∅": 1, "a": 1, "b": 1}

    def test_schwartz_space_of_r2(self, registry):
        """Multiplicities in C(R^(2)) are binomial in the label length."""
        table = decompose(karoubi_object(transitive(2), K=QQ), registry).multiplicities()
        assert table == {"∅": 1, "a": 2, "b": 2, "aa": 1, "ab": 1, "ba": 1, "bb": 1}

    def test_parts_add_up(self, registry):
        """Isotypic components sum to the idempotent."""
        M = karoubi_object(transitive(2), K=QQ)
        parts = decompose(M, registry).parts
        total = parts[0].component
        for part in parts[1:]:
            total = total + part.component
        assert total == M.idem

    def test_non_transitive_object(self, registry):
        """C(R + pt) = L_a + 2 * 1 + L_b."""
        table = decompose(karoubi_object(GSet.of(1, 0), K=QQ), registry).multiplicities()
        assert table == {"∅": 2, "a": 1, "b": 1}

    def test_registry_too_shallow(self, registry):
        """Objects with longer arms than the registry are refused."""
        with pytest.raises(PreconditionError):
            decompose(karoubi_object(transitive(3), K=QQ), registry)

    def test_center_dimension_counts_labels(self, registry):
        """The center of End(C(R^(2))) has one dimension per distinct label."""
        M = karoubi_object(transitive(2), K=QQ)
        assert center_dimension(M) == len(decompose(M, registry).parts)

    def test_iso_by_tables(self, registry):
        """C(R) is not isomorphic to C(R + pt)."""
        A = karoubi_object(transitive(1), K=QQ)
        B = karoubi_object(GSet.of(1, 0), K=QQ)
        assert is_iso(A, A, registry)
        assert not is_iso(A, B, registry)


class TestDimensions:
    """Tests for the categorical dimension of simples."""

    def test_sign_of_length(self, registry):
        """dim L_w = (-1)^len(w)."""
        for l in registry.labels():
            assert simple_dimension(l, registry) == QQ((-1) ** l.length)


class TestRestriction:
    """Tests for restriction to G(0)."""

    def test_restricted_gset_of_r(self):
        """R splits into R x pt, pt x pt and pt x R."""
        Xr, origins = restricted_gset(transitive(1))
        assert Xr.s == 2
        assert [o.arms for o in Xr.orbits] == [(1, 0), (0, 0), (0, 1)]
        assert [o.placement for o in origins] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def test_coordinate_out_of_range(self):
        """Only existing coordinates can be restricted."""
        with pytest.raises(InvalidInputError):
            restricted_gset(transitive(1), coordinate=1)

    def test_rule_for_ab(self):
        """Res L_ab has the five expected terms."""
        expected = restriction_rule(label("ab"))
        rendered = {tuple(str(l) for l in key): m for key, m in expected.items()}
        assert rendered == {
            ("∅", "ab"): 1,
            ("a", "b"): 1,
            ("ab", "∅"): 1,
            ("∅", "b"): 1,
            ("a", "∅"): 1,
        }

    def test_rule_counts_repeated_deletions(self):
        """Deleting either a of aa gives the same term twice."""
        expected = restriction_rule(label("aa"))
        assert expected[(label("a"), SimpleLabel())] == 2

    def test_verify_up_to_length_two(self, registry):
        """Decomposed restrictions match the rule."""
        for l in registry.labels(2):
            assert verify_restriction_rule(l, registry).passed

    def test_restriction_stays_idempotent(self, registry):
        """Restricting a simple gives an object over G^2."""
        R = restrict(registry.simple(label("a")))
        assert R.s == 2
        assert compose(R.idem, R.idem) == R.idem

    def test_invariants_after_restriction(self, registry):
        """Only simples of length <= 1 acquire invariants under G(0)."""
        assert invariants_dim_after_restriction(SimpleLabel(), registry) == 1
        assert invariants_dim_after_restriction(label("a"), registry) == 1
        assert invariants_dim_after_restriction(label("ab"), registry) == 0


class TestTensorRules:
    """Tests for tensor products of simples."""

    def test_a_tensor_a(self, registry):
        """L_a (x) L_a = L_a + 2 L_aa."""
        assert tensor_decompose(label("a"), label("a"), registry) == {"a": 1, "aa": 2}

    def test_b_tensor_b(self, registry):
        """L_b (x) L_b = L_b + 2 L_bb."""
        assert tensor_decompose(label("b"), label("b"), registry) == {"b": 1, "bb": 2}

    def test_a_tensor_b(self, registry):
        """L_a (x) L_b = 1 + L_a + L_b + L_ab + L_ba."""
        assert tensor_decompose(label("a"), label("b"), registry) == {
            "∅": 1, "a": 1, "b": 1, "ab": 1, "ba": 1,
        }

    def test_unit_is_neutral(self, registry):
        """1 (x) L = L."""
        assert tensor_decompose(SimpleLabel(), label("ab"), registry) == {"ab": 1}


class TestDuality:
    """Tests for duals of simples."""

    def test_dual_is_letter_swap(self, registry):
        """The dual of L_w is L_w with a and b swapped."""
        for l in registry.labels(2):
            assert dual_label_check(l, registry)

    def test_dual_labels_of_a(self, registry):
        """Only L_b pairs with L_a."""
        assert dual_labels(label("a"), registry) == [label("b")]

    def test_only_unit_is_self_dual(self, registry):
        """No simple of positive length is self-dual."""
        assert self_dual_labels(2, registry) == [SimpleLabel()]

    def test_point_object(self, registry):
        """C(pt) is the unit simple."""
        table = decompose(karoubi_object(point_set(1), K=QQ), registry).multiplicities()
        assert table == {"∅": 1}
