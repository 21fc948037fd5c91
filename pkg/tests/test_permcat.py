"""Tests for the permutation category of Schwartz spaces."""

import pytest
from sympy import QQ

from delannoy.errors import PreconditionError, StructuralError
from delannoy.services.ordcomb import GSet, compose_maps, point_set, transitive, transitive_homs
from delannoy.services.permcat import (
    associator,
    braiding,
    compose,
    compose_pullback,
    compose_pushforward,
    diagonal_product,
    dim,
    dsum,
    ev_coev,
    hom_dim,
    hom_space,
    identity,
    is_identity,
    morphism,
    morphism_payload,
    pullback,
    pushforward,
    schwartz_counit,
    schwartz_mult,
    schwartz_unit,
    snake,
    tensor,
    trace_dim,
    transpose,
    zero,
)


class TestMorphisms:
    """Tests for construction and arithmetic of morphisms."""

    def test_identity_on_r(self):
        """The identity of C(R) is the indicator of the diagonal orbit."""
        assert identity(transitive(1), QQ).coeffs == (QQ(0), QQ(0), QQ(1))

    def test_wrong_length_rejected(self):
        """A coefficient vector must match the Hom dimension."""
        with pytest.raises(StructuralError):
            morphism(transitive(1), transitive(1), [1, 2], QQ)

    def test_addition_and_scaling(self):
        """Morphisms form a vector space."""
        f = morphism(transitive(1), transitive(1), [1, 0, 2], QQ)
        g = morphism(transitive(1), transitive(1), [0, 1, 1], QQ)
        assert (f + g).coeffs == (QQ(1), QQ(1), QQ(3))
        assert (f - f).is_zero()
        assert f.scale(QQ(2)) == f + f
        assert -f + f == zero(transitive(1), transitive(1), QQ)

    def test_parallel_required(self):
        """Only parallel morphisms can be added."""
        with pytest.raises(StructuralError):
            identity(transitive(1), QQ) + identity(transitive(2), QQ)

    def test_payload(self):
        """Payloads carry the G-sets and p/q strings."""
        payload = morphism_payload(morphism(transitive(1), transitive(0), [QQ(1, 2)], QQ))
        assert payload.source == "R^1"
        assert payload.target == "R^0"
        assert payload.coeffs == ["1/2"]


class TestHomDimension:
    """Tests for hom_dim."""

    def test_delannoy_table(self):
        """dim Hom(C(R^(n)), C(R^(m))) is the Delannoy number."""
        assert hom_dim(transitive(2), transitive(2)) == 13
        assert hom_dim(transitive(1), transitive(3)) == 7
        assert hom_dim(transitive(0), transitive(4)) == 1

    def test_additive_over_orbits(self):
        """Hom(C(R + pt), C(R)) = Hom(C(R), C(R)) + Hom(C(pt), C(R))."""
        assert hom_dim(GSet.of(1, 0), transitive(1)) == 3 + 1

    def test_hom_space_basis(self):
        """The basis of Hom(C(R), C(R)) is x < y, x > y and x = y."""
        basis = hom_space(transitive(1), transitive(1))
        assert len(basis) == 3
        assert [a.words for a in basis] == [((1, 2),), ((2, 1),), ((3,),)]
        assert len(hom_space(GSet.of(1, 0), transitive(1))) == 4


class TestComposition:
    """Tests for convolution."""

    def test_middle_object_checked(self):
        """Composition needs matching middle objects."""
        with pytest.raises(StructuralError):
            compose(identity(transitive(1), QQ), identity(transitive(2), QQ))

    def test_counit_after_unit_is_mu(self):
        """Integrating the constant function gives mu(R^(n))."""
        for n in range(4):
            X = transitive(n)
            scalar = compose(schwartz_counit(X, QQ), schwartz_unit(X, QQ))
            assert scalar.coeffs == (QQ((-1) ** n),)

    def test_pullbacks_compose_contravariantly(self):
        """(g f)^* = f^* g^*."""
        f = transitive_homs(transitive(2).orbits[0], transitive(1).orbits[0])[0]
        (g,) = transitive_homs(transitive(1).orbits[0], transitive(0).orbits[0])
        assert pullback(compose_maps(g, f), QQ) == compose(pullback(f, QQ), pullback(g, QQ))

    def test_pushforward_is_transpose(self):
        """f_* is the transpose of f^*."""
        (f, _) = transitive_homs(transitive(2).orbits[0], transitive(1).orbits[0])
        assert transpose(pullback(f, QQ)) == pushforward(f, QQ)

    def test_compose_pullback_matches_compose(self):
        """f^* o psi read off pointwise equals the convolution."""
        f = transitive_homs(transitive(2).orbits[0], transitive(1).orbits[0])[0]
        psi = morphism(transitive(1), transitive(1), [1, 2, 3], QQ)
        assert compose_pullback(f, psi) == compose(pullback(f, QQ), psi)

    def test_compose_pushforward_matches_compose(self):
        """psi o f_* read off pointwise equals the convolution."""
        f = transitive_homs(transitive(2).orbits[0], transitive(1).orbits[0])[1]
        psi = morphism(transitive(1), transitive(2), [1, -1, 0, 2, 3], QQ)
        assert compose_pushforward(psi, f) == compose(psi, pushforward(f, QQ))

    def test_pointwise_composites_check_objects(self):
        """The map must meet psi on the shared object."""
        f = transitive_homs(transitive(2).orbits[0], transitive(1).orbits[0])[0]
        psi = identity(transitive(2), QQ)
        with pytest.raises(StructuralError):
            compose_pullback(f, psi)
        with pytest.raises(StructuralError):
            compose_pushforward(psi, f)

    def test_transpose_reverses_composition(self):
        """(g f)^T = f^T g^T."""
        f = morphism(transitive(1), transitive(2), [1, -1, 0, 2, 3], QQ)
        g = morphism(transitive(2), transitive(1), [0, 1, 1, -2, 1], QQ)
        assert transpose(compose(g, f)) == compose(transpose(f), transpose(g))


class TestTensor:
    """Tests for the tensor structure."""

    def test_identity_tensor_identity(self):
        """id (x) id is the identity of the product."""
        X, Y = transitive(1), transitive(2)
        assert is_identity(tensor(identity(X, QQ), identity(Y, QQ)))

    def test_unit_tensor_is_neutral(self):
        """id_1 (x) f = f since pt x X = X."""
        f = morphism(transitive(1), transitive(1), [1, 2, 3], QQ)
        assert tensor(identity(point_set(1), QQ), f) == f
        assert tensor(f, identity(point_set(1), QQ)) == f

    def test_braiding_is_an_involution(self):
        """The symmetry squares to the identity."""
        X, Y = transitive(1), transitive(2)
        assert is_identity(compose(braiding(Y, X, QQ), braiding(X, Y, QQ)))

    def test_associator_is_invertible(self):
        """The associator composed with its transpose is the identity."""
        X = transitive(1)
        a = associator(X, X, X, QQ)
        assert is_identity(compose(transpose(a), a))

    def test_direct_sum_of_identities(self):
        """id + id is the identity of the disjoint union."""
        assert is_identity(dsum(identity(transitive(1), QQ), identity(point_set(1), QQ)))


class TestDuality:
    """Tests for evaluation, coevaluation and traces."""

    def test_snake_identity(self):
        """(ev (x) id)(id (x) coev) is the identity."""
        for X in (point_set(1), transitive(1), transitive(2), GSet.of(1, 0)):
            assert is_identity(snake(X, QQ))

    def test_snake_on_sums(self):
        """The snake identity holds on R + R and R + pt + pt."""
        for X in (GSet.of(1, 1), GSet.of(1, 0, 0)):
            assert is_identity(snake(X, QQ))

    def test_dimensions(self):
        """dim C(R^(n)) = (-1)^n and dim C(R + pt) = 0."""
        for n in range(4):
            assert dim(transitive(n), QQ) == QQ((-1) ** n)
        assert dim(GSet.of(1, 0), QQ) == QQ(0)

    def test_ev_after_coev_is_dimension(self):
        """ev o coev is the categorical dimension."""
        ev, coev = ev_coev(transitive(2), QQ)
        assert compose(ev, coev).coeffs == (dim(transitive(2), QQ),)

    def test_trace_needs_endomorphism(self):
        """Traces are for endomorphisms."""
        with pytest.raises(PreconditionError):
            trace_dim(schwartz_unit(transitive(1), QQ))


class TestSchwartzAlgebra:
    """Tests for the pointwise algebra structure of C(X)."""

    def test_unit_law(self):
        """mult (1 (x) id) = id."""
        X = transitive(2)
        lhs = compose(schwartz_mult(X, QQ), tensor(schwartz_unit(X, QQ), identity(X, QQ)))
        assert is_identity(lhs)

    def test_commutative(self):
        """mult o braiding = mult."""
        X = transitive(1)
        mult = schwartz_mult(X, QQ)
        assert compose(mult, braiding(X, X, QQ)) == mult

    def test_diagonal_product_matches_mult(self):
        """The pointwise product equals mult o (x (x) y)."""
        R = transitive(1)
        x = morphism(R, R, [1, 2, 3], QQ)
        y = morphism(point_set(1), R, [4], QQ)
        expected = compose(schwartz_mult(R, QQ), tensor(x, y))
        product = diagonal_product(x, y)
        assert product.coeffs == expected.coeffs
        assert product.target == expected.target

    def test_diagonal_product_on_two_orbits(self):
        """Pointwise products on C(R + pt) agree with the multiplication."""
        X = GSet.of(1, 0)
        x = morphism(X, X, [1, 0, 2, -1, 3, 1], QQ)
        expected = compose(schwartz_mult(X, QQ), tensor(x, x))
        assert diagonal_product(x, x).coeffs == expected.coeffs

    def test_diagonal_product_needs_common_target(self):
        """Both factors land in the same object."""
        with pytest.raises(StructuralError):
            diagonal_product(identity(transitive(1), QQ), identity(transitive(2), QQ))
