"""Commutative algebra objects in the Karoubi envelope.

An algebra is a Karoubi object A = (C(X), e) with a unit 1 -> A and a
multiplication A (x) A -> A, both stored as morphisms of Schwartz spaces
cut down by e. Schwartz algebras C(X) (pointwise product) are the main
source of examples; everything else in this module is built from them:
invariant algebras Hom(1, A), trace forms and the etale test,
E-idempotents and the subalgebras they classify, relative tensor
products, and the length statistics of restrictions.

All checks are exact identities between coefficient vectors.
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from sympy.polys.matrices import DomainMatrix

from delannoy.config import settings
from delannoy.errors import (
    CounterexampleError,
    InvalidInputError,
    LabelingError,
    PreconditionError,
    ResourceCapError,
    StructuralError,
)
from delannoy.schemas import (
    AdjunctionReport,
    EIdempotentReport,
    EtaleReport,
    InstanceEntry,
    LengthStatsReport,
    PremisesReport,
    RestrictionIdealsReport,
    SubalgebraEntry,
    SubalgebraReport,
    TheoremInstancesReport,
)
from delannoy.services import linalg
from delannoy.services.karoubi import (
    KObject,
    RefinedOrbit,
    SimpleLabel,
    compressed_basis,
    decompose,
    invariants_dim,
    karoubi_object,
    khom_dim,
    length_bounds,
    render_label,
    restrict_morphism,
    restricted_gset,
    self_dual_labels,
    simple_dimension,
)
from delannoy.services.ordcomb import (
    EquivRelation,
    GMap,
    GSet,
    MapComponent,
    OrbitShape,
    closed_orbit_sets,
    diagonal_indices,
    disjoint_union,
    equivalence_relations,
    factor_product_relation,
    kernel_relation,
    point_set,
    power_count,
    product_amalgams,
    product_equivalence_relations,
    product_gset,
    product_layout,
    product_relation,
    quotient,
    shape_of,
    swap_permutation,
    transitive,
    transitive_homs,
    triple_count,
    triple_table,
)
from delannoy.services.permcat import (
    PermMorphism,
    as_object,
    associator,
    associator_map,
    basis_morphism,
    braiding,
    compose,
    compose_all,
    compose_pushforward,
    diagonal_product,
    dsum,
    hom_dim,
    identity,
    is_identity,
    left_matrix,
    morphism_payload,
    pullback,
    right_matrix,
    schwartz_mult,
    schwartz_unit,
    tensor,
    transpose,
    unit_object,
    zero,
)
from delannoy.services.scalars import format_scalar, get_domain

logger = logging.getLogger(__name__)

UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class AlgebraObject:
    """A commutative unital algebra on a Karoubi object.

    ``pointwise`` marks Schwartz algebras, whose products of generalized
    elements are computed by :func:`diagonal_product`.
    """

    carrier: KObject
    unit: PermMorphism
    mult: PermMorphism
    name: str = ""
    pointwise: bool = False

    @property
    def base(self) -> GSet:
        return self.carrier.base

    @property
    def idem(self) -> PermMorphism:
        return self.carrier.idem

    @property
    def domain(self):
        return self.carrier.domain

    @property
    def s(self) -> int:
        return self.carrier.s

    def __str__(self) -> str:
        return self.name or str(self.carrier)


def schwartz_algebra(X: GSet, K=None) -> AlgebraObject:
    """C(X) with pointwise multiplication and the constant function as unit."""
    K = K if K is not None else get_domain()
    return AlgebraObject(
        carrier=karoubi_object(X, K=K),
        unit=schwartz_unit(X, K),
        mult=schwartz_mult(X, K),
        name=f"C({X})",
        pointwise=True,
    )


def multiply(A: AlgebraObject, x: PermMorphism, y: PermMorphism) -> PermMorphism:
    """The product mult o (x (x) y) of generalized elements x, y of A."""
    if A.pointwise:
        return diagonal_product(x, y)
    return compose(A.mult, tensor(x, y))


def subalgebra(B: AlgebraObject, idem: PermMorphism, name: str = "") -> AlgebraObject:
    """The subobject (C(X), idem) of B with the restricted multiplication.

    Raises:
        PreconditionError: If the image of idem is not closed under the
            multiplication or does not contain the unit.
    """
    restricted = compose(B.mult, tensor(idem, idem))
    mult = compose(idem, restricted)
    if mult != restricted:
        raise PreconditionError(f"{name or 'subobject'} is not closed under multiplication")
    if compose(idem, B.unit) != B.unit:
        raise PreconditionError(f"{name or 'subobject'} does not contain the unit")
    return AlgebraObject(
        carrier=karoubi_object(B.carrier.ambient, idem),
        unit=B.unit,
        mult=mult,
        name=name,
    )


def restricted_algebra(A: AlgebraObject, coordinate: int = 0, pins: int = 1) -> AlgebraObject:
    """Restriction of a Schwartz algebra to the stabilizer of ``pins`` points.

    Raises:
        PreconditionError: If A is not a Schwartz algebra.
    """
    if not is_identity(A.idem):
        raise PreconditionError("restriction of algebras is computed for Schwartz algebras")
    Xr, _ = restricted_gset(A.base, coordinate, pins)
    return schwartz_algebra(Xr, A.domain)


def check_axioms(A: AlgebraObject) -> Dict[str, bool]:
    """Commutativity, unit laws and associativity.

    Associativity compares (e e) e with e (e e) moved along the associator
    bijection, where e is the carrier idempotent as a generalized element.

    Raises:
        ResourceCapError: If A is not pointwise and the composite over
            X^6 exceeds RELATION_MAX_TRIPLES.
    """
    X, K, e = A.base, A.domain, A.idem
    results: Dict[str, bool] = {
        "commutative": compose(A.mult, braiding(X, X, K)) == A.mult,
        "left_unit": compose(A.mult, tensor(A.unit, e)) == e,
        "right_unit": compose(A.mult, tensor(e, A.unit)) == e,
    }
    if not A.pointwise:
        count = power_count(X, 6)
        if count > settings.RELATION_MAX_TRIPLES:
            raise ResourceCapError(
                f"associativity of {A} needs {count} orbits, above RELATION_MAX_TRIPLES"
            )
    square = multiply(A, e, e)
    lhs = multiply(A, square, e)
    rhs = compose_pushforward(multiply(A, e, square), associator_map(X, X, X))
    results["associative"] = lhs == rhs
    failed = [law for law, ok in results.items() if not ok]
    if failed:
        logger.warning("%s violates %s", A, ", ".join(failed))
    return results


# ---------------------------------------------------------------------------
# Invariants Hom(1, A)


@dataclass
class FiniteAlgebra:
    """Hom(1, A) as a finite-dimensional commutative algebra.

    ``structure[i][j]`` holds the coordinates of b_i * b_j in the basis.
    """

    domain: object
    basis: List[PermMorphism]
    structure: List[List[List]]
    unit: List

    @property
    def dim(self) -> int:
        return len(self.basis)

    def product(self, x: Sequence, y: Sequence) -> List:
        K = self.domain
        out = [K.zero] * self.dim
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                c = xi * yj
                for k, value in enumerate(self.structure[i][j]):
                    if value:
                        out[k] += c * value
        return out

    def element(self, x: Sequence) -> PermMorphism:
        """The morphism 1 -> C(X) with coordinates x in the basis."""
        first = self.basis[0]
        coeffs = linalg.combine(x, [b.coeffs for b in self.basis], self.domain, len(first.coeffs))
        return PermMorphism(first.source, first.target, tuple(coeffs), self.domain)


def gamma(A: AlgebraObject) -> FiniteAlgebra:
    """Basis, structure constants and unit of Hom(1, A).

    Raises:
        StructuralError: If a product leaves Hom(1, A) (A is not an algebra).
    """
    K = A.domain
    basis = compressed_basis(identity(point_set(A.s), K), A.idem)
    size = len(A.base.orbits)
    coordinates_matrix = linalg.from_columns([b.coeffs for b in basis], K, size)

    def coordinates(phi: PermMorphism) -> List:
        if not basis:
            return []
        x = linalg.solve(coordinates_matrix, phi.coeffs)
        if x is None:
            raise StructuralError(f"element outside Hom(1, {A})")
        return x

    structure = [[coordinates(multiply(A, bi, bj)) for bj in basis] for bi in basis]
    return FiniteAlgebra(K, basis, structure, coordinates(A.unit))


def _powers(algebra: FiniteAlgebra, x: Sequence):
    v = list(algebra.unit)
    while True:
        yield v
        v = algebra.product(x, v)


def gamma_is_field(A: AlgebraObject) -> bool:
    """Decide whether Hom(1, A) is a field.

    A trial element with a reducible minimal polynomial exhibits zero
    divisors; one with an irreducible minimal polynomial of full degree
    generates a field equal to the whole algebra.

    Raises:
        PreconditionError: If MIN_POLY_TRIALS elements decide neither way.
    """
    algebra = gamma(A)
    if algebra.dim == 0:
        return False
    if algebra.dim == 1:
        return True
    K = algebra.domain
    rng = random.Random(settings.RANDOM_SEED)
    for _ in range(settings.MIN_POLY_TRIALS):
        x = [K.convert(rng.randint(-3, 3)) for _ in range(algebra.dim)]
        poly, _ = linalg.minimal_polynomial(_powers(algebra, x), K, algebra.dim)
        if not linalg.is_irreducible(poly):
            return False
        if poly.degree() == algebra.dim:
            return True
    raise PreconditionError(
        f"Hom(1, {A}) undecided after {settings.MIN_POLY_TRIALS} trial elements"
    )


def primitive_idempotents(algebra: FiniteAlgebra) -> List[List]:
    """Coordinates of the primitive idempotents of a split semisimple algebra.

    A trial element whose minimal polynomial has dim distinct roots in K
    generates the algebra; the Lagrange polynomials at those roots give the
    idempotents.

    Raises:
        PreconditionError: If no trial element has a split squarefree
            minimal polynomial of full degree.
    """
    if algebra.dim == 0:
        return []
    K = algebra.domain
    rng = random.Random(settings.RANDOM_SEED)
    spread = 8 * algebra.dim
    for trial in range(settings.MIN_POLY_TRIALS):
        x = [K.convert(rng.randint(-spread, spread)) for _ in range(algebra.dim)]
        try:
            poly, powers = linalg.minimal_polynomial(_powers(algebra, x), K, algebra.dim)
        except ArithmeticError:
            continue
        roots = linalg.linear_roots(poly)
        if roots is None or len(roots) != algebra.dim:
            logger.info("Trial %d: minimal polynomial %s does not split", trial, poly)
            continue
        return [
            linalg.combine(linalg.lagrange_coefficients(roots, i, K), powers, K, algebra.dim)
            for i in range(algebra.dim)
        ]
    raise PreconditionError(
        f"no splitting element after {settings.MIN_POLY_TRIALS} trial elements"
    )


# ---------------------------------------------------------------------------
# Trace forms


def trace_map(A: AlgebraObject) -> PermMorphism:
    """epsilon_A: A -> 1, the trace of multiplication by an element.

    Multiplication by x composed with e has value e(diag O) * x(O) on the
    diagonal over O, so the trace is the functional with coefficient
    e(diag O) at O, compressed by e.
    """
    X, K, e = A.base, A.domain, A.idem
    d = PermMorphism(
        as_object(X),
        unit_object(X.s),
        tuple(e.coeffs[i] for i in diagonal_indices(X)),
        K,
    )
    return compose(d, e)


def trace_form(A: AlgebraObject, functional: Optional[PermMorphism] = None) -> PermMorphism:
    """(x, y) -> functional(xy) as a morphism A (x) A -> 1 (epsilon_A by default)."""
    functional = functional if functional is not None else trace_map(A)
    return compose(functional, A.mult)


def trace_map_and_form(A: AlgebraObject) -> Tuple[PermMorphism, PermMorphism]:
    epsilon = trace_map(A)
    return epsilon, compose(epsilon, A.mult)


def udim(A: AlgebraObject):
    """epsilon_A(1)."""
    return compose(trace_map(A), A.unit).coeffs[0]


def _induced_map(A: AlgebraObject, form: PermMorphism) -> PermMorphism:
    """The morphism A -> A^dual with kernel beta(y, x) = B(x, y)."""
    X = A.base
    permutation = swap_permutation(X, X)
    coeffs = tuple(form.coeffs[permutation[i]] for i in range(len(permutation)))
    return PermMorphism(as_object(X), as_object(X), coeffs, A.domain)


def _perfect(A: AlgebraObject, form: PermMorphism) -> Tuple[bool, Optional[PermMorphism]]:
    """Whether a bilinear form on A is perfect, with a kernel element if not."""
    X, K, e = A.base, A.domain, A.idem
    beta = _induced_map(A, form)
    e_dual = transpose(e)
    solution = linalg.solve(right_matrix(beta, X), list(e.coeffs))
    if solution is not None:
        candidate = PermMorphism(as_object(X), as_object(X), tuple(solution), K)
        inverse = compose_all(e, candidate, e_dual)
        if compose(beta, inverse) == e_dual and compose(inverse, beta) == e:
            return True, None
    if is_identity(e):
        size = product_layout((X, X)).size
        vectors = [[K.one if i == j else K.zero for i in range(size)] for j in range(size)]
    else:
        vectors, _ = linalg.column_basis(left_matrix(e, X))
    killed = left_matrix(beta, X).to_dense().matmul(
        linalg.from_columns(vectors, K, len(e.coeffs))
    )
    kernel = linalg.nullspace(killed)
    witness = None
    if kernel:
        coeffs = linalg.combine(kernel[0], vectors, K, len(e.coeffs))
        witness = PermMorphism(as_object(X), as_object(X), tuple(coeffs), K)
    return False, witness


def is_etale(A: AlgebraObject) -> bool:
    """True when the trace form is a perfect pairing."""
    return _perfect(A, trace_form(A))[0]


def etale_report(A: AlgebraObject) -> EtaleReport:
    K = A.domain
    form = trace_form(A)
    perfect, witness = _perfect(A, form)
    logger.info("%s is %setale", A, "" if perfect else "not ")
    return EtaleReport(
        algebra=str(A),
        etale=perfect,
        udim=format_scalar(K, udim(A)),
        gamma_dim=gamma(A).dim,
        form=[format_scalar(K, c) for c in form.coeffs],
        witness=[format_scalar(K, c) for c in witness.coeffs] if witness is not None else None,
    )


def frobenius_check(A: AlgebraObject, functional: PermMorphism) -> bool:
    """Whether (x, y) -> functional(xy) is perfect, i.e. (A, functional) is Frobenius."""
    if functional.source != A.carrier.ambient or functional.Y != point_set(A.s):
        raise StructuralError("the functional must be a morphism A -> 1")
    return _perfect(A, trace_form(A, functional))[0]


# ---------------------------------------------------------------------------
# E-idempotents and etale subalgebras


@dataclass(frozen=True)
class EIdempotent:
    """An E-idempotent of C(X), stored as its orbit support in X x X."""

    base: GSet
    orbit_set: Tuple[int, ...]
    gamma: PermMorphism

    @property
    def relation(self) -> EquivRelation:
        return EquivRelation(base=self.base, orbit_set=self.orbit_set)


def is_e_idempotent(X: GSet, element: PermMorphism) -> bool:
    """Check an element of Hom(1, C(X x X)) against the E-idempotent conditions.

    Products in Hom(1, C(X x X)) are pointwise, and the multiplication of
    C(X) is the pullback along the diagonal, so mult(gamma) reads gamma on
    the diagonal orbits.
    """
    K = element.domain
    v = element.coeffs
    if any(c * c != c for c in v):
        return False
    if any(v[d] != K.one for d in diagonal_indices(X)):
        return False
    permutation = swap_permutation(X, X)
    if any(v[permutation[i]] != v[i] for i in range(len(v))):
        return False
    table = triple_table(X, X, X)
    for ab, bc, ac in zip(table.ab, table.bc, table.ac):
        x, y, z = v[ab], v[bc], v[ac]
        if not x * y == x * z == z * y:
            return False
    return True


def e_idempotents(X: GSet, K=None) -> List[EIdempotent]:
    """All E-idempotents of C(X), as 0/1 vectors over the orbits of X x X.

    Raises:
        ResourceCapError: If X exceeds the relation caps.
        CounterexampleError: If an enumerated support fails the conditions.
    """
    K = K if K is not None else get_domain()
    XX = product_gset(X, X)
    size = len(XX.orbits)
    found = []
    for members in closed_orbit_sets(X, "triangle"):
        chosen = set(members)
        coeffs = tuple(K.one if i in chosen else K.zero for i in range(size))
        element = PermMorphism(unit_object(X.s), as_object(XX), coeffs, K)
        if not is_e_idempotent(X, element):
            raise CounterexampleError(f"orbit set {members} of {X} is not an E-idempotent")
        found.append(EIdempotent(X, tuple(members), element))
    logger.info("Found %d E-idempotents of C(%s)", len(found), X)
    return found


def e_idempotent_report(n: int, K=None) -> EIdempotentReport:
    X = transitive(n)
    idems = e_idempotents(X, K)
    relations = equivalence_relations(X)
    supports = sorted(idem.orbit_set for idem in idems)
    return EIdempotentReport(
        n=n,
        count=len(idems),
        relations=[list(s) for s in supports],
        bijection=supports == sorted(r.orbit_set for r in relations),
    )


@dataclass(frozen=True)
class Subalgebra:
    """An etale subalgebra C(R^(m)) of C(R^(n)) and its embedding."""

    m: int
    coordinates: Tuple[int, ...]
    idempotent: EIdempotent
    quotient_map: GMap
    embedding: PermMorphism


def etale_subalgebras(n: int, K=None) -> List[Subalgebra]:
    """The lattice of etale subalgebras of C(R^(n)), largest first.

    Each E-idempotent is the indicator of an equivalence relation; the
    quotient map X -> X/R pulls C(X/R) back into C(X).
    """
    if n < 0:
        raise InvalidInputError(f"negative arm length {n}")
    K = K if K is not None else get_domain()
    X = transitive(n)
    found = []
    for idem in e_idempotents(X, K):
        target, f = quotient(X, idem.relation)
        found.append(
            Subalgebra(
                m=target.orbits[0].total,
                coordinates=tuple(j - 1 for j in f.components[0].injections[0]),
                idempotent=idem,
                quotient_map=f,
                embedding=pullback(f, K),
            )
        )
    found.sort(key=lambda sub: (-sub.m, sub.coordinates))
    return found


def subalgebra_report(n: int, K=None) -> SubalgebraReport:
    subs = etale_subalgebras(n, K)
    return SubalgebraReport(
        n=n,
        count=len(subs),
        subalgebras=[
            SubalgebraEntry(
                m=sub.m,
                coordinates=list(sub.coordinates),
                relation=list(sub.idempotent.orbit_set),
            )
            for sub in subs
        ],
    )


def subetale_example(registry) -> AlgebraObject:
    """L_a + 1 inside C(R), closed under multiplication but not etale."""
    B = schwartz_algebra(transitive(1), registry.domain)
    parts = {part.labels: part for part in decompose(B.carrier, registry).parts}
    idem = parts[(SimpleLabel(),)].component + parts[(SimpleLabel(word="a"),)].component
    return subalgebra(B, idem, name="L_a + 1")


# ---------------------------------------------------------------------------
# Relative tensor products


def _fiber_projections(f: GMap) -> Tuple[GSet, GMap, GMap]:
    """Y x_X Y for f: Y -> X and its two projections to Y."""
    Y = f.source
    amalgams = product_amalgams((Y, Y))
    members = kernel_relation(f).orbit_set
    Z = GSet(orbits=tuple(shape_of(amalgams[k]) for k in members), s=Y.s)

    def projection(bit: int) -> GMap:
        return GMap(
            source=Z,
            target=Y,
            components=tuple(
                MapComponent(
                    target_orbit=amalgams[k].orbits[bit],
                    injections=tuple(
                        tuple(j + 1 for j, mask in enumerate(word) if mask >> bit & 1)
                        for word in amalgams[k].words
                    ),
                )
                for k in members
            ),
        )

    return Z, projection(0), projection(1)


def _nullity(M: DomainMatrix) -> int:
    return M.shape[1] - linalg.rank(M)


def _pullback_map(A: AlgebraObject, B: AlgebraObject, inclusion: PermMorphism) -> Optional[GMap]:
    """A G-map f: Y -> X with inclusion = f^*, when A and B are Schwartz algebras."""
    X, Y = A.base, B.base
    if not (A.pointwise and B.pointwise and X.is_transitive and Y.is_transitive):
        return None
    for f in transitive_homs(Y.orbits[0], X.orbits[0]):
        if pullback(f, B.domain) == inclusion:
            logger.info("%s -> %s is the pullback along %s", A, B, f.components[0].injections)
            return f
    return None


def relative_tensor_exactness(
    A: AlgebraObject,
    B: AlgebraObject,
    inclusion: PermMorphism,
    along: Optional[GMap] = None,
    detect_pullback: bool = True,
) -> bool:
    """Exactness of 0 -> A -> B -> B (x)_A B at B, with j(x) = x (x) 1 - 1 (x) x.

    When ``along`` is a G-map f: Y -> X with inclusion = f^*, B (x)_A B is
    the Schwartz space of the fiber product Y x_X Y and j = pr1^* - pr2^*.
    Between Schwartz algebras on transitive G-sets such an f is looked up
    among the G-maps Y -> X unless ``detect_pullback`` is False.
    Otherwise B (x)_A B is the cokernel of the two actions
    B (x) A (x) B -> B (x) B. Both sides are compared through Hom(T, -) for
    a test object T = C(R^(k)) containing every simple of B.

    Raises:
        StructuralError: If the inclusion does not run from A to B.
        PreconditionError: If the inclusion is not an algebra homomorphism.
        ResourceCapError: If the cokernel presentation exceeds RELATION_MAX_TRIPLES.
    """
    if inclusion.source != A.carrier.ambient or inclusion.target != B.carrier.ambient:
        raise StructuralError("the inclusion must be a morphism A -> B")
    K = B.domain
    i = compose_all(B.idem, inclusion, A.idem)
    if compose(i, A.mult) != multiply(B, i, i) or compose(i, A.unit) != B.unit:
        raise PreconditionError(f"{A} -> {B} is not an algebra homomorphism")
    Y, X = B.base, A.base
    if along is None and detect_pullback:
        along = _pullback_map(A, B, inclusion)
    T = GSet.of(length_bounds(B.carrier))
    if along is not None:
        _, pr1, pr2 = _fiber_projections(along)
        j = pullback(pr1, K) - pullback(pr2, K)
        boundary = None
    else:
        YY = product_gset(Y, Y)
        YXY = product_gset(product_gset(Y, X), Y)
        count = triple_count(YY, YXY, T)
        if count > settings.RELATION_MAX_TRIPLES:
            raise ResourceCapError(
                f"{count} triple orbits exceed RELATION_MAX_TRIPLES={settings.RELATION_MAX_TRIPLES}"
            )
        right_action = compose(B.mult, tensor(B.idem, i))
        left_action = compose(B.mult, tensor(i, B.idem))
        boundary = tensor(right_action, B.idem) - compose(
            tensor(B.idem, left_action), associator(Y, X, Y, K)
        )
        j = tensor(B.idem, B.unit) - tensor(B.unit, B.idem)
    image = linalg.rank(left_matrix(i, T))
    injective = image == khom_dim(karoubi_object(T, K=K), A.carrier)
    if is_identity(B.idem):
        size = product_layout((Y, T)).size
        vectors = [[K.one if r == c else K.zero for r in range(size)] for c in range(size)]
    else:
        vectors, _ = linalg.column_basis(left_matrix(B.idem, T))
    restricted_j = left_matrix(j, T).to_dense().matmul(
        linalg.from_columns(vectors, K, product_layout((Y, T)).size)
    )
    if boundary is None:
        kernel = _nullity(restricted_j)
    else:
        relations = left_matrix(boundary, T).to_dense()
        kernel = _nullity(restricted_j.hstack(relations)) - _nullity(relations)
    exact = injective and kernel == image
    logger.info(
        "Relative tensor sequence for %s in %s: image %d, kernel %d, exact=%s",
        A, B, image, kernel, exact,
    )
    return exact


# ---------------------------------------------------------------------------
# Simplicity


def is_simple_multfree(A: AlgebraObject, registry) -> Union[bool, str]:
    """Decide simplicity where a finite procedure exists.

    With a multiplicity-free carrier every ideal is a sum of isotypic
    parts, so all part subsets are tested for absorbing the
    multiplication. An etale algebra is simple iff Hom(1, A) is a field.

    Returns:
        True, False, or ``"undetermined"``.
    """
    if A.idem.is_zero():
        return False
    parts = decompose(A.carrier, registry).parts
    if all(part.multiplicity <= 1 for part in parts):
        for size in range(1, len(parts)):
            for subset in itertools.combinations(parts, size):
                ideal = zero(A.carrier.ambient, A.carrier.ambient, A.domain)
                for part in subset:
                    ideal = ideal + part.component
                rest = A.idem - ideal
                if compose_all(rest, A.mult, tensor(A.idem, ideal)).is_zero():
                    logger.info(
                        "%s has the proper ideal %s",
                        A, ", ".join(render_label(part.labels) for part in subset),
                    )
                    return False
        return True
    if is_etale(A):
        try:
            return gamma_is_field(A)
        except PreconditionError:
            return UNDETERMINED
    return UNDETERMINED


# ---------------------------------------------------------------------------
# Restriction machinery


def _orbit_name(shape: OrbitShape, refined: RefinedOrbit) -> str:
    return f"{GSet.of(shape)} {list(refined.placement)}"


def require_restriction_range(n: int) -> None:
    """Raises PreconditionError unless 1 <= n <= 3."""
    if not 1 <= n <= 3:
        raise PreconditionError("restriction ideals are computed for 1 <= n <= 3")


def _top_summands(Xr: GSet, n: int, registry) -> Tuple[PermMorphism, PermMorphism, List[str], List[str]]:
    """Components of C(Xr) labelled (∅, μ) and (λ, ∅) with |μ| = |λ| = n.

    C(Xr) is the sum of the Schwartz spaces of its orbits, so the
    isotypic components are assembled orbit by orbit.
    """
    K = registry.domain
    p: Optional[PermMorphism] = None
    q: Optional[PermMorphism] = None
    p_labels, q_labels = set(), set()
    for shape in Xr.orbits:
        M = karoubi_object(GSet(orbits=(shape,), s=Xr.s), K=K)
        p_part = q_part = zero(M.ambient, M.ambient, K)
        for part in decompose(M, registry).parts:
            left, right = part.labels
            if left.length == 0 and right.length == n:
                p_part = p_part + part.component
                p_labels.add(render_label(part.labels))
            elif left.length == n and right.length == 0:
                q_part = q_part + part.component
                q_labels.add(render_label(part.labels))
        if compose(p_part, p_part) != p_part or compose(q_part, q_part) != q_part:
            raise LabelingError(f"top-length summands of C({M.base}) are not idempotents")
        p = p_part if p is None else dsum(p, p_part)
        q = q_part if q is None else dsum(q, q_part)
    whole = as_object(Xr)
    return (
        PermMorphism(whole, whole, p.coeffs, K),
        PermMorphism(whole, whole, q.coeffs, K),
        sorted(p_labels),
        sorted(q_labels),
    )


def _multiplication_by(A: AlgebraObject, algebra: FiniteAlgebra, x: Sequence) -> PermMorphism:
    """The endomorphism a -> x a of a Schwartz algebra A for x in Hom(1, A)."""
    product = multiply(A, algebra.element(x), A.idem)
    return PermMorphism(A.carrier.ambient, A.carrier.ambient, product.coeffs, A.domain)


def _generated_ideal(
    A: AlgebraObject, algebra: FiniteAlgebra, idempotents: List[List], generator: PermMorphism
) -> List:
    """Unit of the ideal generated by a summand, in Hom(1, A) coordinates.

    A primitive idempotent either kills the current generator or its
    factor lies in the image of mult(A (x) generator). The generator is
    replaced by multiplication with the unit found until that unit is stable.
    """
    K = algebra.domain
    unit = [K.zero] * algebra.dim
    source = generator
    while True:
        found = [K.zero] * algebra.dim
        for eps in idempotents:
            if not multiply(A, algebra.element(eps), source).is_zero():
                found = [a + b for a, b in zip(found, eps)]
        if found == unit:
            return unit
        unit = found
        source = _multiplication_by(A, algebra, unit)


def restriction_ideals(n: int, registry) -> RestrictionIdealsReport:
    """The ideals p and q of C(R^(n)) restricted to G(0).

    P and Q are the summands of A' = Res C(R^(n)) labelled (∅, μ) and
    (λ, ∅) with |λ| = |μ| = n. The ideals they generate are read off in
    Hom(1, A'), whose primitive idempotents split the etale algebra A' into
    simple factors. The case and the quotient A'/(p + q) follow from the
    unit of p + q.

    Raises:
        PreconditionError: If n is outside 1..3 or A' is not etale.
        LabelingError: If P or Q is not an idempotent.
    """
    require_restriction_range(n)
    K = registry.domain
    A = restricted_algebra(schwartz_algebra(transitive(n), K))
    Xr, origins = restricted_gset(transitive(n), 0, 1)
    P, Q, p_labels, q_labels = _top_summands(Xr, n, registry)
    if not is_etale(A):
        raise PreconditionError(f"{A} is not etale")
    algebra = gamma(A)
    idempotents = primitive_idempotents(algebra)
    p = _generated_ideal(A, algebra, idempotents, P)
    q = _generated_ideal(A, algebra, idempotents, Q)
    pq = algebra.product(p, q)
    pq_zero = multiply(A, P, Q).is_zero() and not any(pq)
    rest = [u - (a + b - c) for u, a, b, c in zip(algebra.unit, p, q, pq)]
    quotient_is_unit = False
    if any(rest):
        M = karoubi_object(Xr, _multiplication_by(A, algebra, rest))
        quotient_is_unit = khom_dim(M, M) == 1 and invariants_dim(M) == 1

    def names(x: Sequence) -> List[str]:
        values = algebra.element(x).coeffs
        return [_orbit_name(Xr.orbits[o], origins[o]) for o, c in enumerate(values) if c]

    logger.info(
        "Restriction ideals of C(R^%d): p from %s, q from %s, pq = 0: %s",
        n, ", ".join(p_labels), ", ".join(q_labels), pq_zero,
    )
    return RestrictionIdealsReport(
        n=n,
        case="a" if any(rest) else "b",
        p_summands=p_labels,
        q_summands=q_labels,
        p_orbits=names(p),
        q_orbits=names(q),
        quotient_orbits=names(rest),
        pq_zero=pq_zero,
        quotient_is_unit=quotient_is_unit,
    )


def length_stats(M: KObject, registry, name: str = "") -> LengthStatsReport:
    """Largest label lengths of M per factor and in total, and the top part T_n."""
    table = {labels: m for labels, m in decompose(M, registry).label_multiset().items() if m}
    lengths = [
        max((labels[c].length for labels in table), default=0) for c in range(M.s)
    ]
    total = max((sum(label.length for label in labels) for labels in table), default=0)
    top = {
        labels: m for labels, m in table.items() if any(label.length >= total for label in labels)
    }
    return LengthStatsReport(
        object=name or str(M),
        lengths=lengths,
        total=total,
        top_summands={render_label(labels): m for labels, m in top.items()},
        top_count=sum(top.values()),
    )


def invariant_component(B: AlgebraObject, factor: int) -> AlgebraObject:
    """Hom over one group factor from 1 into a Schwartz algebra over G^s.

    That factor acts transitively on every fiber of an orbit, so the
    invariants are the functions on the orbits with the factor's
    coordinate dropped.

    Raises:
        PreconditionError: If B is not a Schwartz algebra over at least two factors.
        InvalidInputError: If the factor is out of range.
    """
    if not is_identity(B.idem):
        raise PreconditionError("invariant components are computed for Schwartz algebras")
    X = B.base
    if X.s < 2:
        raise PreconditionError("invariant components need at least two group factors")
    if not 0 <= factor < X.s:
        raise InvalidInputError(f"factor {factor} out of range for s={X.s}")
    dropped = GSet(
        orbits=tuple(
            OrbitShape(arms=shape.arms[:factor] + shape.arms[factor + 1:]) for shape in X.orbits
        ),
        s=X.s - 1,
    )
    return schwartz_algebra(dropped, B.domain)


# ---------------------------------------------------------------------------
# Adjunction Hom_G(A, C(G/U)) = Hom_U(Res A, 1)


def _placement(word: Sequence[int], pins: int) -> Tuple[int, ...]:
    """Slot counts of the x points (bit 1) around the t points (bit 0)."""
    gaps = [0] * (pins + 1)
    on_pin = [0] * pins
    j = 0
    for mask in word:
        if mask & 1:
            if mask & 2:
                on_pin[j] = 1
            j += 1
        else:
            gaps[j] += 1
    placement: List[int] = []
    for k in range(pins):
        placement += [gaps[k], on_pin[k]]
    return tuple(placement + [gaps[pins]])


def _require_transfer_input(A: AlgebraObject, pins: int) -> None:
    if A.s != 1 or not is_identity(A.idem) or not A.base.is_transitive:
        raise PreconditionError("the transfer is computed for C(R^(n)) over a single group")
    if not 1 <= pins <= 2:
        raise PreconditionError("U must fix one or two points")


def point_evaluation(
    A: AlgebraObject, pins: int, occupied: Optional[Sequence[int]] = None
) -> PermMorphism:
    """Evaluation of Res A at the point whose coordinates sit on the given pins."""
    _require_transfer_input(A, pins)
    n = A.base.orbits[0].total
    occupied = tuple(range(n)) if occupied is None else tuple(occupied)
    if len(occupied) != n or list(occupied) != sorted(set(occupied)) or any(
        not 0 <= j < pins for j in occupied
    ):
        raise InvalidInputError(f"cannot place {n} coordinates on pins {occupied}")
    placement = [0] * (2 * pins + 1)
    for j in occupied:
        placement[2 * j + 1] = 1
    Xr, origins = restricted_gset(A.base, 0, pins)
    index = origins.index(RefinedOrbit(orbit=0, placement=tuple(placement)))
    return basis_morphism(Xr, point_set(pins + 1), index, A.domain)


def adjunction_transfer(
    A: AlgebraObject, pins: int, f: PermMorphism
) -> Tuple[PermMorphism, AdjunctionReport]:
    """Turn an algebra map f: Res_U(A) -> 1 into g: A -> C(G/U), U = G(pins points).

    g(t, x) is f at the refined orbit of x relative to the points t.

    Raises:
        PreconditionError: If A is not C(R^(n)), pins is not 1 or 2, or f
            is not an algebra homomorphism.
    """
    _require_transfer_input(A, pins)
    K = A.domain
    X = A.base
    restricted = restricted_algebra(A, 0, pins)
    Xr = restricted.base
    pt = point_set(pins + 1)
    if f.source != as_object(Xr) or f.Y != pt:
        raise StructuralError("f must be a morphism Res A -> 1")
    if compose(f, restricted.mult) != tensor(f, f) or compose(f, restricted.unit) != identity(pt, K):
        raise PreconditionError("f is not an algebra homomorphism")
    _, origins = restricted_gset(X, 0, pins)
    index = {origin: k for k, origin in enumerate(origins)}
    T = transitive(pins)
    coeffs = []
    for amalgam in product_amalgams((T, X)):
        refined = RefinedOrbit(orbit=amalgam.orbits[1], placement=_placement(amalgam.words[0], pins))
        coeffs.append(f.coeffs[index[refined]])
    g = PermMorphism(as_object(X), as_object(T), tuple(coeffs), K)

    Tr, t_origins = restricted_gset(T, 0, pins)
    base_point = RefinedOrbit(orbit=0, placement=(0, 1) * pins + (0,))
    evaluation = basis_morphism(Tr, pt, t_origins.index(base_point), K)
    round_trip = compose(evaluation, restrict_morphism(g, 0, pins)) == f
    homomorphism = (
        compose(g, A.mult) == compose(schwartz_mult(T, K), tensor(g, g))
        and compose(g, A.unit) == schwartz_unit(T, K)
    )
    if not (round_trip and homomorphism):
        logger.warning("Transfer for %s over %d pins: round trip %s, homomorphism %s",
                       A, pins, round_trip, homomorphism)
    report = AdjunctionReport(
        algebra=str(A),
        pins=pins,
        morphism=morphism_payload(g),
        round_trip=round_trip,
        homomorphism=homomorphism,
    )
    return g, report


# ---------------------------------------------------------------------------
# Further checks


def unit_multiplicity(A: AlgebraObject) -> int:
    """Multiplicity of the unit object in A."""
    return invariants_dim(A.carrier)


def simple_etale_premises(max_length: int, registry) -> PremisesReport:
    """Only L_∅ is self-dual and no simple has dimension -1/2."""
    K = registry.domain
    self_dual = self_dual_labels(max_length, registry)
    dims = {label: simple_dimension(label, registry) for label in registry.labels(max_length)}
    half = None if K.characteristic() == 2 else -K.one / K.convert(2)
    passed = self_dual == [SimpleLabel()] and all(d != half for d in dims.values())
    return PremisesReport(
        max_length=max_length,
        self_dual=[str(label) for label in self_dual],
        dimensions={str(label): format_scalar(K, d) for label, d in dims.items()},
        passed=passed,
    )


def etale_summand_check(n: int, m: int, K=None) -> bool:
    """C(R^(n)) x C(R^(m)) = C(R^(n) + R^(m)) is etale iff both factors are."""
    whole = schwartz_algebra(disjoint_union(transitive(n), transitive(m)), K)
    factors = is_etale(schwartz_algebra(transitive(n), K)) and is_etale(
        schwartz_algebra(transitive(m), K)
    )
    return is_etale(whole) == factors


def _embedding_is_injective(sub: Subalgebra) -> bool:
    Q = sub.embedding.X
    return linalg.rank(left_matrix(sub.embedding, Q)) == hom_dim(Q, Q)


class SplitClassification(NamedTuple):
    """Equivalence relations on R^(n) ⊠ R^(m) over G x G and their quotients."""

    relations: List[EquivRelation]
    shapes: List[Tuple[int, int]]
    factored: bool
    confirmed: bool


def split_classification(n: int, m: int) -> SplitClassification:
    """Classify the stable equivalence relations on R^(n) ⊠ R^(m).

    The relations come from :func:`product_equivalence_relations`, which
    searches the two factors only. Every relation is factored back into
    R1 x R2, and the quotient shapes are read off the factors. When the
    product itself is within the relation caps, a direct search on it must
    find the same relations, and ``confirmed`` is set.

    Raises:
        CounterexampleError: If some relation is not a product.
        ResourceCapError: If a factor exceeds the relation caps.
    """
    X, Y = transitive(n), transitive(m)
    relations = product_equivalence_relations(X, Y)
    factored = len(relations) == 2 ** (n + m)
    shapes = []
    for relation in relations:
        left, right = factor_product_relation(relation)
        factored = factored and product_relation(left, right) == relation
        a = quotient(X, left)[0].orbits[0].arms[0]
        b = quotient(Y, right)[0].orbits[0].arms[0]
        shapes.append((a, b))
    confirmed = False
    try:
        direct = equivalence_relations(GSet.of((n, m)))
    except ResourceCapError as exc:
        logger.info("Direct search on R^%d x R^%d not run: %s", n, m, exc)
    else:
        confirmed = True
        factored = factored and sorted(r.orbit_set for r in direct) == sorted(
            r.orbit_set for r in relations
        )
    return SplitClassification(relations, shapes, factored, confirmed)


def theorem_instances(max_n: int, K=None) -> TheoremInstancesReport:
    """Classification statements on the subalgebras of small Schwartz algebras.

    Every etale subalgebra of C(R^(n)) is a simple algebra C(R^(m)) embedded
    injectively, and C(R^(n)) itself is simple, so it has no proper
    quotient. Over G x G every equivalence relation on R^(n) x R^(m) is a
    product, so the subalgebras are C(R^(a)) ⊠ C(R^(b)). Products beyond
    the relation caps are listed in ``capped`` and never count as passed.
    """
    K = K if K is not None else get_domain()
    entries: List[InstanceEntry] = []
    for n in range(max_n + 1):
        source = f"C(R^{n})"
        whole = schwartz_algebra(transitive(n), K)
        entries.append(
            InstanceEntry(source=source, found=f"{source} (quotient)", passed=gamma_is_field(whole))
        )
        for sub in etale_subalgebras(n, K):
            algebra = schwartz_algebra(transitive(sub.m), K)
            passed = (
                _embedding_is_injective(sub)
                and is_etale(algebra)
                and gamma_is_field(algebra)
            )
            entries.append(
                InstanceEntry(source=source, found=f"C(R^{sub.m}) at {list(sub.coordinates)}", passed=passed)
            )
    bound = min(max_n, 3)
    for n, m in itertools.product(range(bound + 1), repeat=2):
        source = f"C(R^{n}) ⊠ C(R^{m})"
        try:
            result = split_classification(n, m)
        except ResourceCapError as exc:
            logger.warning("%s not classified: %s", source, exc)
            entries.append(InstanceEntry(source=source, found="", passed=False, skipped=True))
            continue
        except CounterexampleError as exc:
            logger.warning("%s has a non-product relation: %s", source, exc)
            entries.append(InstanceEntry(source=source, found=str(exc), passed=False))
            continue
        found = sorted({f"C(R^{a}) ⊠ C(R^{b})" for a, b in result.shapes})
        entries.append(
            InstanceEntry(
                source=source,
                found=", ".join(found),
                passed=result.factored,
                confirmed=result.confirmed,
            )
        )
    capped = [entry.source for entry in entries if entry.skipped]
    return TheoremInstancesReport(
        max_n=max_n,
        entries=entries,
        capped=capped,
        passed=all(entry.passed for entry in entries if not entry.skipped),
    )
