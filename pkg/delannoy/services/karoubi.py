"""Idempotent completion of the permutation category.

An object of the Karoubi envelope is a Schwartz space C(X) together with an
idempotent endomorphism. Simple objects are indexed by words over ``a`` and
``b``; their idempotents are kept in a registry (see
:mod:`delannoy.services.registry`). Decomposition splits an object against
registry simples by exact linear algebra on compressed Hom spaces: for a
simple L the spaces e_M Hom(L, M) e_L and e_L Hom(M, L) e_M have the same
dimension, the multiplicity of L in M, and the pairing between them is a
scalar matrix whose inverse gives matching projections.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from delannoy.errors import InvalidInputError, LabelingError, PreconditionError, StructuralError
from delannoy.schemas import RestrictionRuleReport
from delannoy.services import linalg
from delannoy.services.ordcomb import (
    Amalgam,
    GSet,
    OrbitShape,
    point_set,
    product_amalgams,
    product_layout,
)
from delannoy.services.measure import slot_placements
from delannoy.services.permcat import (
    ObjectLike,
    PermMorphism,
    PermObject,
    as_object,
    compose,
    identity,
    is_identity,
    left_matrix,
    right_matrix,
    tensor,
    tensor_obj,
    trace_dim,
    transpose,
    zero,
)

logger = logging.getLogger(__name__)

EMPTY = "∅"
PRODUCT = " ⊠ "


class SimpleLabel(BaseModel):
    """A word over {a, b} naming a simple object."""

    model_config = ConfigDict(frozen=True)

    word: str = Field("", description="Letters a and b; empty for the unit")

    @field_validator("word")
    @classmethod
    def _check_word(cls, word):
        if any(ch not in "ab" for ch in word):
            raise ValueError(f"label '{word}' is not a word over a/b")
        return word

    @classmethod
    def parse(cls, text: str) -> "SimpleLabel":
        """Parse ``a``/``b`` words; ``∅``, ``1`` and the empty string mean the unit.

        Raises:
            InvalidInputError: For any other character.
        """
        text = text.strip()
        if text in ("", EMPTY, "1", "e"):
            return cls(word="")
        if any(ch not in "ab" for ch in text):
            raise InvalidInputError(f"Invalid label '{text}': use letters a and b")
        return cls(word=text)

    @property
    def length(self) -> int:
        return len(self.word)

    def dual(self) -> "SimpleLabel":
        """The letter-swapped word, which labels the dual simple."""
        return SimpleLabel(word=self.word.translate(str.maketrans("ab", "ba")))

    def __str__(self) -> str:
        return self.word or EMPTY


LabelTuple = Tuple[SimpleLabel, ...]


def render_label(labels: LabelTuple) -> str:
    return PRODUCT.join(str(label) for label in labels)


def labels_of_length(n: int) -> List[SimpleLabel]:
    """All 2^n words of length n in lexicographic order."""
    return [SimpleLabel(word="".join(w)) for w in itertools.product("ab", repeat=n)]


# ---------------------------------------------------------------------------
# Objects


@dataclass(frozen=True)
class KObject:
    """C(X) cut down by an idempotent."""

    ambient: PermObject
    idem: PermMorphism

    @property
    def base(self) -> GSet:
        return self.ambient.base

    @property
    def s(self) -> int:
        return self.ambient.base.s

    @property
    def domain(self):
        return self.idem.domain

    def __str__(self) -> str:
        if is_identity(self.idem):
            return str(self.ambient)
        return f"({self.ambient}, e)"


def karoubi_object(X: ObjectLike, idem: Optional[PermMorphism] = None, check: bool = True, K=None) -> KObject:
    """Pair an object with an idempotent (the identity by default).

    Raises:
        StructuralError: If ``idem`` is not an idempotent endomorphism of C(X).
    """
    ambient = as_object(X)
    if idem is None:
        return KObject(ambient, identity(ambient, K))
    if idem.source != ambient or idem.target != ambient:
        raise StructuralError(f"idempotent does not act on {ambient}")
    if check and compose(idem, idem) != idem:
        raise StructuralError("morphism is not idempotent")
    return KObject(ambient, idem)


def unit_kobject(s: int = 1, K=None) -> KObject:
    return karoubi_object(point_set(s), K=K)


def ktensor(M: KObject, N: KObject) -> KObject:
    """M (x) N with the tensor product of the idempotents."""
    return KObject(tensor_obj(M.ambient, N.ambient), tensor(M.idem, N.idem))


def dual_object(M: KObject) -> KObject:
    """The dual (C(X), e^T); C(X) is self-dual."""
    return KObject(M.ambient, transpose(M.idem))


# ---------------------------------------------------------------------------
# External products over G^s x G^t


def boxtimes_gset(X: GSet, Y: GSet) -> GSet:
    """X x Y as a G^(s+t)-set; orbit (i, j) sits at i * |Y| + j."""
    return GSet(
        orbits=tuple(OrbitShape(arms=a.arms + b.arms) for a in X.orbits for b in Y.orbits),
        s=X.s + Y.s,
    )


def boxtimes(f: PermMorphism, g: PermMorphism) -> PermMorphism:
    """The external product of morphisms over separate group factors."""
    K = f.domain
    X, Y = boxtimes_gset(f.X, g.X), boxtimes_gset(f.Y, g.Y)
    s = f.X.s
    nx, ny = len(g.X.orbits), len(g.Y.orbits)
    lay_f = product_layout((f.Y, f.X))
    lay_g = product_layout((g.Y, g.X))
    coeffs = []
    for amalgam in product_amalgams((Y, X)):
        oy1, oy2 = divmod(amalgam.orbits[0], ny)
        ox1, ox2 = divmod(amalgam.orbits[1], nx)
        u = f.coeffs[lay_f.index(Amalgam(orbits=(oy1, ox1), words=amalgam.words[:s]))]
        if not u:
            coeffs.append(K.zero)
            continue
        v = g.coeffs[lay_g.index(Amalgam(orbits=(oy2, ox2), words=amalgam.words[s:]))]
        coeffs.append(u * v)
    return PermMorphism(as_object(X), as_object(Y), tuple(coeffs), K)


def kboxtimes(*objects: KObject) -> KObject:
    """External product of Karoubi objects."""
    result = objects[0]
    for M in objects[1:]:
        idem = boxtimes(result.idem, M.idem)
        result = KObject(idem.source, idem)
    return result


# ---------------------------------------------------------------------------
# Compressed Hom spaces


def compression_matrix(e_source: PermMorphism, e_target: PermMorphism):
    """Matrix of h -> e_target o h o e_source on Hom(C(X), C(Y))."""
    X, Y = e_source.X, e_target.X
    K = e_source.domain
    right = None if is_identity(e_source) else right_matrix(e_source, Y)
    left = None if is_identity(e_target) else left_matrix(e_target, X)
    if right is None and left is None:
        size = product_layout((Y, X)).size
        return linalg.sparse({i: {i: K.one} for i in range(size)}, (size, size), K)
    if right is None:
        return left
    if left is None:
        return right
    return left.matmul(right)


def compressed_basis(e_source: PermMorphism, e_target: PermMorphism) -> List[PermMorphism]:
    """A basis of e_target o Hom(C(X), C(Y)) o e_source made of images of orbit indicators."""
    matrix = compression_matrix(e_source, e_target)
    vectors, _ = linalg.column_basis(matrix)
    return [
        PermMorphism(e_source.target, e_target.source, tuple(v), e_source.domain)
        for v in vectors
    ]


def khom_dim(M: KObject, N: KObject) -> int:
    """Dimension of Hom(M, N) = e_N Hom(C(X), C(Y)) e_M."""
    if M.s != N.s:
        raise StructuralError("objects over different group powers")
    return linalg.rank(compression_matrix(M.idem, N.idem))


def invariants_dim(M: KObject) -> int:
    """dim Hom(1, M)."""
    return khom_dim(unit_kobject(M.s, M.domain), M)


def pairing_dim(M: KObject, N: KObject) -> int:
    """dim Hom(1, M (x) N), computed as dim Hom(M^dual, N)."""
    return khom_dim(dual_object(M), N)


# ---------------------------------------------------------------------------
# Splitting


@dataclass
class Isotypic:
    """The L-isotypic part of an object: inclusions h_k, projections p_k with
    p_k o h_l = delta_kl e_L, and the component idempotent sum_k h_k o p_k.
    """

    labels: LabelTuple
    simple: KObject
    inclusions: List[PermMorphism]
    projections: List[PermMorphism]
    component: PermMorphism

    @property
    def multiplicity(self) -> int:
        return len(self.inclusions)


def _scalar_of(endo: PermMorphism, idem: PermMorphism, pivot: int):
    return endo.coeffs[pivot] / idem.coeffs[pivot]


def split_isotypic(M: KObject, L: KObject, labels: LabelTuple = ()) -> Optional[Isotypic]:
    """Split off the L-isotypic part of M, or None when L does not occur.

    Raises:
        LabelingError: If the two compressed Hom spaces have different
            dimensions or the pairing is singular (L is not simple).
    """
    inclusions = compressed_basis(L.idem, M.idem)
    if not inclusions:
        return None
    candidates = compressed_basis(M.idem, L.idem)
    if len(candidates) != len(inclusions):
        raise LabelingError(
            f"{render_label(labels)}: {len(inclusions)} inclusions but {len(candidates)} projections"
        )
    K = M.domain
    pivot = next(i for i, c in enumerate(L.idem.coeffs) if c)
    pairing = [
        [_scalar_of(compose(g, h), L.idem, pivot) for h in inclusions] for g in candidates
    ]
    try:
        inverse = linalg.inverse(linalg.dense(pairing, K)).to_list()
    except ArithmeticError as exc:
        raise LabelingError(f"{render_label(labels)}: singular pairing ({exc})")
    projections = []
    for k in range(len(inclusions)):
        coeffs = linalg.combine(inverse[k], [g.coeffs for g in candidates], K, len(candidates[0].coeffs))
        projections.append(PermMorphism(M.ambient, L.ambient, tuple(coeffs), K))
    component = zero(M.ambient, M.ambient, K)
    for h, p in zip(inclusions, projections):
        component = component + compose(h, p)
    return Isotypic(labels, L, inclusions, projections, component)


# ---------------------------------------------------------------------------
# Decomposition


@dataclass
class Decomposition:
    obj: KObject
    parts: List[Isotypic] = field(default_factory=list)

    def multiplicities(self) -> Dict[str, int]:
        return {render_label(part.labels): part.multiplicity for part in self.parts}

    def label_multiset(self) -> Dict[LabelTuple, int]:
        return {part.labels: part.multiplicity for part in self.parts}


def length_bounds(M: KObject) -> Tuple[int, ...]:
    """Per group factor, the largest arm of the carrier (no longer simple can occur)."""
    return tuple(
        max((shape.arms[c] for shape in M.base.orbits), default=0) for c in range(M.s)
    )


def candidate_labels(bounds: Sequence[int], registry) -> List[LabelTuple]:
    """Product labels within the bounds, by increasing total length then words."""
    per_factor = [registry.labels(b) for b in bounds]
    candidates = list(itertools.product(*per_factor))
    candidates.sort(key=lambda t: (sum(l.length for l in t), tuple(l.word for l in t)))
    return candidates


def decompose(M: KObject, registry) -> Decomposition:
    """Split M into isotypic parts of registry simples.

    Raises:
        PreconditionError: If the registry is too shallow for M.
        LabelingError: If the parts found do not add up to the idempotent of M.
    """
    bounds = length_bounds(M)
    if max(bounds, default=0) > registry.depth:
        raise PreconditionError(
            f"registry depth {registry.depth} is below the carrier arm {max(bounds)}"
        )
    result = Decomposition(M)
    total = zero(M.ambient, M.ambient, M.domain)
    if M.idem.is_zero():
        return result
    for labels in candidate_labels(bounds, registry):
        part = split_isotypic(M, registry.simple_product(labels), labels)
        if part is None:
            continue
        result.parts.append(part)
        total = total + part.component
        if total == M.idem:
            break
    if total != M.idem:
        raise LabelingError(f"{M} is not exhausted by registry simples of lengths {bounds}")
    logger.info("Decomposed %s into %d isotypic parts", M, len(result.parts))
    return result


def center_dimension(M: KObject) -> int:
    """Dimension of the center of End(M), by solving the commutant system."""
    e = M.idem
    basis = compressed_basis(e, e)
    X = M.base
    K = M.domain
    size = product_layout((X, X)).size
    blocks = []
    for b in basis:
        commutator = right_matrix(b, X) - left_matrix(b, X)
        blocks.append(commutator.to_dense().to_list())
    ident = [[K.one if i == j else K.zero for j in range(size)] for i in range(size)]
    compress = compression_matrix(e, e).to_dense().to_list()
    blocks.append([[compress[i][j] - ident[i][j] for j in range(size)] for i in range(size)])
    rows = [row for block in blocks for row in block]
    return len(linalg.nullspace(linalg.dense(rows, K, size)))


# ---------------------------------------------------------------------------
# Restriction to G(0)


class RefinedOrbit(BaseModel):
    """An orbit of the restriction: original orbit plus slot counts around the pins."""

    model_config = ConfigDict(frozen=True)

    orbit: int
    placement: Tuple[int, ...]


def restricted_gset(X: GSet, coordinate: int = 0, pins: int = 1) -> Tuple[GSet, Tuple[RefinedOrbit, ...]]:
    """Split one group coordinate of X around ``pins`` fixed points.

    The coordinate becomes pins+1 coordinates, one per open interval;
    points sitting on a pin are recorded in the placement only.

    Raises:
        InvalidInputError: If the coordinate is out of range.
    """
    if not 0 <= coordinate < X.s:
        raise InvalidInputError(f"coordinate {coordinate} out of range for s={X.s}")
    orbits, origins = [], []
    for o, shape in enumerate(X.orbits):
        for placement in slot_placements(shape.arms[coordinate], pins):
            gaps = placement[0::2]
            orbits.append(
                OrbitShape(arms=shape.arms[:coordinate] + gaps + shape.arms[coordinate + 1:])
            )
            origins.append(RefinedOrbit(orbit=o, placement=placement))
    return GSet(orbits=tuple(orbits), s=X.s + pins), tuple(origins)


def restrict_morphism(phi: PermMorphism, coordinate: int = 0, pins: int = 1) -> PermMorphism:
    """The same invariant function read on the refined orbits."""
    Xr, origin_x = restricted_gset(phi.X, coordinate, pins)
    Yr, origin_y = restricted_gset(phi.Y, coordinate, pins)
    layout = product_layout((phi.Y, phi.X))
    coeffs = []
    for amalgam in product_amalgams((Yr, Xr)):
        ry, rx = origin_y[amalgam.orbits[0]], origin_x[amalgam.orbits[1]]
        merged: List[int] = []
        for j, word in enumerate(amalgam.words[coordinate: coordinate + pins + 1]):
            merged.extend(word)
            if j < pins:
                mask = (1 if ry.placement[2 * j + 1] else 0) | (2 if rx.placement[2 * j + 1] else 0)
                if mask:
                    merged.append(mask)
        words = (
            amalgam.words[:coordinate]
            + (tuple(merged),)
            + amalgam.words[coordinate + pins + 1:]
        )
        coeffs.append(phi.coeffs[layout.index(Amalgam(orbits=(ry.orbit, rx.orbit), words=words))])
    return PermMorphism(as_object(Xr), as_object(Yr), tuple(coeffs), phi.domain)


def restrict(M: KObject, coordinate: int = 0) -> KObject:
    """Restriction from G^s to G^(s+1) by fixing a point in one coordinate."""
    idem = restrict_morphism(M.idem, coordinate)
    return KObject(idem.source, idem)


def restriction_rule(label: SimpleLabel) -> Dict[LabelTuple, int]:
    """Predicted Res L: every cut of the word plus every single-letter deletion."""
    word = label.word
    expected: Dict[LabelTuple, int] = {}
    terms = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    terms += [(word[:i], word[i + 1:]) for i in range(len(word))]
    for left, right in terms:
        key = (SimpleLabel(word=left), SimpleLabel(word=right))
        expected[key] = expected.get(key, 0) + 1
    return expected


def verify_restriction_rule(label: SimpleLabel, registry):
    """Decompose Res L_label and compare with :func:`restriction_rule`."""
    observed = decompose(restrict(registry.simple(label)), registry).label_multiset()
    expected = restriction_rule(label)
    report = RestrictionRuleReport(
        label=str(label),
        expected={render_label(k): v for k, v in sorted(expected.items(), key=_label_key)},
        observed={render_label(k): v for k, v in sorted(observed.items(), key=_label_key)},
        passed=observed == expected,
    )
    if not report.passed:
        logger.warning("Restriction rule fails for %s", label)
    return report


def _label_key(item):
    labels = item[0]
    return sum(l.length for l in labels), tuple(l.word for l in labels)


def invariants_dim_after_restriction(label: SimpleLabel, registry) -> int:
    """dim Hom(1 ⊠ 1, Res L_label)."""
    observed = decompose(restrict(registry.simple(label)), registry).label_multiset()
    return observed.get((SimpleLabel(), SimpleLabel()), 0)


# ---------------------------------------------------------------------------
# Tensor products and duality


def tensor_decompose(left: SimpleLabel, right: SimpleLabel, registry) -> Dict[str, int]:
    """Multiplicities of L_left (x) L_right."""
    product = ktensor(registry.simple(left), registry.simple(right))
    return decompose(product, registry).multiplicities()


def dual_labels(label: SimpleLabel, registry) -> List[SimpleLabel]:
    """Labels mu of the same length with Hom(1, L_label (x) L_mu) != 0."""
    L = registry.simple(label)
    return [
        mu for mu in registry.labels(label.length)
        if mu.length == label.length and pairing_dim(L, registry.simple(mu))
    ]


def dual_label_check(label: SimpleLabel, registry) -> bool:
    return dual_labels(label, registry) == [label.dual()]


def self_dual_labels(max_length: int, registry) -> List[SimpleLabel]:
    """Labels with Hom(1, L (x) L) != 0."""
    return [
        label for label in registry.labels(max_length)
        if pairing_dim(registry.simple(label), registry.simple(label))
    ]


def is_iso(M: KObject, N: KObject, registry) -> bool:
    """Isomorphic iff the multiplicity tables agree."""
    if M.s != N.s:
        return False
    return decompose(M, registry).multiplicities() == decompose(N, registry).multiplicities()


def simple_dimension(label: SimpleLabel, registry):
    """Categorical dimension of L_label."""
    return trace_dim(registry.idempotent(label))
