"""Combinatorics of finitary G^s-sets for G = Aut(R, <).

A transitive G^s-set is a product of ordered configuration spaces
R^(n_1) x ... x R^(n_s), recorded by its arm lengths. An orbit of a product
of such sets is an *amalgam*: for every group coordinate a word of columns,
each column a bitmask of the factors that place a point there. Amalgams are
listed in a frozen canonical order (orbit indices first, then the words of
each coordinate, lexicographically); every coefficient vector in the
library is indexed against that order.

This module also holds G-maps, equivalence relations and the closure
search used to enumerate them.
"""

import itertools
import logging
import re
from array import array
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from delannoy.config import settings
from delannoy.errors import (
    CounterexampleError,
    InvalidInputError,
    PreconditionError,
    ResourceCapError,
    StructuralError,
)

logger = logging.getLogger(__name__)

# One point of a transitive G^s-set: per group coordinate an increasing tuple.
Point = Tuple[Tuple[Fraction, ...], ...]


class OrbitShape(BaseModel):
    """The transitive G^s-set R^(n_1) x ... x R^(n_s)."""

    model_config = ConfigDict(frozen=True)

    arms: Tuple[int, ...] = Field(..., description="Arm length per group factor")

    @field_validator("arms")
    @classmethod
    def _check_arms(cls, arms):
        if not arms:
            raise ValueError("an orbit shape needs at least one group factor")
        if any(n < 0 for n in arms):
            raise ValueError(f"negative arm length in {arms}")
        return arms

    @property
    def s(self) -> int:
        return len(self.arms)

    @property
    def total(self) -> int:
        return sum(self.arms)


class GSet(BaseModel):
    """A finitary G^s-set as an ordered list of transitive orbits."""

    model_config = ConfigDict(frozen=True)

    orbits: Tuple[OrbitShape, ...] = Field(default=(), description="Orbits in index order")
    s: int = Field(default=1, description="Number of group factors")

    @model_validator(mode="after")
    def _check_arity(self):
        if self.s < 1:
            raise ValueError("s must be positive")
        for shape in self.orbits:
            if shape.s != self.s:
                raise ValueError(f"orbit {shape.arms} does not have {self.s} factors")
        return self

    @classmethod
    def of(cls, *shapes, s: Optional[int] = None) -> "GSet":
        """Build a G-set from shapes given as OrbitShape, ints or int sequences.

        Raises:
            StructuralError: If the shapes disagree on the number of factors.
        """
        parsed = []
        for shape in shapes:
            if isinstance(shape, OrbitShape):
                parsed.append(shape)
            elif isinstance(shape, int):
                parsed.append(OrbitShape(arms=(shape,)))
            else:
                parsed.append(OrbitShape(arms=tuple(shape)))
        arities = {shape.s for shape in parsed}
        if s is not None:
            arities.add(s)
        if len(arities) > 1:
            raise StructuralError(f"orbits over different group powers: {sorted(arities)}")
        arity = arities.pop() if arities else 1
        return cls(orbits=tuple(parsed), s=arity)

    @classmethod
    def parse(cls, text: str) -> "GSet":
        """Parse ``R^2``, ``C(R^1 + R^0)``, ``R^1 x R^2`` or ``pt``.

        Orbits are separated by ``+`` and group factors by ``x``; an optional
        ``C(...)`` wrapper is ignored.

        Raises:
            InvalidInputError: If the text is not of that form.
        """
        body = text.strip()
        wrapped = re.fullmatch(r"C\((.*)\)", body)
        if wrapped:
            body = wrapped.group(1).strip()
        if not body:
            raise InvalidInputError(f"Invalid G-set '{text}'")
        shapes = []
        for orbit in body.split("+"):
            arms = []
            for factor in orbit.split("x"):
                factor = factor.strip()
                if factor in ("pt", "1"):
                    arms.append(0)
                    continue
                match = re.fullmatch(r"R(?:\^\(?(\d+)\)?)?", factor)
                if not match:
                    raise InvalidInputError(f"Invalid G-set '{text}': cannot read '{factor}'")
                arms.append(int(match.group(1) or 1))
            shapes.append(tuple(arms))
        return cls.of(*shapes)

    @property
    def is_transitive(self) -> bool:
        return len(self.orbits) == 1

    def __str__(self) -> str:
        if not self.orbits:
            return "0"
        return " + ".join(
            " x ".join(f"R^{n}" for n in shape.arms) for shape in self.orbits
        )


def transitive(*arms: int) -> GSet:
    """The single-orbit G-set with the given arms."""
    return GSet.of(tuple(arms))


def point_set(s: int = 1) -> GSet:
    """The one-point G^s-set."""
    return GSet.of((0,) * s)


def disjoint_union(*sets: GSet) -> GSet:
    """Concatenate orbit lists (orbit indices of later sets are shifted)."""
    _require_same_s(sets)
    return GSet(orbits=tuple(o for X in sets for o in X.orbits), s=sets[0].s)


class Amalgam(NamedTuple):
    """One orbit of a product: factor orbit indices plus a word per coordinate."""

    orbits: Tuple[int, ...]
    words: Tuple[Tuple[int, ...], ...]


def shape_of(amalgam: Amalgam) -> OrbitShape:
    """The transitive G-set an amalgam is isomorphic to."""
    return OrbitShape(arms=tuple(len(word) for word in amalgam.words))


# ---------------------------------------------------------------------------
# Counting


@lru_cache(maxsize=None)
def delannoy_number(n: int, m: int) -> int:
    """Delannoy number D(n, m), the orbit count of R^(n) x R^(m)."""
    if n == 0 or m == 0:
        return 1
    return (
        delannoy_number(n - 1, m)
        + delannoy_number(n, m - 1)
        + delannoy_number(n - 1, m - 1)
    )


@lru_cache(maxsize=None)
def word_count(counts: Tuple[int, ...]) -> int:
    """Number of shuffle words with the given per-factor counts."""
    if not any(counts):
        return 1
    total = 0
    k = len(counts)
    for mask in range(1, 1 << k):
        if all(counts[i] > 0 for i in range(k) if mask >> i & 1):
            rest = tuple(c - (mask >> i & 1) for i, c in enumerate(counts))
            total += word_count(rest)
    return total


# ---------------------------------------------------------------------------
# Shuffle words


def iter_shuffle_words(counts: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    """Yield all shuffle words with ``counts[i]`` columns containing factor i.

    Words come out in lexicographic order because masks are tried in
    increasing order at every position.
    """
    k = len(counts)
    masks = range(1, 1 << k)
    remaining = list(counts)
    word: List[int] = []

    def walk():
        if not any(remaining):
            yield tuple(word)
            return
        for mask in masks:
            bits = [i for i in range(k) if mask >> i & 1]
            if all(remaining[i] > 0 for i in bits):
                for i in bits:
                    remaining[i] -= 1
                word.append(mask)
                yield from walk()
                word.pop()
                for i in bits:
                    remaining[i] += 1

    yield from walk()


@lru_cache(maxsize=None)
def shuffle_words(counts: Tuple[int, ...]) -> Tuple[Tuple[int, ...], ...]:
    """Cached tuple of :func:`iter_shuffle_words`."""
    return tuple(iter_shuffle_words(counts))


@lru_cache(maxsize=None)
def word_index(counts: Tuple[int, ...]) -> Dict[Tuple[int, ...], int]:
    """Position of every shuffle word in canonical order."""
    return {word: i for i, word in enumerate(shuffle_words(counts))}


# ---------------------------------------------------------------------------
# Product layouts


class Block(NamedTuple):
    orbits: Tuple[int, ...]
    counts: Tuple[Tuple[int, ...], ...]
    sizes: Tuple[int, ...]
    strides: Tuple[int, ...]
    offset: int
    size: int


class ProductLayout:
    """Canonical indexing of the orbits of a product of G-sets.

    The orbits of X_1 x ... x X_k are grouped into blocks, one per tuple of
    factor orbits; inside a block the index is mixed radix over the word
    positions of each coordinate, the first coordinate most significant.
    """

    def __init__(self, factors: Tuple[GSet, ...]):
        _require_same_s(factors)
        self.factors = factors
        self.s = factors[0].s
        self.blocks: List[Block] = []
        self.block_at: Dict[Tuple[int, ...], Block] = {}
        offset = 0
        for orbit_tuple in itertools.product(*(range(len(X.orbits)) for X in factors)):
            shapes = [X.orbits[i] for X, i in zip(factors, orbit_tuple)]
            counts = tuple(
                tuple(shape.arms[c] for shape in shapes) for c in range(self.s)
            )
            sizes = tuple(word_count(cnt) for cnt in counts)
            strides = []
            stride = 1
            for size in reversed(sizes):
                strides.append(stride)
                stride *= size
            block = Block(
                orbits=orbit_tuple,
                counts=counts,
                sizes=sizes,
                strides=tuple(reversed(strides)),
                offset=offset,
                size=stride,
            )
            self.blocks.append(block)
            self.block_at[orbit_tuple] = block
            offset += stride
        self.size = offset

    def index(self, amalgam: Amalgam) -> int:
        """Canonical index of an amalgam of this product."""
        block = self.block_at[amalgam.orbits]
        position = block.offset
        for c, word in enumerate(amalgam.words):
            position += word_index(block.counts[c])[word] * block.strides[c]
        return position

    def amalgams(self) -> List[Amalgam]:
        """All amalgams in canonical order."""
        result = []
        for block in self.blocks:
            per_coordinate = [shuffle_words(cnt) for cnt in block.counts]
            for words in itertools.product(*per_coordinate):
                result.append(Amalgam(orbits=block.orbits, words=tuple(words)))
        return result

    def block_of(self, position: int) -> Block:
        """The block containing a canonical index."""
        for block in self.blocks:
            if block.offset <= position < block.offset + block.size:
                return block
        raise IndexError(position)


@lru_cache(maxsize=256)
def product_layout(factors: Tuple[GSet, ...]) -> ProductLayout:
    """Cached :class:`ProductLayout` of a tuple of G-sets."""
    return ProductLayout(factors)


@lru_cache(maxsize=256)
def product_amalgams(factors: Tuple[GSet, ...]) -> Tuple[Amalgam, ...]:
    return tuple(product_layout(factors).amalgams())


def product_gset(*factors: GSet) -> GSet:
    """The product G-set; its orbits are the amalgams in canonical order."""
    amalgams = product_amalgams(tuple(factors))
    return GSet(orbits=tuple(shape_of(a) for a in amalgams), s=factors[0].s)


def orbits_of_product(factors: Sequence[GSet]) -> List[Amalgam]:
    """Complete, canonically ordered list of the orbits of a product.

    Args:
        factors: G-sets over the same G^s.

    Returns:
        The amalgams of the product in canonical order.

    Raises:
        StructuralError: If the factors are over different group powers.
        ResourceCapError: If an orbit tuple exceeds MAX_PRODUCT_ARMS.
    """
    factors = tuple(factors)
    if not factors:
        raise StructuralError("a product needs at least one factor")
    _require_same_s(factors)
    largest = max(
        (
            sum(X.orbits[i].total for X, i in zip(factors, t))
            for t in itertools.product(*(range(len(X.orbits)) for X in factors))
        ),
        default=0,
    )
    if largest > settings.MAX_PRODUCT_ARMS:
        raise ResourceCapError(
            f"product with {largest} arms exceeds MAX_PRODUCT_ARMS={settings.MAX_PRODUCT_ARMS}"
        )
    return list(product_amalgams(factors))


def _require_same_s(sets) -> None:
    arities = {X.s for X in sets}
    if len(arities) > 1:
        raise StructuralError(f"G-sets over different group powers: {sorted(arities)}")


# ---------------------------------------------------------------------------
# Points


def representative(amalgam: Amalgam) -> Tuple[Point, ...]:
    """Integer representative points, one per factor: column j sits at j+1."""
    k = len(amalgam.orbits)
    return tuple(
        tuple(
            tuple(j + 1 for j, mask in enumerate(word) if mask >> i & 1)
            for word in amalgam.words
        )
        for i in range(k)
    )


def orbit_of_point(
    points: Sequence[Point], orbit_indices: Optional[Sequence[int]] = None
) -> Amalgam:
    """The amalgam recording the relative order of concrete points.

    Args:
        points: One point per factor; per coordinate a strictly increasing
            tuple of rationals.
        orbit_indices: Orbit of each factor the point belongs to (default 0).

    Returns:
        The amalgam whose representative has the same order pattern.

    Raises:
        InvalidInputError: If an arm is not strictly increasing.
        StructuralError: If points disagree on the number of coordinates.
    """
    if orbit_indices is None:
        orbit_indices = (0,) * len(points)
    arities = {len(p) for p in points}
    if len(arities) != 1:
        raise StructuralError("points over different group powers")
    s = arities.pop()
    words = []
    for c in range(s):
        masks: Dict[Fraction, int] = {}
        for i, point in enumerate(points):
            arm = point[c]
            if any(arm[j] >= arm[j + 1] for j in range(len(arm) - 1)):
                raise InvalidInputError(f"arm {tuple(arm)} is not strictly increasing")
            for value in arm:
                masks[value] = masks.get(value, 0) | (1 << i)
        words.append(tuple(masks[v] for v in sorted(masks)))
    return Amalgam(orbits=tuple(orbit_indices), words=tuple(words))


def split_point(amalgam: Amalgam, point: Point) -> Tuple[Point, ...]:
    """Split a point of the orbit ``amalgam`` into one point per factor."""
    k = len(amalgam.orbits)
    return tuple(
        tuple(
            tuple(v for v, mask in zip(point[c], word) if mask >> i & 1)
            for c, word in enumerate(amalgam.words)
        )
        for i in range(k)
    )


def swap_amalgam(amalgam: Amalgam) -> Amalgam:
    """Exchange the two factors of an amalgam of a pair."""
    a, b = amalgam.orbits
    return Amalgam(
        orbits=(b, a),
        words=tuple(
            tuple(((m & 1) << 1) | ((m >> 1) & 1) for m in word) for word in amalgam.words
        ),
    )


def diagonal_amalgam(orbit: int, shape: OrbitShape) -> Amalgam:
    """The diagonal orbit of X x X over a given orbit of X."""
    return Amalgam(orbits=(orbit, orbit), words=tuple((3,) * n for n in shape.arms))


@lru_cache(maxsize=128)
def diagonal_indices(X: GSet) -> Tuple[int, ...]:
    """Indices of the diagonal orbits of X x X, one per orbit of X."""
    layout = product_layout((X, X))
    return tuple(layout.index(diagonal_amalgam(o, shape)) for o, shape in enumerate(X.orbits))


@lru_cache(maxsize=128)
def swap_permutation(X: GSet, Y: GSet) -> Tuple[int, ...]:
    """For each orbit of X x Y, the index of its swap in Y x X."""
    target = product_layout((Y, X))
    return tuple(target.index(swap_amalgam(a)) for a in product_amalgams((X, Y)))


# ---------------------------------------------------------------------------
# Maps


class MapComponent(BaseModel):
    """Image of one source orbit: target orbit and per-coordinate injections."""

    model_config = ConfigDict(frozen=True)

    target_orbit: int = Field(..., description="Index of the target orbit")
    injections: Tuple[Tuple[int, ...], ...] = Field(
        ..., description="Per coordinate, 1-based source positions read by the target"
    )


class GMap(BaseModel):
    """A G^s-map between G-sets, one component per source orbit."""

    model_config = ConfigDict(frozen=True)

    source: GSet
    target: GSet
    components: Tuple[MapComponent, ...]

    @model_validator(mode="after")
    def _check_components(self):
        if len(self.components) != len(self.source.orbits):
            raise ValueError("one component per source orbit is required")
        for shape, comp in zip(self.source.orbits, self.components):
            target_shape = self.target.orbits[comp.target_orbit]
            for c, injection in enumerate(comp.injections):
                if len(injection) != target_shape.arms[c]:
                    raise ValueError("injection length must equal the target arm")
                if any(not 1 <= j <= shape.arms[c] for j in injection):
                    raise ValueError("injection leaves the source arm")
                if any(injection[j] >= injection[j + 1] for j in range(len(injection) - 1)):
                    raise ValueError("injections must be strictly increasing")
        return self

    def apply(self, orbit: int, point: Point) -> Tuple[int, Point]:
        """Image of a point of a given source orbit."""
        comp = self.components[orbit]
        image = tuple(
            tuple(point[c][j - 1] for j in injection)
            for c, injection in enumerate(comp.injections)
        )
        return comp.target_orbit, image


def identity_map(X: GSet) -> GMap:
    return GMap(
        source=X,
        target=X,
        components=tuple(
            MapComponent(
                target_orbit=o, injections=tuple(tuple(range(1, n + 1)) for n in shape.arms)
            )
            for o, shape in enumerate(X.orbits)
        ),
    )


def compose_maps(g: GMap, f: GMap) -> GMap:
    """The G-map g o f."""
    if f.target != g.source:
        raise StructuralError("maps do not compose")
    components = []
    for comp in f.components:
        outer = g.components[comp.target_orbit]
        components.append(
            MapComponent(
                target_orbit=outer.target_orbit,
                injections=tuple(
                    tuple(inner[j - 1] for j in outer_inj)
                    for inner, outer_inj in zip(comp.injections, outer.injections)
                ),
            )
        )
    return GMap(source=f.source, target=g.target, components=tuple(components))


def terminal_map(X: GSet) -> GMap:
    """The unique map X -> pt."""
    return GMap(
        source=X,
        target=point_set(X.s),
        components=tuple(
            MapComponent(target_orbit=0, injections=((),) * X.s) for _ in X.orbits
        ),
    )


def diagonal_map(X: GSet) -> GMap:
    """The diagonal X -> X x X."""
    layout = product_layout((X, X))
    return GMap(
        source=X,
        target=product_gset(X, X),
        components=tuple(
            MapComponent(
                target_orbit=layout.index(diagonal_amalgam(o, shape)),
                injections=tuple(tuple(range(1, n + 1)) for n in shape.arms),
            )
            for o, shape in enumerate(X.orbits)
        ),
    )


def reassociation_map(source: GSet, target: GSet, split_source, join_target) -> GMap:
    """Bijection between two presentations of the same product.

    ``split_source(orbit, point)`` returns the tuple of (orbit, point)
    factor data; ``join_target(parts)`` returns the target amalgam index.
    Both presentations keep each coordinate's values sorted, so every
    component is an identity injection.
    """
    components = []
    for o, shape in enumerate(source.orbits):
        point = tuple(tuple(range(1, n + 1)) for n in shape.arms)
        components.append(
            MapComponent(
                target_orbit=join_target(split_source(o, point)),
                injections=tuple(tuple(range(1, n + 1)) for n in shape.arms),
            )
        )
    return GMap(source=source, target=target, components=tuple(components))


def transitive_homs(X: OrbitShape, Y: OrbitShape) -> List[GMap]:
    """All G^s-maps R^X -> R^Y, one per tuple of order-preserving injections.

    Raises:
        StructuralError: If X and Y are over different group powers.
    """
    if X.s != Y.s:
        raise StructuralError("shapes over different group powers")
    source = GSet(orbits=(X,), s=X.s)
    target = GSet(orbits=(Y,), s=Y.s)
    per_coordinate = [
        list(itertools.combinations(range(1, n + 1), m)) for n, m in zip(X.arms, Y.arms)
    ]
    return [
        GMap(
            source=source,
            target=target,
            components=(MapComponent(target_orbit=0, injections=tuple(choice)),),
        )
        for choice in itertools.product(*per_coordinate)
    ]


def automorphisms(X: GSet) -> List[GMap]:
    """All invertible self-maps of a transitive G-set.

    Raises:
        PreconditionError: If X is not transitive.
    """
    if not X.is_transitive:
        raise PreconditionError("automorphisms are computed for transitive G-sets")
    shape = X.orbits[0]
    # a self-map of a transitive set is invertible iff every injection is onto
    return [
        f
        for f in transitive_homs(shape, shape)
        if all(len(inj) == n for inj, n in zip(f.components[0].injections, shape.arms))
    ]


# ---------------------------------------------------------------------------
# Equivalence relations


class EquivRelation(BaseModel):
    """A G-stable equivalence relation, as a set of orbits of X x X."""

    model_config = ConfigDict(frozen=True)

    base: GSet
    orbit_set: Tuple[int, ...] = Field(..., description="Sorted orbit indices of X x X")


def kernel_relation(f: GMap) -> EquivRelation:
    """The relation {(x, x') : f(x) = f(x')} on the source of f."""
    X = f.source
    members = []
    for position, amalgam in enumerate(product_amalgams((X, X))):
        p, q = representative(amalgam)
        if f.apply(amalgam.orbits[0], p) == f.apply(amalgam.orbits[1], q):
            members.append(position)
    return EquivRelation(base=X, orbit_set=tuple(members))


class TripleTable(NamedTuple):
    """Orbits of A x B x C by their three pair projections.

    ``ab``, ``bc`` and ``ac`` index the layouts of A x B, B x C and A x C;
    ``lone`` counts columns holding only a point of B.
    """

    ab: array
    bc: array
    ac: array
    lone: array

    @property
    def size(self) -> int:
        return len(self.ab)


@lru_cache(maxsize=None)
def triple_delannoy(a: int, b: int, c: int) -> int:
    """Orbit count of R^(a) x R^(b) x R^(c)."""
    return word_count((a, b, c))


def triple_count(A: GSet, B: GSet, C: GSet) -> int:
    """Number of orbits of A x B x C, computed without enumerating them."""
    total = 0
    for oa in A.orbits:
        for ob in B.orbits:
            for oc in C.orbits:
                size = 1
                for x, y, z in zip(oa.arms, ob.arms, oc.arms):
                    size *= triple_delannoy(x, y, z)
                total += size
    return total


def power_count(X: GSet, k: int) -> int:
    """Number of orbits of X^k, computed without enumerating them."""
    total = 0
    for combo in itertools.product(X.orbits, repeat=k):
        size = 1
        for c in range(X.s):
            size *= word_count(tuple(shape.arms[c] for shape in combo))
        total += size
    return total


@lru_cache(maxsize=None)
def coordinate_triples(a: int, b: int, c: int) -> TripleTable:
    """Single-coordinate triple words with word-local projection indices."""
    index_ab = word_index((a, b))
    index_bc = word_index((b, c))
    index_ac = word_index((a, c))
    ab, bc, ac, lone = array("l"), array("l"), array("l"), array("l")
    for word in iter_shuffle_words((a, b, c)):
        ab.append(index_ab[tuple(m & 3 for m in word if m & 3)])
        bc.append(index_bc[tuple(((m >> 1) & 1) | (((m >> 2) & 1) << 1) for m in word if m & 6)])
        ac.append(index_ac[tuple((m & 1) | (((m >> 2) & 1) << 1) for m in word if m & 5)])
        lone.append(sum(1 for m in word if m == 2))
    return TripleTable(ab, bc, ac, lone)


@lru_cache(maxsize=48)
def triple_table(A: GSet, B: GSet, C: GSet) -> TripleTable:
    """All orbits of A x B x C with global pair indices.

    This is the composition kernel: for maps C(C) -> C(B) -> C(A) the
    entry (ab, bc, ac, lone) contributes (-1)^lone * psi[ab] * phi[bc] to
    the composite at ac.
    """
    _require_same_s((A, B, C))
    lay_ab = product_layout((A, B))
    lay_bc = product_layout((B, C))
    lay_ac = product_layout((A, C))
    ab, bc, ac, lone = array("l"), array("l"), array("l"), array("l")
    for ia, sa in enumerate(A.orbits):
        for ib, sb in enumerate(B.orbits):
            blk_ab = lay_ab.block_at[(ia, ib)]
            for ic, sc in enumerate(C.orbits):
                blk_bc = lay_bc.block_at[(ib, ic)]
                blk_ac = lay_ac.block_at[(ia, ic)]
                tables = [
                    coordinate_triples(sa.arms[k], sb.arms[k], sc.arms[k])
                    for k in range(A.s)
                ]
                if A.s == 1:
                    t = tables[0]
                    ab.extend(blk_ab.offset + x for x in t.ab)
                    bc.extend(blk_bc.offset + x for x in t.bc)
                    ac.extend(blk_ac.offset + x for x in t.ac)
                    lone.extend(t.lone)
                    continue
                for rows in itertools.product(*(range(t.size) for t in tables)):
                    i_ab, i_bc, i_ac, n_lone = blk_ab.offset, blk_bc.offset, blk_ac.offset, 0
                    for k, r in enumerate(rows):
                        t = tables[k]
                        i_ab += t.ab[r] * blk_ab.strides[k]
                        i_bc += t.bc[r] * blk_bc.strides[k]
                        i_ac += t.ac[r] * blk_ac.strides[k]
                        n_lone += t.lone[r]
                    ab.append(i_ab)
                    bc.append(i_bc)
                    ac.append(i_ac)
                    lone.append(n_lone)
    return TripleTable(ab, bc, ac, lone)


def _check_relation_caps(X: GSet) -> None:
    for shape in X.orbits:
        if max(shape.arms, default=0) > settings.MAX_RELATION_ARMS:
            raise ResourceCapError(
                f"arm {max(shape.arms)} exceeds MAX_RELATION_ARMS={settings.MAX_RELATION_ARMS}"
            )
    count = triple_count(X, X, X)
    if count > settings.RELATION_MAX_TRIPLES:
        raise ResourceCapError(
            f"{count} triple orbits exceed RELATION_MAX_TRIPLES={settings.RELATION_MAX_TRIPLES}"
        )


def closed_orbit_sets(X: GSet, rule: str = "transitive") -> List[Tuple[int, ...]]:
    """Enumerate orbit sets of X x X that contain the diagonal, are swap-closed
    and satisfy a closure rule on every orbit of X x X x X.

    Args:
        X: The base G-set.
        rule: ``"transitive"`` (xy and yz imply xz) or ``"triangle"`` (any
            two of xy, yz, xz imply the third).

    Returns:
        Sorted list of sorted orbit-index tuples.

    Raises:
        ResourceCapError: If X exceeds the relation caps.
    """
    if rule not in ("transitive", "triangle"):
        raise InvalidInputError(f"Unknown closure rule '{rule}'")
    _check_relation_caps(X)
    table = triple_table(X, X, X)
    n = product_layout((X, X)).size
    partner = swap_permutation(X, X)

    heads, tails_a, tails_b = array("l"), array("l"), array("l")

    def add(a, b, c):
        tails_a.append(a)
        tails_b.append(b)
        heads.append(c)

    for xy, yz, xz in zip(table.ab, table.bc, table.ac):
        add(xy, yz, xz)
        if rule == "triangle":
            add(xy, xz, yz)
            add(yz, xz, xy)

    starts = array("l", [0] * (n + 1))
    for arr in (tails_a, tails_b, heads):
        for v in arr:
            starts[v + 1] += 1
    for v in range(n):
        starts[v + 1] += starts[v]
    fill = array("l", starts)
    occurrences = array("l", [0] * starts[n])
    for k in range(len(heads)):
        for v in (tails_a[k], tails_b[k], heads[k]):
            occurrences[fill[v]] = k
            fill[v] += 1

    value = array("b", [-1] * n)
    trail: List[int] = []

    def assign(v, val, queue) -> bool:
        if value[v] == -1:
            value[v] = val
            trail.append(v)
            queue.append(v)
            return True
        return value[v] == val

    def propagate(queue) -> bool:
        while queue:
            v = queue.pop()
            if not assign(partner[v], value[v], queue):
                return False
            for position in range(starts[v], starts[v + 1]):
                k = occurrences[position]
                a, b, c = tails_a[k], tails_b[k], heads[k]
                va, vb, vc = value[a], value[b], value[c]
                if va == 1 and vb == 1:
                    if vc == 0:
                        return False
                    if vc == -1:
                        assign(c, 1, queue)
                elif vc == 0:
                    if va == 1 and vb == -1:
                        assign(b, 0, queue)
                    elif vb == 1 and va == -1:
                        assign(a, 0, queue)
                    elif a == b and va == -1:
                        assign(a, 0, queue)
        return True

    def undo(mark: int) -> None:
        while len(trail) > mark:
            value[trail.pop()] = -1

    def try_value(v, val) -> bool:
        queue: List[int] = []
        return assign(v, val, queue) and propagate(queue)

    queue: List[int] = []
    for d in diagonal_indices(X):
        if not assign(d, 1, queue):
            return []
    if not propagate(queue):
        return []

    solutions = []
    frames: List[Tuple[int, int, bool]] = []
    descend = True
    while True:
        if descend:
            v = next((i for i in range(n) if value[i] == -1), -1)
            if v < 0:
                solutions.append(tuple(i for i in range(n) if value[i] == 1))
                descend = False
                continue
            mark = len(trail)
            if try_value(v, 0):
                frames.append((v, mark, False))
                continue
            undo(mark)
            if try_value(v, 1):
                frames.append((v, mark, True))
                continue
            undo(mark)
            descend = False
        else:
            if not frames:
                break
            v, mark, tried_one = frames.pop()
            undo(mark)
            if not tried_one and try_value(v, 1):
                frames.append((v, mark, True))
                descend = True
            else:
                undo(mark)
    logger.info("Closure search (%s) on %s: %d solutions", rule, X, len(solutions))
    return sorted(solutions)


def is_equivalence(X: GSet, orbit_set: Sequence[int]) -> bool:
    """Check reflexivity, symmetry and orbitwise transitivity."""
    members = set(orbit_set)
    if not set(diagonal_indices(X)) <= members:
        return False
    partner = swap_permutation(X, X)
    if any(partner[v] not in members for v in members):
        return False
    table = triple_table(X, X, X)
    return all(
        xz in members
        for xy, yz, xz in zip(table.ab, table.bc, table.ac)
        if xy in members and yz in members
    )


def equivalence_relations(X: GSet) -> List[EquivRelation]:
    """All G-stable equivalence relations on X.

    Raises:
        ResourceCapError: If X exceeds the relation caps.
    """
    return [
        EquivRelation(base=X, orbit_set=members)
        for members in closed_orbit_sets(X, "transitive")
    ]


def quotient(X: GSet, relation: EquivRelation) -> Tuple[GSet, GMap]:
    """Quotient of a transitive G-set by an equivalence relation.

    Returns:
        The quotient R^(m) and the surjection whose kernel is the relation.

    Raises:
        PreconditionError: If X is not transitive or the relation is invalid.
        CounterexampleError: If no coordinate projection has this kernel.
    """
    if not X.is_transitive:
        raise PreconditionError("quotients are computed for transitive G-sets")
    if relation.base != X or not is_equivalence(X, relation.orbit_set):
        raise PreconditionError("not an equivalence relation on this G-set")
    shape = X.orbits[0]
    for arms in itertools.product(*(range(n + 1) for n in shape.arms)):
        for f in transitive_homs(shape, OrbitShape(arms=arms)):
            if kernel_relation(f).orbit_set == relation.orbit_set:
                return f.target, f
    raise CounterexampleError(f"relation {relation.orbit_set} on {X} is not a projection kernel")


def factor_product_relation(
    relation: EquivRelation, split: int = 1
) -> Tuple[EquivRelation, EquivRelation]:
    """Factor a relation on X x Y over G^split x G^(s-split).

    Returns:
        Relations R1 on X and R2 on Y with R = R1 x R2.

    Raises:
        PreconditionError: If the base is not transitive or split is invalid.
        CounterexampleError: If R is not a product relation.
    """
    Z = relation.base
    if not Z.is_transitive or not 0 < split < Z.s:
        raise PreconditionError("factorization needs a transitive base over a split group")
    arms = Z.orbits[0].arms
    X = GSet.of(arms[:split])
    Y = GSet.of(arms[split:])
    layout = product_layout((Z, Z))
    members = set(relation.orbit_set)
    diag_x = tuple((3,) * n for n in arms[:split])
    diag_y = tuple((3,) * n for n in arms[split:])

    def lookup(words_x, words_y) -> int:
        return layout.index(Amalgam(orbits=(0, 0), words=tuple(words_x) + tuple(words_y)))

    left = [
        i for i, a in enumerate(product_amalgams((X, X)))
        if lookup(a.words, diag_y) in members
    ]
    right = [
        i for i, b in enumerate(product_amalgams((Y, Y)))
        if lookup(diag_x, b.words) in members
    ]
    xx = product_amalgams((X, X))
    yy = product_amalgams((Y, Y))
    product = {lookup(xx[i].words, yy[j].words) for i in left for j in right}
    if product != members:
        raise CounterexampleError(f"relation on {Z} does not factor as a product")
    return (
        EquivRelation(base=X, orbit_set=tuple(left)),
        EquivRelation(base=Y, orbit_set=tuple(right)),
    )


def fiber_bimodules(relation: EquivRelation) -> List[Tuple[int, ...]]:
    """Orbit sets B of Y x Y with R B, B R inside B and B B^T, B^T B inside R.

    For a stable equivalence relation on X ⊠ Y, the orbits of Y x Y paired
    with one fixed orbit of X x X form such a set, with R the part paired
    with the diagonal of X.

    Returns:
        Sorted list of sorted orbit-index tuples.

    Raises:
        ResourceCapError: If Y exceeds the relation caps.
    """
    Y = relation.base
    _check_relation_caps(Y)
    table = triple_table(Y, Y, Y)
    n = product_layout((Y, Y)).size
    partner = swap_permutation(Y, Y)
    inside = set(relation.orbit_set)
    implies: List[List[int]] = [[] for _ in range(n)]
    implied_by: List[List[int]] = [[] for _ in range(n)]
    excludes: List[set] = [set() for _ in range(n)]

    def imply(a, c):
        implies[a].append(c)
        implied_by[c].append(a)

    def exclude(a, b):
        excludes[a].add(b)
        excludes[b].add(a)

    for ab, bc, ac in zip(table.ab, table.bc, table.ac):
        if ab in inside:
            imply(bc, ac)
        if bc in inside:
            imply(ab, ac)
        if ac not in inside:
            exclude(ab, partner[bc])
            exclude(partner[ab], bc)

    value = array("b", [-1] * n)
    trail: List[int] = []

    def assign(v, val, queue) -> bool:
        if value[v] == -1:
            value[v] = val
            trail.append(v)
            queue.append(v)
            return True
        return value[v] == val

    def propagate(queue) -> bool:
        while queue:
            v = queue.pop()
            if value[v] == 1:
                if not all(assign(w, 1, queue) for w in implies[v]):
                    return False
                if not all(assign(u, 0, queue) for u in excludes[v]):
                    return False
            elif not all(assign(u, 0, queue) for u in implied_by[v]):
                return False
        return True

    def undo(mark: int) -> None:
        while len(trail) > mark:
            value[trail.pop()] = -1

    def try_value(v, val) -> bool:
        queue: List[int] = []
        return assign(v, val, queue) and propagate(queue)

    solutions = []
    frames: List[Tuple[int, int, bool]] = []
    descend = True
    while True:
        if descend:
            v = next((i for i in range(n) if value[i] == -1), -1)
            if v < 0:
                solutions.append(tuple(i for i in range(n) if value[i] == 1))
                descend = False
                continue
            mark = len(trail)
            if try_value(v, 0):
                frames.append((v, mark, False))
                continue
            undo(mark)
            if try_value(v, 1):
                frames.append((v, mark, True))
                continue
            undo(mark)
            descend = False
        else:
            if not frames:
                break
            v, mark, tried_one = frames.pop()
            undo(mark)
            if not tried_one and try_value(v, 1):
                frames.append((v, mark, True))
                descend = True
            else:
                undo(mark)
    logger.info("Fiber search on %s over %s: %d solutions", Y, relation.orbit_set, len(solutions))
    return sorted(solutions)


def product_relation(left: EquivRelation, right: EquivRelation) -> EquivRelation:
    """R1 x R2 on X ⊠ Y for relations on transitive X and Y.

    Raises:
        PreconditionError: If a base is not transitive.
    """
    X, Y = left.base, right.base
    if not (X.is_transitive and Y.is_transitive):
        raise PreconditionError("product relations are formed on transitive G-sets")
    Z = GSet.of(X.orbits[0].arms + Y.orbits[0].arms)
    layout = product_layout((Z, Z))
    xx, yy = product_amalgams((X, X)), product_amalgams((Y, Y))
    members = sorted(
        layout.index(Amalgam(orbits=(0, 0), words=xx[i].words + yy[j].words))
        for i in left.orbit_set
        for j in right.orbit_set
    )
    return EquivRelation(base=Z, orbit_set=tuple(members))


def product_equivalence_relations(X: GSet, Y: GSet) -> List[EquivRelation]:
    """All stable equivalence relations on X ⊠ Y for transitive X and Y.

    Let R be one of them. The part of R over the diagonal of X is an
    equivalence relation R_Y on Y, and the part over any other orbit of
    X x X is one of the :func:`fiber_bimodules` of R_Y. When those are only
    the empty set and R_Y itself, R is the product of its part over the
    diagonal of Y with R_Y. Only X and Y are searched, never X ⊠ Y.

    Raises:
        PreconditionError: If X or Y is not transitive.
        ResourceCapError: If X or Y exceeds the relation caps.
        CounterexampleError: If some R_Y has a fiber other than the empty
            set and R_Y, so a relation may fail to be a product.
    """
    if not (X.is_transitive and Y.is_transitive):
        raise PreconditionError("product relations are formed on transitive G-sets")
    left = equivalence_relations(X)
    right = equivalence_relations(Y)
    for relation in right:
        for members in fiber_bimodules(relation):
            if members and members != relation.orbit_set:
                raise CounterexampleError(
                    f"fiber {members} over {relation.orbit_set} on {Y} is not a product fiber"
                )
    return [product_relation(a, b) for a in left for b in right]
