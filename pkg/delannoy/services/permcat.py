"""The rigid tensor category of Schwartz spaces.

Objects are formal symbols C(X) for finitary G^s-sets X. A morphism
C(X) -> C(Y) is a G-invariant function on Y x X, stored densely as one
scalar per orbit of Y x X in canonical amalgam order. Composition is
convolution against the measure: an orbit of Z x Y x X contributes
(-1)^(columns holding only the middle point) times the two factors.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict

from delannoy.errors import PreconditionError, StructuralError
from delannoy.schemas import MorphismPayload
from delannoy.services import linalg
from delannoy.services.ordcomb import (
    Amalgam,
    GMap,
    GSet,
    diagonal_indices,
    diagonal_map,
    disjoint_union,
    orbit_of_point,
    point_set,
    product_amalgams,
    product_gset,
    product_layout,
    reassociation_map,
    representative,
    split_point,
    swap_permutation,
    terminal_map,
    triple_table,
)
from delannoy.services.scalars import format_scalar, get_domain, sign

logger = logging.getLogger(__name__)


class PermObject(BaseModel):
    """The Schwartz space C(X) of a G-set X."""

    model_config = ConfigDict(frozen=True)

    base: GSet

    def __str__(self) -> str:
        return f"C({self.base})"


ObjectLike = Union[PermObject, GSet]


def as_object(X: ObjectLike) -> PermObject:
    return X if isinstance(X, PermObject) else PermObject(base=X)


def base_of(X: ObjectLike) -> GSet:
    return X.base if isinstance(X, PermObject) else X


@dataclass(frozen=True)
class PermMorphism:
    """A morphism C(X) -> C(Y): one scalar per orbit of Y x X."""

    source: PermObject
    target: PermObject
    coeffs: Tuple
    domain: object

    def __post_init__(self):
        expected = product_layout((self.target.base, self.source.base)).size
        if len(self.coeffs) != expected:
            raise StructuralError(
                f"{len(self.coeffs)} coefficients for a Hom space of dimension {expected}"
            )

    @property
    def X(self) -> GSet:
        return self.source.base

    @property
    def Y(self) -> GSet:
        return self.target.base

    @property
    def is_endomorphism(self) -> bool:
        return self.source == self.target

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: "PermMorphism") -> "PermMorphism":
        _require_parallel(self, other)
        return self._with(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "PermMorphism") -> "PermMorphism":
        _require_parallel(self, other)
        return self._with(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "PermMorphism":
        return self._with(tuple(-a for a in self.coeffs))

    def scale(self, c) -> "PermMorphism":
        return self._with(tuple(c * a for a in self.coeffs))

    def _with(self, coeffs) -> "PermMorphism":
        return PermMorphism(self.source, self.target, tuple(coeffs), self.domain)


def _require_parallel(f: PermMorphism, g: PermMorphism) -> None:
    if f.source != g.source or f.target != g.target:
        raise StructuralError("morphisms have different sources or targets")


def morphism(X: ObjectLike, Y: ObjectLike, coeffs: Sequence, K=None) -> PermMorphism:
    """Morphism C(X) -> C(Y) from a coefficient vector over Y x X."""
    K = K if K is not None else get_domain()
    return PermMorphism(as_object(X), as_object(Y), tuple(K.convert(c) for c in coeffs), K)


def zero(X: ObjectLike, Y: ObjectLike, K=None) -> PermMorphism:
    K = K if K is not None else get_domain()
    size = product_layout((base_of(Y), base_of(X))).size
    return PermMorphism(as_object(X), as_object(Y), (K.zero,) * size, K)


def basis_morphism(X: ObjectLike, Y: ObjectLike, index: int, K=None) -> PermMorphism:
    """Indicator of one orbit of Y x X."""
    K = K if K is not None else get_domain()
    size = product_layout((base_of(Y), base_of(X))).size
    coeffs = [K.zero] * size
    coeffs[index] = K.one
    return PermMorphism(as_object(X), as_object(Y), tuple(coeffs), K)


# ---------------------------------------------------------------------------
# Identity and direct sums


def identity(X: ObjectLike, K=None) -> PermMorphism:
    """Indicator of the diagonal orbits of X x X."""
    K = K if K is not None else get_domain()
    return _identity(base_of(X), K)


@lru_cache(maxsize=128)
def _identity(X: GSet, K) -> PermMorphism:
    coeffs = [K.zero] * product_layout((X, X)).size
    for d in diagonal_indices(X):
        coeffs[d] = K.one
    return PermMorphism(as_object(X), as_object(X), tuple(coeffs), K)


def is_identity(f: PermMorphism) -> bool:
    return f.is_endomorphism and f.coeffs == _identity(f.X, f.domain).coeffs


def dsum_obj(*objects: ObjectLike) -> PermObject:
    """C(X) + C(Y) = C(X disjoint-union Y)."""
    return as_object(disjoint_union(*(base_of(X) for X in objects)))


def dsum(f: PermMorphism, g: PermMorphism) -> PermMorphism:
    """Block-diagonal sum of two morphisms."""
    K = f.domain
    X, Y = dsum_obj(f.X, g.X).base, dsum_obj(f.Y, g.Y).base
    nx, ny = len(f.X.orbits), len(f.Y.orbits)
    lay_f = product_layout((f.Y, f.X))
    lay_g = product_layout((g.Y, g.X))
    coeffs = []
    for amalgam in product_amalgams((Y, X)):
        oy, ox = amalgam.orbits
        if oy < ny and ox < nx:
            coeffs.append(f.coeffs[lay_f.index(amalgam)])
        elif oy >= ny and ox >= nx:
            shifted = Amalgam(orbits=(oy - ny, ox - nx), words=amalgam.words)
            coeffs.append(g.coeffs[lay_g.index(shifted)])
        else:
            coeffs.append(K.zero)
    return PermMorphism(as_object(X), as_object(Y), tuple(coeffs), K)


# ---------------------------------------------------------------------------
# Composition


def compose(psi: PermMorphism, phi: PermMorphism) -> PermMorphism:
    """The convolution psi o phi of phi: C(X) -> C(Y) and psi: C(Y) -> C(Z).

    Raises:
        StructuralError: If the middle objects differ.
    """
    if psi.source != phi.target:
        raise StructuralError(f"cannot compose {psi.source} <- {phi.target}")
    if is_identity(psi):
        return phi
    if is_identity(phi):
        return psi
    K = psi.domain
    Z, Y, X = psi.Y, psi.X, phi.X
    table = triple_table(Z, Y, X)
    result = [K.zero] * product_layout((Z, X)).size
    a, b = psi.coeffs, phi.coeffs
    for ab, bc, ac, lone in zip(table.ab, table.bc, table.ac, table.lone):
        u, v = a[ab], b[bc]
        if u and v:
            if lone & 1:
                result[ac] -= u * v
            else:
                result[ac] += u * v
    return PermMorphism(phi.source, psi.target, tuple(result), K)


def compose_all(*maps: PermMorphism) -> PermMorphism:
    """Compose right to left: compose_all(h, g, f) = h o g o f."""
    result = maps[-1]
    for f in reversed(maps[:-1]):
        result = compose(f, result)
    return result


def left_matrix(psi: PermMorphism, X: ObjectLike):
    """Matrix of phi -> psi o phi from Hom(C(X), C(Y)) to Hom(C(X), C(Z))."""
    K = psi.domain
    X = base_of(X)
    Z, Y = psi.Y, psi.X
    table = triple_table(Z, Y, X)
    dod: Dict[int, Dict[int, object]] = {}
    for ab, bc, ac, lone in zip(table.ab, table.bc, table.ac, table.lone):
        u = psi.coeffs[ab]
        if u:
            row = dod.setdefault(ac, {})
            row[bc] = row.get(bc, K.zero) + (-u if lone & 1 else u)
    shape = (product_layout((Z, X)).size, product_layout((Y, X)).size)
    return linalg.sparse(dod, shape, K)


def right_matrix(phi: PermMorphism, Z: ObjectLike):
    """Matrix of psi -> psi o phi from Hom(C(Y), C(Z)) to Hom(C(X), C(Z))."""
    K = phi.domain
    Z = base_of(Z)
    Y, X = phi.Y, phi.X
    table = triple_table(Z, Y, X)
    dod: Dict[int, Dict[int, object]] = {}
    for ab, bc, ac, lone in zip(table.ab, table.bc, table.ac, table.lone):
        v = phi.coeffs[bc]
        if v:
            row = dod.setdefault(ac, {})
            row[ab] = row.get(ab, K.zero) + (-v if lone & 1 else v)
    shape = (product_layout((Z, X)).size, product_layout((Z, Y)).size)
    return linalg.sparse(dod, shape, K)


# ---------------------------------------------------------------------------
# Hom spaces


def hom_space(X: ObjectLike, Y: ObjectLike) -> List[Amalgam]:
    """Basis of Hom(C(X), C(Y)): the orbit indicators of Y x X."""
    return list(product_amalgams((base_of(Y), base_of(X))))


def hom_dim(X: ObjectLike, Y: ObjectLike) -> int:
    """Dimension of Hom(C(X), C(Y)), the number of orbits of Y x X."""
    return product_layout((base_of(Y), base_of(X))).size


# ---------------------------------------------------------------------------
# Maps of G-sets


def pullback(f: GMap, K=None) -> PermMorphism:
    """f^*: C(X) -> C(Y) for f: Y -> X, the indicator of the graph of f."""
    K = K if K is not None else get_domain()
    Y, X = f.source, f.target
    coeffs = []
    for amalgam in product_amalgams((Y, X)):
        p, q = representative(amalgam)
        hit = f.apply(amalgam.orbits[0], p) == (amalgam.orbits[1], q)
        coeffs.append(K.one if hit else K.zero)
    return PermMorphism(as_object(X), as_object(Y), tuple(coeffs), K)


def pushforward(f: GMap, K=None) -> PermMorphism:
    """f_*: C(Y) -> C(X) for f: Y -> X, the indicator of the reflected graph."""
    return transpose(pullback(f, K))


def compose_pullback(f: GMap, psi: PermMorphism) -> PermMorphism:
    """f^* o psi, read off as psi(f(w), x) at each orbit (w, x).

    Raises:
        StructuralError: If psi does not land in the target of f.
    """
    if psi.Y != f.target:
        raise StructuralError(f"cannot pull back {psi.Y} along a map into {f.target}")
    lay = product_layout((f.target, psi.X))
    coeffs = []
    for amalgam in product_amalgams((f.source, psi.X)):
        w, x = representative(amalgam)
        orbit, image = f.apply(amalgam.orbits[0], w)
        coeffs.append(psi.coeffs[_pair_index(lay, orbit, image, amalgam.orbits[1], x)])
    return PermMorphism(psi.source, as_object(f.source), tuple(coeffs), psi.domain)


def compose_pushforward(psi: PermMorphism, f: GMap) -> PermMorphism:
    """psi o f_*, read off as psi(z, f(w)) at each orbit (z, w).

    Raises:
        StructuralError: If f does not land in the source of psi.
    """
    if psi.X != f.target:
        raise StructuralError(f"cannot push {f.target} into a map from {psi.X}")
    lay = product_layout((psi.Y, f.target))
    coeffs = []
    for amalgam in product_amalgams((psi.Y, f.source)):
        z, w = representative(amalgam)
        orbit, image = f.apply(amalgam.orbits[1], w)
        coeffs.append(psi.coeffs[_pair_index(lay, amalgam.orbits[0], z, orbit, image)])
    return PermMorphism(as_object(f.source), psi.target, tuple(coeffs), psi.domain)


def transpose(phi: PermMorphism) -> PermMorphism:
    """The dual morphism C(Y) -> C(X), read through the swap Y x X -> X x Y."""
    permutation = swap_permutation(phi.Y, phi.X)
    coeffs = [None] * len(phi.coeffs)
    for i, j in enumerate(permutation):
        coeffs[j] = phi.coeffs[i]
    return PermMorphism(phi.target, phi.source, tuple(coeffs), phi.domain)


# ---------------------------------------------------------------------------
# Tensor structure


def unit_object(s: int = 1) -> PermObject:
    """The monoidal unit C(pt)."""
    return as_object(point_set(s))


def tensor_obj(*objects: ObjectLike) -> PermObject:
    """C(X) (x) C(Y) = C(X x Y), orbits in canonical amalgam order."""
    return as_object(product_gset(*(base_of(X) for X in objects)))


def _pair_index(layout, orbit_a: int, point_a, orbit_b: int, point_b) -> int:
    return layout.index(orbit_of_point((point_a, point_b), (orbit_a, orbit_b)))


def tensor(phi: PermMorphism, phi2: PermMorphism) -> PermMorphism:
    """phi (x) phi2: C(X x X') -> C(Y x Y').

    Each orbit of (Y x Y') x (X x X') is projected onto Y x X and Y' x X'
    through its representative; the coefficient is the product of the two
    values found there.
    """
    K = phi.domain
    X, Y, X2, Y2 = phi.X, phi.Y, phi2.X, phi2.Y
    if X.s != X2.s:
        raise StructuralError("tensor factors over different group powers")
    XX, YY = product_gset(X, X2), product_gset(Y, Y2)
    am_x = product_amalgams((X, X2))
    am_y = product_amalgams((Y, Y2))
    lay = product_layout((Y, X))
    lay2 = product_layout((Y2, X2))
    coeffs = []
    for amalgam in product_amalgams((YY, XX)):
        p, q = representative(amalgam)
        ay, ax = am_y[amalgam.orbits[0]], am_x[amalgam.orbits[1]]
        py, py2 = split_point(ay, p)
        qx, qx2 = split_point(ax, q)
        u = phi.coeffs[_pair_index(lay, ay.orbits[0], py, ax.orbits[0], qx)]
        if not u:
            coeffs.append(K.zero)
            continue
        v = phi2.coeffs[_pair_index(lay2, ay.orbits[1], py2, ax.orbits[1], qx2)]
        coeffs.append(u * v)
    return PermMorphism(as_object(XX), as_object(YY), tuple(coeffs), K)


def _merge(a, b):
    return tuple(tuple(sorted(set(x) | set(y))) for x, y in zip(a, b))


def associator_map(X: ObjectLike, Y: ObjectLike, Z: ObjectLike) -> GMap:
    """The G-bijection (X x Y) x Z -> X x (Y x Z)."""
    X, Y, Z = base_of(X), base_of(Y), base_of(Z)
    XY, YZ = product_gset(X, Y), product_gset(Y, Z)
    left, right = product_gset(XY, Z), product_gset(X, YZ)
    am_left = product_amalgams((XY, Z))
    am_xy = product_amalgams((X, Y))
    lay_yz = product_layout((Y, Z))
    lay_right = product_layout((X, YZ))

    def split_source(orbit, point):
        outer = am_left[orbit]
        p_xy, p_z = split_point(outer, point)
        inner = am_xy[outer.orbits[0]]
        p_x, p_y = split_point(inner, p_xy)
        return (
            (inner.orbits[0], p_x),
            (inner.orbits[1], p_y),
            (outer.orbits[1], p_z),
        )

    def join_target(parts):
        (ox, px), (oy, py), (oz, pz) = parts
        yz = _pair_index(lay_yz, oy, py, oz, pz)
        return _pair_index(lay_right, ox, px, yz, _merge(py, pz))

    return reassociation_map(left, right, split_source, join_target)


def associator(X: ObjectLike, Y: ObjectLike, Z: ObjectLike, K=None) -> PermMorphism:
    """The associativity isomorphism C((X x Y) x Z) -> C(X x (Y x Z))."""
    return pushforward(associator_map(X, Y, Z), K)


def braiding(X: ObjectLike, Y: ObjectLike, K=None) -> PermMorphism:
    """The symmetry C(X x Y) -> C(Y x X) induced by swapping factors."""
    X, Y = base_of(X), base_of(Y)
    K = K if K is not None else get_domain()
    XY, YX = product_gset(X, Y), product_gset(Y, X)
    permutation = swap_permutation(X, Y)
    lay = product_layout((YX, XY))
    coeffs = [K.zero] * lay.size
    for i, shape in enumerate(XY.orbits):
        j = permutation[i]
        coeffs[lay.index(Amalgam(orbits=(j, i), words=tuple((3,) * n for n in shape.arms)))] = K.one
    return PermMorphism(as_object(XY), as_object(YX), tuple(coeffs), K)


# ---------------------------------------------------------------------------
# Duality and traces


def ev_coev(X: ObjectLike, K=None) -> Tuple[PermMorphism, PermMorphism]:
    """Evaluation C(X x X) -> 1 and coevaluation 1 -> C(X x X).

    Both are the indicator of the diagonal orbits of X x X.
    """
    K = K if K is not None else get_domain()
    X = base_of(X)
    pt = point_set(X.s)
    XX = product_gset(X, X)
    coeffs = [K.zero] * len(XX.orbits)
    for d in diagonal_indices(X):
        coeffs[d] = K.one
    ev = PermMorphism(as_object(XX), as_object(pt), tuple(coeffs), K)
    coev = PermMorphism(as_object(pt), as_object(XX), tuple(coeffs), K)
    return ev, coev


def trace_dim(phi: PermMorphism):
    """Categorical trace sum_O mu(O) phi(diagonal of O).

    Raises:
        PreconditionError: If phi is not an endomorphism.
    """
    if not phi.is_endomorphism:
        raise PreconditionError("the trace is defined for endomorphisms")
    K = phi.domain
    total = K.zero
    for d, shape in zip(diagonal_indices(phi.X), phi.X.orbits):
        if phi.coeffs[d]:
            total += sign(K, shape.total) * phi.coeffs[d]
    return total


def dim(X: ObjectLike, K=None):
    """Categorical dimension of C(X), the trace of its identity."""
    return trace_dim(identity(X, K))


def snake(X: ObjectLike, K=None) -> PermMorphism:
    """(ev (x) id) o assoc^-1 o (id (x) coev) as an endomorphism of C(X)."""
    K = K if K is not None else get_domain()
    ev, coev = ev_coev(X, K)
    ident = identity(X, K)
    # assoc^-1 is the pullback along the associator bijection
    return compose(
        tensor(ev, ident),
        compose_pullback(associator_map(X, X, X), tensor(ident, coev)),
    )


# ---------------------------------------------------------------------------
# Schwartz algebra structure of C(X)


def schwartz_mult(X: ObjectLike, K=None) -> PermMorphism:
    """Pointwise multiplication C(X x X) -> C(X), the pullback along the diagonal."""
    return pullback(diagonal_map(base_of(X)), K)


def schwartz_unit(X: ObjectLike, K=None) -> PermMorphism:
    """The constant function 1 -> C(X), the pullback of X -> pt."""
    return pullback(terminal_map(base_of(X)), K)


def schwartz_counit(X: ObjectLike, K=None) -> PermMorphism:
    """Integration C(X) -> 1 against the measure, the pushforward of X -> pt."""
    return pushforward(terminal_map(base_of(X)), K)


def diagonal_product(x: PermMorphism, y: PermMorphism) -> PermMorphism:
    """schwartz_mult(Z) o (x (x) y) for x: C(X) -> C(Z) and y: C(X') -> C(Z).

    The composite has kernel x(z, w) * y(z, w') at (z, (w, w')), so it is
    read off pointwise without building C(Z x Z).

    Raises:
        StructuralError: If x and y land in different objects.
    """
    if x.target != y.target:
        raise StructuralError(f"pointwise product of maps into {x.Y} and {y.Y}")
    K = x.domain
    Z, X, X2 = x.Y, x.X, y.X
    XX = product_gset(X, X2)
    am_xx = product_amalgams((X, X2))
    lay_x = product_layout((Z, X))
    lay_y = product_layout((Z, X2))
    coeffs = []
    for amalgam in product_amalgams((Z, XX)):
        z, w = representative(amalgam)
        inner = am_xx[amalgam.orbits[1]]
        w1, w2 = split_point(inner, w)
        u = x.coeffs[_pair_index(lay_x, amalgam.orbits[0], z, inner.orbits[0], w1)]
        if not u:
            coeffs.append(K.zero)
            continue
        v = y.coeffs[_pair_index(lay_y, amalgam.orbits[0], z, inner.orbits[1], w2)]
        coeffs.append(u * v)
    return PermMorphism(as_object(XX), x.target, tuple(coeffs), K)


def morphism_payload(phi: PermMorphism) -> MorphismPayload:
    """Serializable form of a morphism."""
    return MorphismPayload(
        source=str(phi.X),
        target=str(phi.Y),
        coeffs=[format_scalar(phi.domain, c) for c in phi.coeffs],
    )
