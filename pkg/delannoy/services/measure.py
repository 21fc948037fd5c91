"""The normalized measure on G^s-sets.

The measure is determined by mu(R^(n)) = (-1)^n and is multiplicative over
group coordinates. For a subgroup G(A) fixing a finite set A of points, an
orbit of a G-set splits into placements of its coordinates onto the points
of A or into the open intervals between them; each interval behaves like a
copy of R, so a placement has mass (-1)^(number of coordinates in
intervals). These masses are what convolution in the permutation category
integrates against.
"""

import itertools
import logging
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from delannoy.errors import InvalidInputError, PreconditionError
from delannoy.services.ordcomb import GMap, GSet, Point
from delannoy.services.scalars import get_domain, sign

logger = logging.getLogger(__name__)


class StabOrbit(BaseModel):
    """One G(A)-orbit of a G-set."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    orbit: int = Field(..., description="Orbit of the G-set the placement lives in")
    placement: Tuple[Tuple[int, ...], ...] = Field(
        ...,
        description="Per coordinate, counts for the slots gap, pin, gap, ..., pin, gap",
    )
    representative: Tuple[Tuple[Fraction, ...], ...] = Field(
        ..., description="A point of the orbit, per coordinate"
    )
    mass: int = Field(..., description="Measure of the orbit, +1 or -1")


def mu_of_set(X: GSet, K=None):
    """Measure of a G-set: sum over orbits of prod_i (-1)^(n_i)."""
    K = K if K is not None else get_domain()
    total = K.zero
    for shape in X.orbits:
        total += sign(K, shape.total)
    return total


@lru_cache(maxsize=None)
def slot_placements(n: int, pins: int) -> Tuple[Tuple[int, ...], ...]:
    """Ways to put n ordered coordinates into 2*pins+1 slots.

    Slots alternate gap, pin, gap, ...; gaps hold any number of
    coordinates and pins at most one. Leftmost slots take the largest
    counts first.
    """
    slots = 2 * pins + 1
    result = []

    def fill(slot: int, remaining: int, prefix: Tuple[int, ...]):
        if slot == slots - 1:
            result.append(prefix + (remaining,))
            return
        cap = remaining if slot % 2 == 0 else min(1, remaining)
        for count in range(cap, -1, -1):
            fill(slot + 1, remaining - count, prefix + (count,))

    fill(0, n, ())
    return tuple(result)


def _gap_values(count: int, low: Optional[Fraction], high: Optional[Fraction]) -> List[Fraction]:
    if low is None and high is None:
        return [Fraction(i + 1) for i in range(count)]
    if low is None:
        return [high - count + i for i in range(count)]
    if high is None:
        return [low + 1 + i for i in range(count)]
    step = (high - low) / (count + 1)
    return [low + step * (i + 1) for i in range(count)]


def placement_point(placement: Tuple[int, ...], pins: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """Concrete coordinates realizing a single-coordinate placement."""
    values: List[Fraction] = []
    bounds = [None] + list(pins) + [None]
    for slot, count in enumerate(placement):
        j = slot // 2
        if slot % 2 == 0:
            values.extend(_gap_values(count, bounds[j], bounds[j + 1]))
        elif count:
            values.append(pins[j])
    return tuple(values)


def _normalize_pins(pins: Sequence[Sequence], s: int) -> Tuple[Tuple[Fraction, ...], ...]:
    if len(pins) != s:
        raise InvalidInputError(f"expected pinned points for {s} coordinates, got {len(pins)}")
    result = []
    for arm in pins:
        values = tuple(Fraction(v) for v in arm)
        if any(values[j] >= values[j + 1] for j in range(len(values) - 1)):
            raise InvalidInputError(f"pinned points {values} are not strictly increasing")
        result.append(values)
    return tuple(result)


def stabilizer_orbits(Y: GSet, pins: Sequence[Sequence]) -> List[StabOrbit]:
    """All G(A)-orbits of Y for the pinned set A.

    Args:
        Y: The G-set to split.
        pins: Per group coordinate, strictly increasing rationals.

    Returns:
        Orbits in placement order (orbits of Y first, then coordinates,
        slots scanned left to right).

    Raises:
        InvalidInputError: If the pinned points are not increasing.
    """
    pins = _normalize_pins(pins, Y.s)
    result = []
    for o, shape in enumerate(Y.orbits):
        per_coordinate = [
            slot_placements(n, len(arm)) for n, arm in zip(shape.arms, pins)
        ]
        for placement in itertools.product(*per_coordinate):
            in_gaps = sum(
                count for slots in placement for k, count in enumerate(slots) if k % 2 == 0
            )
            result.append(
                StabOrbit(
                    orbit=o,
                    placement=tuple(placement),
                    representative=tuple(
                        placement_point(slots, arm) for slots, arm in zip(placement, pins)
                    ),
                    mass=-1 if in_gaps % 2 else 1,
                )
            )
    return result


def fiber_orbits(f: GMap, orbit: int) -> List[StabOrbit]:
    """G(A)-orbits of the fiber of f over the representative of the target.

    Only orbit ``orbit`` of the source is considered.
    """
    x = representative_point(f.target, 0)
    single = GSet(orbits=(f.source.orbits[orbit],), s=f.source.s)
    return [
        o for o in stabilizer_orbits(single, x)
        if f.apply(orbit, o.representative) == (0, x)
    ]


def representative_point(X: GSet, orbit: int) -> Point:
    """The integer representative 1..n per coordinate of an orbit of X."""
    return tuple(tuple(Fraction(j) for j in range(1, n + 1)) for n in X.orbits[orbit].arms)


def mu_of_map(f: GMap, K=None):
    """Measure of a map onto a transitive G-set: the measure of its fiber.

    Raises:
        PreconditionError: If the target is not transitive.
    """
    if not f.target.is_transitive:
        raise PreconditionError("the measure of a map needs a transitive target")
    K = K if K is not None else get_domain()
    total = K.zero
    for o in range(len(f.source.orbits)):
        for fiber_orbit in fiber_orbits(f, o):
            total += K(fiber_orbit.mass)
    return total

