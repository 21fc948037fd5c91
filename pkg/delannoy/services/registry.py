"""Registry of simple objects L_w, built level by level and cached on disk.

Level n splits C(R^(n)). The parts belonging to shorter labels are
removed with the isotypic projections of the registry so far; what is
left, f End f, is a product of 2^n copies of the scalars, one per new
simple. A pseudo-random element of it has a minimal polynomial with 2^n
distinct rational roots, and the Lagrange interpolation polynomials at
those roots give the new idempotents.

New simples are named through the restriction to G(0): a simple of
length n contains exactly one summand L_x ⊠ L_w with x of length 1 and w
of length n-1, and is labeled x + w. The same is checked against the
(n-1, 1) cut. At n = 1 the two new simples are ordered by their
coefficient vectors, normalized so that the first non-zero entry is 1;
the smaller one is ``a``.
"""

import json
import logging
import random
from math import comb
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from delannoy.config import settings
from delannoy.errors import LabelingError, PreconditionError, RegistryVersionError
from delannoy.schemas import RegistryEntry, RegistryFile, RegistryFileEntry, RegistryReport
from delannoy.services import linalg
from delannoy.services.karoubi import (
    KObject,
    LabelTuple,
    SimpleLabel,
    karoubi_object,
    kboxtimes,
    labels_of_length,
    render_label,
    restrict,
    split_isotypic,
)
from delannoy.services.ordcomb import (
    GSet,
    delannoy_number,
    point_set,
    product_layout,
    transitive,
)
from delannoy.services.permcat import (
    PermMorphism,
    as_object,
    compose,
    identity,
    left_matrix,
    morphism,
    trace_dim,
)
from delannoy.services.scalars import (
    domain_name,
    format_scalar,
    get_domain,
    parse_scalar,
    sign,
    to_fraction,
)

logger = logging.getLogger(__name__)


class Registry:
    """Idempotents of the simple objects L_w for words w up to some length."""

    def __init__(self, K, idempotents: Optional[Dict[str, PermMorphism]] = None):
        self.domain = K
        self.idempotents: Dict[str, PermMorphism] = dict(idempotents or {})
        self._products: Dict[LabelTuple, KObject] = {}
        if "" not in self.idempotents:
            self.idempotents[""] = identity(point_set(1), K)

    @property
    def depth(self) -> int:
        return max(len(word) for word in self.idempotents)

    def labels(self, max_length: Optional[int] = None) -> List[SimpleLabel]:
        """Registered labels by length, then lexicographically."""
        words = sorted(self.idempotents, key=lambda w: (len(w), w))
        if max_length is not None:
            words = [w for w in words if len(w) <= max_length]
        return [SimpleLabel(word=w) for w in words]

    def idempotent(self, label) -> PermMorphism:
        """The idempotent of L_label on C(R^(length)).

        Raises:
            PreconditionError: If the label is longer than the registry depth.
        """
        word = label.word if isinstance(label, SimpleLabel) else label
        if word not in self.idempotents:
            raise PreconditionError(
                f"label '{word or '∅'}' is beyond the registry depth {self.depth}"
            )
        return self.idempotents[word]

    def simple(self, label) -> KObject:
        label = label if isinstance(label, SimpleLabel) else SimpleLabel(word=label)
        return self.simple_product((label,))

    def simple_product(self, labels: LabelTuple) -> KObject:
        """L_w1 ⊠ ... ⊠ L_ws over G^s."""
        if labels not in self._products:
            factors = [
                KObject(as_object(self.idempotent(l).source.base), self.idempotent(l))
                for l in labels
            ]
            self._products[labels] = kboxtimes(*factors)
        return self._products[labels]

    def report(self, path: Optional[str] = None) -> RegistryReport:
        K = self.domain
        return RegistryReport(
            depth=self.depth,
            field=domain_name(K),
            version=settings.AMALGAM_ORDER_VERSION,
            path=path,
            entries=[
                RegistryEntry(
                    label=str(label),
                    length=label.length,
                    dimension=format_scalar(K, trace_dim(self.idempotent(label))),
                    rank=sum(1 for c in self.idempotent(label).coeffs if c),
                )
                for label in self.labels()
            ],
        )


# ---------------------------------------------------------------------------
# Building


def build_registry(depth: int, K=None) -> Registry:
    """Registry of all labels up to ``depth``.

    Raises:
        LabelingError: If a level cannot be split or labeled consistently.
    """
    K = K if K is not None else get_domain()
    if depth < 0:
        raise PreconditionError("registry depth must be non-negative")
    return extend_registry(Registry(K), depth)


def extend_registry(registry: Registry, depth: int) -> Registry:
    for n in range(registry.depth + 1, depth + 1):
        _build_level(registry, n)
    return registry


def _build_level(registry: Registry, n: int) -> None:
    K = registry.domain
    X = transitive(n)
    M = karoubi_object(X, K=K)
    rest = identity(X, K)
    squares = 0
    for label in registry.labels(n - 1):
        part = split_isotypic(M, registry.simple(label), (label,))
        multiplicity = part.multiplicity if part else 0
        if multiplicity != comb(n, label.length):
            raise LabelingError(
                f"L_{label} occurs {multiplicity} times in C(R^{n}), expected {comb(n, label.length)}"
            )
        squares += multiplicity ** 2
        rest = rest - part.component
    new = _split_top(rest, X, n, K)
    squares += len(new)
    if squares != delannoy_number(n, n):
        raise LabelingError(f"block sizes of End C(R^{n}) add up to {squares}")
    labeled = _label_level_one(new, K) if n == 1 else _label_by_restriction(new, X, n, registry)
    for word, e in labeled.items():
        if trace_dim(e) != sign(K, n):
            raise LabelingError(f"L_{word} has dimension {format_scalar(K, trace_dim(e))}")
    registry.idempotents.update(labeled)
    logger.info("Registry level %d: %d new simples", n, len(labeled))


def _random_coefficients(rng: random.Random, size: int, spread: int, density: float) -> List[int]:
    return [rng.randint(-spread, spread) if rng.random() < density else 0 for _ in range(size)]


def _split_top(rest: PermMorphism, X: GSet, n: int, K) -> List[PermMorphism]:
    """Primitive idempotents of the commutative algebra rest o End o rest."""
    expected = 2 ** n
    size = product_layout((X, X)).size
    rng = random.Random(settings.RANDOM_SEED + n)
    for trial in range(settings.MIN_POLY_TRIALS):
        g = morphism(X, X, _random_coefficients(rng, size, 3, 0.5), K)
        t = compose(rest, compose(g, rest))
        L = left_matrix(t, X)

        def powers():
            vector = list(rest.coeffs)
            while True:
                yield vector
                vector = linalg.matvec(L, vector)

        try:
            poly, basis = linalg.minimal_polynomial(powers(), K, expected)
        except ArithmeticError:
            continue
        roots = linalg.linear_roots(poly)
        if roots is None or len(roots) != expected:
            logger.info("Level %d trial %d: minimal polynomial %s does not split", n, trial, poly)
            continue
        return [
            PermMorphism(
                rest.source,
                rest.target,
                tuple(linalg.combine(linalg.lagrange_coefficients(roots, i, K), basis, K, size)),
                K,
            )
            for i in range(expected)
        ]
    raise LabelingError(
        f"no splitting element for level {n} after {settings.MIN_POLY_TRIALS} trials"
    )


def _normalized(K, e: PermMorphism) -> Tuple:
    values = [to_fraction(K, c) for c in e.coeffs]
    pivot = next(v for v in values if v)
    return tuple(v / pivot for v in values)


def _label_level_one(new: List[PermMorphism], K) -> Dict[str, PermMorphism]:
    first, second = sorted(new, key=lambda e: _normalized(K, e))
    return {"a": first, "b": second}


def _label_by_restriction(
    new: List[PermMorphism], X: GSet, n: int, registry: Registry
) -> Dict[str, PermMorphism]:
    rng = random.Random(settings.RANDOM_SEED * 7 + n)
    labeled: Dict[str, PermMorphism] = {}
    for e in new:
        restricted = restrict(KObject(as_object(X), e))
        x, w = _match_cut(restricted, 1, n - 1, registry, rng)
        u, y = _match_cut(restricted, n - 1, 1, registry, rng)
        word = x.word + w.word
        if u.word + y.word != word:
            raise LabelingError(
                f"cuts disagree: {render_label((x, w))} against {render_label((u, y))}"
            )
        if word in labeled:
            raise LabelingError(f"two simples of C(R^{n}) labeled {word}")
        labeled[word] = e
    return labeled


def _match_cut(
    restricted: KObject, left: int, right: int, registry: Registry, rng: random.Random
) -> LabelTuple:
    """The unique L_x ⊠ L_w with lengths (left, right) inside a restricted simple."""
    K = registry.domain
    Y = GSet.of((left, right))
    size = product_layout((restricted.base, Y)).size
    candidates = [(x, w) for x in labels_of_length(left) for w in labels_of_length(right)]
    for _ in range(settings.MIN_POLY_TRIALS):
        phi = morphism(Y, restricted.base, _random_coefficients(rng, size, 2, 1.0), K)
        psi = compose(restricted.idem, phi)
        hits = [
            c for c in candidates
            if not compose(psi, registry.simple_product(c).idem).is_zero()
        ]
        if len(hits) == 1:
            return hits[0]
        if len(hits) > 1:
            raise LabelingError(
                f"several ({left}, {right}) summands: {[render_label(h) for h in hits]}"
            )
    raise LabelingError(f"no ({left}, {right}) summand found")


# ---------------------------------------------------------------------------
# Persistence


def save_registry(registry: Registry, path: str) -> None:
    """Write the registry as JSON with a version header."""
    K = registry.domain
    payload = RegistryFile(
        version=settings.AMALGAM_ORDER_VERSION,
        field=domain_name(K),
        depth=registry.depth,
        labels={
            label.word: RegistryFileEntry(
                arms=[len(label.word)],
                coeffs=[format_scalar(K, c) for c in registry.idempotent(label).coeffs],
            )
            for label in registry.labels()
        },
    )
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload.model_dump(), sort_keys=True, indent=1))
    logger.info("Wrote registry of depth %d to %s", registry.depth, path)


def load_registry(path: str, K=None) -> Registry:
    """Read a registry file.

    Raises:
        FileNotFoundError: If the file does not exist.
        RegistryVersionError: If the header does not match the settings or
            the file is malformed.
    """
    K = K if K is not None else get_domain()
    try:
        payload = RegistryFile.model_validate_json(Path(path).read_text())
    except ValidationError as exc:
        raise RegistryVersionError(f"malformed registry file {path}: {exc.error_count()} errors")
    if payload.version != settings.AMALGAM_ORDER_VERSION:
        raise RegistryVersionError(
            f"registry order version {payload.version} != {settings.AMALGAM_ORDER_VERSION}"
        )
    if payload.field != domain_name(K):
        raise RegistryVersionError(f"registry over {payload.field}, expected {domain_name(K)}")
    idempotents = {}
    for word, entry in payload.labels.items():
        X = GSet.of(tuple(entry.arms))
        idempotents[word] = morphism(X, X, [parse_scalar(K, c) for c in entry.coeffs], K)
    logger.info("Loaded registry of depth %d from %s", payload.depth, path)
    return Registry(K, idempotents)


_cache: Dict[Tuple[str, str], Registry] = {}


def get_registry(depth: Optional[int] = None, path: Optional[str] = None, K=None) -> Registry:
    """Registry of at least ``depth`` levels, from memory, the cache file or a fresh build.

    A stale or shallower cache file is rebuilt and overwritten.
    """
    depth = settings.REGISTRY_DEPTH if depth is None else depth
    path = path or settings.REGISTRY_PATH
    K = K if K is not None else get_domain()
    key = (path, domain_name(K))
    registry = _cache.get(key)
    if registry is None:
        try:
            registry = load_registry(path, K)
        except FileNotFoundError:
            registry = Registry(K)
        except RegistryVersionError as exc:
            logger.warning("Ignoring registry cache %s: %s", path, exc)
            registry = Registry(K)
        _cache[key] = registry
    if registry.depth < depth:
        extend_registry(registry, depth)
        save_registry(registry, path)
    return registry


def clear_cache() -> None:
    _cache.clear()
