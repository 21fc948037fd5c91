"""Acceptance suite.

Each check exercises one group of statements at a scale bounded by
``max_n`` and returns a :class:`SuiteItem`. Checks that hit a resource cap
are reported as skipped, and parts of a check left out by a cap are listed
under ``capped``; a run with anything capped is not ``complete``. Everything
else must pass. The ``fast`` suite runs with max_n = 2 and the ``all`` suite
with max_n = 4 unless a scale is given explicitly.
"""

import itertools
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb
from typing import Callable, Dict, List, Optional, Tuple

from delannoy.config import settings
from delannoy.errors import CounterexampleError, InvalidInputError, ResourceCapError
from delannoy.schemas import SuiteItem, VerifyReport
from delannoy.services import linalg
from delannoy.services.algcls import (
    adjunction_transfer,
    e_idempotent_report,
    etale_report,
    etale_subalgebras,
    gamma,
    is_etale,
    length_stats,
    point_evaluation,
    relative_tensor_exactness,
    restriction_ideals,
    schwartz_algebra,
    split_classification,
    subetale_example,
    theorem_instances,
    udim,
)
from delannoy.services.karoubi import (
    SimpleLabel,
    decompose,
    dual_label_check,
    karoubi_object,
    labels_of_length,
    restrict,
    self_dual_labels,
    simple_dimension,
    tensor_decompose,
    verify_restriction_rule,
)
from delannoy.services.ordcomb import (
    GSet,
    automorphisms,
    delannoy_number,
    power_count,
    transitive,
)
from delannoy.services.permcat import (
    PermMorphism,
    compose,
    hom_dim,
    identity,
    left_matrix,
    morphism,
    right_matrix,
    schwartz_unit,
    snake,
    tensor,
    transpose,
)
from delannoy.services.registry import get_registry
from delannoy.services.scalars import get_domain, sign

logger = logging.getLogger(__name__)

SUITES = {"fast": 2, "all": 4}


@dataclass
class SuiteContext:
    max_n: int
    registry: object
    K: object


class SkippedCheck(Exception):
    """Nothing to check at the requested scale."""


CheckResult = Tuple[bool, Optional[Dict[str, object]]]


def _labels_upto(n: int) -> List[SimpleLabel]:
    return [label for k in range(n + 1) for label in labels_of_length(k)]


def _random_morphism(rng: random.Random, X: GSet, Y: GSet, K) -> PermMorphism:
    return morphism(X, Y, [rng.choice((-1, 0, 1, 2)) for _ in range(hom_dim(X, Y))], K)


# ---------------------------------------------------------------------------
# Checks


def check_hom_dimensions(ctx: SuiteContext) -> CheckResult:
    bad = [
        (n, m)
        for n, m in itertools.product(range(6), repeat=2)
        if hom_dim(transitive(n), transitive(m)) != delannoy_number(n, m)
    ]
    return not bad, {"mismatches": bad} if bad else None


def check_decomposition_table(ctx: SuiteContext) -> CheckResult:
    failures = {}
    for n in range(ctx.max_n + 1):
        table = decompose(karoubi_object(transitive(n), K=ctx.K), ctx.registry).multiplicities()
        expected = {str(label): comb(n, label.length) for label in _labels_upto(n)}
        if table != expected:
            failures[f"C(R^{n})"] = table
    return not failures, failures or None


def check_dimensions(ctx: SuiteContext) -> CheckResult:
    bad = [
        str(label)
        for label in ctx.registry.labels(ctx.max_n)
        if simple_dimension(label, ctx.registry) != sign(ctx.K, label.length)
    ]
    return not bad, {"labels": bad} if bad else None


def check_restriction_rule(ctx: SuiteContext) -> CheckResult:
    reports = [
        verify_restriction_rule(label, ctx.registry)
        for label in _labels_upto(min(3, ctx.max_n))
    ]
    failed = [r.label for r in reports if not r.passed]
    return not failed, {"failed": failed} if failed else None


def check_tensor_rules(ctx: SuiteContext) -> CheckResult:
    if ctx.max_n < 2:
        raise SkippedCheck("tensor rules need labels of length 2")
    a, b = SimpleLabel(word="a"), SimpleLabel(word="b")
    expected = {
        "a ⊗ a": {"a": 1, "aa": 2},
        "b ⊗ b": {"b": 1, "bb": 2},
        "a ⊗ b": {"∅": 1, "a": 1, "b": 1, "ab": 1, "ba": 1},
    }
    observed = {
        "a ⊗ a": tensor_decompose(a, a, ctx.registry),
        "b ⊗ b": tensor_decompose(b, b, ctx.registry),
        "a ⊗ b": tensor_decompose(a, b, ctx.registry),
    }
    return observed == expected, None if observed == expected else {"observed": observed}


def check_duality(ctx: SuiteContext) -> CheckResult:
    failed = [
        str(label)
        for label in _labels_upto(min(2, ctx.max_n))
        if not dual_label_check(label, ctx.registry)
    ]
    self_dual = [str(label) for label in self_dual_labels(min(3, ctx.max_n), ctx.registry)]
    passed = not failed and self_dual == ["∅"]
    return passed, None if passed else {"failed": failed, "self_dual": self_dual}


def check_e_idempotents(ctx: SuiteContext) -> CheckResult:
    detail = {}
    passed = True
    for n in range(min(4, ctx.max_n) + 1):
        report = e_idempotent_report(n, ctx.K)
        subs = etale_subalgebras(n, ctx.K)
        family = sorted(sub.coordinates for sub in subs)
        expected = sorted(
            c for m in range(n + 1) for c in itertools.combinations(range(n), m)
        )
        ok = report.count == 2 ** n and report.bijection and family == expected
        passed = passed and ok
        detail[f"n={n}"] = report.count
    return passed, detail


def check_subetale(ctx: SuiteContext) -> CheckResult:
    if ctx.max_n < 1:
        raise SkippedCheck("the sub-etale example needs labels of length 1")
    A = subetale_example(ctx.registry)
    B = schwartz_algebra(transitive(1), ctx.K)
    gamma_dim = gamma(A).dim
    etale = is_etale(A)
    exact = relative_tensor_exactness(A, B, identity(transitive(1), ctx.K))
    passed = gamma_dim == 1 and not etale and not exact
    return passed, {"gamma_dim": gamma_dim, "etale": etale, "exact": exact}


def check_etale_positives(ctx: SuiteContext) -> CheckResult:
    failed = []
    for n in range(min(3, ctx.max_n) + 1):
        A = schwartz_algebra(transitive(n), ctx.K)
        report = etale_report(A)
        if not report.etale or udim(A) != sign(ctx.K, n):
            failed.append(n)
    return not failed, {"failed": failed} if failed else None


def check_category_laws(ctx: SuiteContext) -> CheckResult:
    bound = min(4, ctx.max_n)
    K = ctx.K
    rng = random.Random(settings.RANDOM_SEED)
    failures: List[str] = []

    for arms in itertools.product(range(bound + 1), repeat=2):
        if sum(arms) > bound:
            continue
        X, Y = (transitive(n) for n in arms)
        f = _random_morphism(rng, X, Y, K)
        # unit laws through the convolution kernel itself
        left = linalg.matvec(left_matrix(identity(Y, K), X), f.coeffs)
        right = linalg.matvec(right_matrix(identity(X, K), Y), f.coeffs)
        if tuple(left) != f.coeffs or tuple(right) != f.coeffs:
            failures.append(f"unit {arms}")

    for arms in itertools.product(range(bound + 1), repeat=4):
        if sum(arms) > bound:
            continue
        X, Y, Z, W = (transitive(n) for n in arms)
        f, g, h = (
            _random_morphism(rng, X, Y, K),
            _random_morphism(rng, Y, Z, K),
            _random_morphism(rng, Z, W, K),
        )
        if compose(h, compose(g, f)) != compose(compose(h, g), f):
            failures.append(f"associativity {arms}")
        if transpose(compose(g, f)) != compose(transpose(f), transpose(g)):
            failures.append(f"transpose {arms}")

    for arms in itertools.product(range(2), repeat=6):
        if sum(arms) > bound:
            continue
        X, Y, Z, X2, Y2, Z2 = (transitive(n) for n in arms)
        f, g = _random_morphism(rng, X, Y, K), _random_morphism(rng, Y, Z, K)
        f2, g2 = _random_morphism(rng, X2, Y2, K), _random_morphism(rng, Y2, Z2, K)
        if tensor(compose(g, f), compose(g2, f2)) != compose(tensor(g, g2), tensor(f, f2)):
            failures.append(f"interchange {arms}")

    capped: List[str] = []
    for X in _snake_objects(bound):
        if power_count(X, 5) > settings.SNAKE_MAX_ORBITS:
            capped.append(str(X))
            continue
        if snake(X, K) != identity(X, K):
            failures.append(f"snake {X}")
    detail: Dict[str, object] = {}
    if failures:
        detail["failures"] = failures
    if capped:
        detail["capped"] = capped
    return not failures, detail or None


def _snake_objects(bound: int) -> List[GSet]:
    """Every G-set with one to three orbits and at most ``bound`` arms in all."""
    objects = []
    for count in range(1, 4):
        for arms in itertools.combinations_with_replacement(range(bound, -1, -1), count):
            if sum(arms) <= bound:
                objects.append(GSet.of(*arms))
    return objects


def check_split_group(ctx: SuiteContext) -> CheckResult:
    bound = min(4, ctx.max_n)
    shapes = [(n,) for n in range(bound + 1)]
    shapes += [(a, b) for a in range(bound + 1) for b in range(bound + 1 - a)]
    nontrivial = [shape for shape in shapes if len(automorphisms(GSet.of(shape))) != 1]
    counts: Dict[str, int] = {}
    confirmed, capped, failures = [], [], []
    for n, m in itertools.product(range(min(3, ctx.max_n) + 1), repeat=2):
        key = f"{n}x{m}"
        try:
            result = split_classification(n, m)
        except ResourceCapError:
            capped.append(key)
            continue
        except CounterexampleError as exc:
            failures.append(f"{key}: {exc}")
            continue
        counts[key] = len(result.relations)
        if not result.factored:
            failures.append(key)
        if result.confirmed:
            confirmed.append(key)
    passed = not nontrivial and not failures
    return passed, {
        "counts": counts,
        "confirmed": confirmed,
        "capped": capped,
        "failures": failures,
        "nontrivial": nontrivial,
    }


def check_restriction_machinery(ctx: SuiteContext) -> CheckResult:
    detail: Dict[str, object] = {}
    passed = True
    for n in range(1, min(3, ctx.max_n) + 1):
        report = restriction_ideals(n, ctx.registry)
        passed = passed and report.case == "a" and report.pq_zero
        passed = passed and report.quotient_is_unit == (n == 1)
        detail[f"n={n}"] = report.case
    if ctx.max_n >= 2:
        carrier = karoubi_object(transitive(2), K=ctx.K)
        whole = length_stats(carrier, ctx.registry)
        restricted = length_stats(restrict(carrier), ctx.registry)
        passed = passed and (whole.total, whole.top_count) == (2, 4)
        passed = passed and restricted.lengths == [2, 2] and restricted.total == 2
        detail["t_2"] = whole.top_count
    return passed, detail


def check_adjunction(ctx: SuiteContext) -> CheckResult:
    K = ctx.K
    cases = [(0, 1), (1, 1)] + ([(2, 2)] if ctx.max_n >= 2 else [])
    results = {}
    passed = True
    for n, pins in cases:
        A = schwartz_algebra(transitive(n), K)
        g, report = adjunction_transfer(A, pins, point_evaluation(A, pins))
        expected = schwartz_unit(transitive(pins), K) if n == 0 else identity(transitive(n), K)
        ok = report.round_trip and report.homomorphism and g == expected
        results[f"C(R^{n}) over {pins} pins"] = ok
        passed = passed and ok
    return passed, results


def check_theorem_instances(ctx: SuiteContext) -> CheckResult:
    report = theorem_instances(min(3, ctx.max_n), ctx.K)
    failed = [entry.found for entry in report.entries if not entry.skipped and not entry.passed]
    confirmed = [entry.source for entry in report.entries if entry.confirmed]
    return report.passed, {"capped": report.capped, "confirmed": confirmed, "failed": failed}


CHECKS: List[Tuple[str, Callable[[SuiteContext], CheckResult]]] = [
    ("hom_dimensions", check_hom_dimensions),
    ("decomposition_table", check_decomposition_table),
    ("dimensions", check_dimensions),
    ("restriction_rule", check_restriction_rule),
    ("tensor_rules", check_tensor_rules),
    ("duality", check_duality),
    ("e_idempotents", check_e_idempotents),
    ("subetale", check_subetale),
    ("etale_positives", check_etale_positives),
    ("category_laws", check_category_laws),
    ("split_group", check_split_group),
    ("restriction_machinery", check_restriction_machinery),
    ("adjunction", check_adjunction),
    ("theorem_instances", check_theorem_instances),
]


def _run_check(name: str, check, ctx: SuiteContext) -> SuiteItem:
    start = time.time()
    try:
        passed, detail = check(ctx)
        skipped = False
    except (ResourceCapError, SkippedCheck) as exc:
        passed, detail, skipped = False, str(exc), True
    elapsed = time.time() - start
    if skipped:
        logger.info("Check %s skipped: %s", name, detail)
    elif passed:
        logger.info("Check %s passed in %.2f seconds", name, elapsed)
    else:
        logger.warning("Check %s failed: %s", name, detail)
    capped = list(detail.get("capped", [])) if isinstance(detail, dict) else []
    if capped:
        logger.warning("Check %s left out capped parts: %s", name, ", ".join(capped))
    return SuiteItem(
        name=name,
        passed=passed,
        skipped=skipped,
        capped=capped,
        seconds=round(elapsed, 3),
        detail=detail,
    )


def run_suite(
    suite: str = "fast",
    max_n: Optional[int] = None,
    registry_path: Optional[str] = None,
    threads: Optional[int] = None,
    K=None,
) -> VerifyReport:
    """Run every check at the requested scale.

    Raises:
        InvalidInputError: If the suite name or scale is invalid.
    """
    if suite not in SUITES:
        raise InvalidInputError(f"unknown suite '{suite}' (expected one of {sorted(SUITES)})")
    max_n = SUITES[suite] if max_n is None else max_n
    if max_n < 0:
        raise InvalidInputError("max_n must be non-negative")
    K = K if K is not None else get_domain()
    registry = get_registry(max_n, registry_path, K)
    ctx = SuiteContext(max_n=max_n, registry=registry, K=K)
    workers = threads if threads is not None else settings.THREADS
    logger.info("Running %s suite up to n=%d with %d worker(s)", suite, max_n, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            items = list(pool.map(lambda item: _run_check(item[0], item[1], ctx), CHECKS))
    else:
        items = [_run_check(name, check, ctx) for name, check in CHECKS]
    capped = [item.name for item in items if item.skipped]
    capped += [f"{item.name}: {part}" for item in items for part in item.capped]
    return VerifyReport(
        suite=suite,
        max_n=max_n,
        version=settings.AMALGAM_ORDER_VERSION,
        passed=all(item.passed for item in items if not item.skipped),
        complete=not capped,
        capped=capped,
        items=items,
    )
