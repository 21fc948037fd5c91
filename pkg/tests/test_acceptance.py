"""Tests for the acceptance suite runner."""

import pytest
from sympy import QQ

from delannoy.config import settings
from delannoy.errors import InvalidInputError, ResourceCapError
from delannoy.services import acceptance
from delannoy.services.acceptance import CHECKS, SUITES, SkippedCheck, run_suite
from delannoy.services.ordcomb import disjoint_union, point_set, power_count, transitive


def _capped(ctx):
    raise ResourceCapError("over the cap")


def _nothing_to_do(ctx):
    raise SkippedCheck("scale too small")


def _failing(ctx):
    return False, {"reason": "forced"}


def _partly_capped(ctx):
    return True, {"capped": ["R^4"]}


class TestRunSuite:
    """Tests for run_suite."""

    def test_small_scale_passes(self, registry_path):
        """Every check passes or is skipped up to n = 1."""
        report = run_suite("fast", max_n=1, registry_path=registry_path, K=QQ)
        assert report.passed
        assert report.max_n == 1
        assert [item.name for item in report.items] == [name for name, _ in CHECKS]
        assert report.version == settings.AMALGAM_ORDER_VERSION

    def test_tensor_rules_skipped_below_length_two(self, registry_path):
        """Checks that need longer labels are skipped, not failed."""
        report = run_suite("fast", max_n=1, registry_path=registry_path, K=QQ)
        items = {item.name: item for item in report.items}
        assert items["tensor_rules"].skipped
        assert not items["hom_dimensions"].skipped

    def test_threads(self, registry_path):
        """A thread pool gives the same verdicts in the same order."""
        serial = run_suite("fast", max_n=1, registry_path=registry_path, threads=1, K=QQ)
        pooled = run_suite("fast", max_n=1, registry_path=registry_path, threads=2, K=QQ)
        assert [(i.name, i.passed, i.skipped) for i in pooled.items] == [
            (i.name, i.passed, i.skipped) for i in serial.items
        ]

    def test_fast_suite_scale(self):
        """The fast suite defaults to n = 2 and the full suite to n = 4."""
        assert SUITES == {"fast": 2, "all": 4}

    def test_unknown_suite(self):
        """Only known suites run."""
        with pytest.raises(InvalidInputError):
            run_suite("slow")

    def test_negative_scale(self):
        """max_n must be non-negative."""
        with pytest.raises(InvalidInputError):
            run_suite("fast", max_n=-1)


class TestCheckOutcomes:
    """Tests for how check outcomes are reported."""

    def test_caps_and_skips(self, registry_path, monkeypatch):
        """Resource caps and SkippedCheck mark an item skipped and keep the suite green."""
        monkeypatch.setattr(acceptance, "CHECKS", [("capped", _capped), ("empty", _nothing_to_do)])
        report = run_suite("fast", max_n=0, registry_path=registry_path, K=QQ)
        assert report.passed
        assert all(item.skipped and not item.passed for item in report.items)
        assert not report.complete
        assert report.items[0].detail == "over the cap"

    def test_failure(self, registry_path, monkeypatch):
        """A failed check fails the suite and keeps its diagnostics."""
        monkeypatch.setattr(acceptance, "CHECKS", [("failing", _failing)])
        report = run_suite("fast", max_n=0, registry_path=registry_path, K=QQ)
        assert not report.passed
        assert report.items[0].detail == {"reason": "forced"}

    def test_capped_parts_reported(self, registry_path, monkeypatch):
        """Parts a check leaves out are listed and make the run incomplete."""
        monkeypatch.setattr(acceptance, "CHECKS", [("partial", _partly_capped)])
        report = run_suite("fast", max_n=0, registry_path=registry_path, K=QQ)
        assert report.passed
        assert not report.complete
        assert report.items[0].capped == ["R^4"]
        assert report.capped == ["partial: R^4"]

    def test_skipped_items_not_complete(self, registry_path, monkeypatch):
        """A skipped check is not counted as done."""
        monkeypatch.setattr(acceptance, "CHECKS", [("capped", _capped)])
        report = run_suite("fast", max_n=0, registry_path=registry_path, K=QQ)
        assert not report.complete
        assert report.capped == ["capped"]


class TestChecks:
    """Tests for individual acceptance checks."""

    def test_snake_objects(self):
        """Sums of up to three orbits with at most two arms in all."""
        objects = [str(X) for X in acceptance._snake_objects(2)]
        assert "R^2" in objects
        assert "R^1 + R^1" in objects
        assert "R^1 + R^0 + R^0" in objects
        assert "R^2 + R^1" not in objects
        assert len(objects) == len(set(objects))

    def test_snake_caps_listed(self, monkeypatch):
        """Snake objects beyond SNAKE_MAX_ORBITS are listed as capped."""
        monkeypatch.setattr(settings, "SNAKE_MAX_ORBITS", 300)
        ctx = acceptance.SuiteContext(max_n=1, registry=None, K=QQ)
        passed, detail = acceptance.check_category_laws(ctx)
        assert passed
        assert detail["capped"] == ["R^1", "R^1 + R^0", "R^1 + R^0 + R^0"]

    def test_snake_cap_admits_the_plane(self):
        """R^2 and R^2 + pt fit under the default snake cap; R^2 + R^1 does not."""
        assert settings.SNAKE_MAX_ORBITS == 2_400_000
        assert power_count(transitive(2), 5) == 2_244_361
        assert power_count(disjoint_union(transitive(2), point_set()), 5) == 2_368_172
        assert power_count(disjoint_union(transitive(2), transitive(1)), 5) > 2_400_000

    def test_snake_on_small_objects(self):
        """Every object up to one arm satisfies the snake identity uncapped."""
        ctx = acceptance.SuiteContext(max_n=1, registry=None, K=QQ)
        passed, detail = acceptance.check_category_laws(ctx)
        assert passed
        assert detail is None

    def test_split_group_up_to_three(self):
        """Every pair n, m <= 3 is classified, none of them capped."""
        ctx = acceptance.SuiteContext(max_n=3, registry=None, K=QQ)
        passed, detail = acceptance.check_split_group(ctx)
        assert passed
        assert detail["capped"] == []
        assert detail["counts"]["3x3"] == 64
        assert detail["counts"]["2x3"] == 32
        assert "2x2" in detail["confirmed"]
        assert "3x3" not in detail["confirmed"]

    def test_split_group_cap(self, monkeypatch):
        """A factor over MAX_RELATION_ARMS is reported, not passed."""
        monkeypatch.setattr(settings, "MAX_RELATION_ARMS", 1)
        ctx = acceptance.SuiteContext(max_n=2, registry=None, K=QQ)
        passed, detail = acceptance.check_split_group(ctx)
        assert passed
        assert "2x2" in detail["capped"]
        assert "1x1" in detail["counts"]

    def test_theorem_instances_check(self):
        """The instance check reports no capped sources at n = 1."""
        ctx = acceptance.SuiteContext(max_n=1, registry=None, K=QQ)
        passed, detail = acceptance.check_theorem_instances(ctx)
        assert passed
        assert detail["capped"] == []
        assert "C(R^1) ⊠ C(R^1)" in detail["confirmed"]
