"""Tests for building, caching and loading the simple-object registry."""

import json

import pytest
from sympy import GF, QQ

from delannoy.config import settings
from delannoy.errors import PreconditionError, RegistryVersionError
from delannoy.services import registry as registry_module
from delannoy.services.karoubi import SimpleLabel
from delannoy.services.permcat import compose, trace_dim
from delannoy.services.registry import (
    Registry,
    build_registry,
    get_registry,
    load_registry,
    save_registry,
)


class TestBuild:
    """Tests for build_registry."""

    def test_labels_up_to_depth(self, registry):
        """Depth 2 holds 1 + 2 + 4 labels ordered by length then word."""
        assert [str(l) for l in registry.labels()] == ["∅", "a", "b", "aa", "ab", "ba", "bb"]
        assert registry.depth == 2

    def test_idempotents(self, registry):
        """Every registered morphism is idempotent with trace (-1)^length."""
        for l in registry.labels():
            e = registry.idempotent(l)
            assert compose(e, e) == e
            assert trace_dim(e) == QQ((-1) ** l.length)

    def test_primitive_idempotents_are_orthogonal(self, registry):
        """Distinct simples of the same length are orthogonal."""
        ea, eb = registry.idempotent("a"), registry.idempotent("b")
        assert compose(ea, eb).is_zero()

    def test_level_one_normalization(self, registry):
        """L_a has the smaller normalized coefficient vector of the two length-one simples."""
        ea, eb = registry.idempotent("a"), registry.idempotent("b")
        assert registry_module._normalized(QQ, ea) < registry_module._normalized(QQ, eb)

    def test_unknown_label(self, registry):
        """Labels longer than the depth are refused."""
        with pytest.raises(PreconditionError):
            registry.idempotent(SimpleLabel(word="aaa"))

    def test_negative_depth(self):
        """The depth must be non-negative."""
        with pytest.raises(PreconditionError):
            build_registry(-1, QQ)

    def test_report(self, registry):
        """The report lists one entry per label with its dimension."""
        report = registry.report()
        assert report.depth == 2
        assert report.field == "QQ"
        assert [entry.dimension for entry in report.entries] == ["1", "-1", "-1", "1", "1", "1", "1"]

    def test_prime_field(self):
        """Registries can be built over a large prime field."""
        K = GF(10007)
        small = build_registry(1, K)
        assert [str(l) for l in small.labels()] == ["∅", "a", "b"]


class TestPersistence:
    """Tests for the JSON cache."""

    def test_save_and_load(self, registry, tmp_path):
        """A saved registry loads back with the same idempotents."""
        path = str(tmp_path / "reg.json")
        save_registry(registry, path)
        loaded = load_registry(path, QQ)
        assert loaded.idempotents == registry.idempotents

    def test_file_is_sorted_json(self, registry, tmp_path):
        """The cache file carries a version header."""
        path = tmp_path / "reg.json"
        save_registry(registry, str(path))
        payload = json.loads(path.read_text())
        assert payload["version"] == settings.AMALGAM_ORDER_VERSION
        assert payload["field"] == "QQ"
        assert set(payload["labels"]) == {"", "a", "b", "aa", "ab", "ba", "bb"}

    def test_version_mismatch(self, registry, tmp_path, monkeypatch):
        """A file with another order version is rejected."""
        path = str(tmp_path / "reg.json")
        save_registry(registry, path)
        monkeypatch.setattr(settings, "AMALGAM_ORDER_VERSION", 99)
        with pytest.raises(RegistryVersionError):
            load_registry(path, QQ)

    def test_field_mismatch(self, registry, tmp_path):
        """A file over QQ is not read as GF(p)."""
        path = str(tmp_path / "reg.json")
        save_registry(registry, path)
        with pytest.raises(RegistryVersionError):
            load_registry(path, GF(7))

    def test_malformed_file(self, tmp_path):
        """Malformed files are reported as version errors."""
        path = tmp_path / "reg.json"
        path.write_text('{"version": "x"}')
        with pytest.raises(RegistryVersionError):
            load_registry(str(path), QQ)

    def test_missing_file(self, tmp_path):
        """A missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_registry(str(tmp_path / "absent.json"), QQ)


class TestGetRegistry:
    """Tests for the cached accessor."""

    def test_builds_and_writes_cache(self, tmp_path, fresh_registry_cache):
        """A missing cache file is built and written."""
        path = tmp_path / "reg.json"
        reg = get_registry(1, str(path), QQ)
        assert reg.depth == 1
        assert path.exists()

    def test_memory_cache_reused(self, tmp_path, fresh_registry_cache):
        """A second call returns the same object."""
        path = str(tmp_path / "reg.json")
        assert get_registry(1, path, QQ) is get_registry(1, path, QQ)

    def test_loads_existing_file(self, registry, tmp_path, monkeypatch, fresh_registry_cache):
        """An adequate cache file is loaded instead of rebuilt."""
        path = str(tmp_path / "reg.json")
        save_registry(registry, path)
        monkeypatch.setattr(registry_module, "extend_registry", _fail_on_build)
        assert get_registry(2, path, QQ).depth == 2

    def test_stale_file_rebuilt(self, tmp_path, fresh_registry_cache):
        """A cache file with a wrong header is ignored and overwritten."""
        path = tmp_path / "reg.json"
        path.write_text(json.dumps({"version": 0, "field": "QQ", "depth": 0, "labels": {}}))
        reg = get_registry(1, str(path), QQ)
        assert reg.depth == 1
        assert json.loads(path.read_text())["version"] == settings.AMALGAM_ORDER_VERSION

    def test_empty_registry_has_unit(self):
        """A new registry always knows the unit."""
        assert Registry(QQ).labels() == [SimpleLabel()]


def _fail_on_build(*args, **kwargs):
    raise AssertionError("registry should have been loaded")
