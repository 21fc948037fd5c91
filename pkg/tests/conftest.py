"""Shared test fixtures for the Delannoy category toolkit tests.

Provides the rational field, a few small G-sets, and registries of simple
objects. Registries are built once per session because every level is an
exact splitting computation.
"""

import pytest

from delannoy.services import registry as registry_module
from delannoy.services.ordcomb import GSet, point_set, transitive
from delannoy.services.registry import build_registry
from delannoy.services.scalars import get_domain


@pytest.fixture(scope="session")
def K():
    """The rational field."""
    return get_domain("QQ")


@pytest.fixture(scope="session")
def small_sets():
    """pt, R, R^(2) and the two-orbit set R + pt."""
    return {
        "pt": point_set(1),
        "R": transitive(1),
        "R2": transitive(2),
        "R+pt": GSet.of(1, 0),
    }


@pytest.fixture(scope="session")
def registry(K):
    """Simples of length at most 2, built in memory."""
    return build_registry(2, K)


@pytest.fixture(scope="session")
def registry3(K):
    """Simples of length at most 3."""
    return build_registry(3, K)


@pytest.fixture(scope="session")
def registry_path(tmp_path_factory):
    """A registry cache file shared by the CLI and suite tests."""
    return str(tmp_path_factory.mktemp("registry") / "registry.json")


@pytest.fixture()
def fresh_registry_cache():
    """Empty the in-memory registry cache before and after a test."""
    registry_module.clear_cache()
    yield
    registry_module.clear_cache()
