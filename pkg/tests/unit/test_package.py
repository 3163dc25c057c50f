"""Unit tests for the package surface."""

import importlib

import pytest

from sapsim import __version__, get_version

SUBPACKAGES = ["dynamics", "geometry", "solver", "planner", "safety", "sim"]


@pytest.mark.unit
class TestVersion:
    """Tests for the version helpers."""

    def test_semver(self) -> None:
        """Version has three numeric parts."""
        parts = __version__.split(".")
        assert len(parts) == 3
        assert all(part.isdigit() for part in parts)

    def test_get_version(self) -> None:
        """get_version returns the module version."""
        assert get_version() == __version__


@pytest.mark.unit
@pytest.mark.parametrize("name", SUBPACKAGES)
class TestExports:
    """Every subpackage re-exports a resolvable public API."""

    def test_all_names_resolve(self, name: str) -> None:
        """Each name in __all__ is an attribute of the package."""
        module = importlib.import_module(f"sapsim.{name}")
        missing = [item for item in module.__all__ if not hasattr(module, item)]
        assert missing == []
