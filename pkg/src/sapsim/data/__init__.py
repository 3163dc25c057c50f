"""Packaged parameter files, bone map, scenario defaults and synthetic recordings."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def data_path(name: str) -> Path:
    """Filesystem path of a packaged data file."""
    return Path(str(resources.files(__name__).joinpath(name)))
