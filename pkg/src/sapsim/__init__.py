"""SapSim - Safety-aware manipulator motion planning and filtering simulator."""

__version__ = "0.1.0"


def get_version() -> str:
    """Return the current version of SapSim."""
    return __version__
