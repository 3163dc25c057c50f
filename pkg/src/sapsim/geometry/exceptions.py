"""Custom exceptions for the geometry package."""


class GeometryError(Exception):
    """Base exception for capsule geometry errors."""


class CapsuleError(GeometryError):
    """Capsule radius or endpoints are not admissible."""


class SkeletonShapeError(GeometryError):
    """Skeleton frame or bone map does not match the 32-joint layout."""


class EmptyCapsuleSetError(GeometryError):
    """A distance query received an empty capsule set."""
