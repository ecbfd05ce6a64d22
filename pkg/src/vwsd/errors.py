"""Exception types shared across the package."""


class VwsdError(Exception):
    """Base class for every error raised by this package."""


class DatasetFormatError(VwsdError):
    """A dataset file violates the expected on-disk format."""


class ConfigError(VwsdError):
    """A configuration file, key, or value is invalid."""


class BackendError(VwsdError):
    """An embedding backend failed or lacks a requested capability."""


class DegenerateFusionError(VwsdError):
    """A weighted combination of embeddings collapsed to the zero vector."""


class CandidateImageError(VwsdError):
    """A candidate image could not be decoded or embedded."""

    def __init__(self, image_ref: str, reason: str):
        super().__init__(f"candidate image {image_ref!r}: {reason}")
        self.image_ref = image_ref
        self.reason = reason


class EvaluationAborted(VwsdError):
    """Too many samples failed for the evaluation run to be meaningful."""
