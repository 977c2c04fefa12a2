"""Exception hierarchy shared by all modules."""


class XppgError(Exception):
    """Base class for all errors raised by this package."""


class ManifestError(XppgError):
    """Malformed or inconsistent corpus manifest."""


class AudioError(XppgError):
    """Unreadable or unsupported audio input."""


class FeatureFileError(XppgError):
    """Corrupt, truncated, or otherwise invalid feature file."""


class ModelFileError(XppgError):
    """Corrupt or incompatible serialized PCA model."""
