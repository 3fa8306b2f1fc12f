"""Exception types shared across the package.

Grouped by the surface that raises them so the CLI can map each family
to a stable exit code (config = 2, detector = 3, I/O = 4).
"""


class TrustmonError(Exception):
    """Base class for all package errors."""


# --- model files ----------------------------------------------------------

class ModelFileError(TrustmonError):
    """Base for errors raised while loading a model file."""


class ParseError(ModelFileError):
    """Model file is malformed (bad JSON, unknown keys, bad enum values)."""


class ShapeError(ModelFileError):
    """Layer dimensions are inconsistent."""

    def __init__(self, message: str, layer: int | None = None):
        super().__init__(message)
        self.layer = layer


class NonFiniteWeight(ModelFileError):
    """A weight or bias entry is NaN or infinite."""


class UnsupportedLayer(ModelFileError):
    """Layer kind exists in the wild but is outside this engine's scope."""


class DimensionError(TrustmonError):
    """Input vector width does not match what the network expects."""


# --- datasets -------------------------------------------------------------

class DatasetError(TrustmonError):
    """Base for dataset preparation errors."""


class MissingColumn(DatasetError):
    pass


class EmptyClass(DatasetError):
    pass


class NonNumericValue(DatasetError):
    pass


class TooFewRows(DatasetError):
    pass


class ManifestError(DatasetError):
    pass


# --- detectors ------------------------------------------------------------

class DetectorError(TrustmonError):
    """Base for detector analyze/infer failures."""


class DegenerateData(DetectorError):
    """Too few samples or no informative dimensions to fit a density."""


class NoUsableLayers(DetectorError):
    pass


class UnsupportedActivation(DetectorError):
    pass


class AnchorOutOfRange(DetectorError):
    pass


class EmptyTrainingSet(DetectorError):
    pass


# --- metrics --------------------------------------------------------------

class LengthMismatch(TrustmonError):
    pass


class EmptyMatrix(TrustmonError):
    pass


# --- harness --------------------------------------------------------------

class ConfigError(TrustmonError):
    """Run configuration is invalid (unknown keys, bad values)."""


class MissingOutputs(TrustmonError):
    """An evaluate step cannot find the files a prior phase should have written."""


class ProfilerUnavailable(TrustmonError):
    """The platform does not expose RSS for the current process."""
