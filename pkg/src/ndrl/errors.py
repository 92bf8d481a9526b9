"""Exception types shared across the package."""


class NdrlError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(NdrlError, ValueError):
    """Invalid configuration value or unknown configuration key."""


class FileFormatError(NdrlError, ValueError):
    """A data file does not follow its documented format."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class TripleFormatError(FileFormatError):
    """Malformed line in a triple file."""


class EmptyGraphError(NdrlError, ValueError):
    """A triple source contained no triples."""


class ShapeError(NdrlError, ValueError):
    """Operands with incompatible dimensions."""


class EntityLookupError(NdrlError, LookupError):
    """Entity or relation handle outside the vocabulary."""


class EmptyNeighborhoodError(NdrlError, ValueError):
    """Attention requested for a node with no neighbors."""


class MissingDescriptionError(NdrlError, ValueError):
    """Description aggregation requested for an entity with no sentences."""


class SamplingError(NdrlError, ValueError):
    """Negative sampling is impossible on this graph."""


class CheckpointFormatError(FileFormatError):
    """Checkpoint file is corrupt or incomplete."""


class TrainingDiverged(NdrlError, RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, epoch, loss):
        super().__init__(f"training diverged at epoch {epoch}: loss={loss!r}")
        self.epoch = epoch
        self.loss = loss
