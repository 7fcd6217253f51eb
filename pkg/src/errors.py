"""Exception hierarchy shared by every skimread module.

Each concrete error also derives from the builtin a caller would naturally
catch (ValueError, IndexError, ...), so library users are not forced to
import these names.
"""


class SkimreadError(Exception):
    """Base class for all skimread errors."""


class DimensionError(SkimreadError, ValueError):
    """Tensor shapes do not conform."""


class ParameterError(SkimreadError, ValueError):
    """A numeric argument is outside its allowed range."""


class EmptySequenceError(SkimreadError, ValueError):
    """A sequence input has no elements."""


class LabelIndexError(SkimreadError, IndexError):
    """A class index is outside [0, k)."""


class NumericError(SkimreadError, ArithmeticError):
    """NaN or Inf encountered in a gradient or value."""


class TreebankParseError(SkimreadError, ValueError):
    """Malformed treebank s-expression."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset
        self.detail = message


class VectorFormatError(SkimreadError, ValueError):
    """Malformed line in a word-vector file."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConfigError(SkimreadError, ValueError):
    """Invalid configuration (bad key, type or value)."""


class AlignmentError(SkimreadError, ValueError):
    """Sequences that must be aligned have different lengths."""


class InputError(SkimreadError, ValueError):
    """A required input for the chosen strategy is missing."""


class TrainingError(SkimreadError, RuntimeError):
    """Training diverged."""

    def __init__(self, message: str, epoch: int):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class CheckpointVersionError(SkimreadError, ValueError):
    """Checkpoint written by an incompatible format version."""


class CheckpointIntegrityError(SkimreadError, ValueError):
    """Checkpoint is truncated or corrupt."""


class DegenerateCurveError(SkimreadError, ValueError):
    """A curve has too few points (or zero savings range) to integrate."""


class PipelineError(SkimreadError, RuntimeError):
    """A pipeline stage failed."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
