"""Exception hierarchy shared by all vecsum modules."""


class VecsumError(Exception):
    """Base class for all library errors."""


class ParseError(VecsumError):
    """Malformed input file; message carries path and line/offset context."""

    def __init__(self, message: str, path=None, line: int | None = None):
        ctx = ""
        if path is not None:
            ctx += f" [{path}"
            if line is not None:
                ctx += f":{line}"
            ctx += "]"
        super().__init__(message + ctx)
        self.path = path
        self.line = line


class MissingReference(VecsumError):
    """A cluster was loaded without any reference summaries."""


class DimensionMismatch(VecsumError):
    """Vectors of inconsistent dimensionality were mixed."""


class EmptyEmbedding(VecsumError):
    """No token of a sentence is covered by the word-vector vocabulary."""


class ZeroVector(VecsumError):
    """A vector that must be normalized has (numerically) zero norm."""


class DegenerateSample(VecsumError):
    """A principal-component sample carries no signal (all zero vectors)."""


class IncompleteVectors(VecsumError):
    """An external vector file does not cover every sentence id."""


class DegenerateFit(VecsumError):
    """Regression design has too few distinct abscissae to fit."""


class NoFeasibleSummary(VecsumError):
    """No nonempty sentence subset fits inside the word budget."""


class DegenerateDistribution(VecsumError):
    """A statistic is undefined because the sample has zero variance."""


class SingularDesign(VecsumError):
    """Regression design matrix is singular and ridge fallback is off."""


class IncompleteResults(VecsumError):
    """Two result sets that must share keys do not."""


class ConfigError(VecsumError):
    """Experiment configuration is invalid; message lists valid options."""
