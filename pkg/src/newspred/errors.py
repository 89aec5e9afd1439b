"""Exception types shared across the toolkit."""


class NewspredError(Exception):
    """Base class for all toolkit errors."""


class AlignmentError(NewspredError):
    """Series cannot be brought onto a common index (empty intersection, length mismatch)."""


class FrequencyMismatchError(AlignmentError):
    """Series with different period frequencies were combined."""


class InsufficientDataError(NewspredError):
    """Too few observations for the requested operation."""


class DegenerateSeriesError(NewspredError):
    """A series or vector has zero variance where positive variance is required."""


class ReferentialError(NewspredError):
    """A label references a headline id that does not exist."""


class DuplicateRecordError(NewspredError):
    """Duplicate key where uniqueness is required."""


class ZeroDenominatorError(NewspredError):
    """A ratio denominator is zero; the message names the offending period."""


class SingularDesignError(NewspredError):
    """Design matrix is rank deficient beyond tolerance."""


class TransportError(NewspredError):
    """Remote call failed after all retries; the message names the headline."""


class ConfigError(NewspredError):
    """Invalid configuration; `problems` lists every issue found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
