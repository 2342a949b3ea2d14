"""Exception hierarchy shared by every pipeline stage."""


class ArchetypeError(Exception):
    """Base class for all errors raised by this package."""


class InputFormatError(ArchetypeError, ValueError):
    """Malformed or inconsistent input data."""


class MissingColumn(InputFormatError):
    pass


class BadValue(InputFormatError):
    """A field failed validation; ``line`` is the 1-based line number in the source file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInput(InputFormatError):
    pass


class ShapeError(InputFormatError):
    pass


class LabelMismatch(InputFormatError):
    pass


class NumericalError(ArchetypeError, ValueError):
    """The requested computation is impossible for the given matrix."""


class EmptyMatrix(NumericalError):
    pass


class RankTooLarge(NumericalError):
    pass


class TooManyComponents(NumericalError):
    pass


class BadDimensions(ArchetypeError, ValueError):
    pass


class BadComponent(ArchetypeError, IndexError):
    pass
