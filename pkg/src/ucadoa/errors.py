"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration value is missing, malformed, or out of range.

    The message always starts with the offending field or key name.
    """


class SnapshotFormatError(ValueError):
    """A snapshot CSV file (or payload) could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        prefix = ""
        if line is not None:
            prefix = f"line {line}"
            if column is not None:
                prefix += f", column {column}"
            prefix += ": "
        super().__init__(prefix + message)
        self.line = line
        self.column = column


class DegenerateInputError(ValueError):
    """Input data carries no usable direction information."""


class DegenerateGeometryError(DegenerateInputError):
    """The array/source geometry makes the requested bound singular."""


class NumericalError(RuntimeError):
    """A numerical operation produced a non-finite result."""
