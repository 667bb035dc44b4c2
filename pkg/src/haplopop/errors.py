"""Exception types shared across the package."""


class HaplopopError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(HaplopopError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ShapeError(HaplopopError, ValueError):
    """Array dimensions or locus counts do not agree."""


class ModelError(HaplopopError):
    """The model cannot be evaluated on the given inputs."""


class DegenerateModelError(ModelError):
    """The copying model collapsed, e.g. an empty focal group with alpha 0."""


class ParseError(HaplopopError):
    """An input file is malformed. Carries file path and line number."""

    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
