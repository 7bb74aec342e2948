class DimensionError(ValueError):
    """Shapes do not line up (non power-of-two width, column mismatch, ...)."""


class DegenerateInputError(ValueError):
    """Input is valid in shape but cannot be processed, e.g. a single class."""


class ParameterError(ValueError):
    """A numeric parameter is out of its allowed range."""


class ParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")
