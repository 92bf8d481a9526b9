class DescEmbedderError(Exception):
    """Base class for everything this tool raises on purpose."""


class InputFormatError(DescEmbedderError):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(prefix + message)


class ModelUnavailableError(DescEmbedderError):
    """The requested encoder model is not importable or not cached locally."""

    def __init__(self, message: str, instruction: str):
        self.instruction = instruction
        super().__init__(message)
