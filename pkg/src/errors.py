"""
Exception hierarchy shared by all inkstyle modules.
The CLI maps each family to a distinct exit status.
"""


class InkstyleError(Exception):
    """Base class for every error raised on purpose by this package."""
    pass


class DataError(InkstyleError):
    """Bad or missing input data (dictionary, corpus, glyphs, checkpoints)."""
    pass


class ConfigurationError(InkstyleError):
    """Invalid configuration value or inconsistent option combination."""
    pass


class DivergenceError(InkstyleError):
    """A training loss became non-finite."""

    def __init__(self, step: int, parts: dict):
        self.step = step
        self.parts = parts
        detail = ", ".join(f"{k}={v}" for k, v in parts.items())
        super().__init__(f"Non-finite loss at step {step}: {detail}")


class ShapeError(InkstyleError, ValueError):
    """Tensor shape does not match the network contract."""
    pass


class RangeError(InkstyleError, ValueError):
    """Integer label or identifier outside its allowed range."""
    pass
