"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad parameter values, malformed config files,
    unknown method names, or mismatched grid/path combinations.

    The CLI maps this to exit code 2.
    """


class DegeneratePathError(ValueError):
    """A waypoint path with zero total arc length (or a zero-length segment)
    cannot be mapped onto a time axis."""


class DegenerateBatchError(RuntimeError):
    """Every sample in a Monte-Carlo batch received zero weight, so no update
    direction can be formed."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration
