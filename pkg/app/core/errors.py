"""Domain exceptions and their command-line exit codes."""

EXIT_OK = 0
EXIT_INVALID_CONFIG = 1
EXIT_STRUCTURAL_FAILURE = 2


class HoscError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code: int = EXIT_INVALID_CONFIG


class InvalidArgumentError(HoscError):
    """A parameter is outside the domain of an operation."""


class InvalidRulerError(HoscError):
    """A ruler repeats a mark or has the wrong order."""


class NotADtsError(HoscError):
    """Two ruler differences coincide."""

    def __init__(self, difference: int, first: tuple[int, int, int], second: tuple[int, int, int]):
        """
        Initialize the error with the colliding pair.

        Args:
            difference: The repeated signed difference
            first: (ruler, k1, k2) producing the difference first
            second: (ruler, k1, k2) producing it again
        """
        self.difference = difference
        self.first = first
        self.second = second
        super().__init__(
            f"difference {difference} appears twice: ruler {first[0]} marks "
            f"({first[1]}, {first[2]}) and ruler {second[0]} marks ({second[1]}, {second[2]})"
        )


class UnsupportedError(HoscError):
    """The parameters are valid but not covered by the implementation."""


class ConstraintViolationError(HoscError):
    """A construction precondition such as M <= lpf(S/L) does not hold."""


class RefusedError(HoscError):
    """An operation was refused because it exceeds a configured cap."""


class InternalConsistencyError(HoscError):
    """A construction produced an object that fails its own verification."""

    exit_code = EXIT_STRUCTURAL_FAILURE


class StructuralFailureError(HoscError):
    """A built code violates the degree or overlap properties."""

    exit_code = EXIT_STRUCTURAL_FAILURE
