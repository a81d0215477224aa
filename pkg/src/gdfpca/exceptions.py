"""Exception hierarchy for gdfpca."""


class GdfpcaError(Exception):
    """Base class for all errors raised by this package."""


class GridMismatchError(GdfpcaError, ValueError):
    pass


class DegenerateError(GdfpcaError, ArithmeticError):
    """A least-squares block has no unique solution.

    ``iteration`` is filled in by the fitting loop when the failure happens
    mid-fit; it is ``None`` for direct calls.
    """

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} (at iteration {iteration})"
        super().__init__(message)

    def at_iteration(self, iteration):
        return type(self)(self.args[0], iteration=iteration)


class SingularDesignError(DegenerateError):
    """The lagged factor design F(f) is (numerically) rank deficient."""


class DegenerateLoadingsError(DegenerateError):
    """The banded normal matrix D(beta) is singular, e.g. beta == 0."""


class DegenerateFactorError(DegenerateError):
    """The unnormalized factor is constant and cannot be rescaled."""


class DegenerateInputError(DegenerateError):
    """The score matrix carries no variance to extract a component from."""


class ThresholdUnreachableError(GdfpcaError):
    def __init__(self, threshold, best, p_max):
        self.threshold = threshold
        self.best = best
        self.p_max = p_max
        super().__init__(
            f"explained-variance threshold {threshold:g} not reached with up to "
            f"p={p_max} components; best median achieved {best:.6f}"
        )


class DataFormatError(GdfpcaError, ValueError):
    """Malformed input file. ``row``/``column`` are 1-based file positions."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} at {', '.join(loc)}"
        super().__init__(message)


class RaggedRowError(DataFormatError):
    pass


class NonNumericCellError(DataFormatError):
    pass


class ZeroVarianceColumnError(DataFormatError):
    pass


class ConfigError(GdfpcaError, ValueError):
    """Invalid run configuration; ``problems`` lists every violated field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.problems))
