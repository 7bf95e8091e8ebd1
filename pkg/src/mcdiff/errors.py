"""Exception hierarchy shared by all modules."""


class MixtureError(Exception):
    """Base class for errors raised by mcdiff."""


class NonPositiveDensity(MixtureError, ValueError):
    def __init__(self, message="densities must be strictly positive", cell=None):
        if cell is not None:
            message = f"{message} (cell {cell})"
        super().__init__(message)
        self.cell = cell


class InvalidConserved(MixtureError, ValueError):
    pass


class InvalidSpec(MixtureError, ValueError):
    pass


class SingularMatrix(MixtureError, ArithmeticError):
    pass


class ZeroFrequency(MixtureError, ValueError):
    pass


class DegenerateOmega(MixtureError, ValueError):
    pass


class DegenerateFit(MixtureError, ValueError):
    pass


class CFLViolation(MixtureError, ValueError):
    pass


class ConfigError(MixtureError, ValueError):
    pass
