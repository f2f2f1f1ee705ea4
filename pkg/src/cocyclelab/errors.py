"""Exception hierarchy. The CLI maps each class to a distinct exit code."""


class LabError(Exception):
    exit_code = 1


class ConfigError(LabError):
    exit_code = 2

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class BudgetError(LabError):
    """Raised when an exhaustive enumeration would exceed the word budget."""

    exit_code = 3


class SingularityError(LabError):
    """A cocycle matrix (or an accumulated product) is numerically singular."""

    exit_code = 4


class DomainError(LabError, ValueError):
    exit_code = 5


class DimensionError(LabError, ValueError):
    exit_code = 5
