"""
Exception hierarchy.

Data problems (bad files, bad shapes, bad configuration) derive from DataError;
failures of the numerical procedures derive from NumericalError. The CLI maps the
two branches to distinct exit codes.
"""

from typing import Optional


class NmsdError(Exception):
    """Base class for all library errors."""
    pass


class DataError(NmsdError):
    """Input data or configuration cannot be used."""
    pass


class NumericalError(NmsdError):
    """A numerical procedure failed or its preconditions do not hold."""
    pass


class InvalidInput(DataError):
    """Raised when an argument violates an operation's preconditions."""
    pass


class ConfigError(DataError):
    """Raised when a configuration file or value is invalid."""
    pass


class ParseError(DataError):
    """Raised when a matrix file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line = line
        self.col = col
        where = []
        if line is not None:
            where.append(f"line {line}")
        if col is not None:
            where.append(f"column {col}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class InsufficientSpectrum(DataError):
    """Raised when a Gram matrix has fewer positive eigenvalues than requested."""
    pass


class DegenerateResiduals(DataError):
    """Raised when every residual coordinate has (numerically) zero variance."""
    pass


class NumericalFailure(NumericalError):
    """Raised when a decomposition does not converge."""
    pass


class DomainError(NumericalError):
    """Raised when a spike location lies inside or on the noise spectrum."""
    pass


class BracketFailure(NumericalError):
    """Raised when no root bracket is found for the outlier-map inversion."""
    pass


class DegenerateDistance(NumericalError):
    """Raised when the estimated distance is too close to zero for an interval."""
    pass


class SpikeError(NumericalError):
    """Base for errors tied to a single spike of a single dataset."""

    reason = "is invalid"

    def __init__(self, index: int, dataset: Optional[int] = None, detail: str = ""):
        self.index = index
        self.dataset = dataset
        self.detail = detail
        super().__init__(self._format())

    def _format(self) -> str:
        owner = f" of dataset {self.dataset}" if self.dataset is not None else ""
        tail = f" ({self.detail})" if self.detail else ""
        return f"spike {self.index}{owner} {self.reason}{tail}"

    def with_dataset(self, dataset: int) -> "SpikeError":
        """Return a copy of this error tagged with the dataset it came from."""
        return type(self)(self.index, dataset, self.detail)


class SubcriticalSpike(SpikeError):
    """Raised when a sample eigenvalue does not exceed the supercritical threshold."""

    reason = "is subcritical"


class NearCriticalSpike(SpikeError):
    """Raised when the outlier-map derivative at a spike is too small."""

    reason = "is near-critical"
