"""Exception hierarchy for the algebroid engine."""


class AlgebroidError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AlgebroidError):
    """A point lies outside the chart domain."""


class ChartExitError(DomainError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class UnsupportedDegreeError(AlgebroidError):
    pass


class StructureError(AlgebroidError):
    """Invalid structure data at construction time (e.g. non-antisymmetric C)."""


class RegularityError(AlgebroidError):
    def __init__(self, message, condition=None, time=None):
        super().__init__(message)
        self.condition = condition
        self.time = time


class StationarityError(AlgebroidError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class AdmissibilityError(AlgebroidError):
    pass


class VariationError(AlgebroidError):
    pass


class GridError(AlgebroidError):
    pass


class MorphismError(AlgebroidError):
    pass


class LagrangianMismatchError(MorphismError):
    pass


class CompatibilityError(MorphismError):
    pass


class BijectivityError(MorphismError):
    pass


class ConfigError(AlgebroidError):
    pass
