"""Exception types raised across the package."""


class ChemolabError(ValueError):
    """Base class for every domain error raised by chemolab."""


class DimensionTooLow(ChemolabError):
    pass


class InvalidParams(ChemolabError):
    pass


class H1Violated(ChemolabError):
    pass


class IntervalViolation(ChemolabError):
    pass


class RangeViolation(ChemolabError):
    pass


class InadmissibleExponents(ChemolabError):
    pass


class OrderingViolation(ChemolabError):
    pass


class MuBoundViolation(ChemolabError):
    pass


class SingularityAtOrigin(ChemolabError):
    pass


class UnsupportedGrid(ChemolabError):
    pass


class NonFiniteState(ChemolabError):
    pass


class InvalidExponent(ChemolabError):
    pass


class NotEnoughData(ChemolabError):
    pass


class InputMismatch(ChemolabError):
    pass


class ConfigError(ChemolabError):
    pass
