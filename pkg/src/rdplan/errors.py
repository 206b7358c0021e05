"""Exception hierarchy shared by all rdplan modules."""


class RdplanError(Exception):
    """Base class for every error raised by rdplan."""


# ingestion
class MissingHours(RdplanError):
    pass


class BadValue(RdplanError, ValueError):
    pass


class WrongYear(RdplanError, ValueError):
    pass


class LengthMismatch(RdplanError, ValueError):
    pass


# clustering / linking
class EmptyCluster(RdplanError, ValueError):
    pass


class BadNrd(RdplanError, ValueError):
    pass


class DimensionMismatch(RdplanError, ValueError):
    pass


# instance files
class SchemaError(RdplanError, ValueError):
    pass


class DanglingBusRef(SchemaError):
    pass


class DisconnectedLoadBus(SchemaError):
    pass


# model building
class BigMOverflow(RdplanError, ValueError):
    pass


class PlanOutOfBounds(RdplanError, ValueError):
    pass


# solver interface
class NameTooLong(RdplanError, ValueError):
    pass


class SolverCrashed(RdplanError):
    pass


class SolverTimeout(RdplanError):
    pass


class ParseError(RdplanError, ValueError):
    pass


class UnknownVariable(RdplanError, KeyError):
    pass


# evaluation
class NotSolved(RdplanError):
    pass


class MissingVariables(RdplanError, KeyError):
    pass
