"""Exception types. Each carries a short machine-readable ``category``."""


class NetcorrError(ValueError):
    category = "error"


class TrajectoryError(NetcorrError):
    category = "invalid-trajectory"


class LagRangeError(NetcorrError):
    category = "lag-out-of-range"


class DimensionMismatchError(NetcorrError):
    category = "dimension-mismatch"


class ParameterError(NetcorrError):
    category = "invalid-parameter"


class InfeasibleDictionaryError(NetcorrError):
    category = "infeasible"


class DegenerateError(NetcorrError):
    category = "degenerate"


class LogDomainError(NetcorrError):
    category = "log-domain-violation"


class NonMonotonePeakError(NetcorrError):
    category = "non-monotone-peak"


class ParseError(NetcorrError):
    category = "parse-error"


class EmptyWindowError(NetcorrError):
    category = "empty-window"
