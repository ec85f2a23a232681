"""Exception hierarchy shared by all posthoc modules."""


class PosthocError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(PosthocError):
    """Invalid feature schema or schema/value mismatch."""


class DataError(PosthocError):
    """Bad input data: malformed CSV, domain violations, degenerate shapes."""


class ModelError(PosthocError):
    """Model fitting or prediction failure (rank deficiency, divergence, ...)."""


class ProtocolError(PosthocError):
    """External prediction process violated the wire protocol."""


class UndefinedInteractionError(PosthocError):
    """H-statistic denominator is zero, the ratio is undefined."""
