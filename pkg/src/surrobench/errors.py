"""Exception taxonomy shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(WorkbenchError):
    """Malformed input data (CSV, JSON documents, inline instances)."""


class SchemaError(WorkbenchError):
    """Values that do not conform to a dataset schema."""


class ConfigError(WorkbenchError):
    """Invalid explainer configuration.

    Carries the full violation list so callers can report every problem
    at once instead of failing on the first one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class TransportError(WorkbenchError):
    """External model could not be reached or died mid-conversation."""


class ProtocolError(WorkbenchError):
    """External model answered, but the payload violates the protocol."""


class SolverError(WorkbenchError):
    """Numerical solver failure (e.g. singular ridge system)."""


class PipelineError(WorkbenchError):
    """Error raised while running the explain pipeline, annotated with the stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}': {cause}")
