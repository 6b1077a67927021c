"""Exception hierarchy shared by all srlproj modules.

Every data-level failure raises a subclass of :class:`SrlProjError`, which the
CLI maps to exit code 2 (usage problems exit with 1).
"""


class SrlProjError(Exception):
    """Base class for all srlproj data errors."""


class ParseError(SrlProjError):
    """Malformed input file. Carries a line number when one is known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructuralError(SrlProjError):
    """Input parsed but violates a structural contract (e.g. column counts)."""


class SerializationError(SrlProjError):
    """In-memory data violates an invariant and cannot be written."""


class BundleError(SrlProjError):
    """Embedding bundle file is malformed or inconsistent."""


class PairingError(SrlProjError):
    """Parallel collections cannot be paired (missing or duplicate ids)."""


class ConfigError(SrlProjError):
    """Configuration is inconsistent with the data it is applied to."""


class AgreementError(SrlProjError):
    """Reliability data does not admit an agreement coefficient."""


class CurationError(SrlProjError):
    """Annotation task/response data is invalid or inconsistent."""
