"""Exception hierarchy shared by all ciqc modules."""


class CiqcError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CiqcError):
    """Input outside the mathematical domain of an operation."""


class ConfigurationError(CiqcError):
    """Mismatched truncation caps or incompatible object configuration."""


class VerificationError(CiqcError):
    """A cross-checked identity failed; both sides are reported."""


class InternalConsistencyError(CiqcError):
    """A structural invariant that should hold by construction failed."""
