"""Exception types shared across the library."""


class IFSError(Exception):
    """Base class for all library-specific errors."""


class DomainError(IFSError, ValueError):
    """A value lies outside the domain an operation demands."""


class LengthError(IFSError, ValueError):
    """A sequence is too short for the requested horizon."""


class GuardError(IFSError, ValueError):
    """A construction would exceed a hard resource guard."""


class UnsupportedKindError(IFSError, TypeError):
    """The operation is not defined for this space kind."""


class ConjugacyError(IFSError, ValueError):
    """h and h_inv failed the sampled round-trip check."""


class ContractionError(IFSError, ValueError):
    """A claimed contraction ratio is inconsistent with measurements."""


class BranchError(IFSError, ValueError):
    """No backward branch exists for the requested map and point."""
