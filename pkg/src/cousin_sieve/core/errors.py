"""Exception hierarchy for cousin_sieve."""


class CousinSieveError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CousinSieveError, ValueError):
    """An argument lies outside an operation's documented domain."""


class ExpansionTooLargeError(CousinSieveError):
    """The full term expansion would exceed the configured prime count."""


class ExpansionBudgetExceeded(CousinSieveError):
    """Live-term enumeration visited more nodes than its budget allows."""


class BudgetExceededError(CousinSieveError):
    """A request would sieve beyond a configured budget."""


class CacheFormatError(CousinSieveError):
    """A prime-cache file is malformed or truncated."""
