"""Exception taxonomy shared by every module of the library."""


class CredalError(Exception):
    """Base class for all library-specific errors."""


class InputError(CredalError, ValueError):
    """Malformed arguments: unknown nodes, bad scopes, unparsable files."""


class ModelError(CredalError):
    """Structurally valid input that describes an unusable model,
    e.g. an empty credal set or an infeasible global program."""


class CapabilityError(CredalError):
    """The problem exceeds the documented desk-scale bounds.

    Raised instead of degrading silently; the caller can fall back to a
    different method or split the problem."""


class HypothesisError(CredalError):
    """A theorem-backed reduction was invoked outside its hypotheses."""


class ConvergenceError(CredalError):
    """An iterative scheme did not reach its tolerance within the
    iteration budget."""
