"""Exception hierarchy shared by the service modules and the CLI."""


class DelannoyError(Exception):
    """Base class for every error raised by the library."""


class StructuralError(DelannoyError, ValueError):
    """Objects do not fit together (group arity, middle object, shape)."""


class InvalidInputError(DelannoyError, ValueError):
    """Malformed points, labels, words or object descriptions."""


class PreconditionError(DelannoyError):
    """An operation was called outside the situation it is defined for."""


class ResourceCapError(DelannoyError):
    """A configured enumeration cap would be exceeded."""


class CounterexampleError(DelannoyError):
    """A checked statement failed on a concrete instance."""


class LabelingError(DelannoyError):
    """Simple objects could not be split or labeled consistently."""


class RegistryVersionError(DelannoyError):
    """A registry cache file was written with incompatible settings."""
