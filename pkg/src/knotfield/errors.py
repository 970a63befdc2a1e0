"""Exception types shared across the package.

Every error raised by the library derives from KnotfieldError, so the CLI can
map domain failures to a single exit code.
"""


class KnotfieldError(Exception):
    """Base class for all knotfield domain errors."""


class CatalogError(KnotfieldError):
    """Requested curve name is not in the catalog."""


class ParameterError(KnotfieldError):
    """Shape or solver parameter outside its valid range."""


class SingularityError(KnotfieldError):
    """Evaluation point coincides with (or sits on) the charged curve."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class NonRegularValueError(KnotfieldError):
    """Requested level is too close to a critical value of the potential."""

    def __init__(self, message, critical_value=None):
        super().__init__(message)
        self.critical_value = critical_value


class MeshDefectError(KnotfieldError):
    """Extracted surface is not a closed manifold (edges not shared by 2 faces)."""

    def __init__(self, message, bad_edges=None):
        super().__init__(message)
        self.bad_edges = bad_edges if bad_edges is not None else []


class EmptyCriticalSetError(KnotfieldError):
    """No zeros found: the seeding domain or resolution is inadequate.

    A closed charge distribution always has at least one field zero, so an
    empty result is a search failure, never a physical outcome.
    """
