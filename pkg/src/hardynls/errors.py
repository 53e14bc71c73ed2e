"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its admissible range (e.g. coupling not in (0, c*))."""


class StructuralError(ValueError):
    """A field/grid pair is malformed (length mismatch, wrong grid kind, non-finite data)."""


class UnsupportedOperationError(TypeError):
    """Operation not defined for this grid kind (e.g. lattice translation of a radial field)."""


class DegenerateFieldError(ValueError):
    """Input field is degenerate for the requested functional (zero, or H(f) <= 0)."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge; carries diagnostics in args."""


class OracleError(RuntimeError):
    """The independent ODE shooting oracle could not bracket or converge."""


class InsufficientGrowthError(RuntimeError):
    """Trace does not exhibit enough focusing to qualify as a resolved blow-up."""


class InconsistentEstimateError(ValueError):
    """A blow-up time estimate is incompatible with the trace it should describe."""


class GeneratorError(ValueError):
    """Synthetic sequence generator preconditions violated (e.g. center collision)."""


class CheckpointError(IOError):
    """Checkpoint file is malformed, has an unknown format version, or fails its hash."""


class ResolutionWarning(UserWarning):
    """A resampling operation pushed data beyond the resolved part of the grid."""
