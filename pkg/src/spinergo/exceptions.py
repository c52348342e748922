"""Exception types shared across the package."""


class SpinErgoError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(SpinErgoError):
    """Lattice constructor arguments describe no valid geometry."""


class InvalidParameterError(SpinErgoError):
    """Model or operation parameters are out of range or non-finite."""


class CapacityError(SpinErgoError):
    """Requested system size exceeds the dense-diagonalization capacity."""


class EigensolverError(SpinErgoError):
    """The dense Hermitian eigensolver failed to converge."""


class InvalidStateError(SpinErgoError):
    """A matrix fails the density-matrix requirements beyond tolerance."""


class InvalidWindowError(SpinErgoError):
    """A time series is too short for the requested averaging window."""


class ConfigError(SpinErgoError):
    """Base class for run-configuration problems."""


class ConfigSyntaxError(ConfigError):
    """Malformed config text; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigSemanticError(ConfigError):
    """Well-formed config with an invalid or unknown key; carries the key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"key '{key}': {message}")
        self.key = key
