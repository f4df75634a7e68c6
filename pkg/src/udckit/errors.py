"""Exception types raised across udckit."""


class UdcError(Exception):
    """Base class for all udckit errors."""


class ObjParseError(UdcError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateInputError(UdcError, ValueError):
    """Input geometry has zero extent or zero area."""


class DomainError(UdcError, ValueError):
    """Mesh does not lie strictly inside the grid domain."""


class CorruptUdcError(UdcError, ValueError):
    """A UDC byte stream failed validation."""
