"""Exception types shared across the library."""


class DirstftError(Exception):
    """Base class for library-specific failures."""


class LatticeMismatch(DirstftError):
    """Operands live on different lattices."""


class PairingDegenerate(DirstftError):
    """Analysis/synthesis window pairing is numerically zero."""


class DependentDirections(DirstftError):
    """Direction vectors are linearly dependent."""


class SingularB(DirstftError):
    """Coordinate-change matrix could not be inverted."""


class EtaTooLarge(DirstftError):
    """Imaginary frequency would overflow the exponential weight."""


class EmptyCone(DirstftError):
    """A frequency shell contains no usable lattice points."""


class UnknownKind(DirstftError):
    """Signal recipe kind outside the catalogue."""
