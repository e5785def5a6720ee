"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so raising the right class
matters more than the message text.
"""


class SpinPhotoError(Exception):
    """Base class for all package errors."""


class ValidationError(SpinPhotoError):
    """Bad input: shapes, ranges, symmetry, file formats."""


class AliasingError(ValidationError):
    """Waveform step count too low for the requested harmonic content."""


class NumericalContractError(SpinPhotoError):
    """A numerical health contract (unitarity, trace drift) was violated."""


class NoSeparationError(SpinPhotoError):
    """Decoder could not find a usable threshold between bit classes."""
