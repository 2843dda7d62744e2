"""Exception types shared across the package."""

from __future__ import annotations


class AcouforgeError(Exception):
    """Base class for all package errors."""


class InvalidArgument(AcouforgeError):
    """A scalar argument is outside its documented domain."""


class IncompatibleGrids(AcouforgeError):
    """Two spectra that must share a frequency grid do not."""


class ValidationFailed(AcouforgeError):
    """A design failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        codes = ", ".join(v.code for v in self.violations)
        super().__init__(f"design validation failed: {codes}")


class ParseError(AcouforgeError):
    """A document could not be parsed; carries line/column or a path."""

    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = ""
        if line is not None:
            where = f" at line {line}, column {column}"
        elif path:
            where = f" at {path}"
        super().__init__(f"{message}{where}")


class PlaneWaveBandWarning(UserWarning):
    """Grid extends above the first non-planar duct mode cutoff."""


class NotchClampWarning(UserWarning):
    """A branch impedance magnitude was regularized at an exact notch."""


class SilentModelWarning(UserWarning):
    """Every mode of a modal model was dropped; synthesis returns silence."""


class VoxelizationTooCoarse(AcouforgeError):
    """The voxel cell size exceeds the smallest feature radius."""


class NothingToExport(AcouforgeError):
    """An empty voxel grid cannot be turned into a mesh."""


class DisconnectedLattice(AcouforgeError):
    """The occupied voxel set is not 6-connected."""


class ModelTooLarge(AcouforgeError):
    """The assembly exceeds the dense eigensolver size limit."""


class AliasingError(AcouforgeError):
    """The probe sample rate cannot represent the analysis band."""


class InvalidBandPlan(AcouforgeError):
    """Tag bands overlap or extend beyond the usable plane-wave band."""


class BandOutOfRange(AcouforgeError):
    """A tag band lies outside the measured spectrum's grid."""


class ReferenceTooQuiet(AcouforgeError):
    """The reference waveform has no usable energy in the analysis span."""


class StoreUnavailable(AcouforgeError):
    """The persistence directory cannot be created or written."""
