"""Exception types raised across the toolkit.

Every contract violation maps to a named subclass of ShadowToolError so
callers (and the CLI exit-code mapping) can distinguish bad input data
from genuine bugs.
"""


class ShadowToolError(Exception):
    """Base class for all errors raised by this package."""


# --- annotation sessions ---------------------------------------------------

class SessionClosedError(ShadowToolError):
    """Operation on a session that was already committed."""


class OutOfBoundsError(ShadowToolError):
    """Point outside the annotation canvas."""


class SetFullError(ShadowToolError):
    """All keypoints are already placed."""


class EmptySessionError(ShadowToolError):
    """Undo on a session with no points."""


class BelowMinimumError(ShadowToolError):
    """Commit attempted with fewer points than the minimum."""


# --- geometry / annotation records -----------------------------------------

class MissingKeypointError(ShadowToolError):
    """A required keypoint is absent."""


class DegenerateAxisError(ShadowToolError):
    """Head coincides with the knee midpoint; torso axis undefined."""


class InvalidDimsError(ShadowToolError):
    """Non-positive raster or canvas dimensions."""


class IncompleteAnnotationError(ShadowToolError):
    """Annotation record is missing keypoints required for rendering."""


class InvalidThicknessError(ShadowToolError):
    """Line thickness below one pixel."""


class DimMismatchError(ShadowToolError):
    """Two rasters that must share dimensions do not."""


# --- shadow triangles / light ----------------------------------------------

class NoContoursError(ShadowToolError):
    """Mask has no foreground pixels."""


class NonBinaryInputError(ShadowToolError):
    """Mask contains values other than 0 and 1."""


class ZeroShadowError(ShadowToolError):
    """Shadow endpoint coincides with the limb base; ratio undefined."""


class ZeroLimbError(ShadowToolError):
    """Limb endpoints coincide; ratio undefined."""


class OutOfRangeError(ShadowToolError):
    """Angle or coefficient outside its open domain."""


class NonPositiveKError(ShadowToolError):
    """Shadow coefficient must be strictly positive."""


class NonUnitAzimuthError(ShadowToolError):
    """Azimuth vector is not unit length."""


class DegenerateTriangleError(ShadowToolError):
    """No shadow evidence in the mask; caller should fall back to a default light."""


class MissingReferenceError(ShadowToolError):
    """No Head correspondence to use as the reference coefficient."""


class NonPositiveError(ShadowToolError):
    """Height or length must be strictly positive."""


# --- rendering ---------------------------------------------------------------

class NegativeSigmaError(ShadowToolError):
    """Blur radius below zero."""


class AlphaRangeError(ShadowToolError):
    """Shadow darkness outside [0, 1]."""


# --- metrics -----------------------------------------------------------------

class TooSmallError(ShadowToolError):
    """Image smaller than the structural-similarity window."""


class EmptyRegionError(ShadowToolError):
    """Evaluation region selects no pixels."""


class SingleClassRegionError(ShadowToolError):
    """Ground truth has only one class in the region; error rate undefined."""


# --- losses ------------------------------------------------------------------

class ShapeMismatchError(ShadowToolError):
    """Arrays that must share a shape do not."""


class MaskRangeError(ShadowToolError):
    """Soft mask values outside [0, 1]."""


class NegativeComponentError(ShadowToolError):
    """Loss components must be non-negative."""


class EmptyScoreMapError(ShadowToolError):
    """Discriminator score map has no elements."""


class LayerShapeMismatchError(ShadowToolError):
    """Feature layers of the two inputs disagree in count or shape."""


# --- pipeline / io -----------------------------------------------------------

class ParseError(ShadowToolError):
    """Malformed manifest, config or annotation file."""


class MissingFileError(ShadowToolError):
    """A referenced file does not exist."""


class BindError(ShadowToolError):
    """Server could not bind its address."""
