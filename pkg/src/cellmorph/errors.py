"""Exception types raised across the package."""


class CellmorphError(Exception):
    """Base class for all cellmorph-specific errors."""


class EmptyRegionError(CellmorphError):
    """An operation required at least one foreground pixel."""


class EmptyCollectionError(CellmorphError):
    """An aggregate was requested over an empty collection."""


class FormatError(CellmorphError):
    """A raster file does not match the documented format."""


class ParseError(CellmorphError):
    """An annotation file could not be parsed."""


class UnsupportedSegmentationError(ParseError):
    """Annotation uses a segmentation encoding this package does not read."""


class DanglingImageRefError(ParseError):
    """Annotation references an image id that is not declared."""


class OverlapError(CellmorphError):
    """Overlapping instances cannot be flattened into a label map."""


class FrameMismatchError(CellmorphError):
    """Two rasters that must share dimensions do not."""


class MissingScoresError(CellmorphError):
    """Score-based evaluation was requested but a prediction has no score."""


class ImageTooSmallError(CellmorphError):
    """Image is smaller than the requested tile grid."""


class InvalidRectError(CellmorphError):
    """Crop rectangle falls outside the frame or has nonpositive size."""


class OutOfFrameError(CellmorphError):
    """A rasterized shape covers no pixel inside the frame."""


class PlacementFailureError(CellmorphError):
    """Scene generation exhausted its placement retry budget."""
