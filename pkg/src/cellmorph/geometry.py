"""Per-cell geometry from binary masks.

Image moments of a foreground raster, the equivalent ellipse whose
second-order moments match the region's, and the derived size attributes
(area, length, width, perimeter) in pixels and microns.

Coordinate convention: pixel (x, y) is a unit of mass located at the
integer point (x, y), 0-based, x along image width and y along height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCollectionError, EmptyRegionError

# Relative cutoff below which the minor-axis term is treated as zero
# (collinear pixel sets); well above float noise, far below any real axis.
_DEGENERATE_RTOL = 1e-9


@dataclass(frozen=True)
class BinaryMask:
    """A 2-D foreground raster; every pixel is exactly 0 or 1.

    ``pixels`` is a read-only (height, width) bool array. Pixel (x, y)
    is foreground iff ``pixels[y, x]``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2-D raster, got shape {px.shape}")
        if px.dtype != np.bool_:
            if not np.isin(px, (0, 1)).all():
                raise ValueError("mask values must be exactly 0 or 1")
            px = px.astype(bool)
        else:
            px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def foreground_count(self) -> int:
        return int(self.pixels.sum())


@dataclass(frozen=True)
class RawMoments:
    """Moment sums over the raster, exact integers in pixel units.

    ``m_pq = sum_x sum_y x^p y^q f(x, y)``; m00 is the foreground pixel
    count (the region area in px).
    """

    m00: int
    m10: int
    m01: int
    m11: int
    m20: int
    m02: int


@dataclass(frozen=True)
class CentralMoments:
    """Second-order moments about the region centroid (float, px units)."""

    centroid_x: float
    centroid_y: float
    mu11: float
    mu20: float
    mu02: float
    m00: int


@dataclass(frozen=True)
class EquivalentEllipse:
    """Ellipse matching the region's second-order moments.

    Semi-axes in pixels, ``semi_major_a >= semi_minor_b >= 0`` by
    construction. ``orientation`` is the major-axis angle in radians,
    in (-pi/2, pi/2]. ``degenerate`` marks collinear pixel sets (b = 0);
    such regions are reported, never rejected.
    """

    semi_major_a: float
    semi_minor_b: float
    orientation: float
    degenerate: bool = False


@dataclass(frozen=True)
class ScaleConfig:
    """Physical pixel pitch in microns per pixel."""

    microns_per_pixel: float

    def __post_init__(self):
        if not (self.microns_per_pixel > 0):
            raise ValueError(f"microns_per_pixel must be > 0, got {self.microns_per_pixel}")


@dataclass(frozen=True)
class CellProperties:
    """Size attributes of one analyzed instance.

    Lengths are the equivalent-ellipse axes (2a, 2b) scaled to microns;
    area is reported both as a pixel count and in square microns.
    """

    instance_id: int
    area_px: int
    area_um2: float
    length_um: float
    width_um: float
    perimeter_um: float
    degenerate: bool = False


@dataclass(frozen=True)
class AttributeStats:
    mean: float
    std: float


@dataclass(frozen=True)
class MorphometrySummary:
    """Mean and population std of each size attribute over a cell set."""

    count: int
    area_um2: AttributeStats
    length_um: AttributeStats
    width_um: AttributeStats
    perimeter_um: AttributeStats


def raw_moments(mask: BinaryMask) -> RawMoments:
    """Compute the zeroth-, first- and second-order moment sums.

    Exact integer arithmetic: the per-column/per-row pixel counts are
    reduced with numpy (safe in int64 for rasters up to 2^16 x 2^16) and
    the final weighted sums accumulate in Python integers, which do not
    overflow. An all-background mask yields all-zero moments.
    """
    occ = mask.pixels.astype(np.int64)
    h, w = occ.shape
    col = occ.sum(axis=0).tolist()  # foreground count per x
    row = occ.sum(axis=1).tolist()  # foreground count per y
    ysum = (np.arange(h, dtype=np.int64) @ occ).tolist()  # sum of y per x
    m00 = sum(col)
    m10 = sum(x * c for x, c in enumerate(col))
    m01 = sum(y * c for y, c in enumerate(row))
    m20 = sum(x * x * c for x, c in enumerate(col))
    m02 = sum(y * y * c for y, c in enumerate(row))
    m11 = sum(x * s for x, s in enumerate(ysum))
    return RawMoments(m00=m00, m10=m10, m01=m01, m11=m11, m20=m20, m02=m02)


def area_px(m: RawMoments) -> int:
    """Region area in pixels: the zeroth moment."""
    return m.m00


def central_moments(m: RawMoments) -> CentralMoments:
    """Shift the second-order moments to the region centroid.

    Each mu is computed from an exact integer numerator followed by a
    single float division, so no cancellation error accumulates.

    Raises EmptyRegionError when the region has no foreground pixel.
    """
    if m.m00 == 0:
        raise EmptyRegionError("cannot compute central moments of an empty region")
    n = m.m00
    return CentralMoments(
        centroid_x=m.m10 / n,
        centroid_y=m.m01 / n,
        mu11=(m.m11 * n - m.m10 * m.m01) / n,
        mu20=(m.m20 * n - m.m10 * m.m10) / n,
        mu02=(m.m02 * n - m.m01 * m.m01) / n,
        m00=n,
    )


def equivalent_ellipse(c: CentralMoments) -> EquivalentEllipse:
    """Fit the ellipse whose second-order moments match the region's.

    Semi-axes::

        a = sqrt((mu20 + mu02 + r) / (m00 / 2))
        b = sqrt((mu20 + mu02 - r) / (m00 / 2))
        r = sqrt((mu20 - mu02)^2 + 4 mu11^2)

    computed from the centroid-centered moments, so the axes do not
    depend on where the region sits in the frame. Collinear pixel sets
    give b = 0 and are flagged degenerate rather than rejected.
    """
    if c.m00 == 0:
        raise EmptyRegionError("cannot fit an ellipse to an empty region")
    spread = c.mu20 + c.mu02
    split = math.hypot(c.mu20 - c.mu02, 2.0 * c.mu11)
    half_area = c.m00 / 2.0
    num_a = spread + split
    num_b = spread - split  # >= 0 up to float noise (Cauchy-Schwarz)
    a = math.sqrt(num_a / half_area)
    degenerate = num_b <= _DEGENERATE_RTOL * max(num_a, 1.0)
    b = 0.0 if degenerate else math.sqrt(num_b / half_area)
    orientation = 0.5 * math.atan2(2.0 * c.mu11, c.mu20 - c.mu02)
    return EquivalentEllipse(
        semi_major_a=a, semi_minor_b=b, orientation=orientation, degenerate=degenerate
    )


def perimeter(e: EquivalentEllipse) -> float:
    """Perimeter of the equivalent ellipse: ``2 pi sqrt((a^2 + b^2) / 2)``.

    Exact for circles, an approximation for eccentric ellipses; kept in
    this closed form deliberately. Requires a >= b >= 0.
    """
    a, b = e.semi_major_a, e.semi_minor_b
    if not (a >= b >= 0.0):
        raise ValueError(f"perimeter requires a >= b >= 0, got a={a}, b={b}")
    return 2.0 * math.pi * math.sqrt((a * a + b * b) / 2.0)


def analyze_instance(mask: BinaryMask, scale: ScaleConfig, instance_id: int) -> CellProperties:
    """Measure one instance: moments -> ellipse -> scaled size attributes.

    Length and width are the full ellipse axes (2a, 2b) in microns;
    perimeter scales linearly and area quadratically with the pixel
    pitch. Raises EmptyRegionError for an all-background mask.
    """
    m = raw_moments(mask)
    if m.m00 == 0:
        raise EmptyRegionError("instance mask has no foreground pixels")
    e = equivalent_ellipse(central_moments(m))
    s = scale.microns_per_pixel
    return CellProperties(
        instance_id=instance_id,
        area_px=m.m00,
        area_um2=m.m00 * (s * s),
        length_um=2.0 * e.semi_major_a * s,
        width_um=2.0 * e.semi_minor_b * s,
        perimeter_um=perimeter(e) * s,
        degenerate=e.degenerate,
    )


def analyze_set(
    instances: list[tuple[int, BinaryMask]],
    scale: ScaleConfig,
    threads: int | None = None,
) -> list[CellProperties]:
    """Measure every (id, mask) pair, preserving input order.

    With ``threads`` > 1 the per-instance work runs on a thread pool;
    results are identical to the serial path in value and order.
    """
    if threads is not None and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda im: analyze_instance(im[1], scale, im[0]), instances))
    return [analyze_instance(mask, scale, iid) for iid, mask in instances]


def summarize(props: list[CellProperties]) -> MorphometrySummary:
    """Mean and population standard deviation of each size attribute."""
    if not props:
        raise EmptyCollectionError("cannot summarize an empty list of cells")

    def stats(values):
        arr = np.asarray(values, dtype=float)
        return AttributeStats(mean=float(arr.mean()), std=float(arr.std()))

    return MorphometrySummary(
        count=len(props),
        area_um2=stats([p.area_um2 for p in props]),
        length_um=stats([p.length_um for p in props]),
        width_um=stats([p.width_um for p in props]),
        perimeter_um=stats([p.perimeter_um for p in props]),
    )
