"""Contrast enhancement and dataset augmentation for 8-bit gray images.

CLAHE here means: split the image into a grid of tiles, build one
256-bin histogram per tile, clip each histogram at a relative limit,
redistribute the clipped excess uniformly over all 256 bins in a single
pass, equalize per tile, and blend the per-tile mappings bilinearly at
every pixel. All of it is deterministic; the exact conventions are
spelled out on clahe() because tests hold the output bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import FormatError, ImageTooSmallError, InvalidRectError
from .geometry import BinaryMask
from .ingest import Instance, InstanceSet

AUGMENT_OPS = ("rot90", "rot180", "hflip", "vflip", "crop", "scale")


@dataclass(frozen=True)
class GrayImage:
    """An 8-bit grayscale raster; ``pixels`` is a read-only uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D raster, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
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


@dataclass(frozen=True)
class ClaheParams:
    """Tile grid counts and relative clip limit.

    ``clip_limit`` is a fraction of the tile pixel count in (0, 1];
    1.0 disables clipping entirely.
    """

    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float = 0.01

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile counts must be >= 1")
        if not (0.0 < self.clip_limit <= 1.0):
            raise ValueError(f"clip_limit must be in (0, 1], got {self.clip_limit}")


def load_gray_image(path) -> GrayImage:
    """Read an image file as 8-bit grayscale (converting if needed)."""
    try:
        with Image.open(path) as img:
            gray = img.convert("L")
            return GrayImage(np.asarray(gray))
    except (OSError, SyntaxError) as exc:
        raise FormatError(f"cannot read image {path}: {exc}") from None


def save_gray_image(img: GrayImage, path) -> None:
    Image.fromarray(img.pixels, mode="L").save(path, format="PNG")


def _tile_bounds(dim: int, tiles: int) -> list[int]:
    # floor-division split; every tile is non-empty when dim >= tiles
    return [i * dim // tiles for i in range(tiles + 1)]


def _tile_lut(tile: np.ndarray, clip_limit: float) -> np.ndarray:
    """Equalization LUT of one tile, kept as unrounded float64.

    Histogram clipped at clip_limit * pixel_count, excess spread
    uniformly over all 256 bins (one pass, no re-clipping). The map is
    255 * (cdf - cdf_min) / (n - cdf_min) with cdf_min taken at the
    first occupied bin; a tile whose cdf_min equals n (single occupied
    bin, no redistribution) maps through the identity. All accumulation
    is sequential over bins 0..255 so the result is reproducible
    operation for operation.
    """
    n = tile.size
    counts = np.bincount(tile.ravel(), minlength=256).tolist()
    limit = clip_limit * n
    excess = 0.0
    for c in counts:
        if c > limit:
            excess += c - limit
    if excess > 0.0:
        share = excess / 256.0
        hist = [min(c, limit) + share for c in counts]
    else:
        hist = [float(c) for c in counts]
    cdf = []
    acc = 0.0
    for h in hist:
        acc += h
        cdf.append(acc)
    first = next(i for i, h in enumerate(hist) if h > 0.0)
    cdf_min = cdf[first]
    denom = n - cdf_min
    if denom <= 0.0:
        return np.arange(256, dtype=np.float64)
    lut = [255.0 * max(c - cdf_min, 0.0) / denom for c in cdf]
    return np.array(lut, dtype=np.float64)


def _interp_axis(dim: int, bounds: list[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel left/right tile indices and blend fraction along one axis.

    Tile anchor points are the centers of each tile's pixel index range;
    pixels outside the outermost centers clamp to the edge tile.
    """
    tiles = len(bounds) - 1
    coords = np.arange(dim, dtype=np.float64)
    if tiles == 1:
        zero = np.zeros(dim, dtype=np.intp)
        return zero, zero, np.zeros(dim, dtype=np.float64)
    centers = np.array(
        [(bounds[i] + bounds[i + 1] - 1) / 2.0 for i in range(tiles)], dtype=np.float64
    )
    right = np.clip(np.searchsorted(centers, coords), 0, tiles - 1)
    left = np.clip(right - 1, 0, tiles - 1)
    span = centers[right] - centers[left]
    frac = np.where(span > 0.0, (coords - centers[left]) / np.where(span > 0.0, span, 1.0), 0.0)
    return left, right, np.clip(frac, 0.0, 1.0)


def clahe(img: GrayImage, p: ClaheParams) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Output pixel = round of the bilinear blend of the four surrounding
    tiles' LUT values, grouped exactly as::

        (1-fy) * ((1-fx)*L00 + fx*L01) + fy * ((1-fx)*L10 + fx*L11)

    with round-half-even, then clipped to [0, 255]. With a 1x1 grid and
    clip_limit 1.0 this reduces to plain global histogram equalization.
    """
    if img.width < p.tiles_x or img.height < p.tiles_y:
        raise ImageTooSmallError(
            f"{img.width}x{img.height} image cannot hold a {p.tiles_x}x{p.tiles_y} tile grid"
        )
    xb = _tile_bounds(img.width, p.tiles_x)
    yb = _tile_bounds(img.height, p.tiles_y)
    luts = np.empty((p.tiles_y, p.tiles_x, 256), dtype=np.float64)
    for ty in range(p.tiles_y):
        for tx in range(p.tiles_x):
            tile = img.pixels[yb[ty] : yb[ty + 1], xb[tx] : xb[tx + 1]]
            luts[ty, tx] = _tile_lut(tile, p.clip_limit)

    tx_l, tx_r, fx = _interp_axis(img.width, xb)
    ty_l, ty_r, fy = _interp_axis(img.height, yb)
    v = img.pixels.astype(np.intp)
    l00 = luts[ty_l[:, None], tx_l[None, :], v]
    l01 = luts[ty_l[:, None], tx_r[None, :], v]
    l10 = luts[ty_r[:, None], tx_l[None, :], v]
    l11 = luts[ty_r[:, None], tx_r[None, :], v]
    fxr = fx[None, :]
    fyr = fy[:, None]
    blended = (1.0 - fyr) * ((1.0 - fxr) * l00 + fxr * l01) + fyr * (
        (1.0 - fxr) * l10 + fxr * l11
    )
    return GrayImage(np.clip(np.rint(blended), 0.0, 255.0).astype(np.uint8))


def _scale_image(px: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    """Bilinear resample with pixel-center alignment, edges clamped."""
    old_h, old_w = px.shape
    ys = (np.arange(new_h, dtype=np.float64) + 0.5) * (old_h / new_h) - 0.5
    xs = (np.arange(new_w, dtype=np.float64) + 0.5) * (old_w / new_w) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    out = ndimage.map_coordinates(px.astype(np.float64), [grid_y, grid_x], order=1, mode="nearest")
    return np.clip(np.rint(out), 0.0, 255.0).astype(np.uint8)


def _scale_mask(px: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    """Nearest-neighbor resample; keeps masks strictly binary."""
    old_h, old_w = px.shape
    src_y = np.floor((np.arange(new_h) + 0.5) * (old_h / new_h)).astype(np.intp)
    src_x = np.floor((np.arange(new_w) + 0.5) * (old_w / new_w)).astype(np.intp)
    src_y = np.clip(src_y, 0, old_h - 1)
    src_x = np.clip(src_x, 0, old_w - 1)
    return px[src_y[:, None], src_x[None, :]]


def augment(
    img: GrayImage,
    masks: InstanceSet,
    op: str,
    *,
    rect: tuple[int, int, int, int] | None = None,
    crop_size: tuple[int, int] | None = None,
    factor: float | None = None,
    seed: int = 0,
) -> tuple[GrayImage, InstanceSet]:
    """Apply one geometric op identically to the image and every mask.

    Ops: rot90 (counter-clockwise quarter turn), rot180, hflip (mirror
    across the vertical axis), vflip, crop, scale. Crop takes either an
    explicit ``rect`` (x, y, w, h) or a ``crop_size`` (w, h) whose
    position is drawn from ``seed`` (x first, then y). Scale resizes
    both dimensions by ``factor`` (bilinear intensities, nearest-
    neighbor masks). Instances left without any foreground pixel are
    dropped.
    """
    if img.width != masks.frame_width or img.height != masks.frame_height:
        raise ValueError("image and instance set frames differ")
    if op not in AUGMENT_OPS:
        raise ValueError(f"unknown op {op!r}, expected one of {AUGMENT_OPS}")

    if op in ("rot90", "rot180", "hflip", "vflip"):
        rigid = {
            "rot90": lambda a: np.rot90(a),
            "rot180": lambda a: np.rot90(a, 2),
            "hflip": np.fliplr,
            "vflip": np.flipud,
        }[op]
        new_img = GrayImage(np.ascontiguousarray(rigid(img.pixels)))
        instances = tuple(
            Instance(i.instance_id, BinaryMask(np.ascontiguousarray(rigid(i.mask.pixels))), i.score)
            for i in masks.instances
        )
        return new_img, InstanceSet(new_img.width, new_img.height, instances)

    if op == "crop":
        if rect is None and crop_size is None:
            raise InvalidRectError("crop needs rect=(x, y, w, h) or crop_size=(w, h)")
        if rect is None:
            cw, ch = crop_size
            if not (1 <= cw <= img.width and 1 <= ch <= img.height):
                raise InvalidRectError(f"crop size {cw}x{ch} does not fit {img.width}x{img.height}")
            rng = np.random.default_rng(seed)
            x = int(rng.integers(0, img.width - cw + 1))
            y = int(rng.integers(0, img.height - ch + 1))
            rect = (x, y, cw, ch)
        x, y, w, h = rect
        if w < 1 or h < 1 or x < 0 or y < 0 or x + w > img.width or y + h > img.height:
            raise InvalidRectError(f"rect {rect} outside {img.width}x{img.height} frame")
        new_img = GrayImage(img.pixels[y : y + h, x : x + w])
        instances = []
        for inst in masks.instances:
            clipped = inst.mask.pixels[y : y + h, x : x + w]
            if clipped.any():
                instances.append(Instance(inst.instance_id, BinaryMask(clipped), inst.score))
        return new_img, InstanceSet(w, h, tuple(instances))

    # op == "scale"
    if factor is None or not (factor > 0):
        raise ValueError("scale needs factor > 0")
    new_w = max(1, round(img.width * factor))
    new_h = max(1, round(img.height * factor))
    new_img = GrayImage(_scale_image(img.pixels, new_h, new_w))
    instances = []
    for inst in masks.instances:
        resized = _scale_mask(inst.mask.pixels, new_h, new_w)
        if resized.any():
            instances.append(Instance(inst.instance_id, BinaryMask(resized), inst.score))
    return new_img, InstanceSet(new_w, new_h, tuple(instances))
