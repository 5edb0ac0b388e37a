"""Synthetic scenes of rasterized ellipses with known ground truth.

Rasterization samples pixel centers (integer coordinates) against the
rotated-ellipse inequality, matching the fill convention used for
polygon annotations. Scene generation rejection-samples ellipse
placements so that instances stay pairwise disjoint with at least one
pixel of 8-neighborhood separation, which keeps them distinct under
8-connected component labeling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import OutOfFrameError, PlacementFailureError
from .geometry import BinaryMask
from .ingest import Instance, InstanceSet
from .preprocess import GrayImage

BACKGROUND_LEVEL = 40.0
FOREGROUND_LEVEL = 190.0
MAX_ATTEMPTS_PER_CELL = 200


@dataclass(frozen=True)
class EllipseParams:
    """Ground-truth parameters of one placed ellipse (pixels/radians)."""

    instance_id: int
    center_x: float
    center_y: float
    a: float
    b: float
    orientation: float


@dataclass(frozen=True)
class SyntheticScene:
    image: GrayImage
    truth: InstanceSet
    params: tuple[EllipseParams, ...]


def rasterize_ellipse(
    center_x: float,
    center_y: float,
    a: float,
    b: float,
    orientation: float,
    frame_width: int,
    frame_height: int,
) -> BinaryMask:
    """Mask of pixel centers inside the rotated ellipse, clipped to frame.

    Requires a >= b > 0. Raises OutOfFrameError when no pixel center
    qualifies (ellipse outside the frame, or too small to cover any
    integer point).
    """
    if not (a >= b > 0):
        raise ValueError(f"need a >= b > 0, got a={a}, b={b}")
    cos_t = math.cos(orientation)
    sin_t = math.sin(orientation)
    half_w = math.sqrt((a * cos_t) ** 2 + (b * sin_t) ** 2)
    half_h = math.sqrt((a * sin_t) ** 2 + (b * cos_t) ** 2)
    x_lo = max(0, math.ceil(center_x - half_w))
    x_hi = min(frame_width - 1, math.floor(center_x + half_w))
    y_lo = max(0, math.ceil(center_y - half_h))
    y_hi = min(frame_height - 1, math.floor(center_y + half_h))
    mask = np.zeros((frame_height, frame_width), dtype=bool)
    if x_lo <= x_hi and y_lo <= y_hi:
        xs = np.arange(x_lo, x_hi + 1, dtype=np.float64) - center_x
        ys = np.arange(y_lo, y_hi + 1, dtype=np.float64) - center_y
        dx, dy = np.meshgrid(xs, ys)
        u = dx * cos_t + dy * sin_t
        v = -dx * sin_t + dy * cos_t
        mask[y_lo : y_hi + 1, x_lo : x_hi + 1] = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    if not mask.any():
        raise OutOfFrameError(
            f"ellipse at ({center_x}, {center_y}) covers no pixel center in "
            f"{frame_width}x{frame_height} frame"
        )
    return BinaryMask(mask)


def generate_scene(
    n_cells: int,
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    frame_width: int,
    frame_height: int,
    noise_level: float = 8.0,
    seed: int = 0,
    non_overlapping: bool = True,
) -> SyntheticScene:
    """Place n_cells random ellipses and render a noisy intensity image.

    Axes are drawn uniformly from the ranges (sorted so a >= b),
    orientation uniformly from [0, pi), centers uniformly within the
    margin that keeps the whole ellipse in frame. Each placement gets
    MAX_ATTEMPTS_PER_CELL tries before PlacementFailureError. The image
    is background plus per-cell foreground plus Gaussian noise, drawn
    after all placements, so layout depends only on seed and cell count.
    """
    if n_cells < 0:
        raise ValueError("n_cells must be >= 0")
    for name, (lo, hi) in (("a_range", a_range), ("b_range", b_range)):
        if not (0 < lo <= hi):
            raise ValueError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    occupied = np.zeros((frame_height, frame_width), dtype=bool)
    grow = np.ones((3, 3), dtype=bool)
    instances: list[Instance] = []
    params: list[EllipseParams] = []
    for cell_id in range(1, n_cells + 1):
        placed = False
        for _ in range(MAX_ATTEMPTS_PER_CELL):
            a = float(rng.uniform(*a_range))
            b = float(rng.uniform(*b_range))
            if b > a:
                a, b = b, a
            theta = float(rng.uniform(0.0, math.pi))
            cos_t, sin_t = math.cos(theta), math.sin(theta)
            half_w = math.sqrt((a * cos_t) ** 2 + (b * sin_t) ** 2)
            half_h = math.sqrt((a * sin_t) ** 2 + (b * cos_t) ** 2)
            if 2 * half_w > frame_width - 1 or 2 * half_h > frame_height - 1:
                continue  # cannot fit at this orientation
            cx = float(rng.uniform(half_w, frame_width - 1 - half_w))
            cy = float(rng.uniform(half_h, frame_height - 1 - half_h))
            try:
                mask = rasterize_ellipse(cx, cy, a, b, theta, frame_width, frame_height)
            except OutOfFrameError:
                continue
            if non_overlapping:
                grown = ndimage.binary_dilation(mask.pixels, structure=grow)
                if (grown & occupied).any():
                    continue
            occupied |= mask.pixels
            instances.append(Instance(instance_id=cell_id, mask=mask))
            params.append(
                EllipseParams(
                    instance_id=cell_id, center_x=cx, center_y=cy, a=a, b=b, orientation=theta
                )
            )
            placed = True
            break
        if not placed:
            raise PlacementFailureError(
                f"could not place cell {cell_id} of {n_cells} after "
                f"{MAX_ATTEMPTS_PER_CELL} attempts in {frame_width}x{frame_height} frame"
            )
    base = np.full((frame_height, frame_width), BACKGROUND_LEVEL, dtype=np.float64)
    for inst in instances:
        base[inst.mask.pixels] = FOREGROUND_LEVEL
    if noise_level > 0:
        base += rng.normal(0.0, noise_level, size=base.shape)
    image = GrayImage(np.clip(np.rint(base), 0.0, 255.0).astype(np.uint8))
    truth = InstanceSet(frame_width, frame_height, tuple(instances))
    return SyntheticScene(image=image, truth=truth, params=tuple(params))
