"""Instance-set loading: label maps, polygon annotation files, components.

A label map is a single-channel 16-bit PNG whose pixel value is the
instance id (0 = background). The annotation format is a JSON object
with ``images`` [{id, width, height, file_name}] and ``annotations``
[{id, image_id, segmentation: [[x1, y1, x2, y2, ...]], score?}]; only
polygon segmentations are supported.

Polygon fill rule: a pixel is foreground iff its center lies inside the
polygon under the even-odd rule; centers exactly on a boundary belong
to the pixel run on the right/below (top-left convention). Pixel (x, y)
has its center at the integer point (x, y).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import (
    DanglingImageRefError,
    FormatError,
    OverlapError,
    ParseError,
    UnsupportedSegmentationError,
)
from .geometry import BinaryMask

# Instances smaller than this many pixels are kept but flagged small,
# so downstream reporting can exclude them explicitly.
SMALL_INSTANCE_PX = 4

MAX_LABEL = 0xFFFF


@dataclass(frozen=True)
class Instance:
    """One labeled region: an id, its mask, and an optional confidence."""

    instance_id: int
    mask: BinaryMask
    score: float | None = None

    @property
    def small(self) -> bool:
        return self.mask.foreground_count() < SMALL_INSTANCE_PX


@dataclass(frozen=True)
class InstanceSet:
    """Instances sharing one image frame.

    Ids are unique and every mask has at least one foreground pixel;
    masks of distinct instances may overlap (predictions are not
    required to be disjoint).
    """

    frame_width: int
    frame_height: int
    instances: tuple[Instance, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        if self.frame_width < 1 or self.frame_height < 1:
            raise ValueError("frame dimensions must be positive")
        seen = set()
        for inst in self.instances:
            if inst.mask.width != self.frame_width or inst.mask.height != self.frame_height:
                raise ValueError(
                    f"instance {inst.instance_id} mask is {inst.mask.width}x{inst.mask.height}, "
                    f"frame is {self.frame_width}x{self.frame_height}"
                )
            if inst.instance_id in seen:
                raise ValueError(f"duplicate instance id {inst.instance_id}")
            seen.add(inst.instance_id)
            if inst.mask.foreground_count() == 0:
                raise ValueError(f"instance {inst.instance_id} has no foreground pixels")
            if inst.score is not None and not (0.0 <= inst.score <= 1.0):
                raise ValueError(f"instance {inst.instance_id} score {inst.score} not in [0,1]")

    def __len__(self) -> int:
        return len(self.instances)

    def ids(self) -> list[int]:
        return [inst.instance_id for inst in self.instances]


def load_label_map(path) -> InstanceSet:
    """Read a 16-bit single-channel label image into an InstanceSet.

    One instance per distinct nonzero label, in ascending label order;
    an all-zero map gives an empty set. Raises FormatError for any
    other bit depth or channel layout.
    """
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            arr = np.asarray(img)
    except (OSError, SyntaxError) as exc:
        raise FormatError(f"cannot read label map {path}: {exc}") from None
    if mode not in ("I;16", "I"):
        raise FormatError(f"label map must be a 16-bit single-channel image, got mode {mode}")
    if arr.ndim != 2:
        raise FormatError(f"label map must be single-channel, got shape {arr.shape}")
    if arr.min() < 0 or arr.max() > MAX_LABEL:
        raise FormatError("label values outside the 16-bit range")
    labels = arr.astype(np.int64)
    instances = []
    for lab in np.unique(labels):
        if lab == 0:
            continue
        instances.append(Instance(instance_id=int(lab), mask=BinaryMask(labels == lab)))
    return InstanceSet(
        frame_width=labels.shape[1], frame_height=labels.shape[0], instances=tuple(instances)
    )


def write_label_map(iset: InstanceSet, path) -> None:
    """Write an InstanceSet as a 16-bit single-channel PNG label image.

    Requires ids in [1, 65535] and pairwise-disjoint masks; a shared
    pixel has no single label, so overlap raises OverlapError.
    """
    canvas = np.zeros((iset.frame_height, iset.frame_width), dtype=np.uint16)
    for inst in iset.instances:
        if not (1 <= inst.instance_id <= MAX_LABEL):
            raise FormatError(f"instance id {inst.instance_id} not representable in 16 bits")
        px = inst.mask.pixels
        if (canvas[px] != 0).any():
            raise OverlapError(f"instance {inst.instance_id} overlaps another instance")
        canvas[px] = inst.instance_id
    Image.fromarray(canvas).save(path, format="PNG")


def _fill_polygon(rings: list[list[tuple[float, float]]], width: int, height: int) -> np.ndarray:
    """Scanline even-odd fill of one polygon (possibly several rings).

    For scan row y, every non-horizontal edge with min(y1,y2) <= y <
    max(y1,y2) contributes a crossing; sorted crossings are paired and
    each span fills integer x in [ceil(left), ceil(right)). The
    half-open rules give each boundary pixel to exactly one side.
    """
    out = np.zeros((height, width), dtype=bool)
    edges = []
    for ring in rings:
        n = len(ring)
        for i in range(n):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % n]
            if y1 != y2:
                edges.append((x1, y1, x2, y2))
    if not edges:
        return out
    y_lo = max(0, math.ceil(min(min(e[1], e[3]) for e in edges)))
    y_hi = min(height - 1, math.ceil(max(max(e[1], e[3]) for e in edges)) - 1)
    for y in range(y_lo, y_hi + 1):
        xs = []
        for x1, y1, x2, y2 in edges:
            lo, hi = (y1, y2) if y1 < y2 else (y2, y1)
            if lo <= y < hi:
                xs.append(x1 + (y - y1) * (x2 - x1) / (y2 - y1))
        xs.sort()
        for j in range(0, len(xs) - 1, 2):
            xa = max(0, math.ceil(xs[j]))
            xb = min(width, math.ceil(xs[j + 1]))
            if xa < xb:
                out[y, xa:xb] = True
    return out


def _parse_rings(seg, ann_id) -> list[list[tuple[float, float]]]:
    if isinstance(seg, dict):
        raise UnsupportedSegmentationError(
            f"annotation {ann_id}: run-length segmentations are not supported"
        )
    if not isinstance(seg, list) or not seg:
        raise ParseError(f"annotation {ann_id}: segmentation must be a non-empty list of polygons")
    rings = []
    for ring in seg:
        if not isinstance(ring, list) or len(ring) < 6 or len(ring) % 2 != 0:
            raise ParseError(
                f"annotation {ann_id}: polygon needs an even number of >= 6 coordinates"
            )
        try:
            coords = [float(v) for v in ring]
        except (TypeError, ValueError):
            raise ParseError(f"annotation {ann_id}: non-numeric polygon coordinate") from None
        rings.append(list(zip(coords[0::2], coords[1::2])))
    return rings


def load_coco(path) -> dict[int, InstanceSet]:
    """Read polygon annotations into one InstanceSet per image id.

    Annotation ids become instance ids (ascending order within each
    image); a ``score`` field, when present, is preserved. Annotations
    whose polygon covers no pixel center are dropped. Images with no
    annotations map to empty sets.
    """
    try:
        with open(path, "rb") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "images" not in doc or "annotations" not in doc:
        raise ParseError("annotation file must contain 'images' and 'annotations' lists")

    frames: dict[int, tuple[int, int]] = {}
    for img in doc["images"]:
        try:
            img_id, w, h = img["id"], int(img["width"]), int(img["height"])
            img["file_name"]
        except (TypeError, KeyError) as exc:
            raise ParseError(f"image entry missing field {exc}") from None
        if img_id in frames:
            raise ParseError(f"duplicate image id {img_id}")
        if w < 1 or h < 1:
            raise ParseError(f"image {img_id} has non-positive dimensions")
        frames[img_id] = (w, h)

    per_image: dict[int, list[Instance]] = {img_id: [] for img_id in frames}
    seen_ids: dict[int, set] = {img_id: set() for img_id in frames}
    for ann in doc["annotations"]:
        try:
            ann_id, img_id, seg = ann["id"], ann["image_id"], ann["segmentation"]
        except (TypeError, KeyError) as exc:
            raise ParseError(f"annotation entry missing field {exc}") from None
        if img_id not in frames:
            raise DanglingImageRefError(f"annotation {ann_id} references unknown image {img_id}")
        if ann_id in seen_ids[img_id]:
            raise ParseError(f"duplicate annotation id {ann_id} in image {img_id}")
        seen_ids[img_id].add(ann_id)
        score = ann.get("score")
        if score is not None:
            if not isinstance(score, (int, float)) or not (0.0 <= float(score) <= 1.0):
                raise ParseError(f"annotation {ann_id}: score must be a number in [0,1]")
            score = float(score)
        w, h = frames[img_id]
        filled = _fill_polygon(_parse_rings(seg, ann_id), w, h)
        if not filled.any():
            continue  # polygon covers no pixel center
        per_image[img_id].append(Instance(instance_id=ann_id, mask=BinaryMask(filled), score=score))

    out = {}
    for img_id, (w, h) in frames.items():
        instances = tuple(sorted(per_image[img_id], key=lambda i: i.instance_id))
        out[img_id] = InstanceSet(frame_width=w, frame_height=h, instances=instances)
    return out


def connected_components(mask: BinaryMask) -> InstanceSet:
    """Split a flat foreground mask into 8-connected components.

    Ids are assigned 1, 2, ... in raster-scan discovery order; the
    component masks partition the input foreground exactly.
    """
    labeled, count = ndimage.label(mask.pixels, structure=np.ones((3, 3), dtype=int))
    instances = []
    if count:
        flat = labeled.ravel()
        labels, first = np.unique(flat, return_index=True)
        order = [lab for _, lab in sorted(zip(first, labels)) if lab != 0]
        for new_id, lab in enumerate(order, start=1):
            instances.append(Instance(instance_id=new_id, mask=BinaryMask(labeled == lab)))
    return InstanceSet(
        frame_width=mask.width, frame_height=mask.height, instances=tuple(instances)
    )
