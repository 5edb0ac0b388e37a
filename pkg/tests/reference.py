"""Independent brute-force references the tests compare against.

Everything here is written for obviousness, not speed: plain double
loops, BFS, exhaustive search. None of it imports the package under
test (numpy is used only for array containers and half-even rounding).
"""

from __future__ import annotations

from collections import deque

import numpy as np


def moments_double_loop(pixels: np.ndarray) -> dict[str, int]:
    """Raw moment sums by visiting every pixel, exact integers."""
    h, w = pixels.shape
    m00 = m10 = m01 = m11 = m20 = m02 = 0
    rows = pixels.tolist()
    for y in range(h):
        row = rows[y]
        for x in range(w):
            if row[x]:
                m00 += 1
                m10 += x
                m01 += y
                m11 += x * y
                m20 += x * x
                m02 += y * y
    return {"m00": m00, "m10": m10, "m01": m01, "m11": m11, "m20": m20, "m02": m02}


def central_double_loop(pixels: np.ndarray) -> dict[str, float]:
    """Centered second-order moments summed directly about the centroid."""
    m = moments_double_loop(pixels)
    n = m["m00"]
    cx = m["m10"] / n
    cy = m["m01"] / n
    mu11 = mu20 = mu02 = 0.0
    rows = pixels.tolist()
    for y in range(pixels.shape[0]):
        row = rows[y]
        for x in range(pixels.shape[1]):
            if row[x]:
                dx = x - cx
                dy = y - cy
                mu11 += dx * dy
                mu20 += dx * dx
                mu02 += dy * dy
    return {"centroid_x": cx, "centroid_y": cy, "mu11": mu11, "mu20": mu20, "mu02": mu02}


def flood_fill_components(pixels: np.ndarray) -> list[set[tuple[int, int]]]:
    """8-connected components by BFS, in raster-scan discovery order."""
    h, w = pixels.shape
    seen = np.zeros_like(pixels, dtype=bool)
    comps = []
    for sy in range(h):
        for sx in range(w):
            if not pixels[sy, sx] or seen[sy, sx]:
                continue
            comp = set()
            queue = deque([(sy, sx)])
            seen[sy, sx] = True
            while queue:
                y, x = queue.popleft()
                comp.add((y, x))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and pixels[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            queue.append((ny, nx))
            comps.append(comp)
    return comps


def point_in_polygon(px: float, py: float, rings) -> bool:
    """Even-odd test counting edge crossings strictly right of the point.

    Edges are taken half-open in y (min inclusive, max exclusive), the
    same boundary convention as the package's scanline fill.
    """
    crossings = 0
    for ring in rings:
        n = len(ring)
        for i in range(n):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % n]
            if y1 == y2:
                continue
            lo, hi = (y1, y2) if y1 < y2 else (y2, y1)
            if lo <= py < hi:
                x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if x_cross > px:
                    crossings += 1
    return crossings % 2 == 1


def global_hist_eq(pixels: np.ndarray) -> np.ndarray:
    """Plain global histogram equalization of a uint8 image.

    lut = 255 * (cdf - cdf_min) / (n - cdf_min), cdf_min at the first
    occupied bin, identity when the denominator is not positive; output
    rounded half-even.
    """
    n = pixels.size
    counts = np.bincount(pixels.ravel(), minlength=256).tolist()
    cdf = []
    acc = 0.0
    for c in counts:
        acc += float(c)
        cdf.append(acc)
    first = next(i for i, c in enumerate(counts) if c > 0)
    cdf_min = cdf[first]
    denom = n - cdf_min
    if denom <= 0.0:
        lut = [float(i) for i in range(256)]
    else:
        lut = [255.0 * max(c - cdf_min, 0.0) / denom for c in cdf]
    out = np.empty_like(pixels)
    h, w = pixels.shape
    for y in range(h):
        for x in range(w):
            v = lut[pixels[y, x]]
            out[y, x] = min(255, max(0, int(np.rint(v))))
    return out


def clahe_slow(pixels: np.ndarray, tiles_x: int, tiles_y: int, clip_limit: float) -> np.ndarray:
    """Per-pixel loop implementation of the tile/clip/interpolate procedure."""
    h, w = pixels.shape
    xb = [i * w // tiles_x for i in range(tiles_x + 1)]
    yb = [i * h // tiles_y for i in range(tiles_y + 1)]

    def tile_lut(x0, x1, y0, y1):
        counts = [0] * 256
        for y in range(y0, y1):
            for x in range(x0, x1):
                counts[pixels[y, x]] += 1
        n = (x1 - x0) * (y1 - y0)
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
        for v in hist:
            acc += v
            cdf.append(acc)
        first = next(i for i, v in enumerate(hist) if v > 0.0)
        cdf_min = cdf[first]
        denom = n - cdf_min
        if denom <= 0.0:
            return [float(i) for i in range(256)]
        return [255.0 * max(c - cdf_min, 0.0) / denom for c in cdf]

    luts = [
        [tile_lut(xb[tx], xb[tx + 1], yb[ty], yb[ty + 1]) for tx in range(tiles_x)]
        for ty in range(tiles_y)
    ]
    cx = [(xb[i] + xb[i + 1] - 1) / 2.0 for i in range(tiles_x)]
    cy = [(yb[i] + yb[i + 1] - 1) / 2.0 for i in range(tiles_y)]

    def axis_pos(coord, centers):
        t = len(centers)
        if t == 1:
            return 0, 0, 0.0
        right = 0
        while right < t and centers[right] < coord:
            right += 1
        right = min(right, t - 1)
        left = max(right - 1, 0)
        span = centers[right] - centers[left]
        frac = (coord - centers[left]) / span if span > 0.0 else 0.0
        return left, right, min(1.0, max(0.0, frac))

    out = np.empty_like(pixels)
    for y in range(h):
        ty_l, ty_r, fy = axis_pos(float(y), cy)
        for x in range(w):
            tx_l, tx_r, fx = axis_pos(float(x), cx)
            v = pixels[y, x]
            l00 = luts[ty_l][tx_l][v]
            l01 = luts[ty_l][tx_r][v]
            l10 = luts[ty_r][tx_l][v]
            l11 = luts[ty_r][tx_r][v]
            blended = (1.0 - fy) * ((1.0 - fx) * l00 + fx * l01) + fy * (
                (1.0 - fx) * l10 + fx * l11
            )
            out[y, x] = min(255, max(0, int(np.rint(blended))))
    return out


def optimal_assignment_tp(iou_matrix: list[list[float]], thr: float) -> int:
    """Maximum number of one-to-one pairs with IoU >= thr, by exhaustive search."""
    n_pred = len(iou_matrix)
    n_gt = len(iou_matrix[0]) if n_pred else 0
    memo: dict[tuple[int, int], int] = {}

    def best(i: int, used: int) -> int:
        if i == n_pred:
            return 0
        key = (i, used)
        if key in memo:
            return memo[key]
        score = best(i + 1, used)
        for g in range(n_gt):
            if not used & (1 << g) and iou_matrix[i][g] >= thr:
                score = max(score, 1 + best(i + 1, used | (1 << g)))
        memo[key] = score
        return score

    return best(0, 0)


def reference_average_precision(scored_masks, gt_masks, thr: float) -> float:
    """AP recomputed from scratch: own IoU, own ranking, own integration.

    scored_masks: list of (score, pred_id, bool-array); gt_masks: list
    of (gt_id, bool-array).
    """

    def iou_of(a, b):
        inter = int(np.logical_and(a, b).sum())
        union = int(np.logical_or(a, b).sum())
        return inter / union if union else 0.0

    if not scored_masks or not gt_masks:
        return 0.0
    ranked = sorted(scored_masks, key=lambda t: (-t[0], t[1]))
    taken = set()
    hits = []
    for score, pid, mask in ranked:
        best_gid = None
        best_v = 0.0
        for gid, gmask in gt_masks:
            if gid in taken:
                continue
            v = iou_of(mask, gmask)
            if v >= thr and (v > best_v or (v == best_v and best_gid is not None and gid < best_gid)):
                best_gid, best_v = gid, v
        if best_gid is None:
            hits.append(0)
        else:
            taken.add(best_gid)
            hits.append(1)
    n_gt = len(gt_masks)
    points = []
    tp = 0
    for i, hit in enumerate(hits):
        tp += hit
        points.append((tp / n_gt, tp / (i + 1)))
    area = 0.0
    prev_recall = 0.0
    for i, (recall, _) in enumerate(points):
        if recall > prev_recall:
            best_p = max(p for r, p in points[i:])
            area += (recall - prev_recall) * best_p
            prev_recall = recall
    return area
