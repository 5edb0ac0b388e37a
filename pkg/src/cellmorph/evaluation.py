"""Instance-segmentation accuracy: matching, precision/recall/F1, AP.

Matching is greedy one-to-one in descending IoU order with ties broken
by ascending (pred_id, gt_id). F1 is the harmonic mean of precision and
recall, computed in the algebraically equal integer form
2*TP / (2*TP + FP + FN) so hand-checkable cases come out exact. AP uses
ranked greedy matching and all-point interpolation of the precision
envelope; the headline AP averages thresholds 0.50 to 0.95 in steps of
0.05. Pixel-level Dice over the pooled foregrounds is reported as an
auxiliary score alongside the instance-level numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameMismatchError, MissingScoresError
from .geometry import BinaryMask
from .ingest import InstanceSet

AP_SWEEP = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class MatchResult:
    """One-to-one matching outcome at a fixed IoU threshold.

    ``pairs`` holds (pred_id, gt_id, iou) for every match; tp is the
    number of pairs, fp the unmatched predictions, fn the unmatched
    ground truths.
    """

    tp: int
    fp: int
    fn: int
    pairs: tuple[tuple[int, int, float], ...]
    iou_threshold: float


@dataclass(frozen=True)
class EvalReport:
    """Accuracy summary for one prediction/ground-truth pair of sets.

    ap/ap50/ap75 are None when any prediction lacks a confidence score.
    """

    n_pred: int
    n_gt: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    dice: float
    ap: float | None = None
    ap50: float | None = None
    ap75: float | None = None


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union of two masks; empty union gives 0."""
    if a.width != b.width or a.height != b.height:
        raise FrameMismatchError(
            f"mask frames differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    inter = int(np.logical_and(a.pixels, b.pixels).sum())
    union = int(np.logical_or(a.pixels, b.pixels).sum())
    return inter / union if union else 0.0


def _check_frames(pred: InstanceSet, gt: InstanceSet) -> None:
    if pred.frame_width != gt.frame_width or pred.frame_height != gt.frame_height:
        raise FrameMismatchError(
            f"prediction frame {pred.frame_width}x{pred.frame_height} does not match "
            f"ground truth {gt.frame_width}x{gt.frame_height}"
        )


def _iou_table(pred: InstanceSet, gt: InstanceSet) -> dict[tuple[int, int], float]:
    table = {}
    for p in pred.instances:
        for g in gt.instances:
            v = iou(p.mask, g.mask)
            if v > 0.0:
                table[(p.instance_id, g.instance_id)] = v
    return table


def match_instances(pred: InstanceSet, gt: InstanceSet, thr: float = 0.5) -> MatchResult:
    """Greedy one-to-one matching of predictions to ground truths.

    Candidate pairs with IoU >= thr are taken in descending IoU order,
    ties resolved by ascending (pred_id, gt_id); each instance matches
    at most once.
    """
    if not (0.0 < thr < 1.0):
        raise ValueError(f"iou threshold must lie in (0, 1), got {thr}")
    _check_frames(pred, gt)
    table = _iou_table(pred, gt)
    candidates = sorted(
        ((pid, gid, v) for (pid, gid), v in table.items() if v >= thr),
        key=lambda t: (-t[2], t[0], t[1]),
    )
    used_p, used_g = set(), set()
    pairs = []
    for pid, gid, v in candidates:
        if pid in used_p or gid in used_g:
            continue
        used_p.add(pid)
        used_g.add(gid)
        pairs.append((pid, gid, v))
    tp = len(pairs)
    return MatchResult(
        tp=tp,
        fp=len(pred) - tp,
        fn=len(gt) - tp,
        pairs=tuple(pairs),
        iou_threshold=thr,
    )


def precision_recall_f1(m: MatchResult) -> tuple[float, float, float]:
    """Precision, recall and their harmonic mean; all-zero counts give 0s."""
    precision = m.tp / (m.tp + m.fp) if m.tp + m.fp else 0.0
    recall = m.tp / (m.tp + m.fn) if m.tp + m.fn else 0.0
    f1 = 2 * m.tp / (2 * m.tp + m.fp + m.fn) if 2 * m.tp + m.fp + m.fn else 0.0
    return precision, recall, f1


def _ranked_flags(pred: InstanceSet, gt: InstanceSet, thr: float) -> list[bool]:
    """Hit/miss flag per prediction in descending-score order.

    Each prediction greedily takes the unmatched ground truth with the
    highest IoU >= thr (ties to the lowest gt_id).
    """
    table = _iou_table(pred, gt)
    order = sorted(pred.instances, key=lambda i: (-i.score, i.instance_id))
    taken = set()
    flags = []
    for p in order:
        best_gid, best_v = None, 0.0
        for g in gt.instances:
            if g.instance_id in taken:
                continue
            v = table.get((p.instance_id, g.instance_id), 0.0)
            if v >= thr and (v > best_v or (v == best_v and best_gid is not None and g.instance_id < best_gid)):
                best_gid, best_v = g.instance_id, v
        if best_gid is None:
            flags.append(False)
        else:
            taken.add(best_gid)
            flags.append(True)
    return flags


def average_precision(pred: InstanceSet, gt: InstanceSet, thr: float = 0.5) -> float:
    """All-point-interpolated AP at one IoU threshold.

    Area under the precision envelope as a function of recall, with
    predictions ranked by descending score. No predictions or no
    ground truths gives 0.
    """
    if not (0.0 < thr < 1.0):
        raise ValueError(f"iou threshold must lie in (0, 1), got {thr}")
    _check_frames(pred, gt)
    missing = [p.instance_id for p in pred.instances if p.score is None]
    if missing:
        raise MissingScoresError(f"predictions without scores: {missing}")
    if not pred.instances or not gt.instances:
        return 0.0
    flags = _ranked_flags(pred, gt, thr)
    n_gt = len(gt)
    cum_tp = 0
    precision, recall = [], []
    for i, hit in enumerate(flags):
        cum_tp += int(hit)
        precision.append(cum_tp / (i + 1))
        recall.append(cum_tp / n_gt)
    envelope = list(precision)
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    ap = 0.0
    prev_r = 0.0
    for r, p in zip(recall, envelope):
        ap += (r - prev_r) * p
        prev_r = r
    return ap


def mean_average_precision(pred: InstanceSet, gt: InstanceSet) -> float:
    """AP averaged over IoU thresholds 0.50, 0.55, ..., 0.95."""
    return sum(average_precision(pred, gt, t) for t in AP_SWEEP) / len(AP_SWEEP)


def pixel_dice(pred: InstanceSet, gt: InstanceSet) -> float:
    """Dice coefficient of the pooled foregrounds; empty-vs-empty gives 0.

    The 0 convention matches the all-zero F1 case so both scores agree
    on degenerate inputs.
    """
    _check_frames(pred, gt)
    shape = (gt.frame_height, gt.frame_width)
    p_any = np.zeros(shape, dtype=bool)
    g_any = np.zeros(shape, dtype=bool)
    for p in pred.instances:
        p_any |= p.mask.pixels
    for g in gt.instances:
        g_any |= g.mask.pixels
    denom = int(p_any.sum()) + int(g_any.sum())
    if denom == 0:
        return 0.0
    return 2 * int(np.logical_and(p_any, g_any).sum()) / denom


def evaluate_sets(pred: InstanceSet, gt: InstanceSet, thr: float = 0.5) -> EvalReport:
    """Full accuracy report for one frame.

    AP fields are filled only when every prediction carries a score.
    """
    m = match_instances(pred, gt, thr)
    precision, recall, f1 = precision_recall_f1(m)
    dice = pixel_dice(pred, gt)
    ap = ap50 = ap75 = None
    if all(p.score is not None for p in pred.instances):
        ap = mean_average_precision(pred, gt)
        ap50 = average_precision(pred, gt, 0.5)
        ap75 = average_precision(pred, gt, 0.75)
    return EvalReport(
        n_pred=len(pred),
        n_gt=len(gt),
        tp=m.tp,
        fp=m.fp,
        fn=m.fn,
        precision=precision,
        recall=recall,
        f1=f1,
        dice=dice,
        ap=ap,
        ap50=ap50,
        ap75=ap75,
    )
