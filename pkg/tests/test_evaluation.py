import numpy as np
import pytest

from cellmorph.errors import FrameMismatchError, MissingScoresError
from cellmorph.evaluation import (
    MatchResult,
    average_precision,
    evaluate_sets,
    iou,
    match_instances,
    mean_average_precision,
    pixel_dice,
    precision_recall_f1,
)
from cellmorph.geometry import BinaryMask
from cellmorph.ingest import Instance, InstanceSet

from reference import optimal_assignment_tp, reference_average_precision


def rect_mask(h, w, y0, x0, dy, dx):
    px = np.zeros((h, w), dtype=bool)
    px[y0 : y0 + dy, x0 : x0 + dx] = True
    return BinaryMask(px)


def iset(frame, *instances):
    return InstanceSet(frame[0], frame[1], tuple(instances))


FRAME = (40, 40)


class TestIou:
    def test_identical_and_disjoint(self):
        a = rect_mask(40, 40, 5, 5, 10, 10)
        b = rect_mask(40, 40, 25, 25, 5, 5)
        assert iou(a, a) == 1.0
        assert iou(a, b) == 0.0

    def test_half_shifted_square(self):
        a = rect_mask(40, 40, 10, 10, 10, 10)
        b = rect_mask(40, 40, 10, 15, 10, 10)
        assert iou(a, b) == pytest.approx(50 / 150)

    def test_symmetry(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            a = BinaryMask(rng.random((12, 12)) < 0.4)
            b = BinaryMask(rng.random((12, 12)) < 0.4)
            assert iou(a, b) == iou(b, a)

    def test_frame_mismatch(self):
        with pytest.raises(FrameMismatchError):
            iou(rect_mask(10, 10, 0, 0, 2, 2), rect_mask(10, 11, 0, 0, 2, 2))


class TestMatching:
    def test_perfect_match(self):
        instances = tuple(
            Instance(i + 1, rect_mask(40, 40, 2 + 12 * i, 3, 8, 8)) for i in range(3)
        )
        s = iset(FRAME, *instances)
        m = match_instances(s, s, 0.5)
        assert (m.tp, m.fp, m.fn) == (3, 0, 0)
        assert all(pid == gid for pid, gid, _ in m.pairs)

    def test_two_hits_one_extra(self):
        gt = iset(
            FRAME,
            Instance(1, rect_mask(40, 40, 2, 2, 8, 8)),
            Instance(2, rect_mask(40, 40, 20, 20, 8, 8)),
        )
        pred = iset(
            FRAME,
            Instance(1, rect_mask(40, 40, 2, 2, 8, 8)),
            Instance(2, rect_mask(40, 40, 20, 20, 8, 8)),
            Instance(3, rect_mask(40, 40, 31, 2, 6, 6)),
        )
        m = match_instances(pred, gt, 0.5)
        assert (m.tp, m.fp, m.fn) == (2, 1, 0)

    def test_count_conservation(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            gt_instances = []
            pred_instances = []
            for i in range(int(rng.integers(0, 5))):
                y, x = int(rng.integers(0, 30)), int(rng.integers(0, 30))
                gt_instances.append(Instance(i + 1, rect_mask(40, 40, y, x, 6, 6)))
            for i in range(int(rng.integers(0, 5))):
                y, x = int(rng.integers(0, 30)), int(rng.integers(0, 30))
                pred_instances.append(Instance(i + 1, rect_mask(40, 40, y, x, 6, 6)))
            m = match_instances(iset(FRAME, *pred_instances), iset(FRAME, *gt_instances), 0.5)
            assert m.tp + m.fp == len(pred_instances)
            assert m.tp + m.fn == len(gt_instances)
            assert all(v >= 0.5 for _, _, v in m.pairs)

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(53)
        gt_instances = [
            Instance(i + 1, rect_mask(40, 40, int(rng.integers(0, 30)), int(rng.integers(0, 30)), 7, 7))
            for i in range(4)
        ]
        pred_instances = [
            Instance(i + 1, rect_mask(40, 40, int(rng.integers(0, 30)), int(rng.integers(0, 30)), 7, 7))
            for i in range(4)
        ]
        pred, gt = iset(FRAME, *pred_instances), iset(FRAME, *gt_instances)
        tps = [match_instances(pred, gt, t).tp for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert tps == sorted(tps, reverse=True)

    def test_tie_break_is_deterministic(self):
        # two identical predictions over one gt: lower pred id wins
        gt = iset(FRAME, Instance(1, rect_mask(40, 40, 5, 5, 8, 8)))
        pred = iset(
            FRAME,
            Instance(2, rect_mask(40, 40, 5, 5, 8, 8)),
            Instance(1, rect_mask(40, 40, 5, 5, 8, 8)),
        )
        m = match_instances(pred, gt, 0.5)
        assert m.pairs == ((1, 1, 1.0),)

    def test_greedy_equals_exhaustive_on_seeded_scenes(self):
        rng = np.random.default_rng(54)
        agreements = 0
        for _ in range(30):
            n = int(rng.integers(1, 6))
            gt_instances = []
            pred_instances = []
            for i in range(n):
                y, x = int(rng.integers(0, 28)), int(rng.integers(0, 28))
                gt_instances.append(Instance(i + 1, rect_mask(40, 40, y, x, 8, 8)))
                jy, jx = y + int(rng.integers(-2, 3)), x + int(rng.integers(-2, 3))
                jy, jx = max(0, min(30, jy)), max(0, min(30, jx))
                pred_instances.append(Instance(i + 1, rect_mask(40, 40, jy, jx, 8, 8)))
            pred, gt = iset(FRAME, *pred_instances), iset(FRAME, *gt_instances)
            matrix = [
                [iou(p.mask, g.mask) for g in gt_instances] for p in pred_instances
            ]
            flat = [v for row in matrix for v in row if v > 0]
            distinct = len(flat) == len(set(flat))
            overlaps_per_pred = [sum(v >= 0.5 for v in row) for row in matrix]
            if distinct and all(c <= 1 for c in overlaps_per_pred):
                got = match_instances(pred, gt, 0.5).tp
                want = optimal_assignment_tp(matrix, 0.5)
                assert got == want
                agreements += 1
        assert agreements >= 10

    def test_bad_threshold_rejected(self):
        s = iset(FRAME, Instance(1, rect_mask(40, 40, 5, 5, 8, 8)))
        for thr in (0.0, 1.0, -0.3):
            with pytest.raises(ValueError):
                match_instances(s, s, thr)


class TestPrf:
    def test_hand_cases(self):
        two_thirds = MatchResult(tp=2, fp=1, fn=1, pairs=(), iou_threshold=0.5)
        assert precision_recall_f1(two_thirds) == (2 / 3, 2 / 3, 2 / 3)
        perfect = MatchResult(tp=5, fp=0, fn=0, pairs=(), iou_threshold=0.5)
        assert precision_recall_f1(perfect) == (1.0, 1.0, 1.0)
        nothing = MatchResult(tp=0, fp=0, fn=0, pairs=(), iou_threshold=0.5)
        assert precision_recall_f1(nothing) == (0.0, 0.0, 0.0)
        misses = MatchResult(tp=0, fp=0, fn=5, pairs=(), iou_threshold=0.5)
        assert precision_recall_f1(misses) == (0.0, 0.0, 0.0)

    def test_f1_between_precision_and_recall(self):
        rng = np.random.default_rng(55)
        for _ in range(50):
            tp, fp, fn = (int(v) for v in rng.integers(0, 20, size=3))
            p, r, f1 = precision_recall_f1(MatchResult(tp, fp, fn, (), 0.5))
            if p > 0 and r > 0:
                assert min(p, r) <= f1 <= max(p, r)


def scored_scene():
    gt = iset(
        FRAME,
        Instance(1, rect_mask(40, 40, 2, 2, 10, 10)),
        Instance(2, rect_mask(40, 40, 20, 20, 10, 10)),
    )
    pred = iset(
        FRAME,
        Instance(1, rect_mask(40, 40, 2, 2, 10, 10), score=0.9),
        Instance(2, rect_mask(40, 40, 2, 28, 6, 6), score=0.8),
        Instance(3, rect_mask(40, 40, 20, 20, 10, 10), score=0.7),
    )
    return pred, gt


class TestAveragePrecision:
    def test_hand_walked_example(self):
        pred, gt = scored_scene()
        ap = average_precision(pred, gt, 0.5)
        assert abs(ap - 5 / 6) <= 1e-12

    def test_matches_reference_evaluator(self):
        pred, gt = scored_scene()
        scored = [(p.score, p.instance_id, p.mask.pixels) for p in pred.instances]
        gts = [(g.instance_id, g.mask.pixels) for g in gt.instances]
        assert average_precision(pred, gt, 0.5) == pytest.approx(
            reference_average_precision(scored, gts, 0.5), abs=1e-15
        )

    def test_perfect_ranking_gives_one(self):
        gt = iset(
            FRAME,
            Instance(1, rect_mask(40, 40, 2, 2, 10, 10)),
            Instance(2, rect_mask(40, 40, 20, 20, 10, 10)),
        )
        pred = iset(
            FRAME,
            Instance(1, rect_mask(40, 40, 2, 2, 10, 10), score=0.9),
            Instance(2, rect_mask(40, 40, 20, 20, 10, 10), score=0.8),
        )
        assert average_precision(pred, gt, 0.5) == 1.0
        assert mean_average_precision(pred, gt) == 1.0

    def test_empty_cases(self):
        gt = iset(FRAME, Instance(1, rect_mask(40, 40, 2, 2, 10, 10)))
        empty = iset(FRAME)
        assert average_precision(empty, gt, 0.5) == 0.0
        assert average_precision(empty, empty, 0.5) == 0.0

    def test_missing_scores_rejected(self):
        gt = iset(FRAME, Instance(1, rect_mask(40, 40, 2, 2, 10, 10)))
        pred = iset(FRAME, Instance(1, rect_mask(40, 40, 2, 2, 10, 10)))
        with pytest.raises(MissingScoresError):
            average_precision(pred, gt, 0.5)

    def test_score_order_invariance(self):
        pred, gt = scored_scene()
        squeezed = iset(
            FRAME,
            *(
                Instance(p.instance_id, p.mask, score=p.score * 0.5 + 0.01)
                for p in pred.instances
            ),
        )
        assert average_precision(squeezed, gt, 0.5) == average_precision(pred, gt, 0.5)

    def test_random_scenes_match_reference(self):
        rng = np.random.default_rng(56)
        for _ in range(15):
            n_gt = int(rng.integers(1, 5))
            n_pred = int(rng.integers(1, 6))
            gt_instances = [
                Instance(i + 1, rect_mask(40, 40, int(rng.integers(0, 30)), int(rng.integers(0, 30)), 8, 8))
                for i in range(n_gt)
            ]
            pred_instances = [
                Instance(
                    i + 1,
                    rect_mask(40, 40, int(rng.integers(0, 30)), int(rng.integers(0, 30)), 8, 8),
                    score=round(float(rng.random()), 3),
                )
                for i in range(n_pred)
            ]
            pred, gt = iset(FRAME, *pred_instances), iset(FRAME, *gt_instances)
            scored = [(p.score, p.instance_id, p.mask.pixels) for p in pred_instances]
            gts = [(g.instance_id, g.mask.pixels) for g in gt_instances]
            for thr in (0.3, 0.5, 0.75):
                assert average_precision(pred, gt, thr) == pytest.approx(
                    reference_average_precision(scored, gts, thr), abs=1e-15
                )


class TestDiceAndReport:
    def test_dice_conventions(self):
        a = iset(FRAME, Instance(1, rect_mask(40, 40, 5, 5, 10, 10)))
        b = iset(FRAME, Instance(9, rect_mask(40, 40, 5, 5, 10, 10)))
        disjoint = iset(FRAME, Instance(1, rect_mask(40, 40, 25, 25, 5, 5)))
        empty = iset(FRAME)
        assert pixel_dice(a, b) == 1.0
        assert pixel_dice(a, disjoint) == 0.0
        assert pixel_dice(empty, empty) == 0.0

    def test_report_with_and_without_scores(self):
        pred, gt = scored_scene()
        r = evaluate_sets(pred, gt, 0.5)
        assert (r.tp, r.fp, r.fn) == (2, 1, 0)
        assert r.precision == 2 / 3
        assert r.recall == 1.0
        assert r.ap is not None and r.ap50 is not None and r.ap75 is not None
        unscored = iset(FRAME, *(Instance(p.instance_id, p.mask) for p in pred.instances))
        r2 = evaluate_sets(unscored, gt, 0.5)
        assert r2.ap is None and r2.ap50 is None and r2.ap75 is None
        assert r2.f1 == r.f1
