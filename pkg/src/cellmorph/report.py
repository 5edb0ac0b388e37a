"""Stable CSV/JSON rendering of results.

Output is byte-deterministic: floats are rendered with repr (shortest
round-trip form), JSON keys are sorted, and CSV rows use "\n" line
endings. Rates are rendered as percentages with two decimals in the
evaluation tables.
"""

from __future__ import annotations

import csv
import io
import json

from .bench import TimingReport
from .evaluation import EvalReport
from .geometry import CellProperties, MorphometrySummary
from .synth import EllipseParams

CELL_CSV_COLUMNS = (
    "id",
    "area_px",
    "area_um2",
    "length_um",
    "width_um",
    "perimeter_um",
    "degenerate_flag",
)

EVAL_CSV_COLUMNS = (
    "image_id",
    "n_pred",
    "n_gt",
    "tp",
    "fp",
    "fn",
    "precision_pct",
    "recall_pct",
    "f1_pct",
    "dice_pct",
    "ap_pct",
    "ap50_pct",
    "ap75_pct",
)

TRUTH_CSV_COLUMNS = ("id", "center_x", "center_y", "a", "b", "orientation")


def _pct(value: float | None) -> str:
    return "" if value is None else f"{100.0 * value:.2f}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cells_to_csv(props: list[CellProperties]) -> str:
    rows = [
        (
            p.instance_id,
            p.area_px,
            repr(p.area_um2),
            repr(p.length_um),
            repr(p.width_um),
            repr(p.perimeter_um),
            int(p.degenerate),
        )
        for p in props
    ]
    return _csv_text(CELL_CSV_COLUMNS, rows)


def summary_to_json(summary: MorphometrySummary | None) -> str:
    """Cell count plus mean/std per attribute; None means zero cells."""
    if summary is None:
        doc = {"count": 0}
    else:
        doc = {
            "count": summary.count,
            "area_um2": {"mean": summary.area_um2.mean, "std": summary.area_um2.std},
            "length_um": {"mean": summary.length_um.mean, "std": summary.length_um.std},
            "width_um": {"mean": summary.width_um.mean, "std": summary.width_um.std},
            "perimeter_um": {
                "mean": summary.perimeter_um.mean,
                "std": summary.perimeter_um.std,
            },
        }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def eval_rows_to_csv(rows: list[tuple[str, EvalReport]]) -> str:
    out = []
    for image_id, r in rows:
        out.append(
            (
                image_id,
                r.n_pred,
                r.n_gt,
                r.tp,
                r.fp,
                r.fn,
                _pct(r.precision),
                _pct(r.recall),
                _pct(r.f1),
                _pct(r.dice),
                _pct(r.ap),
                _pct(r.ap50),
                _pct(r.ap75),
            )
        )
    return _csv_text(EVAL_CSV_COLUMNS, out)


def _report_dict(r: EvalReport) -> dict:
    doc = {
        "n_pred": r.n_pred,
        "n_gt": r.n_gt,
        "tp": r.tp,
        "fp": r.fp,
        "fn": r.fn,
        "precision_pct": _pct(r.precision),
        "recall_pct": _pct(r.recall),
        "f1_pct": _pct(r.f1),
        "dice_pct": _pct(r.dice),
    }
    if r.ap is not None:
        doc["ap_pct"] = _pct(r.ap)
        doc["ap50_pct"] = _pct(r.ap50)
        doc["ap75_pct"] = _pct(r.ap75)
    return doc


def eval_to_json(
    per_image: list[tuple[str, EvalReport]],
    overall: dict,
    skipped: list[dict],
) -> str:
    doc = {
        "per_image": [{"image_id": iid, **_report_dict(r)} for iid, r in per_image],
        "overall": overall,
        "skipped": skipped,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def truth_to_csv(params: list[EllipseParams]) -> str:
    rows = [
        (
            p.instance_id,
            repr(p.center_x),
            repr(p.center_y),
            repr(p.a),
            repr(p.b),
            repr(p.orientation),
        )
        for p in params
    ]
    return _csv_text(TRUTH_CSV_COLUMNS, rows)


def timing_to_dict(report: TimingReport) -> dict:
    return {
        "label": report.label,
        "runs": report.runs,
        "parallel": report.parallel,
        "mean_seconds": report.mean_seconds,
        "std_seconds": report.std_seconds,
        "stages": {
            name: {"mean_seconds": st.mean_seconds, "std_seconds": st.std_seconds}
            for name, st in report.stages.items()
        },
    }


def timing_to_json(reports: dict[str, TimingReport]) -> str:
    doc = {mode: timing_to_dict(r) for mode, r in reports.items()}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
