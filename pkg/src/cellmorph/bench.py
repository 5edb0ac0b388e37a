"""Wall-clock timing of the analyze pipeline, staged and repeatable.

Times the label-map -> per-cell-properties -> summary path with a
monotonic clock, one discarded warm-up run, and a digest check that the
computed values are identical across repetitions. Only the post-
segmentation geometry path is measured; the report label should make
that explicit when numbers are compared against full segmentation
pipelines that include model inference.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .errors import CellmorphError
from .geometry import CellProperties, MorphometrySummary, ScaleConfig, analyze_set, summarize
from .ingest import load_label_map

STAGES = ("ingest", "geometry", "summarize")


@dataclass(frozen=True)
class StageTiming:
    mean_seconds: float
    std_seconds: float


@dataclass(frozen=True)
class TimingReport:
    """Mean and sample std of wall time over the recorded repetitions."""

    label: str
    runs: int
    parallel: bool
    mean_seconds: float
    std_seconds: float
    stages: dict[str, StageTiming]


def _digest(props: list[CellProperties], summary: MorphometrySummary | None) -> str:
    payload = "\n".join(repr(p) for p in props) + "\n" + repr(summary)
    return hashlib.sha256(payload.encode()).hexdigest()


def time_pipeline(
    label_map_path,
    scale: ScaleConfig,
    repetitions: int,
    parallel: bool = False,
    threads: int | None = None,
    label: str = "geometry-path",
) -> TimingReport:
    """Run the analyze pipeline repeatedly and report per-stage timings.

    repetitions must be >= 3 so the spread is meaningful; one extra
    warm-up run is executed first and discarded. Raises CellmorphError
    if any repetition produces different values (the pipeline must be
    deterministic under timing).
    """
    if repetitions < 3:
        raise ValueError(f"repetitions must be >= 3, got {repetitions}")
    workers = threads if threads is not None else (4 if parallel else None)

    def one_run():
        t0 = time.perf_counter()
        iset = load_label_map(label_map_path)
        t1 = time.perf_counter()
        pairs = [(inst.instance_id, inst.mask) for inst in iset.instances]
        props = analyze_set(pairs, scale, threads=workers if parallel else None)
        t2 = time.perf_counter()
        summary = summarize(props) if props else None
        t3 = time.perf_counter()
        return (t1 - t0, t2 - t1, t3 - t2), _digest(props, summary)

    _, baseline = one_run()  # warm-up, timing discarded
    times = np.empty((repetitions, len(STAGES)), dtype=np.float64)
    for rep in range(repetitions):
        stage_times, digest = one_run()
        if digest != baseline:
            raise CellmorphError("pipeline outputs differed between benchmark repetitions")
        times[rep] = stage_times
    totals = times.sum(axis=1)
    stages = {
        name: StageTiming(
            mean_seconds=float(times[:, i].mean()),
            std_seconds=float(times[:, i].std(ddof=1)),
        )
        for i, name in enumerate(STAGES)
    }
    return TimingReport(
        label=label,
        runs=repetitions,
        parallel=parallel,
        mean_seconds=float(totals.mean()),
        std_seconds=float(totals.std(ddof=1)),
        stages=stages,
    )
