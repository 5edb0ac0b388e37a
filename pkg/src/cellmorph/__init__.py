"""Per-cell morphometry from instance-segmentation masks."""

from .bench import StageTiming, TimingReport, time_pipeline
from .errors import (
    CellmorphError,
    DanglingImageRefError,
    EmptyCollectionError,
    EmptyRegionError,
    FormatError,
    FrameMismatchError,
    ImageTooSmallError,
    InvalidRectError,
    MissingScoresError,
    OutOfFrameError,
    OverlapError,
    ParseError,
    PlacementFailureError,
    UnsupportedSegmentationError,
)
from .evaluation import (
    EvalReport,
    MatchResult,
    average_precision,
    evaluate_sets,
    iou,
    match_instances,
    mean_average_precision,
    pixel_dice,
    precision_recall_f1,
)
from .geometry import (
    BinaryMask,
    CellProperties,
    CentralMoments,
    EquivalentEllipse,
    MorphometrySummary,
    RawMoments,
    ScaleConfig,
    analyze_instance,
    analyze_set,
    central_moments,
    equivalent_ellipse,
    perimeter,
    raw_moments,
    summarize,
)
from .ingest import (
    Instance,
    InstanceSet,
    connected_components,
    load_coco,
    load_label_map,
    write_label_map,
)
from .preprocess import (
    ClaheParams,
    GrayImage,
    augment,
    clahe,
    load_gray_image,
    save_gray_image,
)
from .synth import EllipseParams, SyntheticScene, generate_scene, rasterize_ellipse

__version__ = "0.1.0"
