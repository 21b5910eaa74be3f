"""Event-camera falling-object counting with closed-loop feeder control.

The heavy lifting lives in the C++ extension ``evcount._core``; this package
re-exports its public surface.
"""

from evcount._core import (  # noqa: F401
    ActivityFilterParams,
    BinaryFrame,
    BoundingBox,
    Event,
    EventStream,
    PidController,
    Polarity,
    SensorGeometry,
    StreamError,
    Tracker,
    __version__,
    accumulate,
    activity_filter,
    box_center_y,
    compute_error,
    count_file,
    count_stream,
    detect,
    generate_recording,
    iou,
    iou_ratio,
    polarity_filter,
    read_events,
    run_closed_loop,
    run_fixed_count,
    to_actuation,
    write_events,
)

__all__ = [
    "ActivityFilterParams",
    "BinaryFrame",
    "BoundingBox",
    "Event",
    "EventStream",
    "PidController",
    "Polarity",
    "SensorGeometry",
    "StreamError",
    "Tracker",
    "__version__",
    "accumulate",
    "activity_filter",
    "box_center_y",
    "compute_error",
    "count_file",
    "count_stream",
    "detect",
    "generate_recording",
    "iou",
    "iou_ratio",
    "polarity_filter",
    "read_events",
    "run_closed_loop",
    "run_fixed_count",
    "to_actuation",
    "write_events",
]
