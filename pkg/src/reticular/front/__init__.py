"""Float tracing, crossing detection and rendering of generating-family fronts."""
from .events import ANGLE_TOL, Crossing, EventReport, intersection_events, segment_crossings
from .trace import (
    DEFAULT_BOX,
    DEFAULT_GRID,
    TOL_BISECT,
    TOL_BOX,
    TOL_CLOSED,
    FrontBranch,
    FrontError,
    FrontFrame,
    FrontPoint,
    NumPoly,
    Plan,
    Step,
    default_grid,
    plan_stratum,
    sweep,
    t_values,
    trace_component,
    trace_frame,
    trace_stratum,
)
from .render import Style, csv_header, filmstrip_svg, frame_svg, render, stratum_name, view_bounds, write_csv
