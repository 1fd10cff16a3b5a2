from semmap.bevgrid.grid import (
    UNKNOWN,
    GridSpec,
    SemanticGrid,
    apply_intensity_boost,
    cells_of,
    extract_label_map,
    fill_holes,
    grid_index,
    integrate_frame,
    maybe_shift_local_map,
    normalize,
    resample_to_anchor,
    update_cell,
)
from semmap.bevgrid.models import (
    EPS_FLOOR,
    IntensityModel,
    ObservationModel,
    confusion_model,
    vanilla_model,
)

__all__ = [
    "EPS_FLOOR",
    "UNKNOWN",
    "GridSpec",
    "IntensityModel",
    "ObservationModel",
    "SemanticGrid",
    "apply_intensity_boost",
    "cells_of",
    "confusion_model",
    "extract_label_map",
    "fill_holes",
    "grid_index",
    "integrate_frame",
    "maybe_shift_local_map",
    "normalize",
    "resample_to_anchor",
    "update_cell",
    "vanilla_model",
]
