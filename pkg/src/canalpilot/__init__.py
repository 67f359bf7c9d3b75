"""canalpilot: geometric shared autonomy over canal surfaces.

Encode a task from two demonstrations as a tube of disks, replay it
autonomously, and let a human nudge the motion with a 2D stick whose axes
are re-aligned to every disk.
"""

__version__ = "0.1.0"

from .canal import Canal, EndAlignment, adjacent_intersects, align_end, build_canal, classify_end, compute_axes
from .config import Config, load_config, save_config
from .controller import ControllerState, InputFrameEvent, Mode, initial_state, next_nominal_point, step
from .demo_pipeline import AlignedPair, Demonstration, dtw_align, preprocess, resample_uniform, spline_smooth
from .input_mapping import DiskClass, MappedCorrection, UserFrame, classify_disk, correction_velocity, map_input
from .simulation import RunMetrics, Scenario, WorldObject, run_scenario, score_laundry

__all__ = [
    "AlignedPair", "Canal", "Config", "ControllerState", "Demonstration",
    "DiskClass", "EndAlignment", "InputFrameEvent", "MappedCorrection",
    "Mode", "RunMetrics", "Scenario", "UserFrame", "WorldObject",
    "adjacent_intersects", "align_end", "build_canal", "classify_disk",
    "classify_end", "compute_axes", "correction_velocity", "dtw_align",
    "initial_state", "load_config", "map_input", "next_nominal_point",
    "preprocess", "resample_uniform", "run_scenario", "save_config",
    "score_laundry", "spline_smooth", "step",
]
