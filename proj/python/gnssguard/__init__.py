"""Python bindings for the gnssguard detection core."""

import json as _json

from ._gnssguard import (
    EARTH_RADIUS_M,
    GnssGuardError,
    check_shift,
    classify_turn,
    compute_error_threshold,
    dtw_exact,
    fastdtw,
    haversine_distance,
    synthesize_trajectory,
    synthesize_turn_curve,
)
from ._gnssguard import detect_file as _detect_file


def detect_file(input_csv, model_path, templates_path):
    """Run all three strategies over a trajectory CSV; returns a dict."""
    return _json.loads(_detect_file(str(input_csv), str(model_path), str(templates_path)))


__all__ = [
    "EARTH_RADIUS_M",
    "GnssGuardError",
    "check_shift",
    "classify_turn",
    "compute_error_threshold",
    "detect_file",
    "dtw_exact",
    "fastdtw",
    "haversine_distance",
    "synthesize_trajectory",
    "synthesize_turn_curve",
]
