"""Sharpness-continuous steering paths for vehicles with limited steering actuators."""
from .curvature_profile import (
    DEFAULT_STEP,
    CubicCurvatureSegment,
    SampledPath,
    SteeringLimitError,
    Transition,
    VehicleLimits,
    build_transition,
    solve_cubic_coefficients,
)
from .dubins import DubinsPath, plan_dubins
from .geometry import Configuration, Handedness, OmegaCircle, Travel, circle_tangent_configs
from .precompute import NotInSetError, SegmentCache, build_cache, curvature_set, lookup_segment
from .sc_planner import NoPathError, SCPath, ValidationReport, plan_sc_path, validate_path
from .sc_turn import SCTurn, build_sc_turn
from .vehicle_sim import (
    ActuatorState,
    ConfigError,
    ControllerConfig,
    Scenario,
    SimConfig,
    cc_reference_profile,
    load_config,
    sc_reference_profile,
    simulate_tracking,
)

import types as _types

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, _types.ModuleType)]
__version__ = "0.1.0"
