"""Route planning and simulation for multi-head precision weeding tools."""

from .assignment import AxisTargets, assign_static
from .errors import (
    AlreadyPassedError,
    ConfigError,
    DomainError,
    FieldFileError,
    FieldValidationError,
    KinematicViolationError,
    OrderingError,
    RowplanError,
    WindowOverflowError,
)
from .field import FieldModel, FieldSpec, Plant, SpeciesSpec, generate_field, load_field, reach_probability, save_field
from .kinematics import Displacement, ToolConfig, displacement, entry_time
from .planner import (
    HarmfulnessContext,
    Plan,
    PlannerConfig,
    RollingPlanner,
    TrajectoryCandidate,
    best_trajectory,
    build_graph,
    enumerate_notsp,
    favorability,
    feasibility,
    harmfulness,
    harmfulness_map,
    plan_field,
    plan_rolling_update,
    plan_rolling_view,
    plan_segment_view,
    score_trajectory,
    select_trajectory,
)
from .simulator import RunMetrics, SimConfig, aggregate_metrics, classify_hit, simulate_run

__version__ = "0.1.0"
