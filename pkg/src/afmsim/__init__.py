"""Frame-exact simulation of decentralized clock synchronization.

A network of nodes exchanges fixed-size frames over latency links into
elastic buffers, each node timing its sends off a local clock whose
frequency a decentralized controller nudges using only that node's buffer
occupancies. The package computes exact trajectories and frame counts, and
ships a brute-force frame-level replay as an independent cross-check.
"""

from .config import (
    ConfigError,
    RunSettings,
    ScenarioConfig,
    load_config,
    load_config_file,
    run_config,
    write_config,
)
from .controllers import (
    AdmissibilityCheck,
    Controller,
    ControllerSpec,
    is_admissible,
    make_controllers,
)
from .engine import (
    FatalEvent,
    SampleRecord,
    SystemState,
    Trace,
    buffer_occupancy,
    compute_lambdas,
    frames_received,
    frames_sent,
    init_state,
    link_occupancy,
    measure,
    simulate,
    step,
)
from .oracle import (
    FrameEvent,
    Mismatch,
    OccupancyTrack,
    ReplayResult,
    VerifyReport,
    compare,
    integer_crossings,
    replay,
    verify_scenario,
)
from .topology import (
    Link,
    Scenario,
    SystemParams,
    Topology,
    ValidationError,
    Violation,
    check,
    validate,
)
from .traceio import (
    Summary,
    emit_plot_script,
    format_summary,
    read_trace,
    summarize,
    write_trace,
)
from .trajectory import AdmissibilityError, ClockTrajectory, DomainError

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityCheck",
    "AdmissibilityError",
    "ClockTrajectory",
    "ConfigError",
    "Controller",
    "ControllerSpec",
    "DomainError",
    "FatalEvent",
    "FrameEvent",
    "Link",
    "Mismatch",
    "OccupancyTrack",
    "ReplayResult",
    "RunSettings",
    "SampleRecord",
    "Scenario",
    "ScenarioConfig",
    "Summary",
    "SystemParams",
    "SystemState",
    "Topology",
    "Trace",
    "ValidationError",
    "VerifyReport",
    "Violation",
    "buffer_occupancy",
    "check",
    "compare",
    "compute_lambdas",
    "emit_plot_script",
    "format_summary",
    "frames_received",
    "frames_sent",
    "init_state",
    "integer_crossings",
    "is_admissible",
    "link_occupancy",
    "load_config",
    "load_config_file",
    "make_controllers",
    "measure",
    "read_trace",
    "replay",
    "run_config",
    "simulate",
    "step",
    "summarize",
    "validate",
    "verify_scenario",
    "write_config",
    "write_trace",
]
