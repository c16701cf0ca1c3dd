"""Racing-line RL toolkit: track geometry, single-track vehicle dynamics,
planner/controller stack, TD3 training, and model-mismatch evaluation."""

import os as _os
import pathlib as _pathlib

# Point the asset search at the packaged assets unless the caller already
# chose a location.
if "FRENET_RACER_ASSETS" not in _os.environ:
    _packaged = _pathlib.Path(__file__).resolve().parent / "assets"
    if _packaged.is_dir():
        _os.environ["FRENET_RACER_ASSETS"] = str(_packaged)

from ._core import (  # noqa: E402
    AddedMass,
    Algorithm,
    CartesianPoint,
    CheckpointError,
    ControllerConfig,
    EffectiveInput,
    EnvConfig,
    EpisodeStatus,
    Error,
    EvalSpec,
    FrenetPose,
    InputCommand,
    LidarConfig,
    MismatchSpec,
    OutOfCorridorError,
    ParseError,
    PlannedTrajectory,
    PlannerConfig,
    RaceEnv,
    ReplayBuffer,
    RewardConstants,
    Rng,
    RunConfig,
    SimConfig,
    SweepKind,
    SweepSpec,
    Td3Agent,
    Td3Config,
    Td3Losses,
    TrackGeometry,
    ValidationError,
    VehicleConstraints,
    VehicleParams,
    VehicleState,
    apply_mismatch,
    compute_reward,
    constrain_inputs,
    derive_seed,
    evaluate,
    export_results,
    load_checkpoint,
    plan,
    pure_pursuit_steer,
    resolve_track_path,
    run_sweep,
    save_checkpoint,
    step_vehicle,
    train,
    velocity_command,
    velocity_constraint,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
