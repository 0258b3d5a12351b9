"""Reward learning from few demonstrations with coarse-to-fine plane search."""

__version__ = "0.1.0"

from .demos import Demonstration, EndPoseModel, Frame, downsample, filter_demos, fit_end_pose_model
from .gridworld import GridWorld, gridworld_demos, random_gridworld
from .volume import PhantomSpec, ProbeSpec, Volume, probe_line_valid, project_mask, slice_volume, synth_volume
from .coverage import plan_coverage_path
from .ranking import (
    DistanceTable,
    PairComparison,
    PairSampler,
    build_distance_table,
    pose_difference,
    spatial_pairs,
    temporal_pairs,
)
from .augment import AugmentConfig, augment
from .models import GPSRReward, ImageVAE, MIGPSRReward, MineEstimator, PTRReward, load_model, save_model
from .navigation import (
    PoseGrid,
    RewardVolume,
    alignment_errors,
    build_reward_volume,
    coarse_pose,
    fine_tune,
    smooth,
)
from .baselines import MaxEntIRL, TabularQPolicy, eval_success, reward_curve
from .bench import BenchConfig, EvalReport, run_gridworld_bench
from .phantom_demos import scripted_demo_set, scripted_demonstration

__all__ = [
    "__version__",
    "Demonstration",
    "EndPoseModel",
    "Frame",
    "downsample",
    "filter_demos",
    "fit_end_pose_model",
    "GridWorld",
    "gridworld_demos",
    "random_gridworld",
    "PhantomSpec",
    "ProbeSpec",
    "Volume",
    "probe_line_valid",
    "project_mask",
    "slice_volume",
    "synth_volume",
    "plan_coverage_path",
    "DistanceTable",
    "PairComparison",
    "PairSampler",
    "build_distance_table",
    "pose_difference",
    "spatial_pairs",
    "temporal_pairs",
    "AugmentConfig",
    "augment",
    "GPSRReward",
    "ImageVAE",
    "MIGPSRReward",
    "MineEstimator",
    "PTRReward",
    "load_model",
    "save_model",
    "PoseGrid",
    "RewardVolume",
    "alignment_errors",
    "build_reward_volume",
    "coarse_pose",
    "fine_tune",
    "smooth",
    "MaxEntIRL",
    "TabularQPolicy",
    "eval_success",
    "reward_curve",
    "BenchConfig",
    "EvalReport",
    "run_gridworld_bench",
    "scripted_demo_set",
    "scripted_demonstration",
]
