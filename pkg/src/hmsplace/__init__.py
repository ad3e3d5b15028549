"""Data placement planning and virtual-time simulation for DRAM+NVM memory."""

from .costs import (
    benefit,
    benefit_bw,
    benefit_lat,
    estimate_movement,
    eviction_plan,
    movement_cost,
    overlap_window,
)
from .machine import MachineConfig, Sensitivity, active_time, calibrate_cf, \
    classify_sensitivity, default_machine, object_bandwidth
from .sim import Policy, SimulationReport, adapt, predict_phase_time, run_policy, simulate
from .solver import (
    KnapsackItem,
    Migration,
    PlacementPlan,
    choose_plan,
    cross_global_search,
    initial_placement,
    knapsack_solve,
    partition_object,
    phase_local_search,
)
from .synth import GeneratorSpec, gen_synthetic
from .trace import AccessRecord, Chunk, DataObject, PhaseProfile, Trace

__all__ = [
    "AccessRecord",
    "active_time",
    "adapt",
    "benefit",
    "benefit_bw",
    "benefit_lat",
    "calibrate_cf",
    "choose_plan",
    "Chunk",
    "classify_sensitivity",
    "cross_global_search",
    "DataObject",
    "default_machine",
    "estimate_movement",
    "eviction_plan",
    "gen_synthetic",
    "GeneratorSpec",
    "initial_placement",
    "knapsack_solve",
    "KnapsackItem",
    "MachineConfig",
    "Migration",
    "movement_cost",
    "object_bandwidth",
    "overlap_window",
    "partition_object",
    "phase_local_search",
    "PhaseProfile",
    "PlacementPlan",
    "Policy",
    "predict_phase_time",
    "run_policy",
    "Sensitivity",
    "simulate",
    "SimulationReport",
    "Trace",
]

__version__ = "0.1.0"
