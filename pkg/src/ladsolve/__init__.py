"""Assign drone delivery groups to private autonomous vehicles.

Core entry points: :func:`solve_exact`, :func:`solve_greedy`,
:class:`ExactSolver`, :class:`GreedySolver`, :class:`CapacitatedKMeans`.
"""

__version__ = "0.1.0"

from .checker import check_solution
from .exact import ExactSolver, InfeasibleError, solve_exact
from .experiments import generate_scenario, group_scenario, run_bench, run_instance
from .geo import EuclideanTravel, HttpTableTravel, MatrixTravel, TravelError, make_travel_model
from .greedy import GreedySolver, solve_greedy
from .grouping import CapacitatedKMeans, build_groups, makespan
from .metrics import company_savings, completion_time, per_vehicle_profit
from .model import (
    Customer,
    DroneSpec,
    Group,
    Point,
    Scenario,
    ScenarioError,
    Solution,
    Vehicle,
    VehicleType,
    VehicleUsage,
    load_scenario,
    save_scenario,
)
from .segments import SegmentCache, precompute_segments

__all__ = [
    "CapacitatedKMeans", "Customer", "DroneSpec", "EuclideanTravel", "ExactSolver", "GreedySolver", "Group",
    "HttpTableTravel", "InfeasibleError", "MatrixTravel", "Point", "Scenario", "ScenarioError", "SegmentCache",
    "Solution", "TravelError", "Vehicle", "VehicleType", "VehicleUsage", "build_groups", "check_solution",
    "company_savings", "completion_time", "generate_scenario", "group_scenario", "load_scenario", "make_travel_model", "makespan",
    "per_vehicle_profit", "precompute_segments", "run_bench", "run_instance", "save_scenario", "solve_exact", "solve_greedy",
]
