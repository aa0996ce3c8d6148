"""Group-elevator dispatch: waiting-time weights, greedy assignment under a
partition matroid, a discrete-event simulator, baseline schedulers, and a
benchmark harness."""

from .kinematics import (
    DEFAULT_DOORS,
    DEFAULT_FLOOR_HEIGHT,
    DEFAULT_LIMITS,
    CarKinematicState,
    DoorPhase,
    DoorState,
    DoorTiming,
    MotionLimits,
    door_cycle_remaining,
    travel_time_from_motion,
    travel_time_rest_to_rest,
)
from .waiting_model import (
    CarSnapshot,
    DestinationDistribution,
    Direction,
    HallCall,
    HigherOrderTerm,
    PlannedStop,
    WeightConfig,
    WeightSet,
    apply_coincident_bonus,
    build_weights,
    capacity_penalty,
    higher_order_terms,
    pairwise_weight,
    service_plan,
    unary_weight,
)
from .submodular import (
    AssignmentSet,
    GroundElement,
    Objective,
    PartitionMatroid,
    brute_force_optimal,
    check_submodular,
    greedy_maximize,
    greedy_maximize_trace,
    is_independent,
)
from .simulation import (
    BuildingConfig,
    FixedScheduler,
    InitialCarState,
    Passenger,
    RunStats,
    SimEvent,
    Simulator,
    SubmodularGreedyScheduler,
    car_next_action,
    measure_wait,
    run,
)
from .baselines import (
    CollectiveScheduler,
    EtaScheduler,
    SchedulerKind,
    collective_assign,
    eta_assign,
    make_scheduler,
    parse_scheduler,
)
from .traffic import TrafficSpec, generate, load_traffic, save_traffic
from .bench import ComparisonReport, emit, load_config, run_grid

__version__ = "0.1.0"
