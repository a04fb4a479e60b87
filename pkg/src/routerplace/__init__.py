"""Placement and mobility control of robotic routers for max-min SINR networks."""

from .annealing import AnnealingSchedule, AnnealTrace, anneal, metropolis_accept, propose_neighbor
from .channel import ChannelParams, Position, UndefinedSinrError, distance, link_sinr, received_power
from .distributed import (
    ControllerParams,
    MobilityModel,
    EndpointMobility,
    MoveDecision,
    SinrReport,
    candidate_points,
    controller_step,
    mobility_step,
    modal_decide,
    run_distributed,
    stat_round,
)
from .estimators import AnnealingPlacement, DistributedPlacement
from .network import (
    FlowSpec,
    Link,
    Network,
    NetworkState,
    NodeRole,
    bottleneck_links,
    build_links,
    flow_cost,
    flow_costs,
    global_cost,
    interferers,
    link_sinr_in_state,
    link_sinrs,
)
from .scan import scan_surface, strict_local_maxima
from .scenario import (
    ScenarioDoc,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    dump_scenario,
    load_scenario,
    parse_scenario,
    read_surface,
    read_trace,
    write_surface,
    write_trace,
)
from .validation import ValidationError

__version__ = "0.1.0"
