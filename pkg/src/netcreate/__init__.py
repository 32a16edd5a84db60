"""Network creation games on arbitrary host graphs."""
from .graphcore import (
    UNREACHABLE,
    DistanceMatrix,
    Graph,
    GraphError,
    HostGraph,
    Usage,
    all_pairs_distances,
    build_host_graph,
    complete_host,
    neighborhood_size,
)
from .game import (
    BuiltGraph,
    PaymentMatrix,
    StrategyError,
    UnilateralStrategy,
    normalize_payments,
    player_cost,
    realize_network,
    social_cost,
)
from .equilibrium import (
    CapabilityError,
    EquilibriumReport,
    Trajectory,
    best_response,
    edge_valuations,
    run_dynamics,
    verify_collaborative,
    verify_unilateral_nash,
)
from .analysis import (
    LemmaCheckReport,
    LowerBoundInstance,
    check_cost_bound_unilateral,
    check_distance_stretch,
    check_doubling_lemma,
    generate_lower_bound_instance,
    greedy_center_points,
    price_of_anarchy,
    social_optimum_exact,
    social_optimum_lower_bound,
)

__version__ = "0.1.0"
