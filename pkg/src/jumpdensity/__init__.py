"""Markov jump processes on weighted graphs: simulation, path functionals
(local times, crossing currents, last-exit trees), their closed-form joint
densities, and a Monte Carlo verification harness.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bessel import bessel_i, log_bessel_i
from .density import (
    JointOutcome,
    prop1_log_density,
    ray_knight_tree_density,
    sum_prop1_over_k,
    theorem1_log_density,
)
from .graph import WeightedGraph, build_graph, graph_from_dict, load_graph, vertex_rate
from .pathstats import (
    CrossingCounts,
    Current,
    LocalTimes,
    OrientedTree,
    crossings,
    current_of,
    last_exit_tree,
    local_times,
    path_statistics,
    tilde_current,
)
from .simulate import (
    FixedTime,
    InverseLocalTime,
    JumpPath,
    RngStream,
    batch_statistics,
    simulate_batch,
    simulate_path,
)
from .trees import (
    enumerate_spanning_trees,
    extend_cycling_numbers,
    fundamental_cycles,
    weighted_tree_sum,
)
from .verify import (
    LocalTimeCell,
    VerificationReport,
    marginal_local_time_density,
    verify_prop1,
    verify_ray_knight,
    verify_theorem1,
    verify_total_mass,
)
from .wilson import (
    KilledGraph,
    WilsonOutput,
    loop_cycling_numbers,
    order_independence_check,
    tree_law_check,
    wilson_sample,
)

__version__ = "0.1.0"
