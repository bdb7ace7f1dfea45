"""Movable-antenna AirComp simulation and optimization toolkit."""

from .aircomp import (
    InnerConfig,
    InnerSolution,
    NoiseSpec,
    cmse,
    cmse_terms,
    hermitian_solve,
    inner_loop,
    inner_loop_batch,
    monte_carlo_cmse,
    optimal_coeffs,
    optimal_combiner,
)
from .benchmarks import GridSpec, aps_optimize, fpa_layout
from .channel import (
    ChannelRealization,
    PathAngles,
    RegionSpec,
    UserChannel,
    channel_gain_map,
    channel_matrix,
    channel_vector,
    field_response_vector,
    perturb_aoas,
    propagation_distance_diff,
    sample_channel,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    dbm_to_mw,
    run_aoa_error_sweep,
    run_convergence_trace,
    run_power_sweep,
    run_user_sweep,
    write_records_csv,
)
from .pso import (
    FitnessReport,
    PsoParams,
    PsoResult,
    fitness,
    inertia,
    init_swarm,
    run_swarm,
    update_position,
    update_velocity,
    violation_set,
    write_pso_trace_csv,
)
from .sca import (
    QpInfeasibleError,
    ScaParams,
    SurrogateModel,
    ao_scheme,
    build_surrogate,
    g_gradient,
    g_value,
    relaxed_separation_constraints,
    sca_optimize_antenna,
    solve_antenna_qp,
    surrogate_upper_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
