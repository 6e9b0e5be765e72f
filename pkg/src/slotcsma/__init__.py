"""Slotted CSMA with collisions: simulator and exact schedule-chain analysis.

Nodes share a channel under an interference graph, keep per-queue weights, and
follow a randomized hold/stop access rule driven only by delayed carrier-sense
feedback.  For small graphs the induced Markov chain on independent sets is
built exactly and its stationary and mixing properties are machine-checked;
for larger graphs the closed queueing loop is simulated slot by slot.
"""

from .errors import (
    ConductanceTooLarge,
    ConfigError,
    InsufficientData,
    InvalidAdjointBase,
    InvalidDelta,
    InvalidFeedback,
    InvalidRate,
    InvalidSchedule,
    InvalidWeight,
    InvariantViolation,
    NotContracting,
    NotIrreducible,
    NumericalFailure,
    SlotCsmaError,
    StateSpaceTooLarge,
    TreeTooLarge,
)
from .graph import (
    InterferenceGraph,
    Schedule,
    complete_graph,
    cycle_graph,
    enumerate_independent_sets,
    free_nodes,
    grid_graph,
    max_weight_independent_set,
    path_graph,
    read_edge_list,
    star_graph,
    write_edge_list,
)
from .protocol import (
    CoinBlock,
    NodeObservation,
    Role,
    WeightFunction,
    check_f_property,
    classify_roles,
    compute_weights,
    slot_transition,
)
from .queueing import capacity_margin, sample_arrivals, update_queues
from .chain import (
    FreeEnergyProblem,
    TransitionMatrix,
    adjoint,
    build_comparison_chain,
    build_protocol_chain,
    closed_form_reversible_stationary,
    conductance,
    decompose_transition,
    detailed_balance_residual,
    gibbs_check,
    mixing_time_estimate,
    spectrum_reversibilization,
    stationary,
    tree_stationary,
    verify_lemma_bounds,
)
from .sim import (
    SimConfig,
    Trace,
    run_schedule_chain,
    run_simulation,
    stability_verdict,
)

__version__ = "0.1.0"
