"""Gibbs states of Heisenberg spin chains, three ways.

Exact diagonalization, Suzuki-Trotter mapping to a classical chain
contracted with belief propagation, and operator-valued belief propagation,
plus fidelity / trace-distance comparison and a benchmarking CLI.
"""

from .linalg import (
    DomainError,
    HermitianEigen,
    NoConvergenceError,
    NotHermitianError,
    abs_trace_norm,
    herm_eig,
    herm_exp,
    herm_log,
    kron,
    mat_func,
    partial_trace,
)
from .spinchain import (
    SpinChainModel,
    embed_term,
    exact_gibbs,
    heisenberg_chain,
    heisenberg_term,
    load_model,
    total_hamiltonian,
)
from .cbp import (
    FactorChain,
    MessageTable,
    NotAnEdgeError,
    NotATreeError,
    StateSpaceTooLargeError,
    belief_pair,
    belief_single,
    brute_marginal,
    chain_end_marginal,
    run_bp,
)
from .trotter import (
    ComplexResidueError,
    TransferWeights,
    TrotterPlan,
    build_weights,
    st_density,
    st_opcount,
    st_opcount_ends,
    st_opcount_middle,
    st_reduced,
    trotter_plan,
)
from .qbp import QbpResult, qbp_init, qbp_opcount, qbp_run, qbp_update_edge
from .metrics import NotDensityMatrixError, fidelity, trace_distance
from .bench import (
    SweepConfig,
    SweepRecord,
    compare_complexity,
    emit_csv,
    run_sweep,
)

__version__ = "0.1.0"
