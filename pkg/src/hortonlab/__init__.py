"""Horton-Strahler statistics and Horton-law numerics for mean self-similar trees."""

from .errors import (
    EmptyTreeError,
    HortonError,
    HortonOverflowError,
    NegativeParamError,
    NewickSyntaxError,
    NodeNotFoundError,
    NoRootInDomainError,
    NonIntegerMeanError,
    NonpositiveKError,
    NotFullBinaryError,
    OutOfDomainError,
    TreeTooLargeError,
    ValidationError,
)
from .newick import parse_tree, parse_trees, serialize_tree
from .numerics import (
    ConvergenceReport,
    ZetaTable,
    check_shift_property,
    verify_strong_horton,
    zeta1_by_series,
    zeta1_geometric_closed_form,
    zeta_by_recursion,
)
from .sampler import (
    PruneInvarianceReport,
    SamplerConfig,
    SimulationReport,
    estimate,
    prune_invariance_check,
    sample_tree,
)
from .tokunaga import (
    ExponentResult,
    TokunagaSequence,
    differentiated_c_branches,
    differentiated_cubic,
    geometric_roots,
    horton_exponent,
    t_hat,
)
from .tree_core import (
    BinaryTree,
    HortonStatistics,
    OrderAssignment,
    RootedTree,
    assign_orders,
    canonical_form,
    cut_leaves,
    horton_statistics,
    order_via_pruning,
    prune,
    series_reduce,
    tree_order,
)

__version__ = "0.1.0"
