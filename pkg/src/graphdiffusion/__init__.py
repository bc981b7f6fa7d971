"""Diffusion on weighted graphs over discrete measure spaces.

Heat semigroups of graph Laplacians, generalized ground state transforms,
recurrence, and reconstruction of the order isomorphisms intertwining two
graph Laplacians.
"""

from .errors import *  # noqa: F401,F403
from .graph import (
    Graph,
    Measure,
    combinatorial_distance,
    combinatorial_distances,
    connected_components,
    degrees,
    generalized_degree,
    gradient_norm,
    graph_from_matrix,
    huang_distances,
    huang_metric,
    in_A,
    is_connected,
    is_intrinsic,
    make_measure,
    normalizing_measure,
    total_edge_weight,
    uniform_measure,
    validate_graph,
)
from .gst import (
    Counterexample,
    GstSpec,
    counterexample_pair,
    find_positive_superharmonic,
    gst_intertwiner,
    ground_state_transform,
)
from .operators import (
    formal_laplacian,
    greens_formula_residual,
    is_harmonic,
    is_superharmonic,
    laplacian_matrix,
    norm_bound_report,
    quadratic_form,
)
from .orderiso import (
    IntertwinerCertificate,
    OrderIso,
    adjoint_apply,
    apply,
    beta_of,
    certificate_invariants,
    decompose_order_iso,
    reconstruct,
    verify_intertwining,
    verify_structure_equations,
)
from .recurrence import (
    Exhaustion,
    capacity_sequence,
    classify_finite,
    finite_total_weight_verdict,
    liouville_check,
)
from .semigroup import (
    green_function,
    heat_apply,
    heat_kernel,
    heat_trajectory,
    markov_apply,
    markov_operator,
)

__version__ = "0.1.0"
