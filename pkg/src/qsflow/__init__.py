"""Numerical toolkit for quantum stochastic flows on matrix algebras.

Builds and verifies structure matrices of Evans-Hudson type, evaluates the
associated quantum dynamical semigroups and their Trotter products, simulates
the flows themselves through a repeated-interaction discretization, and
realizes group-valued processes (Brownian motion on compact groups, random
walks on discrete groups) and clock-shift lattice models as applications.
"""

__version__ = "0.1.0"

from .linalg import (  # noqa: F401
    Superoperator,
    choi_matrix,
    contract_channel,
    expm,
    kron,
    norms,
)
from .structure import (  # noqa: F401
    EHStructure,
    build_inner_structure,
    combined_structure,
    perturbed_generator,
    random_inner_structure,
    verify_cocycle,
    verify_structure_relations,
    verify_weak_dissipativity,
)
from .semigroup import (  # noqa: F401
    SemigroupExperiment,
    l2_contraction_check,
    semigroup,
    trace_norm_growth_check,
    trotter_error_table,
    trotter_product_semigroup,
)
from .flow import (  # noqa: F401
    FlowDiscretization,
    StepFunction,
    flow_matrix_element,
    homomorphism_defect,
    hp_step_unitary,
    trotter_flow_matrix_element,
)
from .groups import (  # noqa: F401
    ctmc_walk_oracle,
    heat_expectation_oracle,
    rho_convergence_diagnostic,
    sample_group_walk_trotter,
    sample_lie_bm_trotter,
)
from .lattice import (  # noqa: F401
    LatticeWindow,
    build_uhf_flow_structures,
    check_commutator_condition,
    clock_shift,
    embed,
    local_lindbladian,
    matsui_seminorm,
    translate,
)
from .results import ResultTable  # noqa: F401
from .experiments import run, validate_config  # noqa: F401
