"""Numerical laboratory for spectral-gap constants of isometric group actions.

Builds word-metric balls of Cayley graphs, realizes the regular
representation on l^p truncations, evaluates displacement energies and
their absolute gradients in closed form, runs subgradient descent to fixed
points of affine actions, estimates gap constants (displacement, gradient
infimum, p-Laplacian inequality), and measures convexity/smoothness moduli
of finite-dimensional l^p spaces.
"""

__version__ = "0.1.0"

from .groups import (
    GroupSpec,
    GroupHandle,
    CayleyBall,
    build_group,
    ball,
    full_ball,
    check_symmetry,
    check_ball_invariants,
    cyclic_group,
    dihedral_group,
    symmetric_group,
    integer_lattice,
    free_group,
    table_group,
    load_group_spec,
)
from .lpspace import (
    LpVector,
    DualVector,
    conjugate_exponent,
    norm_p,
    dual_norm_q,
    duality_map,
    norming_vector,
    pair,
    zero_vector,
    delta,
)
from .action import (
    Representation,
    Cocycle,
    AffineAction,
    coboundary,
    mean_zero_project,
    cohomology_dims,
    potential_from_cocycle,
    validate_cocycle,
    default_domain,
)
from .energy import (
    EnergyParams,
    displacement_energy,
    cocycle_norm,
    dirichlet_norm,
    p_laplacian,
    gradient_field,
    markov_operator,
)
from .gradient import (
    GradientResult,
    DescentOptions,
    DescentTrace,
    abs_gradient,
    abs_gradient_sampled,
    directional_derivative,
    descend,
)
from .gaps import (
    GapOptions,
    GapReport,
    displacement_constant,
    gradient_constant,
    laplacian_constant,
    equivalence_report,
    gap_sweep,
    hilbert_gap_constant,
    cyclic_exact_constants,
    kesten_displacement_bound,
    tent_vector,
    laplacian_ratio,
)
from .moduli import (
    ModulusCurve,
    modulus_convexity,
    modulus_smoothness,
    duality_continuity_check,
    hilbert_modulus_convexity,
    hilbert_modulus_smoothness,
)
from .verify import run_suites, SUITES
