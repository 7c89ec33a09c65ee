"""Capacity of homogeneous polynomials with nonnegative coefficients.

Polynomials are evaluation oracles (``PolynomialOracle``).  Capacity is
computed by convex minimisation in log coordinates and turned into
certified brackets for permanents, mixed discriminants and general mixed
derivative coefficients.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    coefficient_bounds,
    g,
    generalized_factor,
    permanent_lower_bound,
    schrijver_comparison,
    uniform_factor,
    vdw_factor,
)
from .capacity import (
    Approximation,
    CapacityResult,
    ScalingResult,
    approximate_coefficient,
    capacity,
    ds_defect,
    improved_approximate,
    scale_to_doubly_stochastic,
    sinkhorn_scale,
)
from .errors import BudgetError, NumericalError, PolycapError, ValidationError
from .exact import (
    ExactValue,
    capacity_grid,
    entropic_inequality,
    mini_vdw_verify,
    mixed_discriminant_exact,
    permanent_exact,
)
from .hyperbolicity import (
    af_inequality_check,
    analyse_coefficients,
    check_pos_hyperbolic,
    lemma29_bound,
    newton_inequalities,
    restriction_roots,
)
from .kernels import BACKEND
from .polynomials import (
    HermitianTuple,
    NonnegativeMatrix,
    PolynomialOracle,
    SparsePolynomial,
    build_determinantal,
    build_multilinear,
    build_sparse,
    derivative_oracle,
    expand,
    laplace_hybrid,
    mixed_form,
    partial_at_zero,
)
from .structure import (
    SupportFunction,
    detect_decomposition,
    in_newton_polytope,
    in_support,
    is_indecomposable,
    is_submodular,
    rank,
    support_degree,
)
