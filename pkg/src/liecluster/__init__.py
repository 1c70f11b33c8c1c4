"""Lie-group representations, generalized Clebsch-Gordan coefficients and
equivariant cluster-expansion features of point clouds."""
from .algebra import (
    GroupElement, LieAlgebra, Rep, ValidationReport, change_basis, conjugate_rep, direct_sum,
    matrix_exponential, product_group_rep, rep_from_json, rep_to_json, sample_group_element,
    tensor_product, trivial_rep, validate_rep,
)
from .coupling import (
    CouplingTensor, Decomposition, SelectionRule, clebsch_gordan, decompose_rep, intertwiners,
    selection_rule, symmetric_coupling,
)
from .errors import (
    ConfigurationError, DecompositionIncompleteError, InvalidArgumentError, ResourceLimitError,
)
from .irreps import (
    IrrepLabel, candidate_labels, enumerate_gt_patterns, irrep, o3_irrep, parse_label, so3_irrep,
    so13_irrep, so13_vector_rep, su2_irrep, sun_irrep, weyl_dimension,
)

__version__ = "0.1.0"
