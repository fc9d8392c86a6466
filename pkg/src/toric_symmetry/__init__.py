"""Exact symmetry analysis for hierarchical log-linear models.

Builds the configuration matrix of a model over multi-way contingency
tables, computes its pseudofactor poset, materializes the group of cell
permutations that leave the model invariant as a poset-indexed wreath
product, and verifies the structural claims with exact arithmetic and a
brute-force stabilizer oracle at small scale.
"""

from .exactla import (
    Basis,
    CellTable,
    IntMatrix,
    MarginalTable,
    Rational,
    apply_permutation,
    configuration_matrix,
    kernel_basis,
    lift,
    marginal,
    member,
    partial_difference,
    project_increment,
    rank,
    row_space_basis,
    stabilizes_kernel,
)
from .generic import (
    DistinctnessError,
    GenericTable,
    PerturbationSeq,
    distinct_projection,
    faithful_witness,
    generic_element,
    injectivity_exhaustive,
    perturbation_sequence,
)
from .model import (
    FacetSet,
    HierarchicalModel,
    LevelSpec,
    MarginalCell,
    ModelError,
    load_model,
    make_model,
    parse_model,
    serialize_model,
)
from .poset import (
    IntersectionPoset,
    Pseudofactor,
    PseudofactorPoset,
    check_v_homomorphism,
    intersection_poset,
    pseudofactor_poset,
    topological_order,
    v_set,
)
from .verify import (
    FixtureReport,
    StabilizerReport,
    TheoremConditionReport,
    brute_force_stabilizer,
    check_member_invariance,
    check_nonmember_rejection,
    corollary_direct_product,
    markov_fixture,
    sudoku_fixture,
    theorem_conditions,
)
from .wreath import (
    CellPermutation,
    NonMemberError,
    WreathElement,
    WreathGroup,
    facet_criterion_member,
)

__version__ = "0.1.0"
