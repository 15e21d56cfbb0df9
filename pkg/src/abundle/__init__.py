"""Bundles over the commutative C*-algebra of functions on a finite grid.

Projective modules, A-valued hermitian forms, bundles given by cocycles,
partitions of unity, connections, and numerical verifiers for the identities
that tie them together.
"""

from .algebra import (
    AlgebraElement,
    GridSpec,
    invert,
    is_positive,
    seminorm,
    spectrum,
    sqrt_positive,
    star,
)
from .bundle import (
    BaseRegion,
    BundleAtlas,
    Chart,
    HermitianStructure,
    HomElement,
    PartitionOfUnity,
    Section,
    frame_sections,
    hermitian_structure_by_gluing,
    hermitian_structure_by_reduction,
    lhom_trivialization,
    make_bump_partition,
    verify_cocycle,
    verify_hermitian_structure,
    verify_partition,
)
from .calculus import AMap, Polynomial, TangentVector, differential_LS, tangent_apply
from .checks import Check
from .connection import (
    ConnectionOperator,
    frame_connection,
    glue_connections,
    grassmann_extend,
    local_trivial_connection,
    verify_compatibility,
    verify_leibniz,
    whitney_sum_atlas,
)
from .errors import AbundleError
from .fixtures import FixtureDescriptor, build_fixture
from .hermitian import (
    HermitianForm,
    evaluate,
    gram_schmidt,
    is_form_unitary,
    isometry_to_standard,
    standard_form,
    verify_axioms,
)
from .pmodule import MatrixOverA, ModuleElement, ModuleMap, PModule, complement, project, whitney_sum

__version__ = "0.1.0"
