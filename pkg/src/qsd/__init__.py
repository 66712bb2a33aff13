"""Numerical toolkit for *-derivations of finite-dimensional quasi *-algebras."""

__version__ = "0.1.0"

from .algebra import (
    AlgebraInstance,
    RiggedTriplet,
    Seminorm,
    algebra_from_basis,
    build_full_matrix_algebra,
    triplet_norm,
)
from .derivations import (
    CheckReport,
    Derivation,
    check_star_derivation,
    derivation_unit_image,
    inner_derivation,
    tabulated_derivation,
)
from .gns import (
    GnsResult,
    PositiveFunctional,
    SesquilinearForm,
    density_functional,
    form_from_functional,
    gns_construct,
    trace_state,
    vector_state,
    verify_form_properties,
    verify_functional_bounds,
)
from .spatiality import (
    SpatialitySolution,
    check_perturbation,
    construct_implementing_operator,
    solve_implementing_operator_ls,
    verify_spatiality,
)
from .limits import (
    CutoffFamily,
    check_uniform_continuity,
    check_weak_convergence,
    sweep_cutoff,
    tau_cauchy_limit,
)
from .models import boson_cutoff, build_boson_model, build_spin_model, spin_local_perturbation
