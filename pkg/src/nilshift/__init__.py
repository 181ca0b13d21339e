"""Exact Host-Kra cube calculus, polynomial-map subshifts and
phase-polynomial analysis on finite filtered abelian p-groups."""

from nilshift.abramov import (
    Character,
    FunctionOnOrbit,
    PhasePolyObservable,
    abramov_rank,
    full_observable_family,
    gowers_box_value,
    is_phase_polynomial,
    mult_derivative,
)
from nilshift.cubes import (
    CompletionError,
    CornerMap,
    CubeMap,
    DiscreteCubeSpec,
    alternating_sum,
    complete_corner,
    cube_count,
    enumerate_cubes,
    is_hk_cube,
    moebius_coefficients,
)
from nilshift.dynamics import (
    EmpiricalMeasure,
    FactorMapData,
    FiniteSystem,
    Orbit,
    evaluation_embedding,
    compose_pushforward,
    invariant_measures,
    is_minimal,
    orbit_closure,
    rp_identity_check,
    shift,
    truncation_sweep,
    verify_factor,
)
from nilshift.fibrations import (
    FibrationCertificate,
    FilteredHom,
    NotFibrationError,
    UnsupportedTargetError,
    covering_onto,
    is_filtered_surjection,
    lift_morphism,
    verify_fibration_cubewise,
)
from nilshift.groups import (
    CyclicFactor,
    FilteredAbelianGroup,
    GroupMismatchError,
    ParameterError,
    make_cf_group,
    make_hpk_truncation,
    parse_group_arg,
)
from nilshift.kernels import BACKEND as KERNEL_BACKEND
from nilshift.polymaps import (
    MorphismVerdict,
    PolyMap,
    TaylorForm,
    embed_gamma,
    enumerate_morphisms,
    is_morphism_cubes,
    is_morphism_derivatives,
    morphism_count,
    random_morphism,
    restrict_to_fundamental_domain,
    taylor_expand,
)

__version__ = "0.1.0"
