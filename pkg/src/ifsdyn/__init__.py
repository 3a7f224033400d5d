"""Iterated function systems on compact metric spaces: orbits, pseudo-orbits,
average shadowing verification, Cesàro/density machinery, and epsilon-chain
analysis, with a catalog of concrete model systems."""

from .averaging import (
    DensityCheck,
    DensityDecomposition,
    IndexSet,
    Series,
    block_saturation,
    cesaro_average,
    constant_series,
    density,
    extract_null_density_set,
    harmonic_series,
    index_set,
    running_average_curve,
    series,
    verify_null_density_implies_average,
)
from .chains import (
    ChainGraph,
    ChainSearchResult,
    ChainWitness,
    TransitivityReport,
    build_chain_graph,
    chain_recurrent_set,
    find_chain,
    is_chain_transitive,
    snap_to_node,
    strongly_connected_components,
    validate_witness,
)
from .core import (
    IFSSpec,
    MapDef,
    OrbitRecord,
    SelectorSequence,
    apply,
    apply_map,
    compose_apply,
    conjugate_ifs,
    estimate_contraction_ratio,
    ifs_from_json,
    ifs_to_json,
    orbit,
    pair_index,
    pair_split,
    power_ifs,
    product_ifs,
    selector_explicit,
    selector_periodic,
    selector_random,
    subsystem,
    validate_ifs,
    word_digits,
    word_index,
)
from .errors import (
    BranchError,
    ConjugacyError,
    ContractionError,
    DomainError,
    GuardError,
    IFSError,
    LengthError,
    UnsupportedKindError,
)
from .experiments import ExperimentResult, experiment_names, run
from .models import backward_branch, invert_map, list_models, make_system
from .pseudo_orbits import (
    AapoReport,
    DeltaCheck,
    PseudoOrbitRecord,
    dyadic_block_sequence,
    dyadic_seam_indices,
    perturbed_orbit,
    pseudo_orbit_record,
    record_from_json,
    record_from_orbit,
    record_to_json,
    stride_subsample,
    validate_aapo,
    validate_delta_pseudo_orbit,
)
from .shadowing import (
    FiniteShadowingResult,
    ShadowReport,
    contracting_shadow,
    contracting_shadow_bound,
    finite_shadowing_check,
    greedy_shadow_search,
    shadow_verify,
)
from .spaces import (
    Circle,
    FiniteDiscrete,
    Interval,
    Point,
    Product,
    SpaceKind,
    SymbolSpace,
    diameter,
    distance,
    grid,
    point,
    point_from_json,
    point_to_json,
    sample_point,
    space_from_json,
    space_to_json,
)

__version__ = "0.1.0"
