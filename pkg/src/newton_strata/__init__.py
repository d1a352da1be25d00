"""Newton points, strata and slope filtrations for monomial Shimura F-crystals."""
from .coweights import (
    DimensionError,
    DominanceContext,
    Functional,
    NonPeriodicError,
    PreconditionError,
    RationalCoweight,
    dominance_leq,
    dominantize,
    is_dominant,
    orbit_average,
    pair,
)
from .isocrystal import (
    MonomialOperator,
    NewtonPolygon,
    PairingSpec,
    SlopeDecomposition,
    cycles,
    d_orbit_predicate,
    enumerate_symmetric_polygons,
    integer_slope_witness,
    integral_breakpoints,
    manin_achievability,
    pairing_symmetry_check,
    sharp_check,
    slope_decomposition,
    slope_polygon,
)
from .newton import (
    KottwitzClass,
    NewtonStratum,
    ResourceBoundError,
    admissible_check,
    construct_basic_element,
    is_basic,
    kottwitz_class,
    minus_mu_bar,
    newton_point,
    newton_polygon_of,
    parabolic_profile,
    strata,
)
from .rootdata import (
    GroupDatum,
    MinusculeSpec,
    WeylElement,
    act_on_coweight,
    adjoint_depth,
    enumerate_weyl,
    make_group_datum,
    positive_roots,
    standard_weights,
    weyl_to_monomial,
)

__version__ = "0.1.0"
