"""Uniform spanning trees on planar graphs: winding fields of tree
branches, dimer heights through the tree/matching correspondence, and
the statistics tying their fluctuations to the Gaussian free field."""

from .domains import Domain
from .graphs import (
    PlanarGraph,
    WiredDomainGraph,
    clip_and_wire,
    gen_hex_lattice,
    gen_random_environment,
    gen_square_lattice,
)
from .walk import (
    SpanningTree,
    branch_polyline,
    crossing_probability,
    rng_for_sample,
    sample_branch,
    wilson_ust,
)
from .polylines import (
    intrinsic_winding,
    intrinsic_to_topological_residual,
    is_simple_polyline,
    topological_winding,
)
from .conformal import (
    CapacityEstimate,
    MobiusMap,
    arg_branch_1_minus_disc,
    capacity_along_branch,
    check_change_of_coords,
    conformal_radius_mc,
    mobius_derivative_fd_residual,
    winding_boundary_function,
)
from .winding import (
    WindingField,
    estimate_m_correction,
    sample_truncated_windings,
    truncated_field,
    winding_field,
)
from .pairing import (
    VoronoiPairing,
    make_test_function,
    pair_with_test_function,
    poly_bump,
    radial_bump,
)
from .fieldstats import (
    GreenKernel,
    ReportEntry,
    anderson_darling_pvalue_ok,
    calibrate_green,
    centered_product_moment,
    discrete_green,
    gff_covariance_pair_target,
    jackknife_blocks,
    moment_report,
    sample_dgff,
    sobolev_norm,
    wick_fourth_moment_check,
)
from .dimer import (
    DimerConfiguration,
    DimerGraph,
    HeightField,
    PlanarPiece,
    count_matchings_brute,
    count_trees_kirchhoff,
    dimer_height,
    dimer_to_tree,
    enumerate_matchings,
    enumerate_trees,
    grid_piece,
    lozenge_height,
    piece_from_wired,
    sample_dimer,
    temperley_superpose,
    tree_to_dimer,
)

__version__ = "0.1.0"
