"""Embedding resolvable Steiner 2-designs as maximal arcs in projective planes.

The pipeline develops a difference family into a design, enumerates its
parallel classes and resolutions, builds the graph of compatible
resolutions, and reconstructs a projective plane from a maximum clique.
"""

from .compat import build_compat_graph, compatible, compatible_set_bound, max_clique
from .design import (
    Design,
    DifferenceFamily,
    ParallelClass,
    develop_family,
    incidence_matrix,
    starter_parallel_class,
    validate_design,
    validate_family,
)
from .enumeration import Resolution, all_parallel_classes, all_resolutions, solve_exact_cover
from .geometry import (
    IncidenceStructure,
    MaximalArc,
    denniston_arc,
    dualize,
    extract_design,
    extract_resolutions,
    generate_pg2q,
    reconstruct_plane,
    verify_plane,
)
from .gf import GF2m, p_rank
from .symmetry import automorphism_group_order, canonical_form, isomorphic

__version__ = "0.1.0"
