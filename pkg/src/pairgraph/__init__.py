"""Photon-pair networks described as complex-weighted graphs.

Paths are vertex sets, crystals are edges, linear optics rewrites edges, and
a post-selected detection event is a sum over perfect matchings.  Counting
rates of crystal networks reduce to permanents and hafnians of the
adjacency matrix.
"""

from ._backend import BACKEND
from .elements import (
    AffineMap,
    BeamSplitter,
    ModeShifter,
    OAMSorter,
    PhaseShifter,
    PolarizingBS,
    Projection,
    SPPReflection,
    apply_beam_splitter,
    apply_elements,
    apply_mode_shifter,
    apply_oam_sorter,
    apply_pbs,
    apply_phase_shifter,
    apply_projection,
    apply_spp_reflection,
)
from .fock import CrystalSpec, FockLedger, expand_network, expand_sequence, higher_order_error, pattern_probability
from .graph import (
    Edge,
    ExperimentGraph,
    GraphError,
    Vertex,
    add_crystal,
    adjacency_matrix,
    graph_with_paths,
    induced_subgraph,
)
from .matchings import (
    DetectionPattern,
    PostSelectedState,
    detect_maverick,
    enumerate_matchings,
    equal_up_to_phase,
    matching_sum,
    post_selected_state,
)
from .matrix import (
    bipartite_embedding,
    coincidence_distribution,
    coincidence_probability,
    hafnian,
    hafnian_naive,
    permanent_naive,
    permanent_ryser,
)
from .rates import RateQuery, combinatorial_check, rate_aa, rate_path_identity, rate_scattershot, ratio_pi_ss

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "BACKEND",
    "BeamSplitter",
    "CrystalSpec",
    "DetectionPattern",
    "Edge",
    "ExperimentGraph",
    "FockLedger",
    "GraphError",
    "ModeShifter",
    "OAMSorter",
    "PhaseShifter",
    "PolarizingBS",
    "PostSelectedState",
    "Projection",
    "RateQuery",
    "SPPReflection",
    "Vertex",
    "add_crystal",
    "adjacency_matrix",
    "apply_beam_splitter",
    "apply_elements",
    "apply_mode_shifter",
    "apply_oam_sorter",
    "apply_pbs",
    "apply_phase_shifter",
    "apply_projection",
    "apply_spp_reflection",
    "bipartite_embedding",
    "coincidence_distribution",
    "coincidence_probability",
    "combinatorial_check",
    "detect_maverick",
    "enumerate_matchings",
    "equal_up_to_phase",
    "expand_network",
    "expand_sequence",
    "graph_with_paths",
    "hafnian",
    "hafnian_naive",
    "higher_order_error",
    "induced_subgraph",
    "matching_sum",
    "pattern_probability",
    "permanent_naive",
    "permanent_ryser",
    "post_selected_state",
    "rate_aa",
    "rate_path_identity",
    "rate_scattershot",
    "ratio_pi_ss",
]
