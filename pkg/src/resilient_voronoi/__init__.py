"""Resilient consensus over Voronoi-neighbor communication graphs."""

__version__ = "0.1.0"

from .errors import DomainError, FormatError, InvalidVertex, ResilientVoronoiError
from .geometry import Triangulation, delaunay, vertex_neighbor_ring
from .graph import CommGraph, delta_distance_matrix, graph_from_positions, k_hop_extend
from .robustness import RobustnessReport, SubsetPair, is_r_robust, is_rs_robust, max_equal_rs
from .consensus import (ConstantAdversary, Cooperative, DriftingAdversary, MapAdversary,
                        WmsrConfig, consensus_step, run_consensus, wmsr_filter)

__all__ = [
    "ResilientVoronoiError", "DomainError", "FormatError", "InvalidVertex",
    "Triangulation", "delaunay", "vertex_neighbor_ring",
    "CommGraph", "delta_distance_matrix", "graph_from_positions", "k_hop_extend",
    "RobustnessReport", "SubsetPair", "is_r_robust", "is_rs_robust", "max_equal_rs",
    "ConstantAdversary", "Cooperative", "DriftingAdversary", "MapAdversary",
    "WmsrConfig", "consensus_step", "run_consensus", "wmsr_filter",
]
