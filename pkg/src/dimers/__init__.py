"""Random sequential dimer placement on bounded-degree graphs: exact 1-D
results, a brute-force oracle, a seeded simulation engine and estimators."""

from .graphs import Graph, cycle_graph, lattice_box, parse_graph_spec, path_graph, regular_tree
from .engine import (Configuration, WakeupAssignment, run_rsa, sample_wakeups,
                     dependence_radius, truncated_indicator)

__version__ = "0.1.0"

__all__ = ["Graph", "cycle_graph", "lattice_box", "parse_graph_spec", "path_graph",
           "regular_tree", "Configuration", "WakeupAssignment", "run_rsa",
           "sample_wakeups", "dependence_radius", "truncated_indicator"]
