"""distgeom: genetic-algorithm solver for sparse interval distance geometry.

Recovers 3-D atom coordinates from sparse lower/upper bounds on pairwise
distances.  The library half covers the data model (`DistanceInstance`,
conformations as flat gene arrays), the fitness (root mean square interval
violation with an incremental per-atom cache) and the evolutionary engine;
the CLI half generates benchmark instances from PDB files and runs seeded,
reproducible experiments with CSV and figure output.
"""

from .evolve import (
    GaConfig,
    Population,
    RunTrace,
    greedy_mutate,
    init_population,
    random_mutate,
    random_restart,
    run,
    similarity,
    tournament_select,
    twin_removal,
    uniform_crossover,
)
from .ingest import (
    AtomRecord,
    GenConfig,
    build_instance,
    parse_pdb,
    read_instance,
    write_instance,
)
from .instance import (
    DistanceConstraint,
    DistanceInstance,
    FitnessCache,
    build_cache,
    constraint_error,
    gene_upper_bound,
    lde,
    random_conformation,
    update_cache_for_atom,
)

__version__ = "0.1.0"

__all__ = [
    "DistanceConstraint",
    "DistanceInstance",
    "FitnessCache",
    "constraint_error",
    "lde",
    "build_cache",
    "update_cache_for_atom",
    "gene_upper_bound",
    "random_conformation",
    "AtomRecord",
    "GenConfig",
    "parse_pdb",
    "build_instance",
    "write_instance",
    "read_instance",
    "GaConfig",
    "Population",
    "RunTrace",
    "init_population",
    "tournament_select",
    "uniform_crossover",
    "random_mutate",
    "greedy_mutate",
    "similarity",
    "twin_removal",
    "random_restart",
    "run",
    "__version__",
]
