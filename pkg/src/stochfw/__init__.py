"""Away-step and pairwise stochastic Frank-Wolfe methods over polytopes."""

from .active_set import StepKind, VertexRepresentation, away_vertex, vru_update
from .algorithms import (
    BatchSchedule,
    RunConfig,
    RunTrace,
    batch_size,
    reference_optimum,
    run,
    step_size,
    theoretical_kappa,
    theoretical_rho,
)
from .diagnostics import (
    classify_step,
    drop_step_audit,
    empirical_sup_deviation,
    rate_fit,
    tally_cases,
)
from .polytope import (
    ExplicitHRep,
    L1Ball,
    OrderedBox,
    Simplex,
    Vertex,
    contains,
    diameter,
    enumerate_vertices,
    lmo,
    omega_constant,
    project_l1,
    project_ordered_box,
)
from .problems import (
    ObjectiveFamily,
    SampleBatch,
    build_elastic_net,
    generate_synthetic,
    load_csv_dataset,
)

__version__ = "0.1.0"
