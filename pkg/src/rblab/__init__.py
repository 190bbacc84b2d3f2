"""Random binary-CSP laboratory.

Generate Model RB instances deterministically, count their solutions with
an exhaustive oracle or a pruning backtracking solver, rewire relations
with the symmetry mapping, run Monte Carlo experiments against the exact
reference formulas, and export instances as DIMACS CNF.
"""

from .core import (
    Constraint,
    Dimensions,
    GuardExceeded,
    HANDCRAFTED,
    Instance,
    ParameterError,
    Params,
    Provenance,
    calibrate_r,
    derive_dimensions,
    expected_solution_count,
    generate_instance,
    generate_instance_symmetric,
    instance_from_json,
    instance_to_json,
    read_instance,
    trial_params,
    validate_instance,
    write_instance,
)
from .encoder import (
    CnfFormula,
    count_cnf_models_exhaustive,
    encode_direct,
    parse_dimacs,
    write_dimacs,
)
from .experiments import (
    BoundViolation,
    ExperimentReport,
    estimate_mean_solution_count,
    estimate_sat_probability,
    estimate_subproblem_sat_probability,
    pruning_benchmark,
    report_to_csv,
    report_to_json,
)
from .rng import SplitMix64, derive_seed
from .solver import (
    ConstraintProfile,
    SolveResult,
    SolverConfig,
    count_and_unique_witness,
    count_solutions_exhaustive,
    evaluate,
    find_solutions,
    restrict,
    solve_backtracking,
    solve_result_to_json,
    subproblem_constraint_profile,
)
from .symmetry import (
    FlipReport,
    FlipTrial,
    SymmetryQuadruple,
    apply_symmetry_mapping,
    find_symmetry_quadruple,
    flip_experiment,
    flip_report_to_csv,
    flip_report_to_json,
)

__version__ = "0.1.0"
