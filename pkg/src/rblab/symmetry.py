"""Local rewiring of binary relations and the satisfiability-flip experiment.

A symmetry quadruple of a binary constraint is a 2x2 checkerboard in its
relation: values u1 != u2 and v1 != v2 with (u1,v1), (u2,v2) permitted but
(u1,v2), (u2,v1) forbidden. The mapping toggles membership of those four
cells, which keeps the relation size and every row/column degree intact
while removing any solution that passed through (u1,v1) or (u2,v2).

The flip experiment measures how often this rewiring actually changes
satisfiability on generated instances: forward (unique-solution instance
mapped at the solution's own projection, did it become unsatisfiable?) and
reverse (unsatisfiable instance mapped at the first candidate, did it
become satisfiable?).
"""

import csv
import io
import json
import time
from dataclasses import dataclass, replace

from .core import (
    Constraint,
    Instance,
    ParameterError,
    Params,
    Provenance,
    generate_instance,
    params_to_dict,
    trial_params,
)
from .rng import derive_seed
from .solver import (
    MIN_REMAINING_VALUES,
    SolverConfig,
    check_guard,
    count_and_unique_witness,
    solve_backtracking,
)
from . import parallel

_COUNTERS = ("backtracking", "oracle")


@dataclass(frozen=True)
class SymmetryQuadruple:
    constraint_index: int
    u1: int
    u2: int
    v1: int
    v2: int


def _binary_constraint(instance: Instance, constraint_index: int) -> Constraint:
    if instance.k != 2:
        raise ParameterError("symmetry mapping is defined only for k = 2 instances")
    if not 0 <= constraint_index < instance.m:
        raise IndexError(f"constraint index {constraint_index} out of range")
    c = instance.constraints[constraint_index]
    if c.arity != 2:
        raise ParameterError(f"constraint {constraint_index} is not binary")
    return c


def find_symmetry_quadruple(
    instance: Instance,
    constraint_index: int,
    anchor: tuple[int, int] | None = None,
) -> SymmetryQuadruple | None:
    """First checkerboard quadruple in deterministic scan order, if any.

    With ``anchor`` the pair (u1, v1) is pinned (used to target a known
    solution's projection) and only (u2, v2) is scanned, lexicographically.
    Without it, anchors are scanned lexicographically over the relation.
    """
    c = _binary_constraint(instance, constraint_index)
    rel = c.relation
    d = instance.d
    if anchor is not None:
        if tuple(anchor) not in rel:
            return None
        anchors = [tuple(anchor)]
    else:
        anchors = sorted(rel)
    for u1, v1 in anchors:
        for u2 in range(d):
            if u2 == u1:
                continue
            if (u2, v1) in rel:
                continue
            for v2 in range(d):
                if v2 == v1:
                    continue
                if (u2, v2) in rel and (u1, v2) not in rel:
                    return SymmetryQuadruple(constraint_index, u1, u2, v1, v2)
    return None


def _checkerboard_cells(quad: SymmetryQuadruple):
    inside = ((quad.u1, quad.v1), (quad.u2, quad.v2))
    outside = ((quad.u1, quad.v2), (quad.u2, quad.v1))
    return inside, outside


def apply_symmetry_mapping(
    instance: Instance, quad: SymmetryQuadruple, *, full_row_swap: bool = False
) -> Instance:
    """Rewire one constraint's relation at the quadruple's four cells.

    Default mode toggles membership of the four cells (so applying the same
    quadruple twice is the identity, and both orientations of the
    checkerboard are accepted). ``full_row_swap`` instead exchanges the
    values u1 and u2 everywhere in the first coordinate, a coarser reading
    of the same exchange offered for comparison.
    """
    c = _binary_constraint(instance, quad.constraint_index)
    if quad.u1 == quad.u2 or quad.v1 == quad.v2:
        raise ParameterError("quadruple values must be distinct per coordinate")
    for v in (quad.u1, quad.u2, quad.v1, quad.v2):
        if not 0 <= v < instance.d:
            raise ParameterError("quadruple value out of domain range")
    inside, outside = _checkerboard_cells(quad)
    pattern_in = all(t in c.relation for t in inside) and not any(
        t in c.relation for t in outside
    )
    pattern_out = all(t in c.relation for t in outside) and not any(
        t in c.relation for t in inside
    )
    if not (pattern_in or pattern_out):
        raise ParameterError(
            "quadruple does not form a checkerboard against the relation"
        )

    if full_row_swap:
        swap = {quad.u1: quad.u2, quad.u2: quad.u1}
        relation = frozenset((swap.get(u, u), v) for u, v in c.relation)
    else:
        cells = set(inside) | set(outside)
        relation = frozenset(c.relation ^ cells)
    if len(relation) != len(c.relation):
        raise AssertionError("rewiring changed the relation size")

    constraints = list(instance.constraints)
    constraints[quad.constraint_index] = Constraint(scope=c.scope, relation=relation)
    return Instance(
        n=instance.n,
        d=instance.d,
        k=instance.k,
        constraints=tuple(constraints),
        provenance=Provenance(variant="symmetry-mapped"),
    )


@dataclass(frozen=True)
class FlipTrial:
    trial: int
    seed: int
    pre_count: int
    direction: str  # "forward" | "reverse" | "excluded"
    constraint_index: int | None
    quadruple_found: bool
    post_count: int | None


@dataclass(frozen=True)
class FlipReport:
    params: Params
    trials: int
    unique_solution_trials: int
    unsat_trials: int
    excluded_trials: int
    forward_mapped: int
    forward_no_quadruple: int
    forward_unsat_fraction: float | None
    forward_mean_post_count: float | None
    reverse_mapped: int
    reverse_no_quadruple: int
    reverse_sat_fraction: float | None
    per_trial: tuple[FlipTrial, ...]
    wall_time_s: float


def _count_exact(instance: Instance, counter: str, guard):
    """Exact (count, unique witness) via the configured exact counter.

    Both counters return identical results; the backtracking counter is
    orders of magnitude faster near the satisfiability threshold, and its
    agreement with the enumeration oracle is asserted by the test suite.
    The d^n guard applies either way.
    """
    check_guard(instance, guard)
    if counter == "oracle":
        return count_and_unique_witness(instance, guard=guard)
    result = solve_backtracking(
        instance,
        SolverConfig(
            variable_order=MIN_REMAINING_VALUES, forward_checking=True, count_all=True
        ),
    )
    witness = result.witness if result.solution_count == 1 else None
    return result.solution_count, witness


def _flip_trial(params: Params, guard, counter: str, index: int) -> FlipTrial:
    seed = derive_seed(params.seed, "trial", index)
    instance = generate_instance(replace(params, seed=seed))
    pre_count, witness = _count_exact(instance, counter, guard)

    if pre_count == 1:
        direction = "forward"
        sol = witness
        for ci, c in enumerate(instance.constraints):
            anchor = (sol[c.scope[0]], sol[c.scope[1]])
            quad = find_symmetry_quadruple(instance, ci, anchor)
            if quad is not None:
                break
        else:
            quad = None
    elif pre_count == 0:
        direction = "reverse"
        for ci in range(instance.m):
            quad = find_symmetry_quadruple(instance, ci)
            if quad is not None:
                break
        else:
            quad = None
    else:
        return FlipTrial(index, seed, pre_count, "excluded", None, False, None)

    if quad is None:
        return FlipTrial(index, seed, pre_count, direction, None, False, None)
    mapped = apply_symmetry_mapping(instance, quad)
    post, _ = _count_exact(mapped, counter, guard)
    return FlipTrial(index, seed, pre_count, direction, quad.constraint_index, True, post)


def flip_experiment(
    params: Params,
    trials: int,
    *,
    guard=None,
    jobs: int = 1,
    counter: str = "backtracking",
) -> FlipReport:
    """Generate instances and measure the two-directional satisfiability flip.

    Only instances with exactly one solution enter the forward statistic;
    unsatisfiable instances enter the reverse statistic; everything else is
    excluded and counted. Output is a pure function of (params, trials,
    counter); the two counters produce identical reports.
    """
    if params.k != 2:
        raise ParameterError("flip experiment requires k = 2")
    if trials < 1:
        raise ParameterError("trials must be positive")
    if counter not in _COUNTERS:
        raise ParameterError(f"counter must be one of {_COUNTERS}, got {counter!r}")
    start = time.perf_counter()
    rows = parallel.run_trials(_flip_trial, (params, guard, counter), trials, jobs)

    forward = [t for t in rows if t.direction == "forward"]
    reverse = [t for t in rows if t.direction == "reverse"]
    fwd_mapped = [t for t in forward if t.quadruple_found]
    rev_mapped = [t for t in reverse if t.quadruple_found]
    return FlipReport(
        params=params,
        trials=trials,
        unique_solution_trials=len(forward),
        unsat_trials=len(reverse),
        excluded_trials=sum(1 for t in rows if t.direction == "excluded"),
        forward_mapped=len(fwd_mapped),
        forward_no_quadruple=len(forward) - len(fwd_mapped),
        forward_unsat_fraction=(
            sum(1 for t in fwd_mapped if t.post_count == 0) / len(fwd_mapped)
            if fwd_mapped
            else None
        ),
        forward_mean_post_count=(
            sum(t.post_count for t in fwd_mapped) / len(fwd_mapped) if fwd_mapped else None
        ),
        reverse_mapped=len(rev_mapped),
        reverse_no_quadruple=len(reverse) - len(rev_mapped),
        reverse_sat_fraction=(
            sum(1 for t in rev_mapped if t.post_count > 0) / len(rev_mapped)
            if rev_mapped
            else None
        ),
        per_trial=tuple(rows),
        wall_time_s=time.perf_counter() - start,
    )


def flip_report_to_dict(report: FlipReport, *, include_per_trial: bool = True) -> dict:
    # wall_time_s is deliberately excluded: serialized reports must be
    # byte-reproducible from (params, trials).
    out = {
        "params": params_to_dict(report.params),
        "trials": report.trials,
        "unique_solution_trials": report.unique_solution_trials,
        "unsat_trials": report.unsat_trials,
        "excluded_trials": report.excluded_trials,
        "forward_mapped": report.forward_mapped,
        "forward_no_quadruple": report.forward_no_quadruple,
        "forward_unsat_fraction": report.forward_unsat_fraction,
        "forward_mean_post_count": report.forward_mean_post_count,
        "reverse_mapped": report.reverse_mapped,
        "reverse_no_quadruple": report.reverse_no_quadruple,
        "reverse_sat_fraction": report.reverse_sat_fraction,
    }
    if include_per_trial:
        out["per_trial"] = [
            {
                "trial": t.trial,
                "seed": t.seed,
                "pre_count": t.pre_count,
                "direction": t.direction,
                "constraint_index": t.constraint_index,
                "quadruple_found": t.quadruple_found,
                "post_count": t.post_count,
            }
            for t in report.per_trial
        ]
    return out


def flip_report_to_json(report: FlipReport, *, include_per_trial: bool = True) -> str:
    return json.dumps(
        flip_report_to_dict(report, include_per_trial=include_per_trial),
        indent=2,
        sort_keys=True,
    ) + "\n"


def flip_report_to_csv(report: FlipReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["trial", "seed", "pre_count", "direction", "quadruple_found", "post_count"]
    )
    for t in report.per_trial:
        writer.writerow(
            [
                t.trial,
                t.seed,
                t.pre_count,
                t.direction,
                int(t.quadruple_found),
                "" if t.post_count is None else t.post_count,
            ]
        )
    writer.writerow(
        [
            "aggregate",
            report.trials,
            report.unique_solution_trials,
            "forward_unsat_fraction",
            "" if report.forward_unsat_fraction is None else report.forward_unsat_fraction,
            "" if report.reverse_sat_fraction is None else report.reverse_sat_fraction,
        ]
    )
    return buf.getvalue()
