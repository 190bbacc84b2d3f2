"""Monte Carlo experiments with standard errors and theoretical references.

Each experiment generates independent instances from per-trial derived
seeds, measures one quantity, and reports the estimate, its standard
error, and the relevant reference value. Exact finite-n facts (the
expectation formula, the Markov bound, the restriction partition) are
asserted; asymptotic statements are only reported for trend inspection,
never hard-failed at desk scale.
"""

import csv
import io
import json
import math
import time
from dataclasses import dataclass

from .core import (
    GuardExceeded,
    ParameterError,
    Params,
    derive_dimensions,
    expected_solution_count,
    generate_instance,
    params_to_dict,
    trial_params,
)
from .rng import SplitMix64, derive_seed
from .solver import (
    SolverConfig,
    count_solutions_exhaustive,
    restrict,
    solve_backtracking,
)
from . import parallel

DEFAULT_TRIALS = 2000


class BoundViolation(RuntimeError):
    """An exact probabilistic bound failed beyond its 3-sigma tolerance."""


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregate of one experiment: estimate vs theory, plus trial records.

    ``theory`` carries the primary reference value and ``theory_formula``
    names it; ``references`` holds secondary reference values (asymptotic
    windows, medians, bounds) that are reported but not asserted.
    """

    name: str
    params: Params
    trials: int
    estimate: float
    stderr: float
    theory: float
    theory_formula: str
    references: dict
    per_trial: tuple[dict, ...] | None
    wall_time_s: float

    def __post_init__(self):
        if self.trials < 2:
            raise ParameterError("experiments need at least 2 trials for a stderr")


def _mean_stderr(values) -> tuple[float, float]:
    xs = list(values)
    count = len(xs)
    mean = sum(xs) / count
    var = sum((x - mean) ** 2 for x in xs) / (count - 1)
    return mean, math.sqrt(var / count)


def _sat_prob_trial(params: Params, guard, generator, index: int) -> dict:
    tp = trial_params(params, index)
    instance = (generator or generate_instance)(tp)
    count = count_solutions_exhaustive(instance, guard=guard)
    return {"trial": index, "seed": tp.seed, "solution_count": count,
            "satisfiable": int(count > 0)}


def _sub_prob_trial(params: Params, guard, fixed_variable, index: int) -> dict:
    tp = trial_params(params, index)
    instance = generate_instance(tp)
    rng = SplitMix64(derive_seed(params.seed, "restrict", index))
    var = rng.below(instance.n) if fixed_variable is None else fixed_variable
    value = rng.below(instance.d)
    sub = restrict(instance, var, value)
    count = count_solutions_exhaustive(sub, guard=guard)
    return {"trial": index, "seed": tp.seed, "variable": var, "value": value,
            "sub_count": count, "satisfiable": int(count > 0)}


def _bench_trial(params: Params, guard, index: int) -> dict:
    tp = trial_params(params, index)
    instance = generate_instance(tp)
    total = instance.d**instance.n
    limit = 10**9 if guard is None else guard
    if total > limit:
        raise GuardExceeded(f"d^n = {total} exceeds the benchmark guard ({limit})")
    plain = solve_backtracking(instance, SolverConfig(forward_checking=False))
    checked = solve_backtracking(instance, SolverConfig(forward_checking=True))
    return {"trial": index, "seed": tp.seed, "status": checked.status,
            "nodes_plain": plain.nodes_explored, "nodes_fc": checked.nodes_explored}


def _finish(name, params, trials, rows, estimate, stderr, theory, formula,
            references, keep_per_trial, start) -> ExperimentReport:
    return ExperimentReport(
        name=name,
        params=params,
        trials=trials,
        estimate=estimate,
        stderr=stderr,
        theory=theory,
        theory_formula=formula,
        references=references,
        per_trial=tuple(rows) if keep_per_trial else None,
        wall_time_s=time.perf_counter() - start,
    )


def estimate_sat_probability(
    params: Params,
    trials: int = DEFAULT_TRIALS,
    *,
    guard=None,
    jobs: int = 1,
    keep_per_trial: bool = True,
    generator=None,
) -> ExperimentReport:
    """Fraction of generated instances the oracle finds satisfiable.

    Theory is the Markov bound min(1, E[solutions]), exact at every n; the
    asymptotic satisfiability window [1/3, 1/2] is attached as a reference
    only, since it is a limit statement.
    """
    start = time.perf_counter()
    rows = parallel.run_trials(_sat_prob_trial, (params, guard, generator), trials, jobs)
    estimate, stderr = _mean_stderr(r["satisfiable"] for r in rows)
    expected = expected_solution_count(params)
    return _finish(
        "sat_probability", params, trials, rows, estimate, stderr,
        min(1.0, expected), "markov: min(1, d^n * (relation_size/d^k)^m)",
        {
            "expected_solution_count": expected,
            "asymptotic_window_low": 1.0 / 3.0,
            "asymptotic_window_high": 0.5,
        },
        keep_per_trial, start,
    )


def estimate_mean_solution_count(
    params: Params,
    trials: int = DEFAULT_TRIALS,
    *,
    guard=None,
    jobs: int = 1,
    keep_per_trial: bool = True,
    generator=None,
) -> ExperimentReport:
    """Mean exact solution count over generated instances.

    Theory is the realized expectation d^n * (relation_size/d^k)^m, exact
    at all n; this is the strongest exact check the ensemble admits.
    """
    start = time.perf_counter()
    rows = parallel.run_trials(_sat_prob_trial, (params, guard, generator), trials, jobs)
    estimate, stderr = _mean_stderr(r["solution_count"] for r in rows)
    return _finish(
        "mean_solution_count", params, trials, rows, estimate, stderr,
        expected_solution_count(params), "d^n * (relation_size/d^k)^m",
        {}, keep_per_trial, start,
    )


def estimate_subproblem_sat_probability(
    params: Params,
    trials: int = DEFAULT_TRIALS,
    *,
    guard=None,
    jobs: int = 1,
    keep_per_trial: bool = True,
    fixed_variable: int | None = None,
) -> ExperimentReport:
    """Satisfiability frequency of one-variable restrictions.

    Per trial: generate, fix a uniformly chosen variable to a uniformly
    chosen value, oracle-decide the subproblem. Theory is E[solutions]/d
    (exact, since the d restrictions of one variable partition the parent's
    solution set); the estimate must stay below theory + 3 stderr, and a
    violation raises BoundViolation. ``fixed_variable`` pins the restricted
    variable for variance reduction.
    """
    start = time.perf_counter()
    dims = derive_dimensions(params)
    if fixed_variable is not None and not 0 <= fixed_variable < params.n:
        raise ParameterError(f"fixed_variable {fixed_variable} out of range")
    rows = parallel.run_trials(
        _sub_prob_trial, (params, guard, fixed_variable), trials, jobs
    )
    estimate, stderr = _mean_stderr(r["satisfiable"] for r in rows)
    expected = expected_solution_count(params)
    theory = expected / dims.d
    report = _finish(
        "subproblem_sat_probability", params, trials, rows, estimate, stderr,
        theory, "expected_solution_count / d",
        {
            "expected_solution_count": expected,
            "calibrated_reference_half_over_d": 0.5 / dims.d,
        },
        keep_per_trial, start,
    )
    if estimate > theory + 3.0 * stderr:
        raise BoundViolation(
            f"subproblem sat frequency {estimate:.4f} exceeds the Markov bound "
            f"{theory:.4f} + 3 * {stderr:.4f}"
        )
    return report


def pruning_benchmark(
    params: Params,
    trials: int = DEFAULT_TRIALS,
    *,
    guard=None,
    jobs: int = 1,
    keep_per_trial: bool = True,
) -> ExperimentReport:
    """Search-tree size with and without forward checking, vs enumeration.

    The estimate is the mean ratio of forward-checking nodes to the d^n
    enumeration reference; medians and means of both configurations are
    attached. No asymptotic claim is asserted.
    """
    start = time.perf_counter()
    dims = derive_dimensions(params)
    enumeration = dims.d**params.n
    rows = parallel.run_trials(_bench_trial, (params, guard), trials, jobs)
    estimate, stderr = _mean_stderr(r["nodes_fc"] / enumeration for r in rows)
    plain_nodes = sorted(r["nodes_plain"] for r in rows)
    fc_nodes = sorted(r["nodes_fc"] for r in rows)
    mid = trials // 2
    return _finish(
        "pruning_benchmark", params, trials, rows, estimate, stderr,
        1.0, "full enumeration: d^n / d^n",
        {
            "enumeration_assignments": float(enumeration),
            "median_nodes_plain": float(plain_nodes[mid]),
            "median_nodes_forward_checking": float(fc_nodes[mid]),
            "mean_nodes_plain": sum(plain_nodes) / trials,
            "mean_nodes_forward_checking": sum(fc_nodes) / trials,
        },
        keep_per_trial, start,
    )


def report_to_dict(report: ExperimentReport, *, include_per_trial: bool = True) -> dict:
    # wall_time_s is deliberately excluded: serialized reports must be
    # byte-reproducible from (params, trials).
    out = {
        "name": report.name,
        "params": params_to_dict(report.params),
        "trials": report.trials,
        "estimate": report.estimate,
        "stderr": report.stderr,
        "theory": report.theory,
        "theory_formula": report.theory_formula,
        "references": dict(report.references),
    }
    if include_per_trial and report.per_trial is not None:
        out["per_trial"] = [dict(r) for r in report.per_trial]
    return out


def report_to_json(report: ExperimentReport, *, include_per_trial: bool = True) -> str:
    return json.dumps(
        report_to_dict(report, include_per_trial=include_per_trial),
        indent=2,
        sort_keys=True,
    ) + "\n"


def report_to_csv(report: ExperimentReport) -> str:
    """One row per trial plus a footer row of per-column means."""
    if report.per_trial is None:
        raise ParameterError("report was built without per-trial records")
    columns = list(report.per_trial[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in report.per_trial:
        writer.writerow([row[c] for c in columns])
    footer = []
    for c in columns:
        if c == "trial":
            footer.append("aggregate")
        elif c == "seed":
            footer.append(report.trials)
        else:
            values = [row[c] for row in report.per_trial]
            if all(isinstance(v, (int, float)) for v in values):
                footer.append(sum(values) / len(values))
            else:
                footer.append("")
    writer.writerow(footer)
    return buf.getvalue()
