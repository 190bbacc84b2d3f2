"""Command-line entry point: reproducible runs of every library operation.

The CLI is a thin shell: it parses flags, calls the library, writes the
artifact files, and prints a single-line JSON summary to stdout. Exit
status 0 on success, 2 on validation errors, 3 on guard violations.
Relative output paths resolve under $RBLAB_OUT_DIR when it is set.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .core import (
    GuardExceeded,
    ParameterError,
    Params,
    calibrate_r,
    derive_dimensions,
    generate_instance,
    generate_instance_symmetric,
    read_instance,
    write_instance,
)
from .encoder import encode_direct, write_dimacs
from .experiments import (
    BoundViolation,
    estimate_mean_solution_count,
    estimate_sat_probability,
    estimate_subproblem_sat_probability,
    pruning_benchmark,
    report_to_csv,
    report_to_json,
)
from .solver import (
    SolverConfig,
    count_solutions_exhaustive,
    restrict,
    solve_backtracking,
    solve_result_to_dict,
)
from .symmetry import (
    apply_symmetry_mapping,
    find_symmetry_quadruple,
    flip_experiment,
    flip_report_to_csv,
    flip_report_to_dict,
    flip_report_to_json,
)


def _add_params_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="number of variables")
    parser.add_argument("--alpha", type=float, required=True, help="domain growth exponent")
    parser.add_argument(
        "--r", default="auto",
        help="constraint density; 'auto' calibrates the expected solution count to 1/2",
    )
    parser.add_argument("--p", type=float, required=True, help="constraint tightness in (0,1)")
    parser.add_argument("--k", type=int, default=2, help="constraint arity (default 2)")
    parser.add_argument("--seed", type=int, required=True, help="64-bit master seed")


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", help="report file path")
    parser.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    parser.add_argument("--per-trial", action="store_true",
                        help="include per-trial records in JSON reports")
    parser.add_argument("--force", action="store_true",
                        help="override the d^n size guard")


def _params_from_args(args) -> Params:
    if args.r == "auto":
        r = calibrate_r(args.n, args.alpha, args.p)
    else:
        try:
            r = float(args.r)
        except ValueError:
            raise ParameterError(f"--r must be a number or 'auto', got {args.r!r}")
    return Params(n=args.n, alpha=args.alpha, r=r, p=args.p, k=args.k, seed=args.seed)


def _guard(args):
    return math.inf if args.force else None


def _resolve_out(path_str: str) -> Path:
    path = Path(path_str)
    if not path.is_absolute():
        base = os.environ.get("RBLAB_OUT_DIR")
        if base:
            path = Path(base) / path
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def _write_report(report, args, to_json, to_csv) -> str | None:
    if not args.out:
        return None
    path = _resolve_out(args.out)
    if args.format == "csv":
        path.write_text(to_csv(report))
    else:
        path.write_text(to_json(report, include_per_trial=args.per_trial))
    return str(path)


def _cmd_generate(args) -> int:
    params = _params_from_args(args)
    dims = derive_dimensions(params)
    if args.variant == "symmetric":
        instance = generate_instance_symmetric(params)
    else:
        instance = generate_instance(params)
    path = _resolve_out(args.out)
    write_instance(instance, path)
    _emit({
        "command": "generate", "out": str(path), "variant": args.variant,
        "n": instance.n, "d": instance.d, "k": instance.k, "m": instance.m,
        "relation_size": dims.relation_size, "r": params.r, "seed": params.seed,
    })
    return 0


def _cmd_solve(args) -> int:
    instance = read_instance(args.infile)
    config = SolverConfig(
        variable_order=args.order,
        forward_checking=args.forward_checking,
        count_all=args.count_all,
    )
    result = solve_backtracking(instance, config)
    summary = {"command": "solve", **solve_result_to_dict(result)}
    if args.out:
        path = _resolve_out(args.out)
        path.write_text(json.dumps(solve_result_to_dict(result), sort_keys=True) + "\n")
        summary["out"] = str(path)
    _emit(summary)
    return 0


def _cmd_count(args) -> int:
    instance = read_instance(args.infile)
    count = count_solutions_exhaustive(instance, guard=_guard(args))
    _emit({
        "command": "count", "solution_count": count,
        "assignments": instance.d**instance.n,
    })
    return 0


def _cmd_restrict(args) -> int:
    instance = read_instance(args.infile)
    sub = restrict(instance, args.var, args.value)
    path = _resolve_out(args.out)
    write_instance(sub, path)
    _emit({
        "command": "restrict", "out": str(path), "var": args.var,
        "value": args.value, "n": sub.n, "m": sub.m,
    })
    return 0


def _cmd_symmap(args) -> int:
    instance = read_instance(args.infile)
    anchor = tuple(args.anchor) if args.anchor else None
    quad = find_symmetry_quadruple(instance, args.constraint, anchor)
    if quad is None:
        raise ParameterError(
            f"no symmetry quadruple on constraint {args.constraint} (--constraint)"
        )
    mapped = apply_symmetry_mapping(instance, quad, full_row_swap=args.row_swap)
    path = _resolve_out(args.out)
    write_instance(mapped, path)
    _emit({
        "command": "symmap", "out": str(path), "constraint": quad.constraint_index,
        "u1": quad.u1, "u2": quad.u2, "v1": quad.v1, "v2": quad.v2,
        "row_swap": args.row_swap,
    })
    return 0


def _cmd_flip(args) -> int:
    params = _params_from_args(args)
    report = flip_experiment(params, args.trials, guard=_guard(args), jobs=args.jobs)
    out = _write_report(report, args, flip_report_to_json, lambda r: flip_report_to_csv(r))
    summary = {
        "command": "flip",
        **{k: v for k, v in flip_report_to_dict(report, include_per_trial=False).items()
           if k != "params"},
    }
    if out:
        summary["out"] = out
    _emit(summary)
    return 0


def _run_experiment(args, runner, name, **kwargs) -> int:
    params = _params_from_args(args)
    report = runner(params, args.trials, guard=_guard(args), jobs=args.jobs, **kwargs)
    out = _write_report(report, args, report_to_json, report_to_csv)
    summary = {
        "command": name, "trials": report.trials, "estimate": report.estimate,
        "stderr": report.stderr, "theory": report.theory,
        "theory_formula": report.theory_formula, "references": report.references,
    }
    if out:
        summary["out"] = out
    _emit(summary)
    return 0


def _cmd_encode(args) -> int:
    instance = read_instance(args.infile)
    cnf = encode_direct(instance)
    path = _resolve_out(args.out)
    path.write_text(write_dimacs(cnf))
    _emit({
        "command": "encode", "out": str(path), "num_vars": cnf.num_vars,
        "clauses": len(cnf.clauses),
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rblab",
        description="Random binary-CSP laboratory: generate, solve, rewire, measure, encode.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate an instance and write it as JSON")
    _add_params_flags(p)
    p.add_argument("--variant", choices=("uniform", "symmetric"), default="uniform")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="run the backtracking solver on an instance file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--order", choices=("lexicographic", "min-remaining-values"),
                   default="lexicographic")
    p.add_argument("--forward-checking", action="store_true")
    p.add_argument("--count-all", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("count", help="exhaustively count solutions of an instance file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("restrict", help="fix one variable to one value")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--var", type=int, required=True)
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_restrict)

    p = sub.add_parser("symmap", help="find a symmetry quadruple and apply the rewiring")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--constraint", type=int, required=True)
    p.add_argument("--anchor", type=int, nargs=2, metavar=("U1", "V1"))
    p.add_argument("--row-swap", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_symmap)

    p = sub.add_parser("flip", help="satisfiability-flip experiment")
    _add_params_flags(p)
    _add_experiment_flags(p)
    p.set_defaults(func=_cmd_flip)

    p = sub.add_parser("sat-prob", help="estimate the satisfiability probability")
    _add_params_flags(p)
    _add_experiment_flags(p)
    p.set_defaults(func=lambda a: _run_experiment(a, estimate_sat_probability, "sat-prob"))

    p = sub.add_parser("mean-count", help="estimate the mean solution count")
    _add_params_flags(p)
    _add_experiment_flags(p)
    p.set_defaults(func=lambda a: _run_experiment(a, estimate_mean_solution_count, "mean-count"))

    p = sub.add_parser("sub-prob", help="estimate subproblem satisfiability after restriction")
    _add_params_flags(p)
    _add_experiment_flags(p)
    p.add_argument("--fixed-var", type=int, default=None,
                   help="always restrict this variable (variance reduction)")
    p.set_defaults(func=lambda a: _run_experiment(
        a, estimate_subproblem_sat_probability, "sub-prob", fixed_variable=a.fixed_var))

    p = sub.add_parser("bench", help="search-node benchmark with and without forward checking")
    _add_params_flags(p)
    _add_experiment_flags(p)
    p.set_defaults(func=lambda a: _run_experiment(a, pruning_benchmark, "bench"))

    p = sub.add_parser("encode", help="write the direct CNF encoding as DIMACS")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BoundViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
