"""Exhaustive counting oracle, instrumented backtracking, and restriction.

The oracle enumerates all d^n assignments with numpy (broadcast masks for
small spaces, chunked flat enumeration above that) and is the ground truth
every other component is checked against. The backtracking solver counts
one node per variable-value extension attempt so pruning effectiveness can
be compared across configurations.
"""

import json
from dataclasses import dataclass

import numpy as np

from .core import Constraint, GuardExceeded, Instance, ParameterError, Provenance

SAT = "SAT"
UNSAT = "UNSAT"

LEXICOGRAPHIC = "lexicographic"
MIN_REMAINING_VALUES = "min-remaining-values"

# Refuse exhaustive enumeration beyond this many assignments unless overridden.
DEFAULT_ORACLE_GUARD = 10**9

# Below this assignment count the oracle builds one (d,)*n boolean mask;
# above it, memory-bounded chunks of flat indices.
_BROADCAST_LIMIT = 1 << 26
_CHUNK = 1 << 20


@dataclass(frozen=True)
class SolverConfig:
    variable_order: str = LEXICOGRAPHIC
    forward_checking: bool = False
    count_all: bool = False

    def __post_init__(self):
        if self.variable_order not in (LEXICOGRAPHIC, MIN_REMAINING_VALUES):
            raise ParameterError(
                f"variable_order must be {LEXICOGRAPHIC!r} or "
                f"{MIN_REMAINING_VALUES!r}, got {self.variable_order!r}"
            )


@dataclass(frozen=True)
class SolveResult:
    status: str
    witness: tuple[int, ...] | None
    solution_count: int | None
    nodes_explored: int


def evaluate(instance: Instance, assignment) -> bool:
    """True iff the assignment satisfies every constraint."""
    values = tuple(assignment)
    if len(values) != instance.n:
        raise ParameterError(
            f"assignment has {len(values)} values, instance has {instance.n} variables"
        )
    if any(not 0 <= v < instance.d for v in values):
        raise ParameterError("assignment value out of domain range")
    return all(
        tuple(values[x] for x in c.scope) in c.relation for c in instance.constraints
    )


def check_guard(instance: Instance, guard) -> int:
    total = instance.d**instance.n
    limit = DEFAULT_ORACLE_GUARD if guard is None else guard
    if total > limit:
        raise GuardExceeded(
            f"d^n = {instance.d}^{instance.n} = {total} exceeds the oracle guard "
            f"({limit}); pass a larger guard to override"
        )
    if total > 2**62:
        raise GuardExceeded("d^n does not fit the flat enumeration index range")
    return total


def _constraint_table(c: Constraint, d: int) -> np.ndarray:
    """Boolean membership table with one axis per scope position."""
    tbl = np.zeros((d,) * c.arity, dtype=bool) if c.arity else np.zeros((), dtype=bool)
    for t in c.relation:
        tbl[t] = True
    return tbl


def _broadcast_mask(instance: Instance) -> np.ndarray:
    """Flat boolean mask over all d^n assignments, C order (variable 0 first)."""
    n, d = instance.n, instance.d
    mask = np.ones((d,) * n if n else (), dtype=bool)
    for c in instance.constraints:
        tbl = _constraint_table(c, d)
        if c.arity == 0:
            mask &= tbl
            continue
        order = sorted(range(c.arity), key=lambda j: c.scope[j])
        tbl = np.transpose(tbl, order)
        shape = [1] * n
        for j in order:
            shape[c.scope[j]] = d
        mask &= tbl.reshape(shape)
    return mask.reshape(-1)

def _chunked_scan(instance: Instance, total: int, collect_limit: int):
    """(count, collected flat indices) over chunks of flat assignment indices."""
    n, d = instance.n, instance.d
    weights = [d ** (n - 1 - x) for x in range(n)]
    tables = [
        (c, np.asarray(_constraint_table(c, d)).reshape(-1)) for c in instance.constraints
    ]
    count = 0
    collected: list[int] = []
    for lo in range(0, total, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for c, flat_tbl in tables:
            if c.arity == 0:
                if not flat_tbl[0]:
                    ok[:] = False
                continue
            proj = np.zeros(idx.shape, dtype=np.int64)
            for x in c.scope:
                proj = proj * d + (idx // weights[x]) % d
            ok &= flat_tbl[proj]
        count += int(ok.sum())
        if len(collected) < collect_limit:
            hits = idx[ok]
            collected.extend(int(h) for h in hits[: collect_limit - len(collected)])
    return count, collected


def _decode_assignment(flat: int, n: int, d: int) -> tuple[int, ...]:
    out = [0] * n
    for x in range(n - 1, -1, -1):
        flat, out[x] = divmod(flat, d)
    return tuple(out)


def _oracle_scan(instance: Instance, guard, collect_limit: int):
    total = check_guard(instance, guard)
    if total <= _BROADCAST_LIMIT:
        flat = _broadcast_mask(instance)
        count = int(np.count_nonzero(flat))
        if collect_limit and count:
            hits = np.flatnonzero(flat)[:collect_limit]
            collected = [int(h) for h in hits]
        else:
            collected = []
    else:
        count, collected = _chunked_scan(instance, total, collect_limit)
    return count, [_decode_assignment(f, instance.n, instance.d) for f in collected]


def count_solutions_exhaustive(instance: Instance, *, guard=None) -> int:
    """Exact satisfying-assignment count by full enumeration.

    Refuses d^n beyond the guard (default 10^9); pass ``guard`` to override.
    """
    count, _ = _oracle_scan(instance, guard, 0)
    return count


def find_solutions(instance: Instance, *, limit=None, guard=None) -> list[tuple[int, ...]]:
    """All satisfying assignments (or the first ``limit``), in lexicographic order."""
    total = instance.d**instance.n
    collect = total if limit is None else min(limit, total)
    _, solutions = _oracle_scan(instance, guard, collect)
    return solutions


def count_and_unique_witness(instance: Instance, *, guard=None):
    """(exact count, the solution if the count is exactly 1 else None)."""
    count, solutions = _oracle_scan(instance, guard, 1)
    return count, (solutions[0] if count == 1 else None)


def solve_backtracking(instance: Instance, config: SolverConfig | None = None) -> SolveResult:
    """Depth-first search with optional forward checking and exact counting.

    A node is one variable-value extension attempt. With forward checking,
    assigning a variable filters the domain of any constraint's single
    remaining unassigned variable; a wiped-out domain backtracks
    immediately. Status and counts agree exactly with the exhaustive
    oracle on any instance where both run.
    """
    cfg = config or SolverConfig()
    n, d = instance.n, instance.d

    live: list[Constraint] = []
    for c in instance.constraints:
        if c.arity == 0:
            if () not in c.relation:
                return SolveResult(UNSAT, None, 0 if cfg.count_all else None, 0)
        else:
            live.append(c)

    by_var: list[list[Constraint]] = [[] for _ in range(n)]
    for c in live:
        for x in c.scope:
            by_var[x].append(c)

    domains = [set(range(d)) for _ in range(n)]
    assignment: list[int | None] = [None] * n
    use_mrv = cfg.variable_order == MIN_REMAINING_VALUES
    use_fc = cfg.forward_checking
    nodes = 0
    count = 0
    witness: tuple[int, ...] | None = None

    def pick_var() -> int:
        free = (x for x in range(n) if assignment[x] is None)
        if use_mrv:
            return min(free, key=lambda x: (len(domains[x]), x))
        return next(free)

    def consistent(var: int) -> bool:
        for c in by_var[var]:
            vals = []
            for x in c.scope:
                v = assignment[x]
                if v is None:
                    break
                vals.append(v)
            else:
                if tuple(vals) not in c.relation:
                    return False
        return True

    def forward_prune(var: int):
        """Filter single-unassigned-variable constraints; (trail, wiped_out)."""
        trail: list[tuple[int, set[int]]] = []
        for c in by_var[var]:
            pending = [x for x in c.scope if assignment[x] is None]
            if len(pending) != 1:
                continue
            u = pending[0]
            pos = c.scope.index(u)
            template = [assignment[x] for x in c.scope]
            allowed = set()
            for w in domains[u]:
                template[pos] = w
                if tuple(template) in c.relation:
                    allowed.add(w)
            removed = domains[u] - allowed
            if removed:
                domains[u] -= removed
                trail.append((u, removed))
                if not domains[u]:
                    return trail, True
        return trail, False

    def undo(trail) -> None:
        for u, removed in trail:
            domains[u] |= removed

    def extend(depth: int) -> bool:
        nonlocal nodes, count, witness
        if depth == n:
            count += 1
            if witness is None:
                witness = tuple(assignment)  # type: ignore[arg-type]
            return not cfg.count_all
        var = pick_var()
        for v in sorted(domains[var]):
            nodes += 1
            assignment[var] = v
            trail: list = []
            ok = consistent(var)
            if ok and use_fc:
                trail, wiped = forward_prune(var)
                ok = not wiped
            if ok and extend(depth + 1):
                return True
            undo(trail)
            assignment[var] = None
        return False

    extend(0)
    return SolveResult(
        status=SAT if count else UNSAT,
        witness=witness,
        solution_count=count if cfg.count_all else None,
        nodes_explored=nodes,
    )


def restrict(instance: Instance, var: int, value: int) -> Instance:
    """Fix one variable to one value and slice it out of every constraint.

    Variables above ``var`` shift down by one. Constraints containing the
    variable drop one arity; an empty slice stays as an explicit
    empty-relation constraint marking the subproblem unsatisfiable.
    """
    if not 0 <= var < instance.n:
        raise IndexError(f"variable index {var} out of range [0, {instance.n})")
    if not 0 <= value < instance.d:
        raise IndexError(f"domain value {value} out of range [0, {instance.d})")

    def shift(x: int) -> int:
        return x - 1 if x > var else x

    constraints = []
    for c in instance.constraints:
        if var in c.scope:
            pos = c.scope.index(var)
            constraints.append(
                Constraint(
                    scope=tuple(shift(x) for x in c.scope if x != var),
                    relation=frozenset(
                        t[:pos] + t[pos + 1 :] for t in c.relation if t[pos] == value
                    ),
                )
            )
        else:
            constraints.append(
                Constraint(scope=tuple(shift(x) for x in c.scope), relation=c.relation)
            )
    return Instance(
        n=instance.n - 1,
        d=instance.d,
        k=instance.k,
        constraints=tuple(constraints),
        provenance=Provenance(variant="restricted"),
    )


@dataclass(frozen=True)
class ConstraintProfile:
    """What restrict(instance, var, .) would do to the constraint list."""

    count_arity_k_minus_1: int
    count_arity_k: int
    slice_sizes: tuple[int, ...]


def subproblem_constraint_profile(instance: Instance, var: int) -> ConstraintProfile:
    """Projected-vs-copied constraint counts plus per-value slice sizes.

    slice_sizes holds, for each constraint containing ``var`` (in order) and
    each domain value, the number of permitted tuples consistent with that
    value; the mean slice size over d^(arity-1) estimates the permitted
    fraction 1 - p.
    """
    if not 0 <= var < instance.n:
        raise IndexError(f"variable index {var} out of range [0, {instance.n})")
    projected = 0
    copied = 0
    slice_sizes: list[int] = []
    for c in instance.constraints:
        if var not in c.scope:
            copied += 1
            continue
        projected += 1
        pos = c.scope.index(var)
        counts = [0] * instance.d
        for t in c.relation:
            counts[t[pos]] += 1
        slice_sizes.extend(counts)
    return ConstraintProfile(
        count_arity_k_minus_1=projected,
        count_arity_k=copied,
        slice_sizes=tuple(slice_sizes),
    )


def solve_result_to_dict(result: SolveResult) -> dict:
    out: dict = {"status": result.status, "nodes_explored": result.nodes_explored}
    if result.witness is not None:
        out["witness"] = list(result.witness)
    if result.solution_count is not None:
        out["solution_count"] = result.solution_count
    return out


def solve_result_to_json(result: SolveResult) -> str:
    return json.dumps(solve_result_to_dict(result), sort_keys=True)
