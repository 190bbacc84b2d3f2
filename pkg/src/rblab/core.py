"""Domain types and the Model RB random instance generator.

Model RB instances live on n variables sharing the domain {0, ..., d-1}
with d = round(n^alpha). There are m = round(r * n * ln d) constraints;
each binds k distinct variables chosen uniformly and permits a uniform
random set of round((1-p) * d^k) distinct value tuples. Two generator
variants exist: ``generate_instance`` draws every relation independently,
while ``generate_instance_symmetric`` derives all relations from one
shared base set by permuting the value coordinates of every scope
position except the first.

Rounding is half-away-from-zero everywhere, the permitted-tuple count is
clamped into [1, d^k - 1] so constraints are never empty or full at birth,
and every exact formula uses the realized (post-rounding) quantities, not
the nominal parameters.
"""

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .rng import SplitMix64, derive_seed

# Tuple indices (and hence d^k) must fit in a signed 64-bit integer so the
# samplers and the vectorized oracle can use fixed-width arithmetic.
MAX_TUPLE_INDEX = 2**63 - 1

SCHEMA_VERSION = 1


class ParameterError(ValueError):
    """Invalid parameters, malformed artifacts, or violated preconditions."""


class GuardExceeded(RuntimeError):
    """Work refused because a size guard tripped (override to proceed)."""


def _round_half_away(x: float) -> int:
    """Round half away from zero; valid for the non-negative inputs used here."""
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class Params:
    """The five ensemble constants plus the master seed.

    n: number of variables; alpha: domain growth exponent (d = round(n^alpha));
    r: constraint density (m = round(r * n * ln d)); p: constraint tightness,
    the nominal fraction of forbidden tuples; k: constraint arity; seed:
    64-bit master seed, the single source of randomness.
    """

    n: int
    alpha: float
    r: float
    p: float
    k: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not self.r > 0:
            raise ParameterError(f"r must be positive, got {self.r}")
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie strictly in (0, 1), got {self.p}")
        if self.k < 2:
            raise ParameterError(f"k must be at least 2, got {self.k}")
        if self.k > self.n:
            raise ParameterError(f"k={self.k} exceeds the variable count n={self.n}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class Dimensions:
    """Realized integer dimensions derived from Params."""

    d: int
    m: int
    relation_size: int
    realized_tightness: float


@dataclass(frozen=True)
class Constraint:
    """An ordered scope of distinct variables and the permitted value tuples."""

    scope: tuple[int, ...]
    relation: frozenset[tuple[int, ...]]

    @property
    def arity(self) -> int:
        return len(self.scope)

    def sorted_relation(self) -> tuple[tuple[int, ...], ...]:
        """Permitted tuples in canonical (lexicographic) order."""
        return tuple(sorted(self.relation))


@dataclass(frozen=True)
class Provenance:
    """How an instance came to be: generator variant, params, base relation."""

    variant: str
    params: Params | None = None
    base_relation: tuple[tuple[int, ...], ...] | None = None


HANDCRAFTED = Provenance(variant="handcrafted")


@dataclass(frozen=True)
class Instance:
    """A concrete CSP: n variables over {0..d-1} and a list of constraints.

    k is the nominal generator arity; restriction produces instances whose
    individual constraints may have smaller arity (including empty scopes).
    """

    n: int
    d: int
    k: int
    constraints: tuple[Constraint, ...]
    provenance: Provenance = HANDCRAFTED

    @property
    def m(self) -> int:
        return len(self.constraints)


# An assignment is a plain tuple of n domain values, variable 0 first.
Assignment = tuple[int, ...]


def derive_dimensions(params: Params) -> Dimensions:
    """Realize d, m, relation size, and the post-rounding tightness.

    d = max(2, round(n^alpha)); m = max(1, round(r*n*ln d)); the permitted
    set size is round((1-p)*d^k) clamped into [1, d^k - 1].
    """
    d = max(2, _round_half_away(params.n**params.alpha))
    space = d**params.k
    if space > MAX_TUPLE_INDEX:
        raise ParameterError(
            f"d^k = {d}^{params.k} exceeds the tuple-index range (2^63 - 1)"
        )
    m = max(1, _round_half_away(params.r * params.n * math.log(d)))
    relation_size = min(max(_round_half_away((1.0 - params.p) * space), 1), space - 1)
    return Dimensions(
        d=d,
        m=m,
        relation_size=relation_size,
        realized_tightness=1.0 - relation_size / space,
    )


def calibrate_r(n: int, alpha: float, p: float) -> float:
    """Constraint density that puts the analytic expected solution count at 1/2.

    Solves d^n * (1-p)^(r*n*ln d) = 1/2 for r using the realized d, giving
    r = (n*ln d + ln 2) / (n*ln d * (-ln(1-p))). Rounding m to an integer
    afterwards moves the realized expectation off 1/2 slightly.
    """
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie strictly in (0, 1), got {p}")
    d = max(2, _round_half_away(n**alpha))
    n_ln_d = n * math.log(d)
    return (n_ln_d + math.log(2.0)) / (n_ln_d * -math.log1p(-p))


def expected_solution_count(params: Params) -> float:
    """Exact expected number of solutions under the generator.

    Computes d^n * (relation_size/d^k)^m with realized quantities, in log
    space to dodge overflow. This is exact at every n because a fixed
    assignment satisfies each constraint independently with probability
    relation_size/d^k.
    """
    dims = derive_dimensions(params)
    log_count = params.n * math.log(dims.d) + dims.m * (
        math.log(dims.relation_size) - params.k * math.log(dims.d)
    )
    try:
        return math.exp(log_count)
    except OverflowError:
        return math.inf


def _decode_tuple(index: int, d: int, arity: int) -> tuple[int, ...]:
    """Mixed-radix decode; scope position 0 is the most significant digit."""
    out = [0] * arity
    for j in range(arity - 1, -1, -1):
        index, out[j] = divmod(index, d)
    return tuple(out)


def _sample_scope(seed: int, index: int, n: int, k: int) -> tuple[int, ...]:
    rng = SplitMix64(derive_seed(seed, "scope", index))
    return tuple(sorted(rng.sample(n, k)))


def _sample_relation(seed: int, index: int, space: int, size: int, d: int, k: int):
    rng = SplitMix64(derive_seed(seed, "relation", index))
    return frozenset(_decode_tuple(ix, d, k) for ix in rng.sample(space, size))


def generate_instance(params: Params) -> Instance:
    """Draw an instance with independent uniform scopes and relations.

    Pure function of Params: identical params (including seed) give a
    structurally identical instance. Duplicate scopes across constraints
    are permitted; tuples within one relation are distinct by construction.
    """
    dims = derive_dimensions(params)
    space = dims.d**params.k
    constraints = tuple(
        Constraint(
            scope=_sample_scope(params.seed, i, params.n, params.k),
            relation=_sample_relation(
                params.seed, i, space, dims.relation_size, dims.d, params.k
            ),
        )
        for i in range(dims.m)
    )
    return Instance(
        n=params.n,
        d=dims.d,
        k=params.k,
        constraints=constraints,
        provenance=Provenance(variant="uniform", params=params),
    )


def generate_instance_symmetric(
    params: Params, *, force_identity_permutations: bool = False
) -> Instance:
    """Draw an instance whose relations share one base tuple set.

    A single base set of relation_size tuples is drawn first; each
    constraint's relation is its image under independent uniform
    permutations of the value coordinates at every scope position except
    position 0. ``force_identity_permutations`` is a test hook that makes
    every relation equal the base set.
    """
    dims = derive_dimensions(params)
    space = dims.d**params.k
    base_rng = SplitMix64(derive_seed(params.seed, "base", 0))
    base = tuple(
        sorted(
            _decode_tuple(ix, dims.d, params.k)
            for ix in base_rng.sample(space, dims.relation_size)
        )
    )
    identity = tuple(range(dims.d))
    constraints = []
    for i in range(dims.m):
        scope = _sample_scope(params.seed, i, params.n, params.k)
        if force_identity_permutations:
            perms = [identity] * (params.k - 1)
        else:
            perm_rng = SplitMix64(derive_seed(params.seed, "perm", i))
            perms = [perm_rng.permutation(dims.d) for _ in range(params.k - 1)]
        relation = frozenset(
            (t[0], *(perms[j - 1][t[j]] for j in range(1, params.k))) for t in base
        )
        constraints.append(Constraint(scope=scope, relation=relation))
    return Instance(
        n=params.n,
        d=dims.d,
        k=params.k,
        constraints=tuple(constraints),
        provenance=Provenance(variant="symmetric", params=params, base_relation=base),
    )


def validate_instance(instance: Instance) -> None:
    """Check structural invariants; raises ParameterError on violation.

    Empty relations are tolerated because restriction can produce them;
    the generators themselves never emit one.
    """
    if instance.n < 0 or instance.d < 1:
        raise ParameterError(f"bad dimensions n={instance.n}, d={instance.d}")
    for ci, c in enumerate(instance.constraints):
        if len(set(c.scope)) != len(c.scope):
            raise ParameterError(f"constraint {ci}: scope has repeated variables")
        if any(not 0 <= x < instance.n for x in c.scope):
            raise ParameterError(f"constraint {ci}: scope variable out of range")
        for t in c.relation:
            if len(t) != len(c.scope):
                raise ParameterError(f"constraint {ci}: tuple arity mismatch")
            if any(not 0 <= v < instance.d for v in t):
                raise ParameterError(f"constraint {ci}: tuple value out of range")


# ---------------------------------------------------------------------------
# Instance file format (versioned JSON; write -> read is identity)

def params_to_dict(params: Params) -> dict:
    return {
        "n": params.n,
        "alpha": params.alpha,
        "r": params.r,
        "p": params.p,
        "k": params.k,
        "seed": params.seed,
    }


def params_from_dict(data: dict) -> Params:
    return Params(
        n=data["n"],
        alpha=data["alpha"],
        r=data["r"],
        p=data["p"],
        k=data["k"],
        seed=data["seed"],
    )


def instance_to_dict(instance: Instance) -> dict:
    prov = instance.provenance
    return {
        "version": SCHEMA_VERSION,
        "n": instance.n,
        "d": instance.d,
        "k": instance.k,
        "constraints": [
            {"scope": list(c.scope), "relation": [list(t) for t in c.sorted_relation()]}
            for c in instance.constraints
        ],
        "provenance": {
            "variant": prov.variant,
            "params": params_to_dict(prov.params) if prov.params else None,
            "base_relation": (
                [list(t) for t in prov.base_relation] if prov.base_relation else None
            ),
        },
    }


def instance_from_dict(data: dict) -> Instance:
    if data.get("version") != SCHEMA_VERSION:
        raise ParameterError(f"unsupported instance schema version: {data.get('version')}")
    prov_data = data["provenance"]
    provenance = Provenance(
        variant=prov_data["variant"],
        params=params_from_dict(prov_data["params"]) if prov_data.get("params") else None,
        base_relation=(
            tuple(tuple(t) for t in prov_data["base_relation"])
            if prov_data.get("base_relation")
            else None
        ),
    )
    instance = Instance(
        n=data["n"],
        d=data["d"],
        k=data["k"],
        constraints=tuple(
            Constraint(
                scope=tuple(c["scope"]),
                relation=frozenset(tuple(t) for t in c["relation"]),
            )
            for c in data["constraints"]
        ),
        provenance=provenance,
    )
    validate_instance(instance)
    return instance


def instance_to_json(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n"


def instance_from_json(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(instance_to_json(instance))


def read_instance(path) -> Instance:
    return instance_from_json(Path(path).read_text())


def trial_params(params: Params, index: int) -> Params:
    """Params for one experiment trial: the seed is re-derived per index."""
    return replace(params, seed=derive_seed(params.seed, "trial", index))
