"""Instance generation and brute-force ground truth for finite problems.

The generator's main mode builds instances whose unique common fixed point
is known by construction.  It draws a profile rho of positive distances to
a chosen anchor point, sets d(x, y) = max(rho[x], rho[y]) for x != y (an
ultrametric, assembled without arithmetic so the table is exact in
floats), and uses descent mappings that always move to a point whose rho
is at most phi times the current one.  The contractive condition then
holds with margin exactly <= 0 in float evaluation, every orbit walks down
to the anchor, and the oracle answer is the anchor itself.  Brute-force
enumeration double-checks each emitted instance, so tests can treat the
generator's claims as ground truth.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .contraction import (
    Arity,
    Coefficients,
    MappingSet,
    TableMapping,
    check_condition_four,
    check_condition_three,
    check_condition_two,
    check_range_inclusions,
)
from .errors import DomainError, ExhaustiveOnInfinite, RepairFailure
from .metric_core import MetricSpace, verify_metric_axioms
from .reduction import coincidence_points, is_weakly_compatible


class MetricMode(Enum):
    UNIFORM = "uniform"
    INTEGER = "integer"
    EMBEDDED = "embedded"

    def __str__(self):
        return self.value


class MappingMode(Enum):
    CONTRACTION_ANCHOR = "contraction_anchor"
    RANDOM = "random"

    def __str__(self):
        return self.value


# distances are snapped to multiples of 2**-GRID_BITS and capped, so sums
# and differences of two entries stay exactly representable in a double
GRID_BITS = 20
MAX_DISTANCE = 1024.0


def metric_closure_repair(table: np.ndarray, *, min_separation: float = 1e-6) -> np.ndarray:
    """Turn a nonnegative square array into an exact finite metric table.

    Entries are clipped to [0, 1024] and snapped onto a dyadic grid, the
    matrix is symmetrized by the entrywise minimum, and the min-plus
    closure is iterated to a fixpoint; on the grid every intermediate sum
    is exact, so the resulting table satisfies the triangle inequality
    with zero tolerance.  Off-diagonal entries below ``min_separation``
    are lifted by a uniform grid-aligned shift, which keeps the closure a
    fixpoint.  A final axiom verification guards the construction and
    raises :class:`RepairFailure` if anything slipped through; with the
    grid in place that indicates a bug rather than a hard input.
    """
    D = np.array(table, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DomainError(f"need a square table, got shape {D.shape}")
    scale = float(2**GRID_BITS)
    D = np.nan_to_num(np.abs(D), nan=0.0, posinf=MAX_DISTANCE, neginf=0.0)
    D = np.round(np.clip(D, 0.0, MAX_DISTANCE) * scale) / scale
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)

    n = D.shape[0]
    for _ in range(max(int(np.ceil(np.log2(max(n, 2)))) + 2, 2)):
        via = np.min(D[:, :, None] + D[None, :, :], axis=1)
        shorter = np.minimum(D, via)
        if np.array_equal(shorter, D):
            break
        D = shorter
    else:  # pragma: no cover - the loop bound already exceeds the diameter
        raise RepairFailure("min-plus closure did not stabilize")

    off = ~np.eye(n, dtype=bool)
    if n > 1:
        floor = float(D[off].min())
        if floor < min_separation:
            bump = np.ceil(min_separation * scale) / scale
            D = D + bump * off

    report = verify_metric_axioms(MetricSpace.finite(D), tolerance=0.0)
    if not report.passed:
        bad = next(c for c in report.checks if not c.passed)
        raise RepairFailure(f"repair left the table invalid: {bad.name} fails at {bad.witness}")
    return D


def enumerate_fixed_points(space: MetricSpace, m: TableMapping) -> tuple[int, ...]:
    """All x with m(x) = x, by exhaustive scan."""
    m.validate(space)
    return tuple(int(x) for x in np.flatnonzero(m.table == np.arange(space.n)))


def enumerate_common_fixed_points(space: MetricSpace, S: TableMapping, T: TableMapping) -> tuple[int, ...]:
    """All x fixed by both S and T, by exhaustive scan."""
    S.validate(space)
    T.validate(space)
    idx = np.arange(space.n)
    return tuple(int(x) for x in np.flatnonzero((S.table == idx) & (T.table == idx)))


@dataclass(frozen=True)
class CoincidenceClass:
    """Coincidence points grouped by the value they share."""

    value: int
    points: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"value": self.value, "points": list(self.points)}


@dataclass(frozen=True)
class OracleResult:
    """Ground truth for a finite instance, by exhaustive enumeration."""

    common_fixed_points: tuple[int, ...]
    fixed_points: dict
    coincidence_classes: tuple[CoincidenceClass, ...] = ()

    @property
    def unique_common_fixed_point(self) -> Optional[int]:
        return self.common_fixed_points[0] if len(self.common_fixed_points) == 1 else None

    def to_dict(self) -> dict:
        return {
            "common_fixed_points": list(self.common_fixed_points),
            "fixed_points": {k: list(v) for k, v in self.fixed_points.items()},
            "coincidence_classes": [c.to_dict() for c in self.coincidence_classes],
        }


def oracle_summary(space: MetricSpace, maps: MappingSet) -> OracleResult:
    """Enumerate fixed points, common fixed points, and coincidence classes."""
    if not space.is_finite:
        raise ExhaustiveOnInfinite("oracle enumeration needs a finite universe")
    maps.validate(space)
    fixed = {label: enumerate_fixed_points(space, m) for label, m in maps.items()}
    idx = np.arange(space.n)
    mask = np.ones(space.n, dtype=bool)
    for _, m in maps.items():
        mask &= m.table == idx
    common = tuple(int(x) for x in np.flatnonzero(mask))
    classes: tuple[CoincidenceClass, ...] = ()
    if maps.arity >= Arity.THREE:
        scan = coincidence_points(space, maps)
        grouped: dict = {}
        for p, v in zip(scan.points, scan.values):
            grouped.setdefault(int(v), []).append(int(p))
        classes = tuple(CoincidenceClass(value=v, points=tuple(sorted(set(ps)))) for v, ps in sorted(grouped.items()))
    return OracleResult(common_fixed_points=common, fixed_points=fixed, coincidence_classes=classes)


@dataclass(frozen=True)
class InstanceRecipe:
    """Reproducible parameters for one generated instance."""

    seed: int
    n: int
    arity: Arity = Arity.TWO
    metric_mode: MetricMode = MetricMode.UNIFORM
    mapping_mode: MappingMode = MappingMode.CONTRACTION_ANCHOR

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"need at least two points, got {self.n}")
        object.__setattr__(self, "arity", Arity(self.arity))
        object.__setattr__(self, "metric_mode", MetricMode(self.metric_mode))
        object.__setattr__(self, "mapping_mode", MappingMode(self.mapping_mode))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "arity": int(self.arity),
            "metric_mode": self.metric_mode.value,
            "mapping_mode": self.mapping_mode.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceRecipe":
        return cls(
            seed=int(d["seed"]),
            n=int(d["n"]),
            arity=Arity(int(d.get("arity", 2))),
            metric_mode=MetricMode(d.get("metric_mode", "uniform")),
            mapping_mode=MappingMode(d.get("mapping_mode", "contraction_anchor")),
        )


@dataclass(frozen=True)
class GeneratedInstance:
    """A complete problem plus its ground truth.

    For anchor-mode instances ``anchor`` is the unique common fixed point
    and ``phi`` the descent factor; both are None in random mode.
    """

    space: MetricSpace
    maps: MappingSet
    coefficients: Coefficients
    recipe: InstanceRecipe
    oracle: OracleResult
    anchor: Optional[int] = None
    phi: Optional[float] = None


def _rho_profile(rng: np.random.Generator, n: int, mode: MetricMode) -> np.ndarray:
    if mode == MetricMode.INTEGER:
        return rng.integers(1, 10, size=n).astype(float)
    if mode == MetricMode.EMBEDDED:
        pts = rng.uniform(-4.0, 4.0, size=(n, 3))
        return np.maximum(np.linalg.norm(pts, axis=1), 1e-3)
    return rng.uniform(0.5, 8.0, size=n)


def _hub_space(rng: np.random.Generator, n: int, mode: MetricMode) -> tuple[MetricSpace, int, np.ndarray]:
    """Ultrametric around a random anchor: d(x, y) = max(rho[x], rho[y])."""
    anchor = int(rng.integers(0, n))
    rho = _rho_profile(rng, n, mode)
    rho[anchor] = 0.0
    D = np.maximum(rho[:, None], rho[None, :])
    np.fill_diagonal(D, 0.0)
    return MetricSpace.finite(D), anchor, rho


def _descent_table(rho: np.ndarray, phi: float, allowed: np.ndarray, rank: int) -> TableMapping:
    """Map each point to an allowed point whose rho is at most phi times its own.

    ``rank`` 0 picks the farthest qualifying target (slowest descent),
    rank 1 the second farthest when one exists.  Ties break to the
    smallest index; the anchor (rho zero) always qualifies, so the
    candidate set is never empty.
    """
    n = rho.shape[0]
    caps = phi * rho
    table = np.empty(n, dtype=np.int64)
    order = sorted(allowed, key=lambda y: (-rho[y], y))
    for x in range(n):
        candidates = [y for y in order if rho[y] <= caps[x]]
        table[x] = candidates[min(rank, len(candidates) - 1)]
    return TableMapping(table)


def _force_non_injective(rng: np.random.Generator, f: np.ndarray, anchor: int) -> np.ndarray:
    n = f.shape[0]
    others = [i for i in range(n) if i != anchor]
    if len(others) >= 2:
        f[others[1]] = f[others[0]]
    else:
        f[others[0]] = anchor
    return f


def _anchor_instance(recipe: InstanceRecipe, rng: np.random.Generator) -> GeneratedInstance:
    space, anchor, rho = _hub_space(rng, recipe.n, recipe.metric_mode)
    phi = float(rng.uniform(0.35, 0.65))
    everyone = np.arange(recipe.n)

    if recipe.arity == Arity.TWO:
        sigma = _descent_table(rho, phi, everyone, rank=0)
        maps = MappingSet(S=sigma, T=sigma, arity=Arity.TWO)
        coefficients = Coefficients(0.0, 0.0, phi, 0.0, 0.0)
    else:
        f_table = rng.integers(0, recipe.n, size=recipe.n)
        f_table[anchor] = anchor
        f_table = _force_non_injective(rng, f_table, anchor)
        f = TableMapping(f_table)
        targets = f.image()
        sigma = _descent_table(rho, phi, targets, rank=0)
        if recipe.arity == Arity.THREE:
            st = sigma.compose(f)
            maps = MappingSet(S=st, T=st, f=f, arity=Arity.THREE)
            coefficients = Coefficients(0.0, 0.0, phi, 0.0, 0.0)
        else:
            tau = _descent_table(rho, phi, targets, rank=1)
            maps = MappingSet(S=sigma.compose(f), T=tau.compose(f), f=f, g=f, arity=Arity.FOUR)
            coefficients = Coefficients(0.0, 0.0, phi, 0.0, phi)

    oracle = _verified_oracle(space, maps, coefficients, anchor)
    return GeneratedInstance(
        space=space,
        maps=maps,
        coefficients=coefficients,
        recipe=recipe,
        oracle=oracle,
        anchor=anchor,
        phi=phi,
    )


def _verified_oracle(space: MetricSpace, maps: MappingSet, c: Coefficients, anchor: int) -> OracleResult:
    """Re-check every claim an anchor instance makes before emitting it."""
    axioms = verify_metric_axioms(space, tolerance=0.0)
    assert axioms.passed, f"generated table broke axiom {next(ch.name for ch in axioms.checks if not ch.passed)}"
    if maps.arity == Arity.TWO:
        report = check_condition_two(space, maps.S, maps.T, c)
    elif maps.arity == Arity.THREE:
        report = check_condition_three(space, maps.S, maps.T, maps.f, c)
    else:
        report = check_condition_four(space, maps.S, maps.T, maps.f, maps.g, c)
    assert report.satisfied, f"generated instance violates its own condition at {report.worst_pair}"
    inclusions = check_range_inclusions(space, maps)
    assert inclusions.holds, "generated instance breaks a range inclusion"
    oracle = oracle_summary(space, maps)
    assert oracle.common_fixed_points == (anchor,), (
        f"anchor {anchor} is not the unique common fixed point: {oracle.common_fixed_points}"
    )
    if maps.arity >= Arity.THREE:
        g = maps.g if maps.arity == Arity.FOUR else maps.f
        for a, b, names in ((maps.S, maps.f, ("S", "f")), (maps.T, g, ("T", "g" if maps.arity == Arity.FOUR else "f"))):
            wc = is_weakly_compatible(space, a, b, names=names)
            assert wc.compatible, f"generated mappings {names} fail weak compatibility at {wc.witness}"
        for klass in oracle.coincidence_classes:
            assert klass.value == anchor, f"coincidence value {klass.value} differs from the anchor"
    return oracle


def _random_instance(recipe: InstanceRecipe, rng: np.random.Generator) -> GeneratedInstance:
    n = recipe.n
    if recipe.metric_mode == MetricMode.EMBEDDED:
        pts = rng.uniform(-4.0, 4.0, size=(n, 3))
        raw = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    elif recipe.metric_mode == MetricMode.INTEGER:
        raw = rng.integers(1, 10, size=(n, n)).astype(float)
    else:
        raw = rng.uniform(0.1, 8.0, size=(n, n))
    space = MetricSpace.finite(metric_closure_repair(raw))

    weights = rng.dirichlet(np.ones(5))[:4] * rng.uniform(0.3, 0.9)
    coefficients = Coefficients(
        float(weights[0]),
        float(weights[1]),
        float(weights[2]),
        float(weights[3]) / 2.0,
        float(rng.uniform(0.0, 1.0)),
    )

    if recipe.arity == Arity.TWO:
        maps = MappingSet(
            S=TableMapping(rng.integers(0, n, size=n)),
            T=TableMapping(rng.integers(0, n, size=n)),
            arity=Arity.TWO,
        )
    else:
        f = TableMapping(rng.integers(0, n, size=n))
        targets = f.image()
        draw = lambda: TableMapping(targets[rng.integers(0, targets.shape[0], size=n)])
        if recipe.arity == Arity.THREE:
            maps = MappingSet(S=draw(), T=draw(), f=f, arity=Arity.THREE)
        else:
            maps = MappingSet(S=draw(), T=draw(), f=f, g=f, arity=Arity.FOUR)
    return GeneratedInstance(
        space=space,
        maps=maps,
        coefficients=coefficients,
        recipe=recipe,
        oracle=oracle_summary(space, maps),
    )


def generate_instance(recipe: InstanceRecipe) -> GeneratedInstance:
    """Build the instance the recipe describes, with its oracle attached."""
    rng = np.random.default_rng(recipe.seed)
    if recipe.mapping_mode == MappingMode.CONTRACTION_ANCHOR:
        return _anchor_instance(recipe, rng)
    return _random_instance(recipe, rng)


@dataclass(frozen=True)
class FuzzSummary:
    """Aggregate outcome of a batch of generated instances."""

    count: int
    seed: int
    arity: Arity
    metric_mode: MetricMode
    mapping_mode: MappingMode
    n_range: tuple[int, int]
    tallies: dict = field(default_factory=dict)
    mismatch_seeds: tuple[int, ...] = ()
    elapsed: float = 0.0

    @property
    def clean(self) -> bool:
        return not self.mismatch_seeds

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "arity": int(self.arity),
            "metric_mode": self.metric_mode.value,
            "mapping_mode": self.mapping_mode.value,
            "n_range": list(self.n_range),
            "tallies": dict(self.tallies),
            "mismatch_seeds": list(self.mismatch_seeds),
            "elapsed": self.elapsed,
        }


def run_fuzz(
    count: int,
    *,
    seed: int = 0,
    n_min: int = 2,
    n_max: int = 16,
    arity: Arity = Arity.TWO,
    metric_mode: MetricMode = MetricMode.UNIFORM,
    mapping_mode: MappingMode = MappingMode.CONTRACTION_ANCHOR,
) -> FuzzSummary:
    """Generate ``count`` instances and cross-check solvers against oracles.

    Instance i uses seed ``seed + i``, so a mismatch seed reported in the
    summary reproduces its instance directly through
    :func:`generate_instance`.  In anchor mode every solve must land on
    the known fixed point; in random mode a converged solve must land on
    some enumerated common fixed point, and condition violations are
    simply tallied.
    """
    from .reduction import PipelineOptions, PipelineStatus, solve_four, solve_three
    from .solver import SolveStatus, picard_solve

    if count < 1:
        raise DomainError(f"need a positive instance count, got {count}")
    if not 2 <= n_min <= n_max:
        raise DomainError(f"need 2 <= n_min <= n_max, got {n_min}..{n_max}")
    arity = Arity(arity)
    size_rng = np.random.default_rng(seed)
    tallies: dict = {
        "generated": 0,
        "condition_satisfied": 0,
        "condition_violated": 0,
        "converged": 0,
        "rate_violated": 0,
        "max_iterations": 0,
        "oracle_matched": 0,
        "pipeline_common_fixed_point": 0,
        "pipeline_coincidence_only": 0,
        "pipeline_errors": 0,
    }
    mismatches: list[int] = []
    t0 = time.perf_counter()

    for i in range(count):
        recipe = InstanceRecipe(
            seed=seed + i,
            n=int(size_rng.integers(n_min, n_max + 1)),
            arity=arity,
            metric_mode=metric_mode,
            mapping_mode=mapping_mode,
        )
        inst = generate_instance(recipe)
        tallies["generated"] += 1
        space, maps, c = inst.space, inst.maps, inst.coefficients

        if arity == Arity.TWO:
            report = check_condition_two(space, maps.S, maps.T, c)
        elif arity == Arity.THREE:
            report = check_condition_three(space, maps.S, maps.T, maps.f, c)
        else:
            report = check_condition_four(space, maps.S, maps.T, maps.f, maps.g, c)
        tallies["condition_satisfied" if report.satisfied else "condition_violated"] += 1

        if arity == Arity.TWO:
            x0 = int(np.random.default_rng(recipe.seed ^ 0xA5A5).integers(0, space.n))
            solve = picard_solve(space, maps.S, maps.T, c, x0, keep_trace=False)
            tallies[str(solve.status)] += 1
            if solve.status == SolveStatus.CONVERGED:
                if solve.point in inst.oracle.common_fixed_points:
                    tallies["oracle_matched"] += 1
                else:
                    mismatches.append(recipe.seed)
            elif inst.anchor is not None:
                mismatches.append(recipe.seed)
        else:
            options = PipelineOptions(verify_hypotheses=False, keep_trace=False)
            runner = solve_three if arity == Arity.THREE else solve_four
            args = (maps.S, maps.T, maps.f) if arity == Arity.THREE else (maps.S, maps.T, maps.f, maps.g)
            try:
                pipe = runner(space, *args, c, None, options)
            except Exception:
                tallies["pipeline_errors"] += 1
                if inst.anchor is not None:
                    mismatches.append(recipe.seed)
                continue
            key = f"pipeline_{pipe.status.value}"
            tallies[key] = tallies.get(key, 0) + 1
            if pipe.status == PipelineStatus.COMMON_FIXED_POINT:
                if pipe.common_fixed_point in inst.oracle.common_fixed_points:
                    tallies["oracle_matched"] += 1
                else:
                    mismatches.append(recipe.seed)
            elif inst.anchor is not None:
                mismatches.append(recipe.seed)

    return FuzzSummary(
        count=count,
        seed=seed,
        arity=arity,
        metric_mode=metric_mode,
        mapping_mode=mapping_mode,
        n_range=(n_min, n_max),
        tallies=tallies,
        mismatch_seeds=tuple(mismatches),
        elapsed=time.perf_counter() - t0,
    )
