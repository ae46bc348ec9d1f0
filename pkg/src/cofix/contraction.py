"""Contractive conditions for two, three, and four self-mappings.

The two-mapping condition bounds d(Sx, Ty) by

    alpha*d(x, Sx) + beta*d(y, Ty) + gamma*d(x, y)
    + delta*(d(y, Sx) + d(x, Ty))
    + L*min{d(x, Sx), d(y, Ty), d(y, Sx), d(x, Ty)}

with alpha, beta, gamma, delta in [0, 1), alpha + beta + gamma + 2*delta < 1
and L >= 0.  The three-mapping variant replaces x and y inside the distance
terms on the right-hand side by f(x) and f(y); the four-mapping variant uses
f(x) on the x side and g(y) on the y side.  All three checks share one
evaluator, so substituting the identity for f (or f for g) reproduces the
lower-arity report exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Union

import numpy as np

from .errors import (
    BoundViolation,
    DomainError,
    ExhaustiveOnInfinite,
    Infeasible,
    NonInvertibleMapping,
)
from .metric_core import Flavor, MetricSpace, Point

EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class Coefficients:
    """A tuple (alpha, beta, gamma, delta, L) for the contractive conditions."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    L: float = 0.0

    @property
    def weight_sum(self) -> float:
        """The constrained combination alpha + beta + gamma + 2*delta."""
        return self.alpha + self.beta + self.gamma + 2.0 * self.delta

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.L)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "delta": self.delta, "L": self.L}

    @classmethod
    def from_dict(cls, d: dict) -> "Coefficients":
        return cls(float(d["alpha"]), float(d["beta"]), float(d["gamma"]), float(d["delta"]), float(d.get("L", 0.0)))


def validate_coefficients(c: Coefficients) -> Coefficients:
    """Return ``c`` unchanged if it satisfies the coefficient bounds.

    Raises :class:`BoundViolation` naming the broken bound otherwise.  The
    boundary ``alpha + beta + gamma + 2*delta == 1`` is rejected: the rate
    constant would reach 1 and the convergence argument collapses.
    """
    for name in ("alpha", "beta", "gamma", "delta"):
        v = getattr(c, name)
        if not np.isfinite(v) or v < 0.0 or v >= 1.0:
            raise BoundViolation(f"{name}={v!r} must lie in [0, 1)")
    if not np.isfinite(c.L) or c.L < 0.0:
        raise BoundViolation(f"L={c.L!r} must be non-negative")
    if c.weight_sum >= 1.0:
        raise BoundViolation(
            f"alpha + beta + gamma + 2*delta = {c.weight_sum!r} must be strictly below 1"
        )
    return c


class Arity(IntEnum):
    TWO = 2
    THREE = 3
    FOUR = 4


@dataclass(frozen=True)
class TableMapping:
    """A self-map of a finite universe stored as an index table."""

    table: np.ndarray

    def __post_init__(self):
        tab = np.array(self.table, dtype=np.int64, copy=True)
        if tab.ndim != 1:
            raise DomainError(f"index table must be one-dimensional, got shape {tab.shape}")
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def __eq__(self, other):
        return isinstance(other, TableMapping) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    @property
    def n(self) -> int:
        return int(self.table.shape[0])

    def image(self) -> np.ndarray:
        return np.unique(self.table)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.table, np.arange(self.n)))

    def compose(self, inner: "TableMapping") -> "TableMapping":
        """The composite self then inner-first: (self o inner)(x) = self(inner(x))."""
        return TableMapping(self.table[inner.table])

    def validate(self, space: MetricSpace) -> "TableMapping":
        if not space.is_finite:
            raise DomainError("index-table mappings apply to finite spaces only")
        if self.n != space.n:
            raise DomainError(f"mapping table has {self.n} entries for a universe of {space.n} points")
        if self.n and (self.table.min() < 0 or self.table.max() >= space.n):
            raise DomainError("mapping table references indices outside the universe")
        return self


def identity_mapping(n: int) -> TableMapping:
    return TableMapping(np.arange(n))


@dataclass(frozen=True)
class AffineMapping:
    """The affine self-map x -> matrix @ x + offset of a Euclidean space."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float, copy=True)
        off = np.array(self.offset, dtype=float, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DomainError(f"affine matrix must be square, got shape {mat.shape}")
        if off.shape != (mat.shape[0],):
            raise DomainError(f"offset shape {off.shape} does not match matrix {mat.shape}")
        mat.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "offset", off)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def __eq__(self, other):
        return (
            isinstance(other, AffineMapping)
            and np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.offset, other.offset)
        )

    def __hash__(self):
        return hash((self.matrix.tobytes(), self.offset.tobytes()))

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        """Apply to a stack of points, shape (N, m) -> (N, m)."""
        return pts @ self.matrix.T + self.offset

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(self.dimension)) and not self.offset.any())

    def is_invertible(self, tol: float = 0.0) -> bool:
        return bool(np.linalg.matrix_rank(self.matrix) == self.dimension)

    def inverse(self) -> "AffineMapping":
        try:
            inv = np.linalg.inv(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise NonInvertibleMapping(f"linear part is singular: {exc}") from exc
        return AffineMapping(inv, -inv @ self.offset)

    def compose(self, inner: "AffineMapping") -> "AffineMapping":
        return AffineMapping(self.matrix @ inner.matrix, self.matrix @ inner.offset + self.offset)

    def validate(self, space: MetricSpace) -> "AffineMapping":
        if space.is_finite:
            raise DomainError("affine mappings apply to Euclidean spaces only")
        if self.dimension != space.dimension:
            raise DomainError(f"mapping dimension {self.dimension} does not match space dimension {space.dimension}")
        return self


Mapping = Union[TableMapping, AffineMapping]


@dataclass(frozen=True)
class MappingSet:
    """The mappings of one problem: always S and T, plus f (and g) by arity."""

    S: Mapping
    T: Mapping
    f: Optional[Mapping] = None
    g: Optional[Mapping] = None
    arity: Arity = Arity.TWO

    def __post_init__(self):
        arity = Arity(self.arity)
        object.__setattr__(self, "arity", arity)
        if arity >= Arity.THREE and self.f is None:
            raise DomainError("three-mapping problems need f")
        if arity == Arity.FOUR and self.g is None:
            raise DomainError("four-mapping problems need g")
        if arity == Arity.TWO and (self.f is not None or self.g is not None):
            raise DomainError("two-mapping problems take only S and T")
        if arity == Arity.THREE and self.g is not None:
            raise DomainError("three-mapping problems take S, T, and f")

    def validate(self, space: MetricSpace) -> "MappingSet":
        for label, m in self.items():
            try:
                m.validate(space)
            except DomainError as exc:
                raise DomainError(f"mapping {label}: {exc}") from exc
        return self

    def items(self):
        out = [("S", self.S), ("T", self.T)]
        if self.f is not None:
            out.append(("f", self.f))
        if self.g is not None:
            out.append(("g", self.g))
        return out


@dataclass(frozen=True)
class SampledPairs:
    """A seeded uniform pair sampler.

    On Euclidean spaces points are drawn uniformly from the box
    ``[lo, hi]^m``; on finite spaces indices are drawn uniformly and ``box``
    is ignored.  The seed and box are echoed into every report produced
    from this source so runs can be reproduced.
    """

    samples: int
    seed: int
    box: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.samples < 1:
            raise DomainError(f"need at least one sample, got {self.samples}")
        if self.box is not None:
            lo, hi = float(self.box[0]), float(self.box[1])
            if not lo < hi:
                raise DomainError(f"sampling box must have lo < hi, got {self.box}")
            object.__setattr__(self, "box", (lo, hi))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def draw_pairs(self, space: MetricSpace) -> tuple[np.ndarray, np.ndarray]:
        rng = self.rng()
        if space.is_finite:
            pairs = rng.integers(0, space.n, size=(self.samples, 2))
            return pairs[:, 0], pairs[:, 1]
        if self.box is None:
            raise DomainError("sampling a Euclidean space needs a bounding box")
        lo, hi = self.box
        pts = rng.uniform(lo, hi, size=(self.samples, 2, space.dimension))
        return pts[:, 0, :], pts[:, 1, :]

    def draw_points(self, space: MetricSpace) -> np.ndarray:
        rng = self.rng()
        if space.is_finite:
            return rng.integers(0, space.n, size=self.samples)
        if self.box is None:
            raise DomainError("sampling a Euclidean space needs a bounding box")
        lo, hi = self.box
        return rng.uniform(lo, hi, size=(self.samples, space.dimension))

    def to_dict(self) -> dict:
        return {"samples": self.samples, "seed": self.seed, "box": list(self.box) if self.box else None}

    @classmethod
    def from_dict(cls, d: dict) -> "SampledPairs":
        box = d.get("box")
        return cls(samples=int(d["samples"]), seed=int(d["seed"]), box=tuple(box) if box else None)


PairSource = Union[str, SampledPairs]


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of a condition check over a pair source.

    ``worst_pair`` maximizes lhs - rhs; ties resolve to the first pair in
    iteration order, which is the lexicographically smallest pair for
    exhaustive checks.  ``satisfied`` means the worst margin stays within
    ``tolerance``.
    """

    condition: str
    satisfied: bool
    worst_pair: tuple
    worst_margin: float
    pairs_checked: int
    mode: str
    tolerance: float
    seed: Optional[int] = None
    box: Optional[tuple[float, float]] = None

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "satisfied": self.satisfied,
            "worst_pair": [list(p) if isinstance(p, tuple) else p for p in self.worst_pair],
            "worst_margin": self.worst_margin,
            "pairs_checked": self.pairs_checked,
            "mode": self.mode,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "box": list(self.box) if self.box is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ViolationReport":
        pair = tuple(tuple(p) if isinstance(p, list) else p for p in d["worst_pair"])
        return cls(
            condition=d["condition"],
            satisfied=d["satisfied"],
            worst_pair=pair,
            worst_margin=d["worst_margin"],
            pairs_checked=d["pairs_checked"],
            mode=d["mode"],
            tolerance=d["tolerance"],
            seed=d.get("seed"),
            box=tuple(d["box"]) if d.get("box") is not None else None,
        )


def _scalar_terms(space: MetricSpace, S, T, f, g, x: Point, y: Point):
    """Distance terms of the condition at one pair, with substitutions applied."""
    fx = f(x) if f is not None else x
    gy = g(y) if g is not None else (f(y) if f is not None else y)
    Sx = S(x)
    Ty = T(y)
    d = space.distance
    t1 = d(fx, Sx)
    t2 = d(gy, Ty)
    t3 = d(fx, gy)
    u1 = d(gy, Sx)
    u2 = d(fx, Ty)
    t5 = min(t1, t2, u1, u2)
    return d(Sx, Ty), t1, t2, t3, u1 + u2, t5


def _rhs(c: Coefficients, terms) -> float:
    _, t1, t2, t3, t4, t5 = terms
    return c.alpha * t1 + c.beta * t2 + c.gamma * t3 + c.delta * t4 + c.L * t5


def rhs_two(c: Coefficients, space: MetricSpace, S, T, x: Point, y: Point) -> float:
    """Right-hand side of the two-mapping condition at the pair (x, y)."""
    return _rhs(c, _scalar_terms(space, S, T, None, None, x, y))


def rhs_three(c: Coefficients, space: MetricSpace, S, T, f, x: Point, y: Point) -> float:
    """Right-hand side of the three-mapping condition (f substituted on both sides)."""
    return _rhs(c, _scalar_terms(space, S, T, f, f, x, y))


def rhs_four(c: Coefficients, space: MetricSpace, S, T, f, g, x: Point, y: Point) -> float:
    """Right-hand side of the four-mapping condition (f on the x side, g on the y side)."""
    return _rhs(c, _scalar_terms(space, S, T, f, g, x, y))


def _finite_term_arrays(space: MetricSpace, S, T, f, g, xs=None, ys=None):
    """Vectorized condition terms on a finite space.

    With ``xs``/``ys`` omitted, evaluates the full n x n pair grid and
    returns matrices; otherwise evaluates the sampled index pairs and
    returns vectors.  Output order matches :func:`_scalar_terms`.
    """
    D = space.table
    n = space.n
    s = S.table
    t = T.table
    fi = f.table if f is not None else np.arange(n)
    gj = g.table if g is not None else fi

    if xs is None:
        lhs = D[np.ix_(s, t)]
        a1 = D[fi, s]
        a2 = D[gj, t]
        a3 = D[np.ix_(fi, gj)]
        b1 = D[np.ix_(s, gj)]
        b2 = D[np.ix_(fi, t)]
        t4 = b1 + b2
        t5 = np.minimum(np.minimum(a1[:, None], a2[None, :]), np.minimum(b1, b2))
        return lhs, a1[:, None] + np.zeros_like(lhs), a2[None, :] + np.zeros_like(lhs), a3, t4, t5

    sx, ty = s[xs], t[ys]
    fx, gy = fi[xs], gj[ys]
    lhs = D[sx, ty]
    t1 = D[fx, sx]
    t2 = D[gy, ty]
    t3 = D[fx, gy]
    u1 = D[gy, sx]
    u2 = D[fx, ty]
    return lhs, t1, t2, t3, u1 + u2, np.minimum(np.minimum(t1, t2), np.minimum(u1, u2))


def _euclidean_term_arrays(space: MetricSpace, S, T, f, g, xs: np.ndarray, ys: np.ndarray):
    Sx = S.apply_many(xs)
    Ty = T.apply_many(ys)
    fx = f.apply_many(xs) if f is not None else xs
    gy = g.apply_many(ys) if g is not None else (f.apply_many(ys) if f is not None else ys)

    def norms(u, v):
        return np.linalg.norm(u - v, axis=1)

    lhs = norms(Sx, Ty)
    t1 = norms(fx, Sx)
    t2 = norms(gy, Ty)
    t3 = norms(fx, gy)
    u1 = norms(gy, Sx)
    u2 = norms(fx, Ty)
    return lhs, t1, t2, t3, u1 + u2, np.minimum(np.minimum(t1, t2), np.minimum(u1, u2))


def _condition_data(space, S, T, f, g, pair_source):
    """Gather (lhs, terms, pair lookup, mode, seed, box, count) for a source."""
    if pair_source == EXHAUSTIVE or pair_source is None:
        if not space.is_finite:
            raise ExhaustiveOnInfinite("exhaustive pair enumeration needs a finite space; supply a sampler")
        lhs, t1, t2, t3, t4, t5 = _finite_term_arrays(space, S, T, f, g)
        n = space.n

        def pair_at(flat: int):
            i, j = np.unravel_index(flat, (n, n))
            return (int(i), int(j))

        return lhs, (t1, t2, t3, t4, t5), pair_at, "exhaustive", None, None, n * n

    if not isinstance(pair_source, SampledPairs):
        raise DomainError(f"unknown pair source {pair_source!r}")
    xs, ys = pair_source.draw_pairs(space)
    if space.is_finite:
        lhs, t1, t2, t3, t4, t5 = _finite_term_arrays(space, S, T, f, g, xs, ys)

        def pair_at(flat: int):
            return (int(xs[flat]), int(ys[flat]))

    else:
        lhs, t1, t2, t3, t4, t5 = _euclidean_term_arrays(space, S, T, f, g, xs, ys)

        def pair_at(flat: int):
            return (tuple(float(v) for v in xs[flat]), tuple(float(v) for v in ys[flat]))

    return lhs, (t1, t2, t3, t4, t5), pair_at, "sampled", pair_source.seed, pair_source.box, pair_source.samples


def _evaluate_condition(space, S, T, f, g, c, pair_source, tolerance, label) -> ViolationReport:
    c = validate_coefficients(c)
    if tolerance is None:
        tolerance = space.default_tolerance
    lhs, (t1, t2, t3, t4, t5), pair_at, mode, seed, box, count = _condition_data(space, S, T, f, g, pair_source)
    rhs = c.alpha * t1 + c.beta * t2 + c.gamma * t3 + c.delta * t4 + c.L * t5
    margin = lhs - rhs
    flat = int(np.argmax(margin))
    worst = float(margin.reshape(-1)[flat]) if margin.ndim > 1 else float(margin[flat])
    return ViolationReport(
        condition=label,
        satisfied=bool(worst <= tolerance),
        worst_pair=pair_at(flat),
        worst_margin=worst,
        pairs_checked=count,
        mode=mode,
        tolerance=float(tolerance),
        seed=seed,
        box=box,
    )


def check_condition_two(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    c: Coefficients,
    pair_source: PairSource = EXHAUSTIVE,
    tolerance: Optional[float] = None,
) -> ViolationReport:
    """Check the two-mapping condition over the pair source.

    Default tolerance follows the space flavor: 1e-12 on finite tables,
    1e-9 on Euclidean spaces.
    """
    return _evaluate_condition(space, S, T, None, None, c, pair_source, tolerance, "two")


def check_condition_three(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    f: Mapping,
    c: Coefficients,
    pair_source: PairSource = EXHAUSTIVE,
    tolerance: Optional[float] = None,
) -> ViolationReport:
    """Check the three-mapping condition: f(x), f(y) replace x, y on the right."""
    return _evaluate_condition(space, S, T, f, f, c, pair_source, tolerance, "three")


def check_condition_four(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    f: Mapping,
    g: Mapping,
    c: Coefficients,
    pair_source: PairSource = EXHAUSTIVE,
    tolerance: Optional[float] = None,
) -> ViolationReport:
    """Check the four-mapping condition: f(x) on the x side, g(y) on the y side."""
    return _evaluate_condition(space, S, T, f, g, c, pair_source, tolerance, "four")


@dataclass(frozen=True)
class InclusionCheck:
    description: str
    holds: bool
    witness: Optional[object]

    def to_dict(self) -> dict:
        wit = self.witness
        if isinstance(wit, tuple):
            wit = list(wit)
        return {"description": self.description, "holds": self.holds, "witness": wit}

    @classmethod
    def from_dict(cls, d: dict) -> "InclusionCheck":
        wit = d.get("witness")
        if isinstance(wit, list):
            wit = tuple(wit)
        return cls(description=d["description"], holds=d["holds"], witness=wit)


@dataclass(frozen=True)
class InclusionReport:
    checks: tuple[InclusionCheck, ...]
    mode: str

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_dict(self) -> dict:
        return {"checks": [c.to_dict() for c in self.checks], "mode": self.mode, "holds": self.holds}

    @classmethod
    def from_dict(cls, d: dict) -> "InclusionReport":
        return cls(checks=tuple(InclusionCheck.from_dict(c) for c in d["checks"]), mode=d["mode"])


def _finite_inclusion(space, inner: TableMapping, outer: TableMapping, desc: str) -> InclusionCheck:
    """Does inner(X) lie inside outer(X)?  Witness: first x whose image escapes."""
    target = set(int(v) for v in outer.image())
    for x in space.points():
        if inner(x) not in target:
            return InclusionCheck(desc, False, int(x))
    return InclusionCheck(desc, True, None)


def _affine_inclusion(space, inner: AffineMapping, outer: AffineMapping, pts, tol, desc) -> InclusionCheck:
    """Sampled check that inner(x) is always reachable as outer(y)."""
    targets = inner.apply_many(pts) - outer.offset
    sol, *_ = np.linalg.lstsq(outer.matrix, targets.T, rcond=None)
    resid = np.linalg.norm(outer.matrix @ sol - targets.T, axis=0)
    bad = int(np.argmax(resid))
    if resid[bad] > tol:
        return InclusionCheck(desc, False, tuple(float(v) for v in pts[bad]))
    return InclusionCheck(desc, True, None)


def check_range_inclusions(
    space: MetricSpace,
    maps: MappingSet,
    pair_source: Optional[PairSource] = None,
    tolerance: Optional[float] = None,
) -> InclusionReport:
    """Verify the image inclusions the reduction pipelines rely on.

    Three mappings: S(X) and T(X) must lie inside f(X).  Four mappings:
    S(X) inside f(X), T(X) inside g(X), and f(X) = g(X).  Finite spaces are
    checked exactly on computed images; Euclidean spaces are checked on
    sampled points via least-squares membership in the affine image.
    """
    maps.validate(space)
    if maps.arity == Arity.TWO:
        return InclusionReport(checks=(), mode="exhaustive" if space.is_finite else "sampled")
    if tolerance is None:
        tolerance = space.default_tolerance

    if space.is_finite:
        checks = []
        if maps.arity == Arity.THREE:
            checks.append(_finite_inclusion(space, maps.S, maps.f, "S(X) within f(X)"))
            checks.append(_finite_inclusion(space, maps.T, maps.f, "T(X) within f(X)"))
        else:
            checks.append(_finite_inclusion(space, maps.S, maps.f, "S(X) within f(X)"))
            checks.append(_finite_inclusion(space, maps.T, maps.g, "T(X) within g(X)"))
            f_img = set(int(v) for v in maps.f.image())
            g_img = set(int(v) for v in maps.g.image())
            if f_img == g_img:
                checks.append(InclusionCheck("f(X) equals g(X)", True, None))
            else:
                wit = sorted(f_img.symmetric_difference(g_img))[0]
                checks.append(InclusionCheck("f(X) equals g(X)", False, int(wit)))
        return InclusionReport(checks=tuple(checks), mode="exhaustive")

    if not isinstance(pair_source, SampledPairs):
        raise DomainError("Euclidean inclusion checks need a SampledPairs source")
    pts = pair_source.draw_points(space)
    checks = []
    if maps.arity == Arity.THREE:
        checks.append(_affine_inclusion(space, maps.S, maps.f, pts, tolerance, "S(X) within f(X)"))
        checks.append(_affine_inclusion(space, maps.T, maps.f, pts, tolerance, "T(X) within f(X)"))
    else:
        checks.append(_affine_inclusion(space, maps.S, maps.f, pts, tolerance, "S(X) within f(X)"))
        checks.append(_affine_inclusion(space, maps.T, maps.g, pts, tolerance, "T(X) within g(X)"))
        checks.append(_affine_inclusion(space, maps.f, maps.g, pts, tolerance, "f(X) within g(X)"))
        checks.append(_affine_inclusion(space, maps.g, maps.f, pts, tolerance, "g(X) within f(X)"))
    return InclusionReport(checks=tuple(checks), mode="sampled")


def _condition_fn_for(maps: MappingSet):
    if maps.arity == Arity.TWO:
        return lambda space, c, src, tol: check_condition_two(space, maps.S, maps.T, c, src, tol)
    if maps.arity == Arity.THREE:
        return lambda space, c, src, tol: check_condition_three(space, maps.S, maps.T, maps.f, c, src, tol)
    return lambda space, c, src, tol: check_condition_four(space, maps.S, maps.T, maps.f, maps.g, c, src, tol)


def synthesize_coefficients(
    space: MetricSpace,
    maps: MappingSet,
    pair_source: PairSource = EXHAUSTIVE,
    margin: float = 0.05,
    *,
    slack: Optional[float] = None,
    tolerance: Optional[float] = None,
) -> Coefficients:
    """Find coefficients making the arity-matched condition hold on the source.

    Solves a linear feasibility problem in (alpha, beta, gamma, delta, L):
    one covering constraint per pair plus the weight-sum budget
    alpha + beta + gamma + 2*delta <= 1 - margin.  A first elastic solve
    measures feasibility and identifies the most binding pair; a second
    solve picks the smallest feasible tuple by coefficient sum.  ``slack``
    is a relative cushion ((1 + slack) * lhs <= rhs) that makes sampled
    certificates robust off-sample; it defaults to 0 for exhaustive sources
    and 0.02 for sampled ones.  The returned tuple is re-verified with the
    matching check before being handed back; failure to re-verify raises
    :class:`Infeasible` like any other infeasibility, with the most binding
    pair attached.
    """
    from scipy.optimize import linprog

    if not 0.0 < margin < 1.0:
        raise DomainError(f"margin must lie in (0, 1), got {margin}")
    maps.validate(space)
    if slack is None:
        slack = 0.0 if (pair_source == EXHAUSTIVE or pair_source is None) else 0.02
    if tolerance is None:
        tolerance = space.default_tolerance

    f = maps.f if maps.arity >= Arity.THREE else None
    g = maps.g if maps.arity == Arity.FOUR else (f if maps.arity == Arity.THREE else None)
    lhs, terms, pair_at, mode, _, _, count = _condition_data(space, maps.S, maps.T, f, g, pair_source)
    lhs = np.asarray(lhs, dtype=float).reshape(-1)
    cols = [np.asarray(t, dtype=float).reshape(-1) for t in terms]
    A = np.column_stack(cols)  # (pairs, 5): multipliers of alpha..delta, L
    need = (1.0 + slack) * lhs

    budget_row = np.array([1.0, 1.0, 1.0, 2.0, 0.0])
    check = _condition_fn_for(maps)

    def most_binding(coefs: np.ndarray):
        residual = need - A @ coefs
        return pair_at(int(np.argmax(residual))), float(np.max(residual))

    # phase 1: minimize the elastic excess s with  need - A@coefs <= s
    A_ub = np.hstack([-A, -np.ones((A.shape[0], 1))])
    A_ub = np.vstack([A_ub, np.append(budget_row, 0.0)])
    b_ub = np.append(-need, 1.0 - margin)
    bounds = [(0.0, 1.0)] * 4 + [(0.0, None), (-1.0, None)]
    res = linprog(c=np.array([0, 0, 0, 0, 0, 1.0]), A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise Infeasible("feasibility solve failed", binding_pair=None, margin=margin)
    if res.x[-1] > max(tolerance, 1e-9):
        pair, excess = most_binding(res.x[:5])
        raise Infeasible(
            f"no coefficient tuple covers all {count} pairs; most binding pair {pair} lacks {excess:.6g}",
            binding_pair=pair,
            margin=margin,
        )

    # phase 2: smallest feasible tuple by coefficient sum
    A2 = np.vstack([-A, budget_row])
    b2 = np.append(-need, 1.0 - margin)
    res2 = linprog(c=np.ones(5), A_ub=A2, b_ub=b2, bounds=bounds[:5], method="highs")
    attempt = res2.x if res2.success else res.x[:5]
    for bump in (0.0, tolerance, 16.0 * tolerance):
        coefs = np.maximum(np.asarray(attempt, dtype=float), 0.0)
        if bump:
            coefs = np.minimum(coefs * (1.0 + bump) + bump, [0.999, 0.999, 0.999, 0.499, np.inf])
            if budget_row @ coefs >= 1.0 - margin / 2.0:
                continue
        candidate = validate_coefficients(Coefficients(*[float(v) for v in coefs]))
        report = check(space, candidate, pair_source, tolerance)
        if report.satisfied:
            return candidate
    pair, excess = most_binding(np.maximum(np.asarray(attempt, dtype=float), 0.0))
    raise Infeasible(
        f"solved tuple failed re-verification; most binding pair {pair} lacks {excess:.6g}",
        binding_pair=pair,
        margin=margin,
    )
