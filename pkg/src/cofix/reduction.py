"""Reduction of three- and four-mapping problems to the two-mapping solver.

Given S, T, f with S(X) and T(X) inside f(X), pick a subdomain E on which
f is injective with f(E) = f(X).  The induced maps

    G(f(x)) = S(x),    H(f(x)) = T(x)    for x in E

are self-maps of the image f(X) and inherit the two-mapping contractive
condition from the three-mapping one verbatim.  Their unique common fixed
point w pulls back along the section to a coincidence point u with
S(u) = T(u) = f(u) = w, and weak compatibility (the mappings commute at
coincidence points) lifts w to the unique common fixed point of all three.
Four mappings work the same way with f on the S side and g on the T side,
provided f(X) = g(X).
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .contraction import (
    EXHAUSTIVE,
    AffineMapping,
    Arity,
    Coefficients,
    InclusionReport,
    Mapping,
    MappingSet,
    PairSource,
    TableMapping,
    ViolationReport,
    check_condition_four,
    check_condition_three,
    check_range_inclusions,
)
from .errors import (
    CofixError,
    ConditionViolated,
    DomainError,
    ExhaustiveOnInfinite,
    LiftDisagreement,
    LiftMismatch,
    NonUniqueCoincidence,
    RangeInclusionFailure,
)
from .metric_core import MetricSpace, Point
from .solver import SolveReport, SolveStatus, picard_solve


@contextmanager
def _stage(name: str, stages: list):
    """Tag errors escaping this block with the pipeline stage that raised them."""
    stages.append(name)
    try:
        yield
    except CofixError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


@dataclass(frozen=True)
class TableSection:
    """Right inverse of a finite mapping on its image.

    ``domain`` lists one representative per image value, each the smallest
    preimage index; ``pull_back`` sends an image value to its representative.
    """

    domain: tuple[int, ...]
    image: tuple[int, ...]
    _lookup: dict

    def pull_back(self, y: int) -> int:
        try:
            return self._lookup[int(y)]
        except KeyError:
            raise DomainError(f"{y} is not in the mapping image") from None


@dataclass(frozen=True)
class AffineSection:
    """Right inverse of an affine mapping: pull_back(f(x)) recovers a preimage."""

    mapping: AffineMapping

    def pull_back(self, y: np.ndarray) -> np.ndarray:
        return self.mapping(y)


Section = Union[TableSection, AffineSection]


def injective_restriction(space: MetricSpace, f: TableMapping) -> TableSection:
    """Restrict f to a subdomain where it is injective without shrinking its image.

    Walks the universe in ascending index order and keeps the first point
    mapping to each fresh value, so the chosen representatives are the
    smallest preimages.  Only finite spaces can be walked exhaustively.
    """
    if not space.is_finite:
        raise ExhaustiveOnInfinite("cannot walk a Euclidean space; use an affine section instead")
    f.validate(space)
    lookup: dict = {}
    for x in space.points():
        y = f(x)
        if y not in lookup:
            lookup[y] = x
    image = tuple(sorted(lookup))
    domain = tuple(lookup[y] for y in image)
    return TableSection(domain=domain, image=image, _lookup=lookup)


def _affine_section(f: AffineMapping) -> AffineSection:
    try:
        return AffineSection(f.inverse())
    except Exception:
        pinv = np.linalg.pinv(f.matrix)
        return AffineSection(AffineMapping(pinv, -pinv @ f.offset))


@dataclass(frozen=True)
class InducedPair:
    """The two-mapping problem a higher-arity one reduces to.

    ``S`` and ``T`` act on the shared image like the originals act through
    the sections; on finite spaces they are stored as full-universe tables
    that hold points outside ``image`` fixed, so only orbits started inside
    the image are meaningful.
    """

    S: Mapping
    T: Mapping
    image: Optional[tuple[int, ...]]
    section_s: Section
    section_t: Section

    def fixed_points(self, space: MetricSpace, mapping_name: str = "S") -> tuple[int, ...]:
        """Fixed points of one induced mapping inside the image (finite only)."""
        if self.image is None:
            raise ExhaustiveOnInfinite("fixed-point enumeration needs a finite image")
        m = self.S if mapping_name == "S" else self.T
        return tuple(y for y in self.image if m(y) == y)

    def common_fixed_points(self, space: MetricSpace) -> tuple[int, ...]:
        if self.image is None:
            raise ExhaustiveOnInfinite("fixed-point enumeration needs a finite image")
        return tuple(y for y in self.image if self.S(y) == y and self.T(y) == y)


def _induce(space: MetricSpace, S: Mapping, f: Mapping, T: Mapping, g: Mapping) -> InducedPair:
    if space.is_finite:
        sect_f = injective_restriction(space, f)
        sect_g = injective_restriction(space, g) if g is not f else sect_f
        n = space.n
        a = np.arange(n)
        a[np.array(sect_f.image, dtype=np.int64)] = S.table[
            np.array([sect_f.pull_back(y) for y in sect_f.image], dtype=np.int64)
        ]
        b = np.arange(n)
        b[np.array(sect_g.image, dtype=np.int64)] = T.table[
            np.array([sect_g.pull_back(y) for y in sect_g.image], dtype=np.int64)
        ]
        return InducedPair(
            S=TableMapping(a),
            T=TableMapping(b),
            image=sect_f.image,
            section_s=sect_f,
            section_t=sect_g,
        )
    sect_f = _affine_section(f)
    sect_g = _affine_section(g) if g is not f else sect_f
    return InducedPair(
        S=S.compose(sect_f.mapping),
        T=T.compose(sect_g.mapping),
        image=None,
        section_s=sect_f,
        section_t=sect_g,
    )


def induce_three(space: MetricSpace, S: Mapping, T: Mapping, f: Mapping) -> InducedPair:
    """Induced two-mapping problem for S, T over the common factor f."""
    MappingSet(S=S, T=T, f=f, arity=Arity.THREE).validate(space)
    return _induce(space, S, f, T, f)


def induce_four(space: MetricSpace, S: Mapping, T: Mapping, f: Mapping, g: Mapping) -> InducedPair:
    """Induced two-mapping problem for S over f and T over g."""
    MappingSet(S=S, T=T, f=f, g=g, arity=Arity.FOUR).validate(space)
    return _induce(space, S, f, T, g)


@dataclass(frozen=True)
class CoincidenceSolutions:
    """Exhaustive scan of coincidence points and the values they share.

    For three mappings, ``points`` holds every x with S(x) = T(x) = f(x)
    and ``values`` the corresponding f(x).  For four mappings the scan is
    pairwise: every x with S(x) = f(x) contributes f(x), every x with
    T(x) = g(x) contributes g(x).  ``consistent`` says all collected
    values name the same point, which the contractive condition guarantees.
    """

    points: tuple
    values: tuple
    consistent: bool

    def to_dict(self) -> dict:
        return {"points": list(self.points), "values": list(self.values), "consistent": self.consistent}

    @classmethod
    def from_dict(cls, d: dict) -> "CoincidenceSolutions":
        return cls(points=tuple(d["points"]), values=tuple(d["values"]), consistent=d["consistent"])


def pair_coincidence_points(space: MetricSpace, A: TableMapping, B: TableMapping) -> tuple[int, ...]:
    """All x in a finite universe with A(x) = B(x)."""
    if not space.is_finite:
        raise ExhaustiveOnInfinite("coincidence scans need a finite universe")
    return tuple(int(x) for x in np.flatnonzero(A.table == B.table))


def coincidence_points(space: MetricSpace, maps: MappingSet) -> CoincidenceSolutions:
    """Scan a finite universe for coincidence points of a mapping set."""
    if not space.is_finite:
        raise ExhaustiveOnInfinite("coincidence scans need a finite universe")
    maps.validate(space)
    if maps.arity == Arity.TWO:
        pts = pair_coincidence_points(space, maps.S, maps.T)
        vals = tuple(maps.S(x) for x in pts)
    elif maps.arity == Arity.THREE:
        pts = tuple(
            int(x)
            for x in np.flatnonzero((maps.S.table == maps.f.table) & (maps.T.table == maps.f.table))
        )
        vals = tuple(maps.f(x) for x in pts)
    else:
        sf = pair_coincidence_points(space, maps.S, maps.f)
        tg = pair_coincidence_points(space, maps.T, maps.g)
        pts = sf + tg
        vals = tuple(maps.f(x) for x in sf) + tuple(maps.g(x) for x in tg)
    consistent = len(set(vals)) <= 1
    return CoincidenceSolutions(points=pts, values=vals, consistent=consistent)


@dataclass(frozen=True)
class WeakCompatibility:
    """Whether two mappings commute at their coincidence points.

    ``vacuous`` flags an empty coincidence set, which is compatible by
    default.  ``witness`` is a coincidence point where commutation fails.
    """

    pair: tuple[str, str]
    compatible: bool
    vacuous: bool
    witness: Optional[object] = None
    checked: int = 0

    def to_dict(self) -> dict:
        wit = self.witness
        if isinstance(wit, tuple):
            wit = list(wit)
        return {
            "pair": list(self.pair),
            "compatible": self.compatible,
            "vacuous": self.vacuous,
            "witness": wit,
            "checked": self.checked,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeakCompatibility":
        wit = d.get("witness")
        if isinstance(wit, list):
            wit = tuple(wit)
        return cls(
            pair=tuple(d["pair"]),
            compatible=d["compatible"],
            vacuous=d["vacuous"],
            witness=wit,
            checked=int(d.get("checked", 0)),
        )


def _affine_coincidence_basis(A: AffineMapping, B: AffineMapping, tol: float):
    """Particular solution and nullspace basis of A(x) = B(x), or None."""
    M = A.matrix - B.matrix
    rhs = B.offset - A.offset
    x0, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    if np.linalg.norm(M @ x0 - rhs) > tol * (1.0 + np.linalg.norm(rhs)):
        return None
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > max(s[0], 1.0) * 1e-12)) if s.size else 0
    null = vt[rank:].T
    return x0, null


def is_weakly_compatible(
    space: MetricSpace,
    A: Mapping,
    B: Mapping,
    *,
    names: tuple[str, str] = ("S", "f"),
    tol: Optional[float] = None,
) -> WeakCompatibility:
    """Check that A and B commute wherever they coincide.

    Finite spaces scan every coincidence point exactly.  For affine
    mappings the coincidence set is an affine subspace; commutation is an
    affine identity on it, so checking one particular solution plus the
    action of the commutator on the nullspace directions settles it.
    """
    if tol is None:
        tol = space.default_tolerance
    if space.is_finite:
        pts = pair_coincidence_points(space, A, B)
        if not pts:
            return WeakCompatibility(pair=names, compatible=True, vacuous=True, checked=0)
        for x in pts:
            if A(B(x)) != B(A(x)):
                return WeakCompatibility(pair=names, compatible=False, vacuous=False, witness=int(x), checked=len(pts))
        return WeakCompatibility(pair=names, compatible=True, vacuous=False, checked=len(pts))

    basis = _affine_coincidence_basis(A, B, tol)
    if basis is None:
        return WeakCompatibility(pair=names, compatible=True, vacuous=True, checked=0)
    x0, null = basis
    gap = float(np.linalg.norm(A(B(x0)) - B(A(x0))))
    if gap > tol:
        return WeakCompatibility(
            pair=names, compatible=False, vacuous=False, witness=tuple(float(v) for v in x0), checked=1
        )
    commutator = A.matrix @ B.matrix - B.matrix @ A.matrix
    if null.size and float(np.abs(commutator @ null).max()) > tol:
        bad = int(np.argmax(np.abs(commutator @ null).max(axis=0)))
        witness = x0 + null[:, bad]
        return WeakCompatibility(
            pair=names,
            compatible=False,
            vacuous=False,
            witness=tuple(float(v) for v in witness),
            checked=1 + null.shape[1],
        )
    return WeakCompatibility(pair=names, compatible=True, vacuous=False, checked=1 + null.shape[1])


def lift_to_common_fixed_point(
    space: MetricSpace,
    primary: Mapping,
    companion: Mapping,
    u: Point,
    *,
    tol: Optional[float] = None,
) -> Point:
    """Lift a coincidence point of (primary, companion) to their common value.

    With v = companion(u) the point of coincidence, weak compatibility
    transfers the agreement one level up: primary(v) must equal
    companion(v), and both must land back on v.  Returns v; raises
    LiftMismatch naming whichever of the two checks failed.
    """
    if tol is None:
        tol = space.default_tolerance
    space._check_point(u)
    v = companion(u)
    w = primary(v)
    if space.distance(w, companion(v)) > tol:
        raise LiftMismatch(
            f"mappings disagree at the lifted point (gap {float(space.distance(w, companion(v))):.6g}); "
            "weak compatibility did not transfer"
        )
    worst = max(float(space.distance(w, v)), float(space.distance(companion(v), v)))
    if worst > tol:
        raise LiftMismatch(f"lifted point moves by {worst:.6g} and is not a common fixed point")
    return v


def require_lift_agreement(space: MetricSpace, z1: Point, z2: Point, *, tol: Optional[float] = None) -> Point:
    """Guard that two independently lifted points are the same point."""
    if tol is None:
        tol = space.default_tolerance
    gap = float(space.distance(z1, z2))
    if gap > tol:
        raise LiftDisagreement(f"lifted points differ by {gap:.6g}")
    return z1


class PipelineStatus(Enum):
    COMMON_FIXED_POINT = "common_fixed_point"
    COINCIDENCE_ONLY = "coincidence_only"
    SOLVER_FAILED = "solver_failed"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PipelineOptions:
    """Knobs shared by the three- and four-mapping pipelines.

    ``verify_hypotheses`` controls whether the contractive condition is
    checked up front; switching it off trades the certificate for speed
    and leaves hypothesis failures to surface as solver statuses or lift
    errors.  ``pair_source`` feeds both the condition check and the range
    inclusion check; Euclidean spaces need a SampledPairs source.
    """

    tol: Optional[float] = None
    max_iters: int = 10000
    keep_trace: bool = False
    verify_hypotheses: bool = True
    pair_source: PairSource = EXHAUSTIVE


@dataclass(frozen=True)
class CoincidenceReport:
    """Outcome of a reduction pipeline.

    ``point_of_coincidence`` is the shared value w = S(u) = T(u) = f(u);
    ``coincidence_points`` holds the pulled-back points u (one for three
    mappings, one per side for four).  ``common_fixed_point`` is set only
    when the lift succeeded; a weak-compatibility failure downgrades the
    status to COINCIDENCE_ONLY instead of erroring, since the coincidence
    part of the result still stands.
    """

    status: PipelineStatus
    arity: Arity
    tolerance: float
    stages: tuple[str, ...]
    common_fixed_point: Optional[object] = None
    point_of_coincidence: Optional[object] = None
    coincidence_points: tuple = ()
    solve_report: Optional[SolveReport] = None
    condition_report: Optional[ViolationReport] = None
    inclusion_report: Optional[InclusionReport] = None
    weak_compatibility: tuple[WeakCompatibility, ...] = ()
    scan: Optional[CoincidenceSolutions] = None

    @property
    def succeeded(self) -> bool:
        return self.status == PipelineStatus.COMMON_FIXED_POINT

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "arity": int(self.arity),
            "tolerance": self.tolerance,
            "stages": list(self.stages),
            "common_fixed_point": self.common_fixed_point,
            "point_of_coincidence": self.point_of_coincidence,
            "coincidence_points": list(self.coincidence_points),
            "solve_report": self.solve_report.to_dict() if self.solve_report else None,
            "condition_report": self.condition_report.to_dict() if self.condition_report else None,
            "inclusion_report": self.inclusion_report.to_dict() if self.inclusion_report else None,
            "weak_compatibility": [w.to_dict() for w in self.weak_compatibility],
            "scan": self.scan.to_dict() if self.scan else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoincidenceReport":
        def pt(v):
            return tuple(v) if isinstance(v, list) else v

        return cls(
            status=PipelineStatus(d["status"]),
            arity=Arity(d["arity"]),
            tolerance=float(d["tolerance"]),
            stages=tuple(d["stages"]),
            common_fixed_point=pt(d.get("common_fixed_point")),
            point_of_coincidence=pt(d.get("point_of_coincidence")),
            coincidence_points=tuple(pt(p) for p in d.get("coincidence_points", [])),
            solve_report=SolveReport.from_dict(d["solve_report"]) if d.get("solve_report") else None,
            condition_report=ViolationReport.from_dict(d["condition_report"]) if d.get("condition_report") else None,
            inclusion_report=InclusionReport.from_dict(d["inclusion_report"]) if d.get("inclusion_report") else None,
            weak_compatibility=tuple(WeakCompatibility.from_dict(w) for w in d.get("weak_compatibility", [])),
            scan=CoincidenceSolutions.from_dict(d["scan"]) if d.get("scan") else None,
        )


def _default_start(space: MetricSpace):
    return 0 if space.is_finite else np.zeros(space.dimension)


def _run_pipeline(
    space: MetricSpace,
    maps: MappingSet,
    c: Coefficients,
    x0,
    options: PipelineOptions,
    *,
    stop_at_coincidence: bool,
) -> CoincidenceReport:
    stages: list[str] = []
    tol = options.tol if options.tol is not None else space.default_tolerance
    three = maps.arity == Arity.THREE
    g = maps.f if three else maps.g

    with _stage("validate", stages):
        maps.validate(space)
        if x0 is None:
            x0 = _default_start(space)
        space._check_point(x0)

    with _stage("inclusions", stages):
        source = options.pair_source if not space.is_finite else EXHAUSTIVE
        inclusion_report = check_range_inclusions(space, maps, pair_source=source if source != EXHAUSTIVE else None, tolerance=tol)
        if not inclusion_report.holds:
            bad = next(ch for ch in inclusion_report.checks if not ch.holds)
            raise RangeInclusionFailure(f"{bad.description} fails", witness=bad.witness)

    condition_report = None
    if options.verify_hypotheses:
        with _stage("condition", stages):
            if three:
                condition_report = check_condition_three(space, maps.S, maps.T, maps.f, c, options.pair_source, tol)
            else:
                condition_report = check_condition_four(
                    space, maps.S, maps.T, maps.f, maps.g, c, options.pair_source, tol
                )
            if not condition_report.satisfied:
                raise ConditionViolated(
                    f"contractive condition fails at pair {condition_report.worst_pair} "
                    f"by {condition_report.worst_margin:.6g}",
                    report=condition_report,
                )

    with _stage("induce", stages):
        induced = _induce(space, maps.S, maps.f, maps.T, g)

    with _stage("solve", stages):
        start = maps.f(x0)
        solve_report = picard_solve(
            space,
            induced.S,
            induced.T,
            c,
            start,
            tol=tol,
            max_iters=options.max_iters,
            keep_trace=options.keep_trace,
        )
    common = dict(
        arity=maps.arity,
        tolerance=tol,
        solve_report=solve_report,
        condition_report=condition_report,
        inclusion_report=inclusion_report,
    )
    if solve_report.status != SolveStatus.CONVERGED:
        return CoincidenceReport(status=PipelineStatus.SOLVER_FAILED, stages=tuple(stages), **common)

    with _stage("coincidence", stages):
        w = space.materialize(solve_report.point)
        u1 = induced.section_s.pull_back(w)
        u2 = induced.section_t.pull_back(w)
        for u, m in ((u1, maps.S), (u1, maps.f), (u2, maps.T), (u2, g)):
            moved = float(space.distance(m(u), w))
            if moved > tol:
                raise NonUniqueCoincidence(
                    f"pulled-back point is not a coincidence point: image moves by {moved:.6g}"
                )
        scan = None
        if space.is_finite:
            scan = coincidence_points(space, maps)
            values_off = [v for v in scan.values if float(space.distance(space.materialize(v), w)) > tol]
            if values_off:
                raise NonUniqueCoincidence(
                    f"coincidence values {sorted(set(values_off))} disagree with the solved value "
                    f"{space.canonicalize(w)}"
                )
        ulist = (u1,) if three else (u1, u2)
        common.update(
            point_of_coincidence=space.canonicalize(w),
            coincidence_points=tuple(space.canonicalize(u) for u in ulist),
            scan=scan,
        )

    if stop_at_coincidence:
        return CoincidenceReport(status=PipelineStatus.COINCIDENCE_ONLY, stages=tuple(stages), **common)

    with _stage("weak_compatibility", stages):
        pairs = (
            (maps.S, maps.f, ("S", "f"), u1),
            (maps.T, g, ("T", "f" if three else "g"), u2),
        )
        compat = tuple(is_weakly_compatible(space, a, b, names=nm, tol=tol) for a, b, nm, _ in pairs)
        common.update(weak_compatibility=compat)
        if not all(wc.compatible for wc in compat):
            return CoincidenceReport(status=PipelineStatus.COINCIDENCE_ONLY, stages=tuple(stages), **common)

    with _stage("lift", stages):
        z1 = lift_to_common_fixed_point(space, maps.S, maps.f, u1, tol=tol)
        z2 = lift_to_common_fixed_point(space, maps.T, g, u2, tol=tol)
        z = require_lift_agreement(space, z1, z2, tol=tol)
        common.update(common_fixed_point=space.canonicalize(z))

    return CoincidenceReport(status=PipelineStatus.COMMON_FIXED_POINT, stages=tuple(stages), **common)


def solve_three(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    f: Mapping,
    c: Coefficients,
    x0: Optional[Point] = None,
    options: PipelineOptions = PipelineOptions(),
) -> CoincidenceReport:
    """Common fixed point of S, T, f via reduction to the induced pair.

    Verifies range inclusions and (unless opted out) the three-mapping
    condition, solves the induced two-mapping problem from f(x0), pulls
    the solution back to a coincidence point, and lifts it through weak
    compatibility.  If f fails to commute with S or T at a coincidence
    point the report degrades to COINCIDENCE_ONLY rather than erroring.
    """
    maps = MappingSet(S=S, T=T, f=f, arity=Arity.THREE)
    return _run_pipeline(space, maps, c, x0, options, stop_at_coincidence=False)


def solve_three_coincidence(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    f: Mapping,
    c: Coefficients,
    x0: Optional[Point] = None,
    options: PipelineOptions = PipelineOptions(),
) -> CoincidenceReport:
    """Like solve_three but stops at the coincidence point, skipping the lift."""
    maps = MappingSet(S=S, T=T, f=f, arity=Arity.THREE)
    return _run_pipeline(space, maps, c, x0, options, stop_at_coincidence=True)


def solve_four(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    f: Mapping,
    g: Mapping,
    c: Coefficients,
    x0: Optional[Point] = None,
    options: PipelineOptions = PipelineOptions(),
) -> CoincidenceReport:
    """Common fixed point of S, T, f, g with f paired to S and g paired to T.

    Needs S(X) within f(X), T(X) within g(X), and matching images
    f(X) = g(X) so the induced pair acts on one shared space.  The two
    coincidence points are lifted independently and must agree; the guard
    raising LiftDisagreement is unreachable when the verified hypotheses
    actually hold, since both lifts name the unique common fixed point.
    """
    maps = MappingSet(S=S, T=T, f=f, g=g, arity=Arity.FOUR)
    return _run_pipeline(space, maps, c, x0, options, stop_at_coincidence=False)


def solve_four_coincidence(
    space: MetricSpace,
    S: Mapping,
    T: Mapping,
    f: Mapping,
    g: Mapping,
    c: Coefficients,
    x0: Optional[Point] = None,
    options: PipelineOptions = PipelineOptions(),
) -> CoincidenceReport:
    """Like solve_four but stops at the coincidence points, skipping the lifts."""
    maps = MappingSet(S=S, T=T, f=f, g=g, arity=Arity.FOUR)
    return _run_pipeline(space, maps, c, x0, options, stop_at_coincidence=True)
