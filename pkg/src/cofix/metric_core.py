"""Metric spaces, points, and metric-axiom verification.

Two flavors of space are supported:

* ``FINITE_EXPLICIT``: the universe is the index set ``0..n-1`` and the
  distance is read from a stored symmetric ``n x n`` table;
* ``EUCLIDEAN_AFFINE``: points are real ``m``-vectors and the distance is
  the Euclidean norm of the difference.

Completeness is carried as an assumption flag and is never computed.  A
finite space is always complete, so the flag is pinned to ``True`` there;
for Euclidean spaces the caller may declare a weaker setting explicitly.

All value objects here are immutable after construction: tables are stored
as read-only arrays and the dataclasses are frozen.  Every operation is a
pure function of its inputs, so concurrent use needs no locking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

import numpy as np

from .errors import DomainError

Point = Union[int, np.ndarray]


class Flavor(Enum):
    FINITE_EXPLICIT = "finite_explicit"
    EUCLIDEAN_AFFINE = "euclidean_affine"


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MetricSpace:
    """A metric space of one of the two supported flavors.

    Construct through :meth:`finite` or :meth:`euclidean`; the raw
    constructor performs only structural validation.  ``eq_tol`` is the
    tolerance used when comparing real-coordinate points for equality;
    finite points are compared by exact index.
    """

    flavor: Flavor
    table: Optional[np.ndarray] = None
    dimension: Optional[int] = None
    complete: bool = True
    eq_tol: float = 1e-9

    def __post_init__(self):
        if self.flavor is Flavor.FINITE_EXPLICIT:
            if self.table is None:
                raise DomainError("finite space needs a distance table")
            tab = self.table
            if tab.ndim != 2 or tab.shape[0] != tab.shape[1] or tab.shape[0] < 1:
                raise DomainError(f"distance table must be square and non-empty, got shape {tab.shape}")
            if not np.all(np.isfinite(tab)):
                raise DomainError("distance table contains non-finite entries")
            object.__setattr__(self, "dimension", None)
            object.__setattr__(self, "complete", True)
        elif self.flavor is Flavor.EUCLIDEAN_AFFINE:
            if self.dimension is None or self.dimension < 1:
                raise DomainError(f"Euclidean space needs a positive dimension, got {self.dimension}")
            object.__setattr__(self, "table", None)
        else:  # pragma: no cover - enum is closed
            raise DomainError(f"unknown flavor {self.flavor}")

    @classmethod
    def finite(cls, table, eq_tol: float = 1e-9) -> "MetricSpace":
        """Build a finite space from a square distance table (any array-like)."""
        return cls(flavor=Flavor.FINITE_EXPLICIT, table=_readonly(np.asarray(table, dtype=float)), eq_tol=eq_tol)

    @classmethod
    def euclidean(cls, dimension: int, complete: bool = True, eq_tol: float = 1e-9) -> "MetricSpace":
        return cls(flavor=Flavor.EUCLIDEAN_AFFINE, dimension=int(dimension), complete=complete, eq_tol=eq_tol)

    @property
    def is_finite(self) -> bool:
        return self.flavor is Flavor.FINITE_EXPLICIT

    @property
    def n(self) -> int:
        """Number of points of a finite universe."""
        if not self.is_finite:
            raise DomainError("only finite spaces have a point count")
        return self.table.shape[0]

    @property
    def default_tolerance(self) -> float:
        """Flavor default used by condition checks and the solver stop rule."""
        return 1e-12 if self.is_finite else 1e-9

    def points(self) -> Iterable[int]:
        """Iterate the finite universe (indices in ascending order)."""
        return range(self.n)

    def contains(self, p: Point) -> bool:
        if self.is_finite:
            return isinstance(p, (int, np.integer)) and 0 <= int(p) < self.n
        arr = np.asarray(p, dtype=float)
        return arr.shape == (self.dimension,) and bool(np.all(np.isfinite(arr)))

    def _check_point(self, p: Point) -> Point:
        if not self.contains(p):
            raise DomainError(f"point {p!r} is outside the universe of this {self.flavor.value} space")
        return int(p) if self.is_finite else np.asarray(p, dtype=float)

    def distance(self, a: Point, b: Point) -> float:
        a = self._check_point(a)
        b = self._check_point(b)
        if self.is_finite:
            return float(self.table[a, b])
        return float(np.linalg.norm(a - b))

    def points_equal(self, a: Point, b: Point) -> bool:
        """Exact index equality on finite spaces, ``eq_tol`` ball otherwise."""
        a = self._check_point(a)
        b = self._check_point(b)
        if self.is_finite:
            return a == b
        return float(np.linalg.norm(a - b)) <= self.eq_tol

    def canonicalize(self, p: Point):
        """Plain-Python form of a point (int, or tuple of floats) for reports."""
        p = self._check_point(p)
        if self.is_finite:
            return int(p)
        return tuple(float(v) for v in p)

    def materialize(self, p) -> Point:
        """Inverse of :meth:`canonicalize`: rebuild the computational form."""
        if self.is_finite:
            return self._check_point(int(p))
        return self._check_point(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    witness: Optional[tuple]
    magnitude: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "witness": list(self.witness) if self.witness is not None else None,
            "magnitude": self.magnitude,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AxiomCheck":
        wit = d["witness"]
        if wit is not None:
            wit = tuple(tuple(w) if isinstance(w, list) else w for w in wit)
        return cls(name=d["name"], passed=d["passed"], witness=wit, magnitude=d["magnitude"])


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the four metric-axiom checks.

    ``mode`` is ``"exhaustive"`` for finite spaces and ``"sampled"`` for
    Euclidean ones, where the check draws seeded triples from a box and is
    a self-test rather than a proof.
    """

    checks: tuple[AxiomCheck, ...]
    mode: str
    tolerance: float
    seed: Optional[int] = None
    box: Optional[tuple[float, float]] = None
    samples: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "mode": self.mode,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "box": list(self.box) if self.box is not None else None,
            "samples": self.samples,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AxiomReport":
        return cls(
            checks=tuple(AxiomCheck.from_dict(c) for c in d["checks"]),
            mode=d["mode"],
            tolerance=d["tolerance"],
            seed=d.get("seed"),
            box=tuple(d["box"]) if d.get("box") is not None else None,
            samples=d.get("samples"),
        )


def _verify_finite(space: MetricSpace, tolerance: float) -> AxiomReport:
    D = space.table
    n = space.n

    diag = np.abs(np.diag(D))
    i = int(np.argmax(diag))
    ok = bool(diag[i] <= tolerance)
    identity = AxiomCheck("identity", ok, None if ok else (i,), 0.0 if ok else float(diag[i]))

    asym = np.abs(D - D.T)
    i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
    symmetry = AxiomCheck("symmetry", bool(asym[i, j] <= tolerance), None if asym[i, j] <= tolerance else (int(i), int(j)), float(asym[i, j]) if asym[i, j] > tolerance else 0.0)

    # strict positivity off the diagonal, exact comparison by design
    if n > 1:
        off = D + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
        i, j = np.unravel_index(int(np.argmin(off)), off.shape)
        ok = bool(off[i, j] > 0.0)
        positivity = AxiomCheck("positivity", ok, None if ok else (int(i), int(j)), 0.0 if ok else float(-off[i, j]))
    else:
        positivity = AxiomCheck("positivity", True, None, 0.0)

    worst = -math.inf
    worst_ijk = (0, 0, 0)
    for i in range(n):
        row = D[i]
        # viol[j, k] = d(i, k) - d(i, j) - d(j, k)
        viol = row[None, :] - row[:, None] - D
        j, k = np.unravel_index(int(np.argmax(viol)), viol.shape)
        if viol[j, k] > worst:
            worst = float(viol[j, k])
            worst_ijk = (i, int(j), int(k))
    ok = worst <= tolerance
    triangle = AxiomCheck("triangle", bool(ok), None if ok else worst_ijk, 0.0 if ok else worst)

    return AxiomReport(checks=(identity, symmetry, positivity, triangle), mode="exhaustive", tolerance=tolerance)


def _verify_euclidean(space: MetricSpace, tolerance: float, samples: int, seed: int, box: tuple[float, float]) -> AxiomReport:
    lo, hi = float(box[0]), float(box[1])
    if not lo < hi:
        raise DomainError(f"sampling box must have lo < hi, got {box}")
    rng = np.random.default_rng(seed)
    m = space.dimension
    pts = rng.uniform(lo, hi, size=(samples, 3, m))
    a, b, c = pts[:, 0, :], pts[:, 1, :], pts[:, 2, :]

    def norms(u, v):
        return np.linalg.norm(u - v, axis=1)

    dab, dbc, dac = norms(a, b), norms(b, c), norms(a, c)
    dba = norms(b, a)

    identity = AxiomCheck("identity", True, None, 0.0)
    ident_viol = np.array([space.distance(a[i], a[i]) for i in range(min(samples, 8))])
    if ident_viol.max(initial=0.0) > tolerance:  # pragma: no cover - analytically zero
        identity = AxiomCheck("identity", False, (tuple(a[0]),), float(ident_viol.max()))

    sym_viol = np.abs(dab - dba)
    i = int(np.argmax(sym_viol))
    symmetry = AxiomCheck("symmetry", bool(sym_viol[i] <= tolerance), None if sym_viol[i] <= tolerance else (tuple(a[i]), tuple(b[i])), float(sym_viol[i]) if sym_viol[i] > tolerance else 0.0)

    distinct = dab > 0.0
    pos_ok = bool(np.all(distinct | (norms(a, b) == 0.0)))
    positivity = AxiomCheck("positivity", pos_ok, None, 0.0)
    if not pos_ok:  # pragma: no cover - measure-zero event
        i = int(np.argmin(dab))
        positivity = AxiomCheck("positivity", False, (tuple(a[i]), tuple(b[i])), 0.0)

    # three rotations of the triangle inequality cover all orderings
    viols = np.stack([dac - dab - dbc, dab - dac - dbc, dbc - dba - dac])
    r, i = np.unravel_index(int(np.argmax(viols)), viols.shape)
    worst = float(viols[r, i])
    ok = worst <= tolerance
    triangle = AxiomCheck("triangle", bool(ok), None if ok else (tuple(a[i]), tuple(b[i]), tuple(c[i])), 0.0 if ok else worst)

    return AxiomReport(
        checks=(identity, symmetry, positivity, triangle),
        mode="sampled",
        tolerance=tolerance,
        seed=seed,
        box=(lo, hi),
        samples=samples,
    )


def verify_metric_axioms(
    space: MetricSpace,
    tolerance: Optional[float] = None,
    *,
    samples: int = 243,
    seed: int = 0,
    box: tuple[float, float] = (-1.0, 1.0),
) -> AxiomReport:
    """Check identity, symmetry, strict positivity, and the triangle inequality.

    Finite spaces are checked exhaustively (positivity uses exact
    comparison; the other axioms allow ``tolerance`` slack, default 0).
    Euclidean spaces are spot-checked on ``samples`` seeded triples drawn
    uniformly from ``box``; this always passes analytically and serves as a
    numeric self-test.  The failure report names the violating pair or
    triple and the violation magnitude.
    """
    if tolerance is None:
        tolerance = 0.0 if space.is_finite else 1e-9
    if tolerance < 0:
        raise DomainError(f"tolerance must be non-negative, got {tolerance}")
    if space.is_finite:
        return _verify_finite(space, tolerance)
    if samples < 1:
        raise DomainError("need at least one sample triple")
    return _verify_euclidean(space, tolerance, samples, seed, box)
